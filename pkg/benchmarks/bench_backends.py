"""Time the compiled kernels against the pure-Python engine.

    python benchmarks/bench_backends.py [--repeat 3]

Both backends are run on the same configurations; their traces are compared
for equality before any timing is reported.
"""

from __future__ import annotations

import argparse
import time

from bufgossip import _backend
from bufgossip.engine import Model, Protocol, RunConfig, run
from bufgossip.graph import GraphSpec, generate

CASES = [
    ("complete:n=512 push", GraphSpec.complete(512), Protocol.PUSH, Model.BUFFERED),
    ("random-regular:n=256:degree=8 pull", GraphSpec.random_regular(256, 8, seed=1),
     Protocol.PULL, Model.BUFFERED),
    ("star-chain:d=2:delta=16 pull", GraphSpec.star_chain(2, 16), Protocol.PULL,
     Model.BUFFERED),
    ("random-regular:n=256:degree=8 push-pull", GraphSpec.random_regular(256, 8, seed=1),
     Protocol.PUSH_PULL, Model.BUFFERED),
    ("star-chain:d=2:delta=16 pull classical", GraphSpec.star_chain(2, 16), Protocol.PULL,
     Model.CLASSICAL),
]


def _time(g, config, backend, repeat):
    best = float("inf")
    trace = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        trace = run(g, config, backend)
        best = min(best, time.perf_counter() - t0)
    return best, trace


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seeds", type=int, default=5, help="runs per case")
    args = ap.parse_args()
    if not _backend.available():
        raise SystemExit("compiled kernels not built; run `pip install -e .` first")

    print(f"{'case':42} {'python s':>10} {'compiled s':>11} {'speedup':>8}")
    for label, spec, protocol, model in CASES:
        g = generate(spec)
        g.csr, g.reverse_ports  # build the cached layouts outside the timed region
        py = cc = 0.0
        for seed in range(args.seeds):
            config = RunConfig(protocol, model=model, seed=seed)
            tp, trace_p = _time(g, config, "python", args.repeat)
            tc, trace_c = _time(g, config, "compiled", args.repeat)
            if trace_p != trace_c:
                raise SystemExit(f"backends disagree on {label} seed {seed}")
            py += tp
            cc += tc
        print(f"{label:42} {py:10.3f} {cc:11.4f} {py / cc:7.0f}x")


if __name__ == "__main__":
    main()
