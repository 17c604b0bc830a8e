"""Counter-based randomness.

Every draw is a pure function of ``(seed, node, round, purpose, k)``; nothing
is consumed, so the buffered and classical simulators can read the same
positions and iteration order never changes a result.  The compiled kernels
reimplement :func:`draw` bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15

# draw purposes
CONTACT = 1  # phase-A neighbour choice, shared by both models
DIRECT = 2  # which arrival is read directly on an empty buffer
SHUFFLE = 3  # tie-break permutation of phase-B arrivals
LATE_DIRECT = 4  # which late answer is read directly
LATE_SHUFFLE = 5  # tie-break permutation of late arrivals
LATE_PUSH = 6  # Push&Pull push issued during the read phase
SEED_DERIVE = 7
SOURCE_SAMPLE = 8


def mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _absorb(h: int, x: int) -> int:
    return mix64(((h ^ (x & MASK64)) + GAMMA) & MASK64)


def draw(seed: int, node: int, rnd: int, purpose: int, k: int = 0) -> int:
    """Return the 64-bit word stored at one tape position."""
    h = _absorb(seed & MASK64, purpose)
    h = _absorb(h, node)
    h = _absorb(h, rnd)
    return _absorb(h, k)


def choice(seed: int, node: int, rnd: int, purpose: int, m: int, k: int = 0) -> int:
    """Uniform index in ``range(m)`` (modulo reduction; bias below m / 2**64)."""
    return draw(seed, node, rnd, purpose, k) % m


def derive_seed(base_seed: int, *parts: int) -> int:
    """Mix a base seed with any number of integer coordinates into a new seed."""
    h = _absorb(base_seed & MASK64, SEED_DERIVE)
    for p in parts:
        h = _absorb(h, p)
    return h


@dataclass(frozen=True)
class ChoiceTape:
    """A seeded, read-only random tape indexed by (node, round, purpose)."""

    seed: int

    def draw(self, node: int, rnd: int, purpose: int, k: int = 0) -> int:
        return draw(self.seed, node, rnd, purpose, k)

    def choice(self, node: int, rnd: int, purpose: int, m: int, k: int = 0) -> int:
        return draw(self.seed, node, rnd, purpose, k) % m
