"""Pick the compiled kernels or the pure-Python reference at import time.

Set ``BUFGOSSIP_PURE=1`` to force the pure-Python path everywhere.
"""

from __future__ import annotations

import os
from types import ModuleType

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

FORCE_PURE = os.environ.get("BUFGOSSIP_PURE", "") not in ("", "0")


def available() -> bool:
    return _compiled is not None


def name() -> str:
    return "compiled" if (_compiled is not None and not FORCE_PURE) else "python"


def select(backend: str = "auto") -> ModuleType | None:
    """Return the kernel module to use, or None for the reference path."""
    if backend == "python":
        return None
    if backend == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built; run `pip install -e .`")
        return _compiled
    if backend != "auto":
        raise ValueError(f"unknown backend {backend!r}")
    return None if FORCE_PURE else _compiled
