"""Numba availability and the environment switch for the pure-numpy path.

Set ``PHOTONADD_DISABLE_NUMBA=1`` before importing :mod:`photonadd` to force
every kernel onto its numpy implementation.
"""

import os

ENV_FLAG = "PHOTONADD_DISABLE_NUMBA"

_disabled = os.environ.get(ENV_FLAG, "").strip().lower() in ("1", "true", "yes", "on")

try:
    import numba
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and not _disabled


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity decorator otherwise.

    Kernels are always compiled when numba exists so the benchmark can compare
    both paths in one process; ``USE_NUMBA`` only controls which one the
    public kernel names point at.
    """
    if HAS_NUMBA:
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
