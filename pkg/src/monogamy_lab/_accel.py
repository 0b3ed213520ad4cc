"""Numba switch for the hot kernels.

Set ``MONOGAMY_LAB_NUMBA=0`` to force the pure-numpy path. The flag is read
once at import time; ``MONOGAMY_LAB_THREADS`` caps worker parallelism
(0 or unset means automatic).
"""
import os
from warnings import warn

_flag = os.environ.get("MONOGAMY_LAB_NUMBA", "1").strip().lower()
_requested = _flag not in ("0", "false", "no", "off")

try:
    import numba as nb
except ImportError:  # pragma: no cover - numba is a hard dep in CI
    nb = None
    if _requested:
        warn("numba not found; falling back to the numpy kernels")

USE_NUMBA = _requested and nb is not None


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity otherwise."""
    if nb is not None:
        return nb.njit(*args, **kwargs)

    def identity(fn):
        return fn

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return identity


def thread_count():
    """Worker count from ``MONOGAMY_LAB_THREADS`` (0/unset -> cpu count)."""
    raw = os.environ.get("MONOGAMY_LAB_THREADS", "0").strip()
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"MONOGAMY_LAB_THREADS must be an integer, got {raw!r}")
    if n < 0:
        raise ValueError("MONOGAMY_LAB_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)
