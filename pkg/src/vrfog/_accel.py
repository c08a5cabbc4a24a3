"""Numba switch for the hot kernels.

Set ``VRFOG_DISABLE_NUMBA=1`` before import to run every kernel as plain
Python/numpy. Both paths execute the same source, so results are identical.
"""
import os

DISABLED = os.environ.get("VRFOG_DISABLE_NUMBA", "0").strip().lower() in ("1", "true", "yes")

try:
    if DISABLED:
        raise ImportError
    from numba import njit as _njit
    from numba.typed import List as TypedList

    NUMBA = True
except ImportError:  # pragma: no cover - exercised via the env flag
    _njit = None
    TypedList = list
    NUMBA = False


def njit(*args, **kwargs):
    """``numba.njit`` when available and enabled, identity decorator otherwise."""
    if NUMBA:
        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f
