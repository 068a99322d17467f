"""Numba toggle.

Set ``FWKIT_DISABLE_NUMBA=1`` to force the pure numpy code paths. If numba is
not importable the numpy paths are used as well.
"""
import os

_flag = os.environ.get("FWKIT_DISABLE_NUMBA", "").strip().lower()
DISABLED = _flag not in ("", "0", "false", "no")

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

USE_NUMBA = (_numba is not None) and not DISABLED


def njit(*args, **kwargs):
    """``numba.njit`` with ``cache=True``; identity decorator when numba is unavailable."""
    kwargs.setdefault("cache", True)
    if _numba is None:
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn
    return _numba.njit(*args, **kwargs)
