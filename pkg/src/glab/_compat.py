"""Numba/numpy backend selection.

Hot kernels are compiled with numba unless the environment variable
``GLAB_NUMBA`` is set to ``0``/``false``/``off`` (or numba is not importable),
in which case the pure-numpy fallbacks in ``_kernels`` are used instead.
"""

from __future__ import annotations

import os


def _flag_enabled() -> bool:
    flag = os.environ.get("GLAB_NUMBA", "1").strip().lower()
    return flag not in {"0", "false", "off", "no"}


try:  # pragma: no cover - exercised through both backends in the benchmark
    if _flag_enabled():
        from numba import njit as _njit

        NUMBA_ENABLED = True
    else:
        _njit = None
        NUMBA_ENABLED = False
except ImportError:  # pragma: no cover
    _njit = None
    NUMBA_ENABLED = False


def maybe_njit(*args, **kwargs):
    """``numba.njit`` when the numba backend is active, identity otherwise."""
    if not NUMBA_ENABLED:
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn
    if args and callable(args[0]):
        return _njit(cache=True)(args[0])
    kwargs.setdefault("cache", True)
    return _njit(*args, **kwargs)
