"""Numba switch.

Set ``HHL_NOPOST_DISABLE_NUMBA=1`` before import to force the pure-numpy
kernels. Numba missing from the environment has the same effect.
"""

import os

DISABLED = os.environ.get("HHL_NOPOST_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    from numba import njit as _njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and not DISABLED


def njit(fn):
    """Compile ``fn`` with numba when available, else return it unchanged."""
    if not HAS_NUMBA:
        return fn
    return _njit(cache=True, nogil=True)(fn)
