"""Backend switch for the compiled kernels.

Set ``LDPC_BOUNDS_NO_JIT=1`` to force the pure-numpy kernels. Numba is used
otherwise, when it can be imported. Both backends produce the same numbers up
to floating point reassociation.
"""
import os

_DISABLED = os.environ.get("LDPC_BOUNDS_NO_JIT", "").strip().lower() not in ("", "0", "false", "no")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and not _DISABLED


def njit(func):
    """``numba.njit(cache=True)`` when numba is available, identity otherwise."""
    if numba is None:
        return func
    return numba.njit(cache=True)(func)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
