"""Switch between the numba kernels and the pure-numpy path.

Set ``FINSLER_SANTALO_NUMBA=0`` to force the numpy implementation.  The flag is
read on every call so tests and benchmarks can flip it at runtime.
"""
import os

try:
    import numba  # noqa: F401
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

ENV_FLAG = "FINSLER_SANTALO_NUMBA"


def numba_enabled():
    if not HAVE_NUMBA:
        return False
    return os.environ.get(ENV_FLAG, "1").strip().lower() not in ("0", "false", "no", "off")
