"""JIT selection.

Hot loops are written once in a numba-compatible subset and compiled with
``numba.njit`` when numba is importable. Setting ``GBLSTSVM_DISABLE_NUMBA=1``
forces the pure-numpy fallbacks, which is what the kernel benchmark and the
fallback-parity tests compare against.
"""

from __future__ import annotations

import os

_DISABLE_FLAG = "GBLSTSVM_DISABLE_NUMBA"


def _numba_requested() -> bool:
    return os.environ.get(_DISABLE_FLAG, "").strip().lower() in ("", "0", "false", "no")


try:
    import numba as _numba
except ImportError:  # pragma: no cover - exercised only without numba installed
    _numba = None

HAVE_NUMBA = _numba is not None
USE_NUMBA = HAVE_NUMBA and _numba_requested()


def njit(func):
    """Compile ``func`` with numba if available; otherwise return it unchanged.

    Compilation happens even when ``USE_NUMBA`` is false so that benchmarks can
    still reach the compiled variant explicitly.
    """
    if not HAVE_NUMBA:
        return func
    return _numba.njit(cache=True, nogil=True)(func)


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
