"""Curve-kernel selection.

Prefers the compiled extension; falls back to the pure-Python kernel when the
extension was not built or when MEDLEDGER_PURE_ECC=1 forces the fallback.
"""

import os

from . import _secp256k1_py

if os.environ.get("MEDLEDGER_PURE_ECC") == "1":
    kernel = _secp256k1_py
else:
    try:
        from . import _secp256k1 as kernel  # type: ignore[no-redef]
    except ImportError:
        kernel = _secp256k1_py


def active_backend() -> str:
    """Name of the curve kernel in use ("cython" or "pure-python")."""
    return kernel.BACKEND
