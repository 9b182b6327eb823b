"""Kernel backend selection.

The compiled extension (rtcur._backend._core) is preferred when it built;
the numpy implementations in py_kernels are always available.  Set the
RTCUR_BACKEND environment variable to "compiled" or "python" to force a
choice before import; forcing "compiled" when the extension is missing
raises ImportError instead of silently falling back.
"""

import os

from . import py_kernels

_choice = os.environ.get("RTCUR_BACKEND", "").strip().lower()
if _choice not in ("", "compiled", "python"):
    raise ImportError(
        f"RTCUR_BACKEND must be 'compiled' or 'python', got {_choice!r}"
    )

if _choice == "python":
    _impl = py_kernels
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        if _choice == "compiled":
            raise
        _impl = py_kernels

dense_svd = _impl.dense_svd
hard_threshold = _impl.hard_threshold
gather_columns = _impl.gather_columns
backend_name: str = _impl.BACKEND_NAME

__all__ = ["dense_svd", "hard_threshold", "gather_columns", "backend_name", "py_kernels"]
