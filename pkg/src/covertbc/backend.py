"""Kernel backend selection.

The compiled extension is preferred when it imports; otherwise the numpy
fallback is used. ``COVERTBC_BACKEND=python`` forces the fallback (useful for
benchmarking and debugging), ``COVERTBC_BACKEND=compiled`` makes a missing
extension a hard error.
"""
import os

from . import _kernels_py

_requested = os.environ.get("COVERTBC_BACKEND", "auto").lower()

if _requested == "python":
    kernels = _kernels_py
elif _requested in ("auto", "compiled"):
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        if _requested == "compiled":
            raise
        kernels = _kernels_py
else:
    raise ValueError(f"COVERTBC_BACKEND must be auto|python|compiled, got {_requested!r}")

BACKEND = kernels.BACKEND
