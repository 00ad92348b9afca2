"""Backend selection for the hot kernels.

The compiled extension ``fedosov._kernels`` is used when it imports cleanly;
otherwise the pure-Python twin ``fedosov._kernels_py`` is used.  Setting the
environment variable ``FEDOSOV_PURE_PYTHON=1`` forces the fallback.
"""
from __future__ import annotations

import os

if os.environ.get("FEDOSOV_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

BACKEND = _impl.BACKEND
GaussianRational = _impl.GaussianRational
convolve = _impl.convolve
accumulate_scaled = _impl.accumulate_scaled
contraction_terms = _impl.contraction_terms
accumulate = _impl.accumulate
moyal_blocks = _impl.moyal_blocks

__all__ = [
    "BACKEND",
    "GaussianRational",
    "convolve",
    "accumulate_scaled",
    "contraction_terms",
    "accumulate",
    "moyal_blocks",
]
