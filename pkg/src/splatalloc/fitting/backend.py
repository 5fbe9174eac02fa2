"""Raster kernel backend selection.

The compiled extension is an optimization only; the numpy module implements
identical semantics.  Set SPLATALLOC_PURE_PYTHON=1 to skip the extension,
for debugging or benchmarking the fallback.
"""

from __future__ import annotations

import os

if os.environ.get("SPLATALLOC_PURE_PYTHON"):
    from . import _kernels_np as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_np as _impl

        BACKEND = "python"

render_kernel = _impl.render
gradient_kernel = _impl.gradient_stats
