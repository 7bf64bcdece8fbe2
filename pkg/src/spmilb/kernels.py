"""Backend selection for the density kernels.

The compiled extension is used when it was built; otherwise the NumPy
module with identical signatures is loaded. Set ``SPMILB_PURE_PYTHON=1``
to force the fallback.
"""

import os

if os.environ.get("SPMILB_PURE_PYTHON"):
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "python"

laguerre = _impl.laguerre
laguerre_array = _impl.laguerre_array
wishart_density = _impl.wishart_density

__all__ = ["BACKEND", "laguerre", "laguerre_array", "wishart_density"]
