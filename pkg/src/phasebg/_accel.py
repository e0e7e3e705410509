"""Backend selection for the hot loops.

Set ``PHASEBG_DISABLE_NUMBA=1`` before import to force the pure-numpy path.
"""

import os

from . import _kernels_numpy

_disabled = os.environ.get("PHASEBG_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

if _disabled:
    kernels = _kernels_numpy
    BACKEND = "numpy"
else:
    try:
        from . import _kernels_numba as kernels
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba missing
        kernels = _kernels_numpy
        BACKEND = "numpy"

stencil_correlate = kernels.stencil_correlate
group_shrink = kernels.group_shrink
forward_gradient = kernels.forward_gradient
divergence = kernels.divergence
normal_matvec = kernels.normal_matvec
admm_sparse_step = kernels.admm_sparse_step
admm_data_step = kernels.admm_data_step
