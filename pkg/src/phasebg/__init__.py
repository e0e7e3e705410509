"""Background phase suppression for MR phase maps.

The measured phase is split into a piecewise-smooth phase of interest and a
smooth background. Stage one finds a sparse jump field by deconvolving
polynomial-annihilation jump estimates; stage two rebuilds the phase whose
gradients match those jumps.
"""

__version__ = "0.1.0"

from ._accel import BACKEND
from .core import (ComplexImage2D, DimensionError, EdgeKernel, GridTooSmallError, JumpField,
                   NonFiniteError, OrderUnsupportedError, PhaseBGError, ScalarField2D,
                   SolverConfig, SolverReport, Unit, magnitude_weights, phase_of)
from .edge import detect_edges, edge_objective, edge_support, group_shrink, wrap_jumps
from .kernels import heaviside_responses, kernel2d, matching_waveform, pa_coefficients
from .ops import (conv2_circular, divergence, forward_gradient, jump_approx, laplacian5,
                  wrap_to_interval, wrap_values)
from .phantom import Phantom, PhantomSpec, cnr, disc, make_phantom, rect
from .pipeline import SuppressionResult, suppress_background, suppress_background_from_phase
from .recon import apply_reference, background, reconstruct_phase
from .theory import build_W_matrix, convergence_study, rip_check

__all__ = [
    "BACKEND", "ComplexImage2D", "DimensionError", "EdgeKernel", "GridTooSmallError", "JumpField",
    "NonFiniteError", "OrderUnsupportedError", "PhaseBGError", "ScalarField2D", "SolverConfig",
    "SolverReport", "Unit", "magnitude_weights", "phase_of", "detect_edges", "edge_objective",
    "edge_support", "group_shrink", "wrap_jumps", "heaviside_responses", "kernel2d",
    "matching_waveform", "pa_coefficients", "conv2_circular", "divergence", "forward_gradient",
    "jump_approx", "laplacian5", "wrap_to_interval", "wrap_values", "Phantom", "PhantomSpec", "cnr",
    "disc", "make_phantom", "rect", "SuppressionResult", "suppress_background",
    "suppress_background_from_phase", "apply_reference", "background", "reconstruct_phase",
    "build_W_matrix", "convergence_study", "rip_check",
]
