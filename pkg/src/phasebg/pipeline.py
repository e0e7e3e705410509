"""End-to-end background suppression: complex image (or phase map) in, decomposition out."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import (ComplexImage2D, DimensionError, JumpField, ScalarField2D, SolverConfig,
                   SolverReport, Unit, as_field, magnitude_weights, phase_of)
from .edge import detect_edges, wrap_jumps
from .kernels import _as_kernel
from .recon import apply_reference, background, default_reference, reconstruct_phase


@dataclass(frozen=True)
class SuppressionResult:
    phase: ScalarField2D
    phase_h: ScalarField2D
    phase_b: ScalarField2D
    jumps_raw: JumpField
    jumps: JumpField
    weights: ScalarField2D
    ref: Tuple[int, int]
    edge_report: SolverReport
    recon_report: SolverReport

    @property
    def converged(self) -> bool:
        return self.edge_report.converged and self.recon_report.converged

    def report_dict(self) -> dict:
        return {
            "edge": self.edge_report.to_dict(),
            "recon": self.recon_report.to_dict(),
            "ref": list(self.ref),
            "converged": self.converged,
        }


def suppress_background_from_phase(phase, weights=None, order: int = 3,
                                   cfg: Optional[SolverConfig] = None,
                                   ref: Optional[Tuple[int, int]] = None,
                                   boundary: str = "open") -> SuppressionResult:
    """Run both stages on a real phase (or ppm) map.

    Jump wrapping is applied only to radian maps. ``weights`` default to
    uniform, and the reference pixel defaults to the largest weight.
    """
    cfg = cfg or SolverConfig()
    p = as_field(phase)
    kern = _as_kernel(order)
    need = 2 * (kern.order + 1)
    if p.rows < need or p.cols < need:
        raise DimensionError(f"phase map {p.shape} too small; need at least {need}x{need} for order {kern.order}")
    if weights is None:
        w = ScalarField2D(np.ones(p.shape), Unit.DIMENSIONLESS)
    else:
        w = as_field(weights, Unit.DIMENSIONLESS)
        if w.shape != p.shape:
            raise DimensionError(f"weights {w.shape} do not match phase {p.shape}")

    raw, edge_rep = detect_edges(p, kern, cfg, boundary=boundary)
    jumps = wrap_jumps(raw) if p.unit is Unit.RADIANS else raw
    x, recon_rep = reconstruct_phase(jumps, w, cfg)
    if ref is None:
        ref = default_reference(w.data, p.shape)
    ref = (int(ref[0]), int(ref[1]))
    phase_h = apply_reference(x, ref, p)
    phase_b = background(p, phase_h)
    return SuppressionResult(p, phase_h, phase_b, raw, jumps, w, ref, edge_rep, recon_rep)


def suppress_background(image: ComplexImage2D, order: int = 3, cfg: Optional[SolverConfig] = None,
                        ref: Optional[Tuple[int, int]] = None, weights: str = "magnitude",
                        boundary: str = "open") -> SuppressionResult:
    """Background suppression of a complex MR image.

    ``weights='magnitude'`` uses ``|f|^2`` scaled to [0, 1]; ``'uniform'`` uses ones.
    """
    if not isinstance(image, ComplexImage2D):
        image = ComplexImage2D(np.asarray(image))
    if weights == "magnitude":
        w = magnitude_weights(image)
    elif weights == "uniform":
        w = None
    else:
        raise ValueError(f"weights must be 'magnitude' or 'uniform', got {weights!r}")
    return suppress_background_from_phase(phase_of(image), w, order, cfg, ref, boundary)
