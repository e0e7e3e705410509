"""Stage two: the field whose gradients match the detected jumps.

Minimises ``||D phi - u||_M^2 + eps ||phi||^2`` through its normal equations
``(D^T M D + eps I) phi = D^T M u`` with conjugate gradients. ``D`` is the
Neumann forward difference. ``M`` weights each difference by the mean of the
two pixel weights it connects. Away from the support of ``u`` the minimiser
satisfies the discrete Laplace equation up to the ``eps`` term.
"""

from __future__ import annotations

import math
import time
from typing import Optional, Tuple

import numpy as np

from . import _accel
from .core import (DimensionError, JumpField, PhaseBGError, ScalarField2D, SolverConfig,
                   SolverReport, Unit, as_field)


def difference_weights(weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Per-difference weights: mean of the two adjacent pixel weights (0 on the last index)."""
    w = np.asarray(weights, dtype=np.float64)
    mx = np.zeros_like(w)
    my = np.zeros_like(w)
    mx[:, :-1] = 0.5 * (w[:, :-1] + w[:, 1:])
    my[:-1, :] = 0.5 * (w[:-1, :] + w[1:, :])
    return mx, my


def normal_rhs(jumps: JumpField, mx: np.ndarray, my: np.ndarray) -> np.ndarray:
    out = np.empty(jumps.shape)
    _accel.divergence(mx * jumps.ux, my * jumps.uy, out)
    return -out


def _project(v):
    return v - v.mean()


def _cg(apply, b, tol, max_iter, precond=None):
    x = np.zeros_like(b)
    bnorm = math.sqrt(float(np.vdot(b, b)))
    if bnorm == 0.0:
        return x, 0, 0.0, True
    r = b.copy()
    z = _project(r * precond) if precond is not None else r
    p = z.copy()
    rz = float(np.vdot(r, z))
    Ap = np.empty_like(b)
    rel = 1.0
    for k in range(1, max_iter + 1):
        apply(p, Ap)
        alpha = rz / float(np.vdot(p, Ap))
        x += alpha * p
        r -= alpha * Ap
        rel = math.sqrt(float(np.vdot(r, r))) / bnorm
        if rel <= tol:
            return x, k, rel, True
        z = _project(r * precond) if precond is not None else r
        rz_new = float(np.vdot(r, z))
        p *= rz_new / rz
        p += z
        rz = rz_new
    return x, max_iter, rel, False


def reconstruct_phase(jumps: JumpField, weights=None,
                      cfg: SolverConfig = None) -> Tuple[ScalarField2D, SolverReport]:
    """Weighted gradient-matching reconstruction of the phase of interest.

    ``weights`` default to uniform ones and must lie in [0, 1]. All-zero
    weights return the zero field with the ``degenerate_weights`` flag.
    """
    cfg = cfg or SolverConfig()
    shape = jumps.shape
    if weights is None:
        w = np.ones(shape)
    else:
        w = np.asarray(as_field(weights, Unit.DIMENSIONLESS).data)
        if w.shape != shape:
            raise DimensionError(f"weights {w.shape} do not match jumps {shape}")
        if w.min() < 0 or w.max() > 1:
            raise PhaseBGError("weights must lie in [0, 1]")
    t0 = time.perf_counter()
    if not np.any(w > 0):
        rep = SolverReport(0, 0.0, 0.0, True, ("degenerate_weights",),
                           {"wall_time": time.perf_counter() - t0})
        return ScalarField2D(np.zeros(shape), jumps.unit), rep

    mx, my = difference_weights(w)
    eps = float(cfg.epsilon)
    b = normal_rhs(jumps, mx, my)
    max_iter = cfg.cg_max_iter or int(math.ceil(100 * math.sqrt(shape[0] * shape[1])))

    def apply(v, out):
        _accel.normal_matvec(v, mx, my, eps, out)

    # constants are an eigenvector of the operator (eigenvalue eps): solve that
    # mode exactly and keep CG on mean-zero vectors, where a preconditioner
    # cannot leak error into a mode the residual barely sees
    b_mean = float(b.mean())
    precond = None
    if cfg.jacobi:
        diag = eps + mx + my
        diag[:, 1:] += mx[:, :-1]
        diag[1:, :] += my[:-1, :]
        precond = 1.0 / diag
    x, iters, rel, ok = _cg(apply, b - b_mean, cfg.cg_tol, max_iter, precond)
    x += b_mean / eps

    # report the true residual, not the recursively updated one
    Ax = np.empty_like(x)
    apply(x, Ax)
    bnorm = math.sqrt(float(np.vdot(b, b)))
    true_rel = math.sqrt(float(np.vdot(b - Ax, b - Ax))) / bnorm if bnorm > 0 else 0.0
    rep = SolverReport(iters, true_rel, 0.0, ok and true_rel <= cfg.cg_tol,
                       extra={"wall_time": time.perf_counter() - t0, "epsilon": eps})
    return ScalarField2D(x, jumps.unit), rep


def apply_reference(field, ref: Tuple[int, int], phase) -> ScalarField2D:
    """Shift ``field`` by the constant that makes it equal ``phase`` at pixel ``ref``."""
    f = as_field(field)
    p = as_field(phase)
    if f.shape != p.shape:
        raise DimensionError(f"field {f.shape} and phase {p.shape} differ in shape")
    i, j = (int(v) for v in ref)
    if not (0 <= i < f.rows and 0 <= j < f.cols):
        raise PhaseBGError(f"reference pixel {ref} outside {f.shape}")
    a = p.data[i, j] - f.data[i, j]
    out = f.data + a
    out[i, j] = p.data[i, j]  # pin exactly; field + (phase - field) can be off by one ulp
    return f.with_data(out)


def background(phase, phase_h) -> ScalarField2D:
    """Background phase ``phase - phase_h``."""
    p = as_field(phase)
    h = as_field(phase_h)
    if p.shape != h.shape:
        raise DimensionError(f"phase {p.shape} and phase_h {h.shape} differ in shape")
    return p.with_data(p.data - h.data)


def default_reference(weights: Optional[np.ndarray], shape) -> Tuple[int, int]:
    """Pixel with the largest weight (first in row-major order on ties)."""
    if weights is None:
        return (0, 0)
    w = np.asarray(weights)
    i, j = np.unravel_index(int(np.argmax(w)), w.shape)
    return int(i), int(j)
