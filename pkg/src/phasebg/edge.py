"""Stage one: sparse jump detection by group-sparse deconvolution of the PA jump estimates.

Solves::

    min_u  1/2 ||M_x (w * u_x - g_x)||^2 + 1/2 ||M_y (w^T * u_y - g_y)||^2
           + lam * sum_ij sqrt(u_x^2 + u_y^2)

where ``g = jump_approx(phase)``, ``w`` is the matching waveform and ``M`` is a
0/1 mask on stencil rows. With ``boundary='periodic'`` the mask is all ones.
With ``boundary='open'`` the rows whose stencil wraps around the image border
are dropped, so a non-periodic background does not create a seam.

ADMM with two splits, ``v = W u`` (data) and ``z = u`` (sparsity). The u-step
is diagonal in the discrete Fourier basis; the v-step is a pointwise masked
average; the z-step is the group shrinkage.
"""

from __future__ import annotations

import math
import time
from typing import Tuple

import numpy as np

from . import _accel
from .core import (DimensionError, JumpField, NonFiniteError, PhaseBGError, ScalarField2D,
                   SolverConfig, SolverReport, as_field)
from .kernels import _as_kernel, waveform_psf
from .ops import jump_approx, valid_stencil_mask, wrap_values

BOUNDARIES = ("open", "periodic")


def group_shrink(vx, vy, tau: float):
    """Proximal map of ``tau * ||(vx, vy)||_2``: scale by ``max(0, 1 - tau / r)``.

    Works on scalars and arrays alike.

    >>> group_shrink(3.0, 4.0, 1.0)
    (2.4, 3.2)
    """
    if tau < 0:
        raise PhaseBGError("tau must be >= 0")
    scalar = np.ndim(vx) == 0 and np.ndim(vy) == 0
    vx = np.asarray(vx, dtype=np.float64)
    vy = np.asarray(vy, dtype=np.float64)
    r = np.hypot(vx, vy)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        scale = np.where(r > tau, 1.0 - tau / r, 0.0)
    ox, oy = vx * scale, vy * scale
    if scalar:
        return float(ox), float(oy)
    return ox, oy


class _AxisOperator:
    """Circular convolution with the waveform along one axis, applied via rFFT."""

    def __init__(self, kernel, n: int, axis: int):
        self.axis = axis
        self.n = n
        self.hat = np.fft.rfft(waveform_psf(kernel, n))
        self.norm = float(np.abs(self.hat).max())
        shape = [1, 1]
        shape[axis] = self.hat.size
        self.hat = self.hat.reshape(shape)
        self.den = np.abs(self.hat) ** 2 + 1.0

    def fwd(self, u):
        return np.fft.irfft(np.fft.rfft(u, axis=self.axis) * self.hat, n=self.n, axis=self.axis)

    def adj(self, u):
        return np.fft.irfft(np.fft.rfft(u, axis=self.axis) * np.conj(self.hat), n=self.n, axis=self.axis)

    def u_step(self, v_minus_a, z_minus_b):
        """Solve (W^T W + I) u = W^T (v - a) + (z - b); returns (u, W u)."""
        rhs = (np.conj(self.hat) * np.fft.rfft(v_minus_a, axis=self.axis)
               + np.fft.rfft(z_minus_b, axis=self.axis))
        uh = rhs / self.den
        u = np.fft.irfft(uh, n=self.n, axis=self.axis)
        wu = np.fft.irfft(uh * self.hat, n=self.n, axis=self.axis)
        return u, wu


def _masks(shape, kernel, boundary):
    R, C = shape
    if boundary == "periodic":
        return np.ones(shape), np.ones(shape)
    mx = np.broadcast_to(valid_stencil_mask(C, kernel)[None, :], shape).astype(np.float64)
    my = np.broadcast_to(valid_stencil_mask(R, kernel)[:, None], shape).astype(np.float64)
    return mx, my


def _check_boundary(boundary):
    if boundary not in BOUNDARIES:
        raise PhaseBGError(f"boundary must be one of {BOUNDARIES}, got {boundary!r}")


def edge_objective(jumps: JumpField, phase, kernel=3, lam: float = 1e-6, boundary: str = "open") -> float:
    """Value of the deconvolution objective at ``jumps``."""
    _check_boundary(boundary)
    f = as_field(phase)
    kern = _as_kernel(kernel)
    g = jump_approx(f, kern)
    R, C = f.shape
    opx, opy = _AxisOperator(kern, C, 1), _AxisOperator(kern, R, 0)
    mx, my = _masks(f.shape, kern, boundary)
    rx = mx * (opx.fwd(jumps.ux) - g.ux)
    ry = my * (opy.fwd(jumps.uy) - g.uy)
    return 0.5 * float(np.sum(rx * rx) + np.sum(ry * ry)) + lam * jumps.group_norm()


def detect_edges(phase, kernel=3, cfg: SolverConfig = None, boundary: str = "open",
                 warm_start: bool = False) -> Tuple[JumpField, SolverReport]:
    """Sparse jump field of ``phase`` and the solver report.

    ``warm_start`` initialises ``u`` with the raw jump estimates. The result
    is the shrinkage variable, so pixels off the support are exactly zero.
    Running out of iterations is reported through ``converged=False``, not
    raised.
    """
    _check_boundary(boundary)
    cfg = cfg or SolverConfig()
    f = as_field(phase)
    if not np.all(np.isfinite(f.data)):
        raise NonFiniteError("phase contains NaN or Inf")
    kern = _as_kernel(kernel)
    R, C = f.shape
    if min(R, C) < 2 * (kern.order + 1):
        raise DimensionError(f"field {f.shape} too small for order {kern.order}; "
                             f"need at least {2 * (kern.order + 1)} along each axis")
    t0 = time.perf_counter()
    g = jump_approx(f, kern)
    gx, gy = np.array(g.ux), np.array(g.uy)
    opx, opy = _AxisOperator(kern, C, 1), _AxisOperator(kern, R, 0)
    mx, my = _masks(f.shape, kern, boundary)
    lam = float(cfg.lam)
    rho = cfg.rho0()

    dual_scale = math.sqrt(float(np.sum(opx.adj(mx * gx) ** 2) + np.sum(opy.adj(my * gy) ** 2)))
    if dual_scale == 0.0:
        rep = SolverReport(0, 0.0, 0.0, True, ("zero_data",),
                           {"rho": rho, "objective": 0.0, "boundary": boundary,
                            "wall_time": time.perf_counter() - t0})
        return JumpField.zeros(f.shape, f.unit), rep

    if warm_start:
        ux, uy = gx.copy(), gy.copy()
    else:
        ux, uy = np.zeros_like(gx), np.zeros_like(gy)
    zx, zy = ux.copy(), uy.copy()
    vx, vy = opx.fwd(ux), opy.fwd(uy)
    ax, ay = np.zeros_like(gx), np.zeros_like(gy)
    bx, by = np.zeros_like(gx), np.zeros_like(gy)
    wnorm = max(opx.norm, opy.norm)

    r_rel = s_rel = math.inf
    converged = False
    it = 0
    for it in range(1, int(cfg.max_iter) + 1):
        ux, wux = opx.u_step(vx - ax, zx - bx)
        uy, wuy = opy.u_step(vy - ay, zy - by)
        p1, dv1, vn1 = _accel.admm_data_step(wux, ax, gx, mx, rho, vx)
        p2, dv2, vn2 = _accel.admm_data_step(wuy, ay, gy, my, rho, vy)
        p3, dz, zn = _accel.admm_sparse_step(ux, uy, bx, by, zx, zy, lam / rho)

        primal = math.sqrt(p1 + p2 + p3)
        pscale = max(math.sqrt(float(np.sum(wux * wux) + np.sum(wuy * wuy)
                                     + np.sum(ux * ux) + np.sum(uy * uy))),
                     math.sqrt(vn1 + vn2 + zn), 1e-300)
        # upper bound on rho * ||W^T dv + dz||
        dual = rho * (wnorm * math.sqrt(dv1 + dv2) + math.sqrt(dz))
        r_rel = primal / pscale
        s_rel = dual / dual_scale
        if r_rel <= cfg.tol and s_rel <= cfg.tol:
            converged = True
            break
        if cfg.adaptive_rho and it % 10 == 0:
            if r_rel > 10.0 * s_rel:
                rho *= 2.0
                for d in (ax, ay, bx, by):
                    d *= 0.5
            elif s_rel > 10.0 * r_rel:
                rho *= 0.5
                for d in (ax, ay, bx, by):
                    d *= 2.0

    jumps = JumpField(zx, zy, f.unit)
    obj = edge_objective(jumps, f, kern, lam, boundary)
    rep = SolverReport(
        iterations=it,
        primal_residual=r_rel,
        dual_residual=s_rel,
        converged=converged,
        extra={"rho": rho, "objective": obj, "boundary": boundary,
               "wall_time": time.perf_counter() - t0},
    )
    return jumps, rep


def wrap_jumps(jumps: JumpField, period: float = 2.0 * np.pi) -> JumpField:
    """Fold every jump into (-period/2, period/2], removing 2*pi phase-wrap jumps."""
    return JumpField(wrap_values(jumps.ux, period), wrap_values(jumps.uy, period), jumps.unit)


def edge_support(jumps: JumpField, rel_threshold: float = 1e-3) -> np.ndarray:
    """Pixels whose jump magnitude exceeds ``rel_threshold`` times the field maximum."""
    if not 0 <= rel_threshold < 1:
        raise PhaseBGError("rel_threshold must lie in [0, 1)")
    mag = jumps.magnitude()
    top = mag.max()
    if top == 0:
        return np.zeros(mag.shape, dtype=bool)
    return mag > rel_threshold * top
