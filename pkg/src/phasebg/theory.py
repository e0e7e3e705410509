"""Executable checks of the deconvolution theory in one dimension.

``build_W_matrix`` realises circular convolution with the matching waveform.
``rip_check`` measures how far normalised column subsets of ``W`` are from
orthonormal. ``convergence_study`` tracks how the error of the sparse 1D
deconvolution falls as the grid is refined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .core import PhaseBGError
from .kernels import _as_kernel, waveform_psf

# reference constant of the recovery bound when delta_S = 0; reported, not derived
C_LP = 5.5


def build_W_matrix(m, n: int) -> np.ndarray:
    """Dense ``n x n`` circulant matrix with ``W @ x`` the circular convolution of ``x`` with the waveform.

    Column ``k`` is the waveform with its peak moved to row ``k``.
    """
    psf = waveform_psf(m, n)
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return psf[idx]


def random_separated_support(n: int, size: int, sep: int, rng: np.random.Generator) -> np.ndarray:
    """Uniformly random ``size`` indices on a circle of ``n`` with circular gaps ``>= sep``."""
    slack = n - size * sep
    if slack < 0:
        raise PhaseBGError(f"{size} indices with separation {sep} do not fit on {n} points")
    # split the slack over the gaps (stars and bars), then rotate
    bars = np.sort(rng.choice(slack + size - 1, size - 1, replace=False)) if size > 1 else np.array([], int)
    cuts = np.concatenate([[-1], bars, [slack + size - 1]])
    extra = np.diff(cuts) - 1
    gaps = sep + extra
    pos = np.concatenate([[0], np.cumsum(gaps[:-1])])
    return np.sort((pos + rng.integers(n)) % n)


@dataclass
class RipResult:
    delta_max: float
    delta_frobenius: float
    delta_coeff_norm: float
    column_norm_sq: float
    coeff_norm_sq: float
    trials: int
    per_trial: np.ndarray = field(repr=False)


def rip_check(m, n: int, sparsity: int, min_separation: int, trials: int = 100,
              seed: int = 0) -> RipResult:
    """Largest deviation of ``W_t^T W_t / ||w||^2`` from the identity over random supports ``t``.

    ``delta_max`` uses the spectral norm, ``delta_frobenius`` the Frobenius
    norm. ``delta_coeff_norm`` is the spectral deviation when normalising by
    the squared stencil norm ``||c||^2`` instead of the column norm; the two
    coincide only for ``m = 1``. Separations are circular. A separation
    smaller than ``m`` is allowed, so overlapping columns can be measured.
    Each trial draws from its own child of ``SeedSequence(seed)``.
    """
    kern = _as_kernel(m)
    if sparsity < 1 or min_separation < 1 or trials < 1:
        raise PhaseBGError("sparsity, min_separation and trials must be >= 1")
    if sparsity * min_separation > n:
        raise PhaseBGError(f"infeasible: sparsity*min_separation = {sparsity * min_separation} > n = {n}")
    W = build_W_matrix(kern, n)
    col2 = float(W[:, 0] @ W[:, 0])
    c2 = float(kern.coeffs @ kern.coeffs)
    eye = np.eye(sparsity)
    per = np.empty((trials, 3))
    children = np.random.SeedSequence(seed).spawn(trials)
    for t, ss in enumerate(children):
        rng = np.random.default_rng(ss)
        idx = random_separated_support(n, sparsity, min_separation, rng)
        G = W[:, idx].T @ W[:, idx]
        per[t, 0] = np.linalg.norm(G / col2 - eye, 2)
        per[t, 1] = np.linalg.norm(G / col2 - eye, "fro")
        per[t, 2] = np.linalg.norm(G / c2 - eye, 2)
    mx = per.max(axis=0)
    return RipResult(float(mx[0]), float(mx[1]), float(mx[2]), col2, c2, trials, per)


def deconvolve_1d(g: np.ndarray, m, lam: float, rho: Optional[float] = None, tol: float = 1e-13,
                  max_iter: int = 20000, adaptive: bool = True):
    """Periodic 1D analogue of the edge solve: ``min 1/2 ||w * y - g||^2 + lam ||y||_1``.

    ADMM on ``z = y`` with an FFT-diagonal ``y`` step. ``rho`` defaults to
    ``0.01 * max |w_hat|^2`` and, with ``adaptive``, is rebalanced every 20
    iterations when the primal and dual residuals differ by more than 10x.
    Returns ``(y, iterations, converged)`` where ``y`` is the shrinkage variable.
    """
    g = np.asarray(g, dtype=np.float64)
    n = g.size
    hat = np.fft.rfft(waveform_psf(m, n))
    h2 = np.abs(hat) ** 2
    if rho is None:
        rho = 0.01 * float(h2.max())
    wtg = np.fft.rfft(g) * np.conj(hat)
    z = np.zeros(n)
    b = np.zeros(n)
    scale = max(float(np.linalg.norm(np.fft.irfft(wtg, n=n))), 1e-300)
    for it in range(1, max_iter + 1):
        y = np.fft.irfft((wtg + rho * np.fft.rfft(z - b)) / (h2 + rho), n=n)
        v = y + b
        z_new = np.sign(v) * np.maximum(np.abs(v) - lam / rho, 0.0)
        b = v - z_new
        r = float(np.linalg.norm(y - z_new)) / max(float(np.linalg.norm(z_new)), 1.0)
        s = rho * float(np.linalg.norm(z_new - z)) / scale
        z = z_new
        if r <= tol and s <= tol:
            return z, it, True
        if adaptive and it % 20 == 0:
            if r > 10.0 * s:
                rho *= 2.0
                b *= 0.5
            elif s > 10.0 * r:
                rho *= 0.5
                b *= 2.0
    return z, max_iter, False


def heaviside_sine(x: np.ndarray) -> np.ndarray:
    """Unit jump at ``x = 0`` plus ``sin(4x)``; smooth across the periodic seam at +-pi."""
    return (x >= 0).astype(np.float64) + np.sin(4.0 * x)


def heaviside_only(x: np.ndarray) -> np.ndarray:
    return (x >= 0).astype(np.float64)


def jump_truth(n: int, m) -> np.ndarray:
    """Jump function of a unit step at ``x = 0`` on the periodic grid ``x_i = -pi + 2 pi i / n``.

    +1 at the sample left of 0 and -1 at the last sample (the step down at the seam).
    """
    y = np.zeros(n)
    y[n // 2 - 1] = 1.0
    y[n - 1] = -1.0
    return y


@dataclass
class ConvergenceStudy:
    sizes: List[int]
    errors: List[float]
    lambdas: List[float]
    iterations: List[int]
    converged: List[bool]
    slope: float
    k_m: int
    bound_constant: float
    c_lp: float = C_LP

    def rows(self):
        return list(zip(self.sizes, self.errors, self.lambdas, self.iterations, self.converged))

    def bound(self, n: int) -> float:
        return self.bound_constant * math.sqrt(n) * float(n) ** (-self.k_m)

    def within_bound(self, slack: float = 1e-12) -> bool:
        return all(e <= self.bound(n) * (1 + slack) for n, e in zip(self.sizes, self.errors))


def convergence_study(m=3, sizes: Sequence[int] = (64, 128, 256, 512),
                      func: Callable[[np.ndarray], np.ndarray] = heaviside_sine,
                      k_smooth: Optional[int] = None, lam_floor: float = 1e-10,
                      tol: float = 1e-13, max_iter: int = 20000) -> ConvergenceStudy:
    """l2 error of the 1D sparse deconvolution against the analytic jump function.

    For each ``n`` the test function is sampled on ``x_i = -pi + 2 pi i / n``,
    the order-``m`` jump estimate ``g`` is formed, and the deconvolution is
    solved with ``lam = max(2 ||W^T (g - W y_true)||_inf, lam_floor)``: twice
    the largest correlation of the smooth residual with the columns. ``func`` must have its jumps only at ``x = 0``
    (upward, unit height) and at the seam. The fitted log-log slope uses
    least squares; the bound constant is fitted at the smallest ``n``.
    """
    kern = _as_kernel(m)
    sizes = [int(n) for n in sizes]
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise PhaseBGError("sizes must be strictly increasing")
    k_m = kern.order if k_smooth is None else min(kern.order, int(k_smooth))
    errs, lams, its, conv = [], [], [], []
    for n in sizes:
        x = -np.pi + 2.0 * np.pi * np.arange(n) / n
        f = func(x)
        g = np.zeros(n)
        for c, o in zip(kern.coeffs, kern.offsets):
            g += c * np.roll(f, -int(o))
        truth = jump_truth(n, kern)
        W = build_W_matrix(kern, n)
        resid = g - W @ truth
        lam = max(2.0 * float(np.abs(W.T @ resid).max()), lam_floor)
        y, it, ok = deconvolve_1d(g, kern, lam, tol=tol, max_iter=max_iter)
        errs.append(float(np.linalg.norm(y - truth)))
        lams.append(lam)
        its.append(it)
        conv.append(ok)
    logn = np.log(np.asarray(sizes, dtype=np.float64))
    loge = np.log(np.maximum(np.asarray(errs), 1e-300))
    slope = float(np.polyfit(logn, loge, 1)[0]) if len(sizes) > 1 else float("nan")
    n0 = sizes[0]
    c_fit = errs[0] / (math.sqrt(n0) * float(n0) ** (-k_m))
    return ConvergenceStudy(sizes, errs, lams, its, conv, slope, k_m, c_fit)
