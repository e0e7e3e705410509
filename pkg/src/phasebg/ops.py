"""Discrete operators on 2D grids.

Edge detection works with periodic (wrap-around) indexing; reconstruction uses
forward differences with a replicate (Neumann) boundary, so the difference at
the last index along an axis is always 0.
"""

from __future__ import annotations

import numpy as np

from . import _accel
from .core import (DimensionError, EdgeKernel, JumpField, PhaseBGError, ScalarField2D,
                   Unit, as_field)
from .kernels import _as_kernel, kernel2d

_DIRECT_MAX_TAPS = 64


def conv2_circular(field, kernel) -> ScalarField2D:
    """Periodic 2D stencil convolution.

    ``out[i, j] = sum_{a, b} kernel[a, b] * field[(i + a) % R, (j + b) % C]``,
    i.e. the kernel entry at ``(a, b)`` weights the sample ``a`` rows below
    and ``b`` columns right of the output pixel. This is the indexing of
    finite-difference sums; the operator is a doubly-circulant matrix.
    A kernel smaller than the field is treated as zero-padded.
    """
    f = as_field(field)
    k = np.asarray(kernel, dtype=np.float64)
    if k.ndim != 2:
        raise DimensionError(f"kernel must be 2D, got shape {k.shape}")
    if k.shape[0] > f.rows or k.shape[1] > f.cols:
        raise DimensionError(f"kernel {k.shape} larger than field {f.shape}")
    rr, cc = np.nonzero(k)
    if rr.size <= _DIRECT_MAX_TAPS:
        out = np.empty(f.shape)
        _accel.stencil_correlate(f.data, rr.astype(np.int64), cc.astype(np.int64),
                                 np.ascontiguousarray(k[rr, cc]), out)
    else:
        kp = np.zeros(f.shape)
        kp[:k.shape[0], :k.shape[1]] = k
        out = np.real(np.fft.ifft2(np.fft.fft2(f.data) * np.conj(np.fft.fft2(kp))))
    return f.with_data(out)


def _stencil_along(data: np.ndarray, kernel: EdgeKernel, axis: int) -> np.ndarray:
    offs = kernel.offsets.astype(np.int64)
    zeros = np.zeros_like(offs)
    out = np.empty(data.shape)
    if axis == 1:
        _accel.stencil_correlate(data, zeros, offs, np.ascontiguousarray(kernel.coeffs), out)
    else:
        _accel.stencil_correlate(data, offs, zeros, np.ascontiguousarray(kernel.coeffs), out)
    return out


def jump_approx(phase, kernel) -> JumpField:
    """Raw polynomial-annihilation jump estimates ``g_x = c * phase``, ``g_y = c^T * phase`` (periodic)."""
    f = as_field(phase)
    kern = _as_kernel(kernel)
    if min(f.shape) < kern.order + 1:
        raise DimensionError(f"field {f.shape} too small for order {kern.order}")
    gx = _stencil_along(f.data, kern, axis=1)
    gy = _stencil_along(f.data, kern, axis=0)
    return JumpField(gx, gy, f.unit)


def valid_stencil_mask(n: int, kernel) -> np.ndarray:
    """Positions along an axis of length ``n`` whose stencil does not wrap around."""
    kern = _as_kernel(kernel)
    i = np.arange(n)
    lo = i + kern.offsets[0]
    hi = i + kern.offsets[-1]
    return (lo >= 0) & (hi <= n - 1)


def forward_gradient(field) -> JumpField:
    """Forward differences along x and y; the last difference along each axis is 0."""
    f = as_field(field)
    gx = np.empty(f.shape)
    gy = np.empty(f.shape)
    _accel.forward_gradient(f.data, gx, gy)
    return JumpField(gx, gy, f.unit)


def divergence(jumps: JumpField) -> ScalarField2D:
    """Negative adjoint of :func:`forward_gradient`."""
    out = np.empty(jumps.shape)
    _accel.divergence(jumps.ux, jumps.uy, out)
    return ScalarField2D(out, jumps.unit)


def laplacian5(field) -> np.ndarray:
    """5-point Laplacian; boundary pixels are set to NaN."""
    f = np.asarray(field, dtype=np.float64)
    out = np.full(f.shape, np.nan)
    out[1:-1, 1:-1] = (f[2:, 1:-1] + f[:-2, 1:-1] + f[1:-1, 2:] + f[1:-1, :-2]
                       - 4.0 * f[1:-1, 1:-1])
    return out


def wrap_values(x, period: float = 2.0 * np.pi) -> np.ndarray:
    """Map values into (-period/2, period/2] by integer multiples of ``period``."""
    if not period > 0:
        raise PhaseBGError("period must be > 0")
    x = np.asarray(x, dtype=np.float64)
    half = 0.5 * period
    out = x - period * np.ceil((x - half) / period)
    # rounding can land exactly on -half; move it to +half
    out = np.where(out <= -half, out + period, out)
    out = np.where(out > half, out - period, out)
    return out


def wrap_to_interval(field, period: float = 2.0 * np.pi) -> ScalarField2D:
    f = as_field(field)
    return f.with_data(wrap_values(f.data, period))


__all__ = [
    "conv2_circular", "jump_approx", "forward_gradient", "divergence", "laplacian5",
    "wrap_values", "wrap_to_interval", "valid_stencil_mask", "kernel2d", "Unit",
]
