"""Polynomial-annihilation edge stencils and the waveform they produce on a unit jump."""

from __future__ import annotations

import math

import numpy as np

from .core import EdgeKernel, GridTooSmallError, OrderUnsupportedError, PhaseBGError

MAX_ORDER = 8


def _anchor(m: int) -> int:
    # the jump between taps p-1 and p gets the unit response; the output is
    # written at tap p-1, the pixel left of (above) the discontinuity
    p = (m + 1) // 2
    return p - 1


def pa_coefficients(m: int) -> EdgeKernel:
    """Order-``m`` polynomial-annihilation stencil.

    Solves the (m+1)x(m+1) system: the stencil annihilates samples of every
    polynomial of degree <= m-1 on a unit grid, and a unit Heaviside jump
    centred in the stencil produces a response of exactly 1.

    >>> pa_coefficients(1).coeffs
    array([-1.,  1.])
    """
    if isinstance(m, bool) or int(m) != m or not 1 <= m <= MAX_ORDER:
        raise OrderUnsupportedError(f"order must be an integer in [1, {MAX_ORDER}], got {m!r}")
    m = int(m)
    s = _anchor(m)
    x = np.arange(m + 1, dtype=np.float64) - 0.5 * m  # centred for conditioning
    A = np.zeros((m + 1, m + 1))
    b = np.zeros(m + 1)
    for d in range(m):
        A[d] = x**d
    A[m, s + 1:] = 1.0
    b[m] = 1.0
    c = np.linalg.solve(A, b)
    # q relates c to the unscaled divided-difference weights m!/prod_{l != k}(k - l)
    raw = np.array([math.factorial(m) / math.prod(k - l for l in range(m + 1) if l != k)
                    for k in range(m + 1)])
    q = float(c[-1] / raw[-1])
    return EdgeKernel(order=m, coeffs=c, q=q, anchor=s)


def heaviside_responses(kernel: EdgeKernel) -> np.ndarray:
    """Responses of the stencil to a unit jump placed between taps t-1 and t, t = 1..m."""
    c = kernel.coeffs
    return np.array([c[t:].sum() for t in range(1, kernel.order + 1)])


def _as_kernel(kernel) -> EdgeKernel:
    if isinstance(kernel, EdgeKernel):
        return kernel
    return pa_coefficients(kernel)


def matching_waveform(m, n: int) -> np.ndarray:
    """Response of the order-``m`` stencil to a unit jump at the midpoint of an ``n`` grid.

    The jump sits between samples ``n//2 - 1`` and ``n//2``; the peak value 1
    is at index ``n//2 - 1``. Entries are the partial sums of the stencil
    over the taps that fall on the high side of the jump.
    """
    kernel = _as_kernel(m)
    order = kernel.order
    if int(n) != n or n % 2 or n < 2 * (order + 1):
        raise GridTooSmallError(f"waveform grid must be even and >= {2 * (order + 1)}, got {n}")
    n = int(n)
    c = kernel.coeffs
    mid = n // 2
    w = np.zeros(n)
    for i in range(n):
        first = mid - (i - kernel.anchor)  # first tap index on the high side
        if 1 <= first <= order:
            w[i] = c[first:].sum()
    return w


def waveform_psf(m, n: int) -> np.ndarray:
    """``matching_waveform`` rolled so its peak sits at index 0 (circular point-spread function)."""
    w = matching_waveform(m, n)
    return np.roll(w, -(n // 2 - 1))


def kernel2d(kernel, axis: str, shape) -> np.ndarray:
    """Zero-padded 2D stencil for :func:`phasebg.ops.conv2_circular`.

    For ``axis='x'`` the coefficients sit in the first row, ``coeffs[k]`` at
    column ``(k - anchor) mod cols``; ``axis='y'`` is the transposed layout in
    the first column.
    """
    kernel = _as_kernel(kernel)
    rows, cols = (int(v) for v in shape)
    if axis not in ("x", "y"):
        raise PhaseBGError(f"axis must be 'x' or 'y', got {axis!r}")
    length = cols if axis == "x" else rows
    if length < kernel.order + 1:
        raise GridTooSmallError(f"axis length {length} shorter than stencil of order {kernel.order}")
    out = np.zeros((rows, cols))
    idx = kernel.offsets % length
    if axis == "x":
        out[0, idx] = kernel.coeffs
    else:
        out[idx, 0] = kernel.coeffs
    return out
