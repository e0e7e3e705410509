"""Pure-numpy reference implementations of the hot loops.

Each function here has a numba twin in ``_kernels_numba`` with the same
signature and output-array contract. The numpy versions are the fallback when
numba is disabled or unavailable.
"""

import numpy as np


def stencil_correlate(field, offsets_r, offsets_c, weights, out):
    """out[i, j] = sum_k weights[k] * field[(i + dr_k) % R, (j + dc_k) % C]."""
    out[...] = 0.0
    for dr, dc, wk in zip(offsets_r, offsets_c, weights):
        out += wk * np.roll(field, (-int(dr), -int(dc)), axis=(0, 1))
    return out


def group_shrink(vx, vy, tau, outx, outy):
    r = np.hypot(vx, vy)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        scale = np.where(r > tau, 1.0 - tau / r, 0.0)
    np.multiply(vx, scale, out=outx)
    np.multiply(vy, scale, out=outy)
    return outx, outy


def forward_gradient(f, gx, gy):
    gx[:, :-1] = f[:, 1:] - f[:, :-1]
    gx[:, -1] = 0.0
    gy[:-1, :] = f[1:, :] - f[:-1, :]
    gy[-1, :] = 0.0
    return gx, gy


def divergence(px, py, out):
    # negative adjoint of forward_gradient; the last difference along each axis is ignored
    out[...] = 0.0
    out[:, :-1] += px[:, :-1]
    out[:, 1:] -= px[:, :-1]
    out[:-1, :] += py[:-1, :]
    out[1:, :] -= py[:-1, :]
    return out


def normal_matvec(f, mx, my, eps, out):
    """(D^T M D + eps I) f with Neumann forward differences D."""
    gx = np.zeros_like(f)
    gy = np.zeros_like(f)
    forward_gradient(f, gx, gy)
    gx *= mx
    gy *= my
    divergence(gx, gy, out)
    np.negative(out, out=out)
    out += eps * f
    return out


def admm_sparse_step(ux, uy, bx, by, zx, zy, tau):
    """Group-shrink step of the edge ADMM, updating z and the scaled dual b in place.

    Returns (||u - z||^2, ||z_new - z_old||^2, ||z||^2) accumulated over both components.
    """
    tx = ux + bx
    ty = uy + by
    zx_old = zx.copy()
    zy_old = zy.copy()
    group_shrink(tx, ty, tau, zx, zy)
    rx = ux - zx
    ry = uy - zy
    bx += rx
    by += ry
    primal = float(np.sum(rx * rx) + np.sum(ry * ry))
    dz = float(np.sum((zx - zx_old) ** 2) + np.sum((zy - zy_old) ** 2))
    znorm = float(np.sum(zx * zx) + np.sum(zy * zy))
    return primal, dz, znorm


def admm_data_step(wu, a, g, mask, rho, v):
    """Masked least-squares step v = (M g + rho (W u + a)) / (M + rho), dual a += W u - v.

    Returns (||W u - v||^2, ||v_new - v_old||^2, ||v||^2).
    """
    v_old = v.copy()
    np.divide(mask * g + rho * (wu + a), mask + rho, out=v)
    r = wu - v
    a += r
    return float(np.sum(r * r)), float(np.sum((v - v_old) ** 2)), float(np.sum(v * v))
