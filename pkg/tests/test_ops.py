import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phasebg import (DimensionError, JumpField, ScalarField2D, conv2_circular, divergence,
                     forward_gradient, jump_approx, kernel2d, laplacian5, pa_coefficients,
                     wrap_to_interval, wrap_values)
from phasebg.ops import valid_stencil_mask


def _circulant_matrix(kernel, R, C):
    """Dense matrix of out[i,j] = sum k[a,b] f[(i+a)%R, (j+b)%C], one row per output pixel."""
    A = np.zeros((R * C, R * C))
    for i in range(R):
        for j in range(C):
            for a in range(kernel.shape[0]):
                for b in range(kernel.shape[1]):
                    A[i * C + j, ((i + a) % R) * C + (j + b) % C] += kernel[a, b]
    return A


def test_conv_matches_dense_circulant(rng):
    f = rng.normal(size=(8, 8))
    k = rng.normal(size=(2, 2))
    out = conv2_circular(f, k).data
    np.testing.assert_allclose(out.ravel(), _circulant_matrix(k, 8, 8) @ f.ravel(), atol=1e-12)


def test_conv_fft_path_matches_dense(rng):
    f = rng.normal(size=(12, 10))
    k = rng.normal(size=(9, 8))  # 72 taps: FFT branch
    out = conv2_circular(f, k).data
    np.testing.assert_allclose(out.ravel(), _circulant_matrix(k, 12, 10) @ f.ravel(), atol=1e-11)


def test_conv_delta_identity(rng):
    f = rng.normal(size=(5, 7))
    d = np.zeros((3, 3))
    d[0, 0] = 1.0
    np.testing.assert_array_equal(conv2_circular(f, d).data, f)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_conv_constant_annihilated(m):
    f = np.full((9, 11), 2.5)
    assert np.abs(conv2_circular(f, kernel2d(m, "x", f.shape)).data).max() <= 1e-12


def test_conv_linear(rng):
    f, g = rng.normal(size=(2, 10, 10))
    k = rng.normal(size=(3, 4))
    a, b = 1.7, -0.3
    lhs = conv2_circular(a * f + b * g, k).data
    rhs = a * conv2_circular(f, k).data + b * conv2_circular(g, k).data
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_conv_kernel_too_large():
    with pytest.raises(DimensionError):
        conv2_circular(np.zeros((4, 4)), np.zeros((5, 2)))


def test_jump_approx_single_step():
    h = 0.8
    f = np.zeros((6, 10))
    f[:, 4:] = h
    g = jump_approx(f, 1)
    expect = np.zeros((6, 10))
    expect[:, 3] = h
    expect[:, 9] = -h  # periodic seam steps back down
    np.testing.assert_allclose(g.ux, expect, atol=1e-15)
    assert np.all(g.uy == 0)


def test_jump_approx_constant():
    g = jump_approx(np.full((8, 8), 3.0), 3)
    assert np.abs(g.ux).max() <= 1e-14 and np.abs(g.uy).max() <= 1e-14


def test_jump_approx_quadratic_annihilated_in_interior():
    n = 256
    x = np.linspace(0, 1, n)
    f = np.broadcast_to(x**2, (8, n))
    v = valid_stencil_mask(n, 3)
    assert np.abs(jump_approx(f, 3).ux[:, v]).max() <= 1e-12


def test_jump_approx_cubic_decays_third_order():
    peaks = []
    for n in (128, 256):
        x = np.linspace(0, 1, n)
        f = np.broadcast_to(x**3, (8, n))
        v = valid_stencil_mask(n, 3)
        peaks.append(np.abs(jump_approx(f, 3).ux[:, v]).max())
    assert peaks[0] / peaks[1] == pytest.approx(8.0, rel=0.05)


def test_gradient_examples():
    f = np.tile(np.arange(5.0), (4, 1))
    g = forward_gradient(f)
    np.testing.assert_array_equal(g.ux[:, :-1], 1.0)
    np.testing.assert_array_equal(g.ux[:, -1], 0.0)
    np.testing.assert_array_equal(g.uy, 0.0)
    z = forward_gradient(np.full((3, 3), 7.0))
    assert np.all(z.ux == 0) and np.all(z.uy == 0)
    assert np.all(divergence(JumpField.zeros((4, 5))).data == 0)


def test_adjoint_identity(rng):
    for shape in [(6, 6), (5, 9), (1, 4)]:
        f = rng.normal(size=shape)
        u = JumpField(rng.normal(size=shape), rng.normal(size=shape))
        g = forward_gradient(f)
        lhs = np.sum(g.ux * u.ux) + np.sum(g.uy * u.uy)
        rhs = -np.sum(f * divergence(u).data)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_div_grad_is_laplacian_in_interior(rng):
    f = rng.normal(size=(8, 8))
    dg = divergence(forward_gradient(f)).data
    np.testing.assert_allclose(dg[1:-1, 1:-1], laplacian5(f)[1:-1, 1:-1], atol=1e-12)
    assert np.all(np.isnan(laplacian5(f)[0]))


def test_wrap_examples():
    w = wrap_values(np.array([2 * math.pi, -1.5 * math.pi, 0.3, math.pi, -math.pi, 2 * math.pi + 0.5]))
    np.testing.assert_allclose(w, [0.0, math.pi / 2, 0.3, math.pi, math.pi, 0.5], atol=1e-15)
    f = wrap_to_interval(ScalarField2D(np.array([[7.0]])))
    assert f.data[0, 0] == pytest.approx(7.0 - 2 * math.pi)


@settings(max_examples=200, deadline=None)
@given(st.floats(-1e3, 1e3), st.integers(-50, 50), st.sampled_from([2 * math.pi, 1.0, 3.5]))
def test_wrap_properties(x, k, period):
    w = float(wrap_values(x, period))
    assert -period / 2 < w <= period / 2
    assert float(wrap_values(w, period)) == w
    shifted = float(wrap_values(x + k * period, period))
    # compare on the circle: shifting may move a value at the +-half boundary
    d = (shifted - w) % period
    assert min(d, period - d) <= 1e-9 * max(1.0, abs(x) + abs(k) * period)


def test_wrap_rejects_bad_period():
    with pytest.raises(ValueError):
        wrap_values(1.0, 0.0)
