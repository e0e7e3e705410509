from fractions import Fraction

import numpy as np
import pytest

from phasebg import (GridTooSmallError, OrderUnsupportedError, conv2_circular, heaviside_responses,
                     kernel2d, matching_waveform, pa_coefficients)
from phasebg.kernels import MAX_ORDER, waveform_psf


def _exact_pa(m):
    """Gauss-Jordan in exact rationals on the uncentred grid 0..m."""
    s = (m + 1) // 2 - 1
    rows = [[Fraction(k) ** d for k in range(m + 1)] + [Fraction(0)] for d in range(m)]
    rows.append([Fraction(int(k > s)) for k in range(m + 1)] + [Fraction(1)])
    n = m + 1
    for c in range(n):
        piv = next(r for r in range(c, n) if rows[r][c] != 0)
        rows[c], rows[piv] = rows[piv], rows[c]
        rows[c] = [v / rows[c][c] for v in rows[c]]
        for r in range(n):
            if r != c and rows[r][c] != 0:
                f = rows[r][c]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[c])]
    return np.array([float(r[-1]) for r in rows])


# frozen from the exact rational solve above
FROZEN = {
    1: [-1.0, 1.0],
    2: [-1.0, 2.0, -1.0],
    3: [0.5, -1.5, 1.5, -0.5],
}


@pytest.mark.parametrize("m", sorted(FROZEN))
def test_frozen_coefficients(m):
    np.testing.assert_allclose(pa_coefficients(m).coeffs, FROZEN[m], atol=1e-13)


@pytest.mark.parametrize("m", range(1, MAX_ORDER + 1))
def test_matches_exact_solve(m):
    np.testing.assert_allclose(pa_coefficients(m).coeffs, _exact_pa(m), rtol=1e-9, atol=1e-9)


@pytest.mark.parametrize("m", range(1, MAX_ORDER + 1))
def test_annihilation_and_unit_jump(m):
    k = pa_coefficients(m)
    x = np.arange(m + 1, dtype=float) + 3.7  # arbitrary origin
    rng = np.random.default_rng(m)
    for d in range(m):
        p = np.polyval(rng.normal(size=d + 1), x)
        tol = 1e-12 * np.linalg.norm(k.coeffs) * np.linalg.norm(p) * (10.0 ** max(0, m - 4))
        assert abs(k.coeffs @ p) <= max(tol, 1e-12 * np.linalg.norm(p))
    resp = heaviside_responses(k)
    assert abs(resp.max() - 1.0) <= 1e-10
    assert abs(resp[k.anchor] - 1.0) <= 1e-10


def test_degree_m_not_annihilated():
    # an (m+1)-tap stencil with a unit jump response cannot also kill degree m
    for m in (1, 2, 3, 4):
        c = pa_coefficients(m).coeffs
        assert abs(c @ np.arange(m + 1, dtype=float) ** m) > 1e-3


def test_m1_on_constant():
    assert pa_coefficients(1).coeffs @ np.full(2, 5.0) == 0.0


@pytest.mark.parametrize("m", [0, MAX_ORDER + 1, -2, 2.5, True])
def test_order_range(m):
    with pytest.raises(OrderUnsupportedError):
        pa_coefficients(m)


def _circular_oracle(m, n):
    k = pa_coefficients(m)
    h = (np.arange(n) >= n // 2).astype(float)
    return np.array([sum(c * h[(i + o) % n] for c, o in zip(k.coeffs, k.offsets)) for i in range(n)])


def test_waveform_m1_is_spike():
    for n in (4, 10, 64):
        w = matching_waveform(1, n)
        e = np.zeros(n)
        e[n // 2 - 1] = 1.0
        np.testing.assert_array_equal(w, e)


@pytest.mark.parametrize("m", range(1, MAX_ORDER + 1))
@pytest.mark.parametrize("n", [None, 64])
def test_waveform_matches_circular_oracle(m, n):
    n = n or 2 * (m + 1) + 2 * (m % 2)
    w = matching_waveform(m, n)
    o = _circular_oracle(m, n)
    # the sampled Heaviside is periodic, so it also steps down at the seam; compare
    # the lobe around the midpoint, then the negated lobe around the seam
    np.testing.assert_allclose(w - np.roll(w, n // 2), o, atol=1e-12)
    if n >= 4 * (m + 1):
        half = np.arange(n // 4, 3 * n // 4)
        np.testing.assert_allclose(w[half], o[half], atol=1e-12)
    assert np.abs(w).max() == pytest.approx(1.0, abs=1e-12)
    assert w[n // 2 - 1] == pytest.approx(1.0, abs=1e-12)


def test_waveform_m3_shape():
    w = matching_waveform(3, 64)
    nz = np.flatnonzero(np.abs(w) > 1e-14)
    np.testing.assert_array_equal(nz, [30, 31, 32])
    np.testing.assert_allclose(w[nz], [-0.5, 1.0, -0.5], atol=1e-13)
    o = _circular_oracle(3, 64)
    assert w.sum() == pytest.approx(o[16:48].sum(), abs=1e-12)


@pytest.mark.parametrize("n", [7, 6, 3])
def test_waveform_grid_too_small(n):
    with pytest.raises(GridTooSmallError):
        matching_waveform(3, n)


def test_psf_peak_at_zero():
    p = waveform_psf(3, 16)
    assert p[0] == pytest.approx(1.0)
    assert p[1] == pytest.approx(-0.5) and p[-1] == pytest.approx(-0.5)


def test_kernel2d_layout():
    k = kernel2d(1, "x", (4, 6))
    np.testing.assert_array_equal(k[0], [-1, 1, 0, 0, 0, 0])
    assert np.all(k[1:] == 0)
    for m in (1, 2, 3, 4):
        np.testing.assert_array_equal(kernel2d(m, "y", (9, 9)), kernel2d(m, "x", (9, 9)).T)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_kernel2d_annihilates_x_constant(m):
    rng = np.random.default_rng(m)
    f = np.repeat(rng.normal(size=(10, 1)), 12, axis=1)
    out = conv2_circular(f, kernel2d(m, "x", f.shape)).data
    assert np.abs(out).max() <= 1e-12
