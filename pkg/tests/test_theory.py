import numpy as np
import pytest

from phasebg import PhaseBGError, build_W_matrix, convergence_study, matching_waveform, rip_check
from phasebg.theory import deconvolve_1d, heaviside_only, random_separated_support


@pytest.mark.parametrize("m, n", [(1, 8), (3, 16), (4, 20)])
def test_W_columns_are_shifted_waveforms(m, n):
    W = build_W_matrix(m, n)
    w = matching_waveform(m, n)
    for k in range(n):
        np.testing.assert_array_equal(W[:, k], np.roll(w, k - (n // 2 - 1)))


def test_W_m1_identity():
    np.testing.assert_array_equal(build_W_matrix(1, 12), np.eye(12))


def test_W_matches_convolution(rng):
    n = 32
    x = rng.normal(size=n)
    w = np.roll(matching_waveform(3, n), -(n // 2 - 1))
    direct = np.array([sum(w[(i - k) % n] * x[k] for k in range(n)) for i in range(n)])
    np.testing.assert_allclose(build_W_matrix(3, n) @ x, direct, atol=1e-12)
    fft = np.real(np.fft.ifft(np.fft.fft(w) * np.fft.fft(x)))
    np.testing.assert_allclose(build_W_matrix(3, n) @ x, fft, atol=1e-12)


def test_separated_supports(rng):
    for _ in range(200):
        n = int(rng.integers(10, 80))
        sep = int(rng.integers(1, 6))
        size = int(rng.integers(1, n // sep + 1))
        idx = random_separated_support(n, size, sep, rng)
        assert len(set(idx.tolist())) == size
        if size > 1:
            gaps = np.diff(np.concatenate([idx, [idx[0] + n]]))
            assert gaps.min() >= sep


@pytest.mark.parametrize("m", [1, 2, 3, 4])
@pytest.mark.parametrize("n", [32, 64])
def test_rip_zero_at_separation_m(m, n):
    for S in range(1, n // (2 * m) + 1):
        assert rip_check(m, n, S, m, trials=20, seed=S).delta_max <= 1e-10


def test_rip_single_column():
    for m in (1, 3, 5):
        r = rip_check(m, 48, 1, 1, trials=30)
        assert r.delta_max <= 1e-12


def test_rip_overlap_detected():
    r = rip_check(3, 64, 5, 1, trials=200, seed=1)
    # adjacent columns of the [-1/2, 1, -1/2] waveform overlap with correlation 2/3
    assert r.delta_max > 0.1
    assert r.delta_max == pytest.approx(np.max(r.per_trial[:, 0]))


def test_rip_coefficient_normalisation_differs():
    r = rip_check(3, 64, 5, 3, trials=10)
    assert r.column_norm_sq == pytest.approx(1.5)
    assert r.coeff_norm_sq == pytest.approx(5.0)
    assert r.delta_coeff_norm == pytest.approx(1 - 1.5 / 5.0)


def test_rip_seeded():
    a = rip_check(3, 64, 6, 2, trials=40, seed=9)
    b = rip_check(3, 64, 6, 2, trials=40, seed=9)
    np.testing.assert_array_equal(a.per_trial, b.per_trial)


def test_rip_infeasible():
    with pytest.raises(PhaseBGError):
        rip_check(3, 16, 6, 3)


def test_deconvolve_1d_exact_sparse():
    n = 64
    y = np.zeros(n)
    y[[10, 30, 50]] = [1.0, -0.5, 0.7]
    g = build_W_matrix(3, n) @ y
    z, it, ok = deconvolve_1d(g, 3, 1e-10)
    assert ok
    assert np.abs(z - y).max() <= 1e-8


def test_piecewise_constant_hits_floor():
    s = convergence_study(3, (64, 128, 256), func=heaviside_only)
    assert all(s.converged)
    assert max(s.errors) <= 1e-9


def test_convergence_study_trend():
    s = convergence_study(3, (64, 128, 256, 512))
    assert all(s.converged)
    e = s.errors
    assert all(b < a for a, b in zip(e, e[1:]))
    assert s.slope <= -2.0
    assert s.within_bound()
    assert s.c_lp == 5.5
    assert len(s.rows()) == 4


def test_sizes_must_increase():
    with pytest.raises(PhaseBGError):
        convergence_study(3, (128, 64))
