import math

import numpy as np
import pytest

from phasebg import (ComplexImage2D, DimensionError, ScalarField2D, SolverConfig, Unit,
                     edge_support, jump_approx, suppress_background, suppress_background_from_phase)
from phasebg.ops import valid_stencil_mask

from conftest import N, WRAP_COL


def test_constant_phase():
    img = ComplexImage2D(np.full((24, 24), np.exp(0.7j)))
    res = suppress_background(img)
    assert np.abs(res.phase_h.data - 0.7).max() <= 1e-12
    assert np.abs(res.phase_b.data).max() <= 1e-12
    assert not edge_support(res.jumps).any()


def test_phantom_recovery(phantom, suppressed):
    err = suppressed.phase_h.data - phantom.truth_h.data
    err -= np.median(err)
    assert np.abs(err).max() <= 1e-2
    g = jump_approx(suppressed.phase_b, 3)
    v = valid_stencil_mask(N, 3)
    assert max(np.abs(g.ux[:, v]).max(), np.abs(g.uy[v, :]).max()) <= 1e-3
    eb = suppressed.phase_b.data - phantom.truth_b.data
    assert np.abs(eb - np.median(eb)).max() <= 1e-2


def test_result_bundle(suppressed):
    assert suppressed.weights.data[suppressed.ref] == suppressed.weights.data.max()
    assert suppressed.phase_h.data[suppressed.ref] == suppressed.phase.data[suppressed.ref]
    d = suppressed.report_dict()
    assert set(d) == {"edge", "recon", "ref", "converged"}
    assert suppressed.converged == (suppressed.edge_report.converged and suppressed.recon_report.converged)


def test_decomposition_identity(suppressed):
    total = suppressed.phase_h.data + suppressed.phase_b.data
    np.testing.assert_allclose(total, suppressed.phase.data, rtol=0, atol=1e-14)
    np.testing.assert_array_equal(suppressed.phase.data - suppressed.phase_h.data, suppressed.phase_b.data)


def test_wrap_line_leaves_no_ridge(wrapped_phantom):
    res = suppress_background_from_phase(wrapped_phantom.phase)
    h = res.phase_h.data
    assert np.abs(h[:, WRAP_COL] - h[:, WRAP_COL - 1]).max() <= 1e-3
    err = h - wrapped_phantom.truth_h.data
    assert np.abs(err - np.median(err)).max() <= 1e-2


def test_from_phase_matches_unit_magnitude_image(phantom):
    small = phantom.phase.data[:40, :40]
    a = suppress_background(ComplexImage2D.from_polar(np.ones_like(small), small), weights="uniform")
    b = suppress_background_from_phase(ScalarField2D(small))
    np.testing.assert_allclose(a.phase_h.data, b.phase_h.data, atol=1e-13)
    c = suppress_background(ComplexImage2D.from_polar(np.ones_like(small), small), ref=(0, 0))
    np.testing.assert_allclose(a.phase_h.data, c.phase_h.data, atol=1e-13)


def test_ppm_input_is_not_wrapped():
    f = np.zeros((24, 24))
    f[:, 12:] = 7.0  # a large ppm jump is real, not a wrap
    res = suppress_background_from_phase(ScalarField2D(f, Unit.PPM))
    assert np.abs(res.jumps.ux[:, 11] - 7.0).max() <= 1e-3
    rad = suppress_background_from_phase(ScalarField2D(f, Unit.RADIANS))
    assert np.abs(rad.jumps.ux[:, 11] - (7.0 - 2 * math.pi)).max() <= 1e-3
    assert res.phase_h.unit is Unit.PPM


@pytest.mark.parametrize("shape", [(1, 40), (40, 1), (7, 40)])
def test_small_input_rejected(shape):
    with pytest.raises(DimensionError):
        suppress_background_from_phase(np.zeros(shape))


def test_weight_mode_validation():
    with pytest.raises(ValueError):
        suppress_background(ComplexImage2D(np.ones((16, 16), complex)), weights="bogus")
    with pytest.raises(DimensionError):
        suppress_background_from_phase(np.zeros((16, 16)), np.ones((16, 15)))


def test_deterministic(phantom):
    img = ComplexImage2D(phantom.image.data[:48, :48])
    a = suppress_background(img)
    b = suppress_background(img)
    assert a.phase_h.data.tobytes() == b.phase_h.data.tobytes()
    assert a.jumps.ux.tobytes() == b.jumps.ux.tobytes()


def test_explicit_reference():
    f = np.zeros((20, 20))
    f[:, 10:] = 0.5
    res = suppress_background_from_phase(f, ref=(3, 15))
    assert res.ref == (3, 15)
    assert res.phase_h.data[3, 15] == 0.5
