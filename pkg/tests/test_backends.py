import os
import subprocess
import sys

import numpy as np
import pytest

from phasebg import _kernels_numpy as npk

nbk = pytest.importorskip("phasebg._kernels_numba")

SHAPE = (11, 9)


def _pair(fn_name, *arrays_and_scalars, n_out=0):
    """Call both backends on copies of the inputs; return (numpy_result, numba_result, np_args, nb_args)."""
    a1 = [x.copy() if isinstance(x, np.ndarray) else x for x in arrays_and_scalars]
    a2 = [x.copy() if isinstance(x, np.ndarray) else x for x in arrays_and_scalars]
    r1 = getattr(npk, fn_name)(*a1)
    r2 = getattr(nbk, fn_name)(*a2)
    return r1, r2, a1, a2


def _assert_args_close(a1, a2):
    for x, y in zip(a1, a2):
        if isinstance(x, np.ndarray):
            np.testing.assert_allclose(x, y, rtol=1e-12, atol=1e-13)


def test_stencil_correlate(rng):
    f = rng.normal(size=SHAPE)
    dr = np.array([0, 0, 0, 0, -1, 2], np.int64)
    dc = np.array([-1, 0, 1, 2, 0, 0], np.int64)
    w = rng.normal(size=6)
    _, _, a1, a2 = _pair("stencil_correlate", f, dr, dc, w, np.empty(SHAPE))
    _assert_args_close(a1, a2)


def test_group_shrink(rng):
    vx, vy = rng.normal(size=SHAPE), rng.normal(size=SHAPE)
    vx[0, 0] = vy[0, 0] = 0.0
    _, _, a1, a2 = _pair("group_shrink", vx, vy, 0.7, np.empty(SHAPE), np.empty(SHAPE))
    _assert_args_close(a1, a2)


def test_gradient_divergence(rng):
    f = rng.normal(size=SHAPE)
    _, _, a1, a2 = _pair("forward_gradient", f, np.empty(SHAPE), np.empty(SHAPE))
    _assert_args_close(a1, a2)
    px, py = rng.normal(size=SHAPE), rng.normal(size=SHAPE)
    _, _, a1, a2 = _pair("divergence", px, py, np.empty(SHAPE))
    _assert_args_close(a1, a2)


def test_normal_matvec(rng):
    f = rng.normal(size=SHAPE)
    mx, my = rng.uniform(size=SHAPE), rng.uniform(size=SHAPE)
    _, _, a1, a2 = _pair("normal_matvec", f, mx, my, 1e-3, np.empty(SHAPE))
    _assert_args_close(a1, a2)


def test_admm_sparse_step(rng):
    args = [rng.normal(size=SHAPE) for _ in range(6)] + [0.5]
    r1, r2, a1, a2 = _pair("admm_sparse_step", *args)
    np.testing.assert_allclose(r1, r2, rtol=1e-12)
    _assert_args_close(a1, a2)


def test_admm_data_step(rng):
    wu, a, g, v = (rng.normal(size=SHAPE) for _ in range(4))
    mask = rng.uniform(size=SHAPE)
    r1, r2, a1, a2 = _pair("admm_data_step", wu, a, g, mask, 0.3, v)
    np.testing.assert_allclose(r1, r2, rtol=1e-12)
    _assert_args_close(a1, a2)


def _backend_in_subprocess(flag):
    env = dict(os.environ)
    env.pop("PHASEBG_DISABLE_NUMBA", None)
    if flag is not None:
        env["PHASEBG_DISABLE_NUMBA"] = flag
    out = subprocess.run([sys.executable, "-c", "import phasebg; print(phasebg.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    return out.stdout.strip()


def test_env_flag_selects_numpy():
    assert _backend_in_subprocess("1") == "numpy"
    assert _backend_in_subprocess(None) == "numba"


def test_pipeline_agrees_across_backends(tmp_path):
    # same small suppression run under both backends gives matching outputs
    code = (
        "import sys, numpy as np\n"
        "from phasebg import PhantomSpec, disc, make_phantom, suppress_background, SolverConfig\n"
        "p = make_phantom(PhantomSpec(32, 32, shapes=(disc(15, 16, 6, -0.8),), background_poly=(0, .4, .3, .2, .1, -.2)))\n"
        "r = suppress_background(p.image, cfg=SolverConfig(lam=1e-2, tol=1e-8, max_iter=3000))\n"
        "np.save(sys.argv[1], r.phase_h.data)\n"
    )
    outs = []
    for flag in ("0", "1"):
        path = tmp_path / f"h{flag}.npy"
        env = dict(os.environ, PHASEBG_DISABLE_NUMBA=flag)
        subprocess.run([sys.executable, "-c", code, str(path)], env=env, check=True)
        outs.append(np.load(path))
    np.testing.assert_allclose(outs[0], outs[1], atol=1e-9)
