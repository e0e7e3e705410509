"""Time the numba kernels against their numpy twins, plus one full suppression run per backend.

Usage: python benchmarks/bench_kernels.py [--size 256] [--repeat 20]
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from phasebg import _kernels_numpy as npk
from phasebg import _kernels_numba as nbk


def _cases(n, rng):
    f = rng.normal(size=(n, n))
    o = np.empty((n, n))
    dr = np.zeros(4, np.int64)
    dc = np.arange(-1, 3, dtype=np.int64)
    w = np.array([0.5, -1.5, 1.5, -0.5])
    mx, my = rng.uniform(size=(2, n, n))
    six = [rng.normal(size=(n, n)) for _ in range(6)]
    return {
        "stencil_correlate": lambda k: k.stencil_correlate(f, dr, dc, w, o),
        "group_shrink": lambda k: k.group_shrink(six[0], six[1], 0.5, o, six[5]),
        "normal_matvec": lambda k: k.normal_matvec(f, mx, my, 1e-8, o),
        "admm_sparse_step": lambda k: k.admm_sparse_step(*six, 0.5),
        "admm_data_step": lambda k: k.admm_data_step(six[0], six[1], six[2], mx, 0.3, six[3]),
    }


_PIPELINE = (
    "import time\n"
    "from phasebg import PhantomSpec, disc, make_phantom, suppress_background\n"
    "from phasebg.phantom import poly_spanning\n"
    "n = {n}\n"
    "p = make_phantom(PhantomSpec(n, n, shapes=(disc(n*0.47, n*0.55, n*0.16, -0.8),),\n"
    "    background_poly=poly_spanning((0, .3, -.2, .9, .5, -.6), n, n, -1.5, 1.5)))\n"
    "suppress_background(p.image)\n"
    "t = time.perf_counter(); suppress_background(p.image); print(time.perf_counter() - t)\n"
)


def pipeline_time(n, disable):
    env = dict(os.environ, PHASEBG_DISABLE_NUMBA="1" if disable else "0")
    out = subprocess.run([sys.executable, "-c", _PIPELINE.format(n=n)], env=env,
                         capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=256)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    nbk.warmup()
    print(f"{'kernel':<20}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, call in _cases(args.size, rng).items():
        t_np = min(timeit.repeat(lambda: call(npk), number=1, repeat=args.repeat)) * 1e3
        t_nb = min(timeit.repeat(lambda: call(nbk), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<20}{t_np:>12.3f}{t_nb:>12.3f}{t_np / t_nb:>10.1f}")
    n = 128
    a, b = pipeline_time(n, True), pipeline_time(n, False)
    print(f"{'pipeline ' + str(n) + 'x' + str(n):<20}{a * 1e3:>12.1f}{b * 1e3:>12.1f}{a / b:>10.1f}")


if __name__ == "__main__":
    main()
