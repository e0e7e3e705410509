"""Command-line interface.

Exit codes: 0 success, 2 invalid input or arguments, 3 a solver stopped
before reaching its tolerance (outputs are still written).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .core import ComplexImage2D, PhaseBGError, ScalarField2D, SolverConfig, Unit, phase_of
from .edge import detect_edges
from .io import (atomic_write_text, export_histogram, export_pgm, load_any, write_field,
                 write_histogram, write_table)
from .phantom import PhantomSpec, cnr, disc, make_phantom, rect
from .pipeline import suppress_background, suppress_background_from_phase
from .theory import convergence_study, rip_check

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NOT_CONVERGED = 3


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _ArgError(f"{self.prog}: error: {message}")


def _floats(n: Optional[int] = None):
    def parse(text: str):
        try:
            vals = [float(v) for v in text.split(",") if v.strip() != ""]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
        if n is not None and len(vals) != n:
            raise argparse.ArgumentTypeError(f"expected {n} values, got {len(vals)}")
        return vals
    return parse


def _ints(n: Optional[int] = None):
    def parse(text: str):
        vals = _floats(n)(text)
        if any(v != int(v) for v in vals):
            raise argparse.ArgumentTypeError(f"expected integers, got {text!r}")
        return [int(v) for v in vals]
    return parse


def _config(args) -> SolverConfig:
    kw = {}
    for name, key in (("lam", "lam"), ("epsilon", "epsilon"), ("tol", "tol"), ("max_iter", "max_iter"),
                      ("rho", "penalty_rho"), ("cg_tol", "cg_tol")):
        v = getattr(args, name, None)
        if v is not None:
            kw[key] = v
    if getattr(args, "adaptive_rho", False):
        kw["adaptive_rho"] = True
    return SolverConfig(**kw)


def _echo(args, argv, cfg: Optional[SolverConfig] = None) -> dict:
    params = {k: v for k, v in vars(args).items() if k != "func"}
    out = {"argv": list(argv), "params": params}
    if cfg is not None:
        out["config"] = dataclasses.asdict(cfg)
    return out


def _write_report(path, payload: dict) -> None:
    if path:
        atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (tuple, np.ndarray)):
        return list(o)
    return str(o)


def _phase_input(path):
    f = load_any(path)
    if isinstance(f, ComplexImage2D):
        return f, phase_of(f)
    return None, f


def cmd_phantom(args, argv) -> int:
    shapes = []
    for d in args.disc or []:
        cx, cy, r, h = d
        shapes.append(disc(cy, cx, r, h))
    for q in args.rect or []:
        i, j, h, w, v = q
        shapes.append(rect(int(i), int(j), int(h), int(w), v))
    spec = PhantomSpec(rows=args.rows, cols=args.cols, shapes=tuple(shapes),
                       background_poly=tuple(args.background_poly or ()),
                       wrap_cols=tuple(args.wrap_col or ()), wrap_rows=tuple(args.wrap_row or ()),
                       noise_sigma=args.noise_sigma, seed=args.seed, unit=Unit.coerce(args.unit))
    ph = make_phantom(spec)
    write_field(args.out, ph.image)
    if args.truth_out:
        d = Path(args.truth_out)
        write_field(d / "truth_h.phm", ph.truth_h)
        write_field(d / "truth_b.phm", ph.truth_b)
        write_field(d / "phase.phm", ph.phase)
    return EXIT_OK


def cmd_edges(args, argv) -> int:
    _, phase = _phase_input(args.input)
    cfg = _config(args)
    jumps, rep = detect_edges(phase, args.order, cfg, boundary=args.boundary)
    write_field(args.out_ux, ScalarField2D(jumps.ux, phase.unit))
    write_field(args.out_uy, ScalarField2D(jumps.uy, phase.unit))
    d = rep.to_dict()
    d.update({"residuals": {"primal": rep.primal_residual, "dual": rep.dual_residual},
              "echo": _echo(args, argv, cfg)})
    _write_report(args.report, d)
    return EXIT_OK if rep.converged else EXIT_NOT_CONVERGED


def cmd_suppress(args, argv) -> int:
    image, phase = _phase_input(args.input)
    cfg = _config(args)
    ref = tuple(args.ref) if args.ref else None
    t0 = time.perf_counter()
    if image is not None:
        res = suppress_background(image, args.order, cfg, ref, args.weights or "magnitude",
                                  boundary=args.boundary)
    else:
        if args.weights == "magnitude":
            raise PhaseBGError("magnitude weights need a complex input image")
        res = suppress_background_from_phase(phase, None, args.order, cfg, ref, boundary=args.boundary)
    wall = time.perf_counter() - t0
    write_field(args.out_h, res.phase_h)
    write_field(args.out_b, res.phase_b)
    d = res.report_dict()
    d.update({
        "iterations": {"edge": res.edge_report.iterations, "recon": res.recon_report.iterations},
        "residuals": {"edge_primal": res.edge_report.primal_residual,
                      "edge_dual": res.edge_report.dual_residual,
                      "recon": res.recon_report.primal_residual},
        "wall_time": wall,
        "echo": _echo(args, argv, cfg),
    })
    _write_report(args.report, d)
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def cmd_cnr(args, argv) -> int:
    _, phase = _phase_input(args.input)
    data = phase.data
    if args.linear_scale:
        data = args.linear_scale[0] * data + args.linear_scale[1]
    print(repr(cnr(data, args.roi1, args.roi2, spread=args.spread)))
    return EXIT_OK


def cmd_histogram(args, argv) -> int:
    _, phase = _phase_input(args.input)
    rng = tuple(args.range) if args.range else None
    ls = tuple(args.linear_scale) if args.linear_scale else None
    hist = export_histogram(phase.data, args.bins, rng, linear_scale=ls)
    write_histogram(args.out, hist)
    return EXIT_OK


def cmd_pgm(args, argv) -> int:
    _, phase = _phase_input(args.input)
    ls = tuple(args.linear_scale) if args.linear_scale else None
    export_pgm(args.out, phase.data, bits=args.bits, linear_scale=ls)
    return EXIT_OK


def cmd_ripcheck(args, argv) -> int:
    r = rip_check(args.order, args.size, args.sparsity, args.min_sep, args.trials, args.seed)
    rows = [(t, float(p[0]), float(p[1]), float(p[2])) for t, p in enumerate(r.per_trial)]
    write_table(args.out, ["trial", "delta_spectral", "delta_frobenius", "delta_coeff_norm"], rows)
    print(f"delta_max {r.delta_max!r}")
    print(f"delta_frobenius {r.delta_frobenius!r}")
    return EXIT_OK


def cmd_convergence(args, argv) -> int:
    s = convergence_study(args.order, args.sizes)
    write_table(args.out, ["n", "l2_error", "lambda", "iterations", "converged"],
                [(n, e, lam, it, bool(ok)) for n, e, lam, it, ok in s.rows()])
    print(f"slope {s.slope!r}")
    print(f"bound_constant {s.bound_constant!r}")
    return EXIT_OK if all(s.converged) else EXIT_NOT_CONVERGED


def _solver_args(p, edge=True, recon=False):
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--rho", type=float, default=None, help="ADMM penalty (default 10*lambda)")
    p.add_argument("--adaptive-rho", action="store_true")
    p.add_argument("--boundary", choices=("open", "periodic"), default="open")
    if recon:
        p.add_argument("--epsilon", type=float, default=None)
        p.add_argument("--cg-tol", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="phasebg", description="Background phase suppression for MR phase maps.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("phantom", help="synthetic complex image with known decomposition")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--disc", type=_floats(4), action="append", metavar="CX,CY,R,H",
                   help="disc centred at column CX, row CY, radius R, height H; repeatable")
    p.add_argument("--rect", type=_floats(5), action="append", metavar="I,J,H,W,V",
                   help="rectangle at row I, column J of size HxW and height V; repeatable")
    p.add_argument("--background-poly", type=_floats(), default=None, metavar="C00,C10,C01,...")
    p.add_argument("--wrap-col", type=int, action="append")
    p.add_argument("--wrap-row", type=int, action="append")
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--unit", choices=("radians", "ppm"), default="radians")
    p.add_argument("--out", required=True)
    p.add_argument("--truth-out", default=None,
                   help="directory for truth_h.phm, truth_b.phm and phase.phm (with wrap lines)")
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("edges", help="sparse jump field")
    p.add_argument("--in", dest="input", required=True)
    _solver_args(p)
    p.add_argument("--out-ux", required=True)
    p.add_argument("--out-uy", required=True)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_edges)

    p = sub.add_parser("suppress", help="split phase into phase of interest and background")
    p.add_argument("--in", dest="input", required=True)
    _solver_args(p, recon=True)
    p.add_argument("--ref", type=_ints(2), default=None, metavar="I,J")
    p.add_argument("--weights", choices=("mag2", "magnitude", "uniform"), default=None)
    p.add_argument("--out-h", required=True)
    p.add_argument("--out-b", required=True)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_suppress)

    p = sub.add_parser("cnr", help="contrast-to-noise ratio of two ROIs")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--roi1", type=_ints(4), required=True, metavar="I,J,H,W")
    p.add_argument("--roi2", type=_ints(4), required=True, metavar="I,J,H,W")
    p.add_argument("--spread", choices=("pooled", "union"), default="pooled")
    p.add_argument("--linear-scale", type=_floats(2), default=None, metavar="A,B")
    p.set_defaults(func=cmd_cnr)

    p = sub.add_parser("histogram", help="histogram table of a field")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--bins", type=int, required=True)
    p.add_argument("--range", type=_floats(2), default=None, metavar="LO,HI")
    p.add_argument("--linear-scale", type=_floats(2), default=None, metavar="A,B",
                   help="display mapping a*x+b applied before binning")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_histogram)

    p = sub.add_parser("pgm", help="8/16-bit PGM snapshot with a scaling sidecar")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--bits", type=int, choices=(8, 16), default=8)
    p.add_argument("--linear-scale", type=_floats(2), default=None, metavar="A,B")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pgm)

    p = sub.add_parser("ripcheck", help="restricted-isometry deviation of the waveform matrix")
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--sparsity", type=int, required=True)
    p.add_argument("--min-sep", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ripcheck)

    p = sub.add_parser("convergence", help="1D error study over grid sizes")
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--sizes", type=_ints(), default=[64, 128, 256, 512])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_convergence)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _ArgError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    if getattr(args, "weights", None) == "mag2":
        args.weights = "magnitude"
    try:
        return args.func(args, argv)
    except (PhaseBGError, OSError) as exc:
        print(f"phasebg {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
