"""Command-line driver.

Exit codes: 0 success, 2 usage error, 3 unreadable or malformed file,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .baseline import compare
from .bench import SimulationSpec, generate, run_cell
from .configspace import AmbientShape, Configuration
from .exceptions import FormatError, NumericalError, ShapeError
from .io import (load_matrix, read_model, save_matrix, sha256_file, write_cell_csv,
                 write_curve_csv, write_long_csv, write_model, write_objective_csv,
                 write_report_csv)
from .kopa_fit import FitOptions, ICSpec, Stopping, backfit, greedy_fit
from .matrix import NoiseSpec, add_noise
from .terms import evaluate

EXIT_OK, EXIT_USAGE, EXIT_FORMAT, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _options_hash(d: dict) -> str:
    return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


def _parse_configs(text: str, shape: AmbientShape) -> list[Configuration]:
    out = []
    for item in text.split(","):
        p, sep, q = item.strip().lower().partition("x")
        if not sep:
            raise UsageError(f"bad configuration {item!r}; expected e.g. 16x32")
        try:
            out.append(Configuration(int(p), int(q), shape))
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    return out


def _stopping(values) -> Stopping:
    values = values or ["none"]
    if len(set(values)) > 1:
        raise UsageError(f"conflicting stopping rules: {', '.join(values)}")
    try:
        return Stopping.parse(values[0])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _ic(text: str) -> ICSpec:
    try:
        return ICSpec.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_fit(args) -> int:
    y = load_matrix(args.input)
    shape = AmbientShape.of(y)
    opts = FitOptions(max_terms=args.max_terms, ic=_ic(args.ic), stopping=_stopping(args.stop),
                      refine=args.refine, seed=args.seed)
    model, report = greedy_fit(y, opts)
    settings = {"command": "fit", "max_terms": args.max_terms, "ic": args.ic,
                "stop": str(opts.stopping), "refine": args.refine, "seed": args.seed}
    prov = {"seed": args.seed, "options_hash": _options_hash(settings),
            "source_sha256": sha256_file(args.input), "ic": opts.ic.name,
            "q": opts.ic.penalty(shape), "stopping": str(opts.stopping),
            "stopped_by": report.stopped_by}
    if args.out:
        write_model(model, args.out, prov)
    if args.report:
        write_report_csv(report, args.report, prov)
    return EXIT_OK


def cmd_backfit(args) -> int:
    y = load_matrix(args.input)
    shape = AmbientShape.of(y)
    configs = _parse_configs(args.configs, shape)
    opts = FitOptions(backfit_tol=args.tol, backfit_max_rounds=args.rounds,
                      restarts=args.restarts, seed=args.seed)
    model, report = backfit(y, configs, opts)
    settings = {"command": "backfit", "configs": args.configs, "tol": args.tol,
                "rounds": args.rounds, "restarts": args.restarts, "seed": args.seed}
    prov = {"seed": args.seed, "options_hash": _options_hash(settings),
            "source_sha256": sha256_file(args.input), "rounds": report.rounds,
            "converged": report.converged}
    if args.out:
        write_model(model, args.out, prov)
    if args.report:
        write_objective_csv(report, args.report, prov)
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    model = read_model(args.model)
    save_matrix(evaluate(model), args.out)
    return EXIT_OK


def cmd_noise(args) -> int:
    y = load_matrix(args.input)
    try:
        spec = NoiseSpec(args.sigma, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    save_matrix(add_noise(y, spec), args.out)
    return EXIT_OK


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad number list {text!r}") from exc


def cmd_simulate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    make = SimulationSpec.desk if args.scale == "desk" else SimulationSpec.paper
    opts = FitOptions(backfit_tol=args.tol, backfit_max_rounds=args.rounds)
    cells = []
    for a in _floats(args.alpha):
        for s in _floats(args.sigma0):
            try:
                spec = make(alpha=a, sigma0=s, seed=args.seed)
            except ValueError as exc:
                raise UsageError(str(exc)) from exc
            errs, model, report = run_cell(spec, opts)
            cells.append(errs)
            stem = f"alpha{a:g}_sigma0{s:g}_seed{args.seed}"
            meta = {"alpha": a, "sigma0": s, "seed": args.seed, "scale": args.scale,
                    "rounds": report.rounds, "converged": report.converged}
            write_cell_csv(errs, out / f"cell_{stem}.csv", meta)
            if args.save_data:
                y, truth = generate(spec)
                save_matrix(y, out / f"y_{stem}.mat")
                write_model(truth, out / f"truth_{stem}.json", meta)
                write_model(model, out / f"fit_{stem}.json", meta)
    write_long_csv(cells, out / "simulation_long.csv", {"scale": args.scale, "seed": args.seed})
    return EXIT_OK


def cmd_compare(args) -> int:
    clean = load_matrix(args.clean)
    noisy = load_matrix(args.noisy)
    if clean.shape != noisy.shape:
        raise UsageError("--clean and --noisy differ in shape")
    opts = FitOptions(max_terms=args.max_terms, ic=_ic(args.ic))
    curve = compare(clean, noisy, opts, args.max_rank, prob_bound=args.prob)
    shape = AmbientShape.of(noisy)
    meta = {"ic": opts.ic.name, "q": opts.ic.penalty(shape), "prob_bound": args.prob,
            "clean_sha256": sha256_file(args.clean), "noisy_sha256": sha256_file(args.noisy)}
    write_curve_csv(curve, args.out, meta)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hkopa", description="Hybrid Kronecker product approximation")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    f = sub.add_parser("fit", help="greedy fit with configuration selection")
    f.add_argument("input")
    f.add_argument("--max-terms", type=int, default=20)
    f.add_argument("--ic", default="bic", help="mse | aic | bic | q=<value>")
    f.add_argument("--stop", action="append", help="none | rmt:<prob> | cpv:<fraction>")
    f.add_argument("--refine", action="store_true")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out")
    f.add_argument("--report")
    f.set_defaults(func=cmd_fit)

    b = sub.add_parser("backfit", help="alternating least squares with known configurations")
    b.add_argument("input")
    b.add_argument("--configs", required=True, help='e.g. "16x16,32x32"')
    b.add_argument("--tol", type=float, default=1e-10)
    b.add_argument("--rounds", type=int, default=200)
    b.add_argument("--restarts", type=int, default=1)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out")
    b.add_argument("--report")
    b.set_defaults(func=cmd_backfit)

    r = sub.add_parser("reconstruct", help="evaluate a model file")
    r.add_argument("model")
    r.add_argument("--out", required=True, help="output .pgm or .mat")
    r.set_defaults(func=cmd_reconstruct)

    n = sub.add_parser("noise", help="add seeded Gaussian noise")
    n.add_argument("input")
    n.add_argument("--sigma", type=float, required=True)
    n.add_argument("--seed", type=int, default=0)
    n.add_argument("--out", required=True)
    n.set_defaults(func=cmd_noise)

    s = sub.add_parser("simulate", help="two-term backfitting simulation")
    s.add_argument("--alpha", default="0.5", help="value or comma list")
    s.add_argument("--sigma0", default="1.0", help="value or comma list")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--scale", choices=["desk", "paper"], default="desk")
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--rounds", type=int, default=200)
    s.add_argument("--save-data", action="store_true")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("compare", help="hybrid vs SVD error curves")
    c.add_argument("--clean", required=True)
    c.add_argument("--noisy", required=True)
    c.add_argument("--max-terms", type=int, default=20)
    c.add_argument("--max-rank", type=int)
    c.add_argument("--ic", default="bic")
    c.add_argument("--prob", type=float, default=0.01)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"hkopa: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"hkopa: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, OSError) as exc:
        print(f"hkopa: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except (NumericalError, ShapeError, np.linalg.LinAlgError) as exc:
        print(f"hkopa: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
