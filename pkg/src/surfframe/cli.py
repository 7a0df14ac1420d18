"""Command-line entry point ``surfframe``.

Recipes run from a JSON config::

    surfframe parseval --config cfg.json --out results/
    surfframe sweep --config cfg.json --param N --values 1,2,4,8

Module-level tools work on files directly::

    surfframe build-frame --polytope square.json --n 4 --delta 0.1 --window 12 --out spectrum.json
    surfframe obstruction --body circle --spectrum spectrum.json --gamma 1 --r 5 --out report.json
    surfframe eigenbasis --group dihedral:3 --lmax 12 --out basis.json
    surfframe transform --polytope square.json --spectrum spectrum.json --out ft.csv

Exit codes: 0 success, 1 invalid input, 2 hypothesis violation, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import harness
from .eigenbasis import parse_group, projected_eigenbasis
from .errors import ConfigInvalid, HypothesisViolation, InvalidInput, NumericalError
from .frame_core import Spectrum
from .geometry import load_polytope
from .measure import fourier_transform, load_measure, polytope_quadrature, required_resolution
from .obstruction import dichotomy_report
from .polytope_frame import build_frame_spectrum


def _recipe(args) -> int:
    cfg = harness.ExperimentConfig.load(args.config)
    if cfg.kind != args.command:
        raise ConfigInvalid({"kind": f"config is for {cfg.kind!r}, not {args.command!r}"})
    res = harness.run(cfg, out=args.out)
    print(res.report_path)
    if res.status:
        print(res.report["error"], file=sys.stderr)
    return res.status


def _sweep(args) -> int:
    cfg = harness.ExperimentConfig.load(args.config)
    values = [v for v in args.values.split(",") if v.strip()] if args.values else []
    path = harness.sweep(cfg, args.param, values, out=args.out, workers=args.workers)
    print(path)
    return 0


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _build_frame(args) -> int:
    fc = build_frame_spectrum(load_polytope(args.polytope), args.n, args.delta, args.window, seed=args.seed)
    _write(args.out, json.dumps(fc.spectrum.to_dict()) + "\n")
    c = fc.certificate
    print(
        f"|Lambda| = {len(fc.spectrum)}, m = {fc.classification.m}, eps = {c.epsilon:.6g}, "
        f"predicted lower bound {c.value:.6g}, threshold N = {c.n_min}",
        file=sys.stderr,
    )
    return 0


def _obstruction(args) -> int:
    rep = dichotomy_report(args.body, Spectrum.load(args.spectrum), args.gamma, args.r, args.budget)
    _write(args.out, harness.dumps(rep.to_dict()))
    return 0


def _eigenbasis(args) -> int:
    if args.config:
        args.command = "eigenbasis"
        return _recipe(args)
    basis = projected_eigenbasis(parse_group(args.group), args.lmax)
    _write(args.out, harness.dumps(basis.to_dict()))
    return 0


def _transform(args) -> int:
    spec = Spectrum.load(args.spectrum)
    if args.measure:
        mu = load_measure(args.measure)
    else:
        facets = load_polytope(args.polytope)
        mu = polytope_quadrature(facets, args.resolution or max(required_resolution(spec.frequencies), 2.0))
    vals = np.atleast_1d(fourier_transform(mu, spec.frequencies))
    d = spec.dim
    lines = [",".join([f"xi_{i + 1}" for i in range(d)] + ["re", "im"])]
    for xi, v in zip(spec.frequencies, vals):
        lines.append(",".join([repr(float(x)) for x in xi] + [repr(float(v.real)), repr(float(v.imag))]))
    _write(args.out, "\n".join(lines) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="surfframe", description="Fourier frames on surface measures")
    sub = p.add_subparsers(dest="command", required=True)

    for kind in harness.KINDS:
        if kind == "eigenbasis":
            continue
        s = sub.add_parser(kind, help=f"run the {kind} recipe")
        s.add_argument("--config", required=True)
        s.add_argument("--out")
        s.set_defaults(func=_recipe)

    s = sub.add_parser("eigenbasis", help="run the eigenbasis recipe or export a basis")
    s.add_argument("--config")
    s.add_argument("--group", default="dihedral:3")
    s.add_argument("--lmax", type=int, default=12)
    s.add_argument("--out")
    s.set_defaults(func=_eigenbasis)

    s = sub.add_parser("sweep", help="run a recipe over a list of parameter values")
    s.add_argument("--config", required=True)
    s.add_argument("--param", required=True)
    s.add_argument("--values", default="")
    s.add_argument("--out")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=_sweep)

    s = sub.add_parser("recipes", help="list recipe names")
    s.set_defaults(func=lambda a: print("\n".join(harness.KINDS)) or 0)

    s = sub.add_parser("build-frame", help="build a frame spectrum for a polytope JSON")
    s.add_argument("--polytope", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--delta", type=float, default=0.1)
    s.add_argument("--window", type=float, default=12.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=_build_frame)

    s = sub.add_parser("obstruction", help="dichotomy report for a spectrum on a round sphere")
    s.add_argument("--body", default="circle", choices=["circle", "sphere"])
    s.add_argument("--spectrum", required=True)
    s.add_argument("--gamma", type=float, default=1.0)
    s.add_argument("--r", type=float, default=5.0)
    s.add_argument("--budget", type=float, default=10.0)
    s.add_argument("--out")
    s.set_defaults(func=_obstruction)

    s = sub.add_parser("transform", help="evaluate a measure's Fourier transform at a spectrum")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--polytope")
    src.add_argument("--measure")
    s.add_argument("--spectrum", required=True)
    s.add_argument("--resolution", type=float)
    s.add_argument("--out")
    s.set_defaults(func=_transform)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return int(args.func(args) or 0)
    except ConfigInvalid as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return harness.EXIT_CONFIG
    except HypothesisViolation as exc:
        print(f"hypothesis violation: {exc}", file=sys.stderr)
        return harness.EXIT_HYPOTHESIS
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return harness.EXIT_NUMERICAL
    except (InvalidInput, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return harness.EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
