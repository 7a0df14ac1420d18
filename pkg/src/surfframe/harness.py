"""Experiment recipes, configuration and report emission.

A run reads one JSON config, executes a named recipe and writes
``<out>/<kind>.json`` (report) and ``<out>/<kind>.csv`` (plot data).
Reports embed the resolved config and the package version and contain no
timestamps, so identical configs give byte-identical files.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np
from scipy import optimize, special

from . import __version__
from .eigenbasis import (
    WedgeDomain,
    character,
    parse_group,
    projected_eigenbasis,
    rotation_angle,
    tiling_check,
    verify_basis,
)
from .errors import ConfigInvalid, HypothesisViolation, InvalidInput, NumericalError, SurfFrameError
from .frame_core import Spectrum, frame_bounds
from .geometry import ConvexBody, Facet, equilateral_triangle, unit_square_boundary
from .measure import HerzAsymptotic, fourier_transform, herz_eval, polytope_quadrature, sphere_quadrature
from .obstruction import dichotomy_report
from .polytope_frame import audit_passes, build_frame_spectrum, separation_audit

KINDS = ("parseval", "triangle-frame", "square-frame", "herz", "dichotomy", "eigenbasis")
EXIT_OK, EXIT_CONFIG, EXIT_HYPOTHESIS, EXIT_NUMERICAL = 0, 1, 2, 3
SWEEP_COLUMNS = ("param", "value", "status", "a_est", "b_est", "drift", "headline", "error")


@dataclass
class ExperimentConfig:
    kind: str
    N: int = 4
    delta: float = 0.1
    window: float = 12.0
    band: float = 4.0
    resolution: float | None = None
    levels: int = 2
    radius: float | None = None
    body: str = "circle"
    gamma: float | None = None
    r: float = 5.0
    budget: float = 10.0
    lmax: int = 12
    group: str = "dihedral:3"
    trials: int = 20
    seed: int = 0
    out: str = "out"

    def validate(self) -> "ExperimentConfig":
        errs = {}
        if self.kind not in KINDS:
            errs["kind"] = f"unknown experiment kind {self.kind!r}; expected one of {', '.join(KINDS)}"
        positive = ("delta", "band", "radius", "gamma", "r", "budget")
        for name in positive:
            v = getattr(self, name)
            if v is None and name in ("radius", "gamma"):
                continue
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0 or not math.isfinite(v):
                errs[name] = "must be a positive finite number"
        for name in ("N", "levels", "trials"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                errs[name] = "must be a positive integer"
        if not isinstance(self.lmax, int) or isinstance(self.lmax, bool) or self.lmax < 0:
            errs["lmax"] = "must be a nonnegative integer"
        if not isinstance(self.window, (int, float)) or self.window < 0:
            errs["window"] = "must be nonnegative"
        if self.delta is not None and isinstance(self.delta, (int, float)) and self.delta > 2:
            errs["delta"] = "must lie in (0, 2]"
        if self.resolution is not None and (not isinstance(self.resolution, (int, float)) or self.resolution < 2):
            errs["resolution"] = "must be null or a number >= 2"
        if self.body not in ("circle", "sphere"):
            errs["body"] = "must be 'circle' or 'sphere'"
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            errs["seed"] = "must be an integer"
        try:
            parse_group(self.group)
        except (InvalidInput, AttributeError) as exc:
            errs["group"] = str(exc)
        if errs:
            raise ConfigInvalid(errs)
        return self

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigInvalid({"config": "must be a JSON object"})
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigInvalid({k: "unknown field" for k in unknown})
        if "kind" not in doc:
            raise ConfigInvalid({"kind": "required"})
        return cls(**doc).validate()

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigInvalid({"config": f"invalid JSON: {exc}"}) from None
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes).validate()


@dataclass
class RunResult:
    status: int
    report_path: Path
    csv_path: Path | None
    report: dict


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        # strict JSON has no NaN or infinity
        return float(x) if math.isfinite(x) else None
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def dumps(doc) -> str:
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


# --------------------------------------------------------------------------
# recipes: each returns (report dict, csv header, csv rows, summary dict)


def _resolutions(cfg):
    return None if cfg.resolution is None else [float(cfg.resolution)]


def recipe_parseval(cfg):
    # the filled unit square, on which Z^2 is an orthonormal basis
    square = Facet.from_arrays(np.eye(2), [0.0, 0.0], [1.0, 1.0])
    mu = polytope_quadrature([square], cfg.resolution or 4.0)
    spec = Spectrum.lattice(2, cfg.radius or 20.0)
    rep = frame_bounds(mu, spec, cfg.band, resolutions=_resolutions(cfg), levels=cfg.levels)
    out = rep.to_dict()
    out.update(a_error=abs(rep.a_est - 1), b_error=abs(rep.b_est - 1), spectrum_size=len(spec))
    rows = [(res, a, b) for res, a, b in rep.history]
    summary = dict(a_est=rep.a_est, b_est=rep.b_est, drift=rep.drift, headline=max(out["a_error"], out["b_error"]))
    return out, ("resolution", "a_est", "b_est"), rows, summary


def _frame_recipe(cfg, facets, name):
    fc = build_frame_spectrum(facets, cfg.N, cfg.delta, cfg.window, seed=cfg.seed)
    mu = polytope_quadrature(facets, cfg.resolution or 4.0)
    rep = frame_bounds(mu, fc.spectrum, cfg.band, resolutions=_resolutions(cfg), levels=cfg.levels)
    audit = separation_audit(fc.classification, fc.lattices)
    cert = dataclasses.asdict(fc.certificate)
    out = {
        "polytope": name,
        "frame": rep.to_dict(),
        "certificate": cert,
        "classes": fc.classification.m,
        "class_sizes": [c.size for c in fc.classification.classes],
        "epsilons": [p.epsilon for p in fc.phases],
        "alpha0": [p.alpha0 for p in fc.phases],
        "omegas": [None if g.omega is None else g.omega for g in fc.lattices],
        "separation": {f"{j}->{l}": v for (j, l), v in sorted(audit.items())},
        "separation_passed": audit_passes(audit, cfg.delta),
        "spectrum_size": len(fc.spectrum),
        "duplicates_removed": fc.duplicates_removed,
        "notes": fc.notes,
    }
    rows = [(res, a, b) for res, a, b in rep.history]
    summary = dict(a_est=rep.a_est, b_est=rep.b_est, drift=rep.drift, headline=fc.certificate.value)
    return out, ("resolution", "a_est", "b_est"), rows, summary


def recipe_triangle(cfg):
    return _frame_recipe(cfg, equilateral_triangle(), "equilateral-triangle")


def recipe_square(cfg):
    return _frame_recipe(cfg, unit_square_boundary(), "unit-square")


def herz_study(r_lo=10.0, r_hi=200.0, samples=400, zero_window=(20.0, 40.0), resolution=None):
    """Compare the circle's quadrature transform with its leading asymptotic term.

    Returns the sampled data, the log-log slope of the residual envelope
    (maximum per logarithmic bin) and the zero-crossing offsets in
    ``zero_window`` against the zeros ``k/2 + 3/8`` of ``cos(2 pi s - pi/4)``.
    """
    res = resolution or 4 * r_hi
    mu = sphere_quadrature(2, 1.0, res)
    h = HerzAsymptotic(ConvexBody.ball(2))
    s = np.geomspace(r_lo, r_hi, samples)
    xi = np.stack([s, np.zeros_like(s)], axis=1)
    ft = np.real(fourier_transform(mu, xi))
    exact = 2 * np.pi * special.j0(2 * np.pi * s)
    lead = herz_eval(h, xi)
    resid = np.abs(ft - lead)
    bins = np.array_split(np.arange(samples), 20)
    env_s = np.array([s[b][np.argmax(resid[b])] for b in bins])
    env_r = np.array([resid[b].max() for b in bins])
    slope = float(np.polyfit(np.log(env_s), np.log(env_r), 1)[0])

    def f(t):
        return float(np.real(fourier_transform(mu, [t, 0.0])))

    grid = np.arange(zero_window[0], zero_window[1] + 1e-9, 0.01)
    vals = np.real(fourier_transform(mu, np.stack([grid, np.zeros_like(grid)], axis=1)))
    zeros = [optimize.brentq(f, grid[i], grid[i + 1], xtol=1e-12) for i in np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))]
    zeros = np.array(zeros)
    k = np.round((zeros - 3 / 8) * 2)
    predicted = k / 2 + 3 / 8
    return {
        "s": s,
        "transform": ft,
        "closed_form": exact,
        "leading_term": lead,
        "residual": resid,
        "envelope_s": env_s,
        "envelope_residual": env_r,
        "residual_slope": slope,
        "zeros": zeros,
        "predicted_zeros": predicted,
        "max_zero_offset": float(np.max(np.abs(zeros - predicted))) if zeros.size else math.inf,
        "max_closed_form_error": float(np.max(np.abs(ft - exact))),
        "resolution": float(res),
    }


def recipe_herz(cfg):
    st = herz_study(resolution=cfg.resolution)
    out = {k: st[k] for k in ("residual_slope", "max_zero_offset", "max_closed_form_error", "resolution")}
    out.update(zeros=st["zeros"], predicted_zeros=st["predicted_zeros"], theory_slope=-1.5)
    rows = list(zip(st["s"], st["transform"], st["leading_term"], st["residual"]))
    summary = dict(a_est="", b_est="", drift="", headline=st["residual_slope"])
    return out, ("xi", "transform", "leading_term", "residual"), rows, summary


def recipe_dichotomy(cfg):
    d = 2 if cfg.body == "circle" else 3
    spec = Spectrum.lattice(d, cfg.radius or (200.0 if d == 2 else 50.0))
    gamma = cfg.gamma or float(d - 1)
    rep = dichotomy_report(cfg.body, spec, gamma, cfg.r, cfg.budget, seed=cfg.seed)
    rows = list(zip(rep.radii, rep.partial_sums, rep.counts))
    summary = dict(a_est="", b_est="", drift="", headline="" if rep.r_star is None else rep.r_star)
    return rep.to_dict(), ("R", "partial_sum", "count"), rows, summary


def recipe_eigenbasis(cfg):
    G = parse_group(cfg.group)
    basis = projected_eigenbasis(G, cfg.lmax)
    oracle = [round(sum(character(l, rotation_angle(g)) for g in G.elements) / G.order) for l in range(cfg.lmax + 1)]
    out = {"group": G.name, "order": G.order, "lmax": cfg.lmax, "dims": basis.dims, "traces": basis.traces}
    out["character_dims"] = oracle
    kind = G.name.split("-")[0]
    if kind in ("dihedral", "trivial"):
        D = WedgeDomain.wedge(int(G.name.split("-")[1])) if kind == "dihedral" else WedgeDomain.sphere()
        tiling = tiling_check(D, G)
        out["tiling"] = dict(dataclasses.asdict(tiling), passed=tiling.passed)
        out["verification"] = verify_basis(D, basis, cfg.trials, cfg.seed).to_dict()
    rows = list(zip(range(cfg.lmax + 1), basis.dims, basis.traces, oracle))
    summary = dict(a_est="", b_est="", drift="", headline=basis.size)
    return out, ("l", "dimension", "trace", "character_dimension"), rows, summary


RECIPES = {
    "parseval": recipe_parseval,
    "triangle-frame": recipe_triangle,
    "square-frame": recipe_square,
    "herz": recipe_herz,
    "dichotomy": recipe_dichotomy,
    "eigenbasis": recipe_eigenbasis,
}


# --------------------------------------------------------------------------
# running


def _execute(cfg: ExperimentConfig):
    """Run a recipe and classify the outcome; never raises for numerical trouble."""
    try:
        report, header, rows, summary = RECIPES[cfg.kind](cfg)
        return EXIT_OK, report, header, rows, summary, None
    except HypothesisViolation as exc:
        return EXIT_HYPOTHESIS, {}, None, None, {}, f"{type(exc).__name__}: {exc}"
    except (NumericalError, SurfFrameError) as exc:
        if isinstance(exc, ConfigInvalid):
            raise
        return EXIT_NUMERICAL, {}, None, None, {}, f"{type(exc).__name__}: {exc}"


def run(config, out: str | None = None) -> RunResult:
    """Execute one recipe; write ``<out>/<kind>.json`` and, on success, ``<out>/<kind>.csv``."""
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.from_dict(config)
    cfg.validate()
    if out is not None:
        cfg = cfg.replace(out=str(out))
    status, report, header, rows, _, error = _execute(cfg)
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    # the output location is not part of the experiment, so reports written
    # to different directories stay byte-identical
    resolved = {k: v for k, v in cfg.to_dict().items() if k != "out"}
    doc = {"version": __version__, "config": resolved, "status": status, "error": error, "result": report}
    rpath = outdir / f"{cfg.kind}.json"
    rpath.write_text(dumps(doc))
    cpath = None
    if header is not None:
        cpath = outdir / f"{cfg.kind}.csv"
        cpath.write_text(_csv_text(header, rows))
    return RunResult(status, rpath, cpath, _jsonable(doc))


def _coerce(param: str, value):
    types = {f.name: f.type for f in fields(ExperimentConfig)}
    if param not in types or param in ("kind", "out"):
        raise ConfigInvalid({param: "not a sweepable parameter"})
    if isinstance(value, str):
        t = types[param]
        try:
            if "int" in str(t) and "float" not in str(t):
                return int(value)
            if "float" in str(t):
                return float(value)
        except ValueError:
            raise ConfigInvalid({param: f"cannot parse {value!r}"}) from None
    return value


def _sweep_row(args):
    cfg, param, value = args
    status, _, _, _, summary, error = _execute(cfg)
    return [param, value, status] + [summary.get(k, "") for k in ("a_est", "b_est", "drift", "headline")] + [error or ""]


def sweep(config, param: str, values, out: str | None = None, workers: int = 1) -> Path:
    """Run the recipe once per value of ``param``; one CSV row per run.

    All configs are validated before anything runs (a bad value aborts the
    sweep); numerical failures are recorded in their row and the sweep goes on.
    """
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.from_dict(config)
    cfg.validate()
    if out is not None:
        cfg = cfg.replace(out=str(out))
    values = [_coerce(param, v) for v in values]
    runs = [cfg.replace(**{param: v}) for v in values]
    jobs = [(c, param, v) for c, v in zip(runs, values)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, jobs))
    else:
        rows = [_sweep_row(j) for j in jobs]
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / f"sweep_{cfg.kind}_{param}.csv"
    path.write_text(_csv_text(SWEEP_COLUMNS, rows))
    return path
