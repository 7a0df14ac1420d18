"""The summability dichotomy behind the curvature obstruction.

A lower frame bound forces the spectrum to be dense enough that
``sum |lambda|^-gamma`` diverges, while a Bessel bound together with
``|lambda|^gamma * int_{B_r(lambda)} |mu_hat|^2 >= c`` caps the same sum by
``B * |mu| * v_d * r^d / c``.  On a finite candidate spectrum both sides
can be computed, and the radius where the cap is broken can be reported.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

from .errors import InvalidInput, QuadratureUnstable, UnsupportedDimension
from .frame_core import Spectrum
from .geometry import ConvexBody
from .measure import sphere_ft_closed_form

LOCAL_MASS_RTOL = 0.01
N_LARGEST = 32


def _norms(spec) -> np.ndarray:
    freqs = spec.frequencies if isinstance(spec, Spectrum) else np.atleast_2d(np.asarray(spec, dtype=float))
    return np.linalg.norm(freqs, axis=1) if freqs.size else np.zeros(0)


def partial_sum(spec, gamma: float, R: float) -> float:
    """``sum_{0 < |lambda| <= R} |lambda|^-gamma``."""
    if gamma <= 0:
        raise InvalidInput("gamma must be positive")
    n = _norms(spec)
    n = n[(n > 0) & (n <= R * (1 + 1e-12))]
    return math.fsum(n ** (-gamma))


def partial_sums(spec, gamma: float, radii) -> np.ndarray:
    """:func:`partial_sum` on a ladder of radii with one sort."""
    if gamma <= 0:
        raise InvalidInput("gamma must be positive")
    n = np.sort(_norms(spec))
    n = n[n > 0]
    cum = np.concatenate([[0.0], np.cumsum(n ** (-gamma))])
    idx = np.searchsorted(n, np.asarray(radii, dtype=float) * (1 + 1e-12), side="right")
    return cum[idx]


def counting_function(spec, R: float, include_origin: bool = True) -> int:
    """``#(Lambda ∩ closed B_R(0))``; the origin counts unless ``include_origin`` is off."""
    n = _norms(spec)
    inside = n <= R * (1 + 1e-12)
    if not include_origin:
        inside &= n > 0
    return int(np.count_nonzero(inside))


@dataclass
class GrowthFit:
    exponent: float
    stderr: float
    log_corrected: bool = False


def fit_growth(radii, values, log_corrected: bool = False) -> GrowthFit:
    """Least-squares slope of ``log values`` against ``log R``.

    With ``log_corrected`` the values are multiplied by ``log R`` first, the
    form that matches density ``R^d / log R``.  Radii must span at least a
    decade.
    """
    R = np.asarray(radii, dtype=float)
    v = np.asarray(values, dtype=float)
    keep = (R > 1) & (v > 0)
    R, v = R[keep], v[keep]
    if R.size < 3 or R.max() / R.min() < 10 * (1 - 1e-9):
        raise InvalidInput("growth fit needs at least three radii spanning a decade")
    if log_corrected:
        v = v * np.log(R)
    res = stats.linregress(np.log(R), np.log(v))
    return GrowthFit(float(res.slope), float(res.stderr), log_corrected)


# --------------------------------------------------------------------------
# local mass of |mu_hat|^2 on balls


def _ball_rule(d: int, r: float, n: int):
    """Nodes and weights of a polar (d=2) or spherical (d=3) product rule on B_r(0)."""
    x, w = np.polynomial.legendre.leggauss(n)
    rho = 0.5 * r * (x + 1)
    wr = 0.5 * r * w
    m = 2 * n
    phi = 2 * np.pi * np.arange(m) / m
    wphi = np.full(m, 2 * np.pi / m)
    if d == 2:
        pts = rho[:, None, None] * np.stack([np.cos(phi), np.sin(phi)], axis=-1)[None]
        wts = (wr * rho)[:, None] * wphi[None, :]
        return pts.reshape(-1, 2), wts.reshape(-1)
    if d == 3:
        ct, wct = np.polynomial.legendre.leggauss(n)
        st = np.sqrt(1 - ct**2)
        dirs = np.stack(
            [st[:, None] * np.cos(phi)[None], st[:, None] * np.sin(phi)[None], np.repeat(ct[:, None], m, 1)],
            axis=-1,
        )
        pts = rho[:, None, None, None] * dirs[None]
        wts = (wr * rho**2)[:, None, None] * (wct[:, None] * wphi[None, :])[None]
        return pts.reshape(-1, 3), wts.reshape(-1)
    raise UnsupportedDimension("local mass is implemented for d = 2, 3")


def _ball_integral(mu_hat, lam, r, nodes):
    pts, wts = _ball_rule(lam.size, r, nodes)
    vals = np.abs(mu_hat(pts + lam)) ** 2
    return float(np.dot(wts, vals))


def local_mass(mu_hat, lam, r: float, gamma: float, nodes: int = 64, check: bool = True) -> float:
    """``|lam|^gamma * int_{B_r(lam)} |mu_hat(xi)|^2 d xi``.

    ``mu_hat`` maps an ``(n, d)`` array of frequencies to transform values.
    The ball integral uses a Gauss-Legendre radial rule times a periodic
    angular rule centred at ``lam``; with ``check`` the node count is doubled
    and a relative change above 1% raises :class:`QuadratureUnstable`.
    """
    lam = np.asarray(lam, dtype=float).reshape(-1)
    size = float(np.linalg.norm(lam))
    if size <= r:
        raise InvalidInput("need |lam| > r")
    val = _ball_integral(mu_hat, lam, r, nodes)
    if check:
        fine = _ball_integral(mu_hat, lam, r, 2 * nodes)
        scale = max(abs(fine), 1e-300)
        if abs(fine - val) > LOCAL_MASS_RTOL * scale and abs(fine - val) > 1e-14:
            raise QuadratureUnstable(f"ball integral at {lam.tolist()} changed by {abs(fine - val) / scale:.2%} under doubling")
        val = fine
    return size**gamma * val


def decay_sup(mu_hat, d: int, gamma: float, r_max: float = 200.0, samples: int = 400, seed: int = 0) -> float:
    """``max |xi|^(gamma/2) |mu_hat(xi)|`` over seeded samples with ``1 <= |xi| <= r_max``."""
    rng = np.random.default_rng(seed)
    radii = np.geomspace(1.0, r_max, samples)
    dirs = rng.standard_normal((samples, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    xi = radii[:, None] * dirs
    return float(np.max(radii ** (gamma / 2) * np.abs(mu_hat(xi))))


# --------------------------------------------------------------------------
# the report


def ball_volume(d: int, r: float = 1.0) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * r**d


@dataclass
class ObstructionReport:
    body: str
    dim: int
    gamma: float
    r: float
    L: float
    radii: list
    partial_sums: list
    counts: list
    local_mass_min: float
    local_mass_points: int
    total_mass: float
    bessel_budget: float
    budget: float
    tail: float
    r_star: float | None
    r_star_extrapolated: bool
    partial_exponent: float | None
    partial_stderr: float | None
    count_exponent: float | None
    count_stderr: float | None
    decay_sup: float
    verdict: str

    def to_dict(self) -> dict:
        return asdict(self)


def _sphere_transform(body):
    if isinstance(body, ConvexBody):
        if body.kind != "ball":
            raise UnsupportedDimension("closed-form transforms exist for round spheres only")
        d, R = body.dim, float(body.params[0])
    elif body in ("circle", 2):
        d, R = 2, 1.0
    elif body in ("sphere", 3):
        d, R = 3, 1.0
    else:
        raise InvalidInput(f"unknown body {body!r}; use 'circle', 'sphere' or a ball")
    if d not in (2, 3):
        raise UnsupportedDimension("closed form available for d = 2, 3")
    name = "circle" if d == 2 else "sphere"
    area = 2 * math.pi * R if d == 2 else 4 * math.pi * R**2
    return name, d, area, lambda xi: sphere_ft_closed_form(d, xi, R)


def dichotomy_report(
    body,
    spec: Spectrum,
    gamma: float,
    r: float,
    B_budget: float = 10.0,
    radii=None,
    nodes: int = 64,
    seed: int = 0,
) -> ObstructionReport:
    """Put the density side and the Bessel side of the dichotomy next to each other.

    The local-mass constant ``c`` is the minimum over the 32 largest
    ``|lambda|``.  The budget is ``B * |mu| * v_d * r^d / c``; ``r_star`` is the
    first radius where ``sum_{L < |lambda| <= R} |lambda|^-gamma`` exceeds it,
    found inside the spectrum or, failing that, extrapolated from the power
    law fitted to the partial sums.
    """
    name, d, area, mu_hat = _sphere_transform(body)
    if spec.dim != d:
        raise InvalidInput("spectrum dimension does not match the body")
    if gamma <= 0 or r <= 0:
        raise InvalidInput("gamma and r must be positive")
    norms = np.sort(spec.norms)
    nonzero = norms[norms > 0]
    if nonzero.size == 0:
        raise InvalidInput("spectrum has no nonzero frequencies")
    L = max(2 * r, 20.0)
    if radii is None:
        lo = max(1.0, float(nonzero[0]))
        hi = float(nonzero[-1])
        radii = np.geomspace(lo, hi, 24) if hi > lo else np.array([lo])
    radii = np.asarray(radii, dtype=float)
    sums = partial_sums(spec, gamma, radii)
    counts = np.array([counting_function(spec, R) for R in radii])

    far = nonzero[nonzero > r]
    if far.size == 0:
        raise InvalidInput(f"no frequencies with |lambda| > r = {r}")
    freqs = spec.frequencies
    fn = np.linalg.norm(freqs, axis=1)
    order = np.lexsort(tuple(freqs[:, i] for i in reversed(range(d))) + (-fn,))
    chosen = [freqs[i] for i in order if fn[i] > r][:N_LARGEST]
    c = min(local_mass(mu_hat, lam, r, gamma, nodes) for lam in chosen)
    budget = B_budget * area * ball_volume(d, r) / c if c > 0 else math.inf

    tail_terms = nonzero[nonzero > L] ** (-gamma)
    tail = math.fsum(tail_terms)
    r_star, extrapolated = None, False
    if tail_terms.size and tail > budget:
        k = int(np.searchsorted(np.cumsum(tail_terms), budget, side="right"))
        r_star = float(nonzero[nonzero > L][k])

    def _fit(vals):
        # fit over the last decade of the ladder, starting one step below it when needed
        below = np.flatnonzero(radii <= radii.max() / 10 * (1 + 1e-9))
        start = radii[below[-1]] if below.size else radii.min()
        sel = radii >= max(1.0, start)
        try:
            return fit_growth(radii[sel], vals[sel])
        except InvalidInput:
            return None

    pfit, cfit = _fit(sums), _fit(counts.astype(float))
    if r_star is None and pfit is not None and pfit.exponent > 0.05 and math.isfinite(budget):
        # S(R) ~ a R^p; solve S(R) - S(L) = budget
        p = pfit.exponent
        a = sums[-1] / radii[-1] ** p
        s_L = partial_sum(spec, gamma, L)
        r_star = float(((budget + s_L) / a) ** (1 / p))
        extrapolated = True

    parts = []
    if cfit is not None:
        if cfit.exponent + 2 * cfit.stderr < gamma - 0.1:
            parts.append(
                f"counting grows like R^{cfit.exponent:.2f}, slower than R^{gamma:g}: "
                "too sparse to carry a lower frame bound"
            )
        else:
            parts.append(f"counting grows like R^{cfit.exponent:.2f}, dense enough for a lower frame bound")
    if pfit is not None:
        parts.append(f"partial sums grow like R^{pfit.exponent:.2f} (stderr {pfit.stderr:.2g})")
    if r_star is not None:
        how = "extrapolated" if extrapolated else "reached"
        parts.append(f"Bessel budget {budget:.4g} for B = {B_budget:g} is exhausted at R* = {r_star:.4g} ({how})")
    else:
        parts.append(f"tail sum {tail:.4g} stays within the Bessel budget {budget:.4g}")
    if c <= 0:
        parts.append("local mass vanished; no Bessel-side constraint")

    return ObstructionReport(
        body=name,
        dim=d,
        gamma=float(gamma),
        r=float(r),
        L=L,
        radii=radii.tolist(),
        partial_sums=sums.tolist(),
        counts=counts.tolist(),
        local_mass_min=float(c),
        local_mass_points=len(chosen),
        total_mass=area,
        bessel_budget=float(B_budget),
        budget=float(budget),
        tail=float(tail),
        r_star=r_star,
        r_star_extrapolated=extrapolated,
        partial_exponent=None if pfit is None else pfit.exponent,
        partial_stderr=None if pfit is None else pfit.stderr,
        count_exponent=None if cfit is None else cfit.exponent,
        count_stderr=None if cfit is None else cfit.stderr,
        decay_sup=decay_sup(mu_hat, d, gamma, seed=seed),
        verdict="; ".join(parts),
    )
