"""Explicit Fourier frame spectra for finite unions of flat boxes.

For every translate class ``Q_j + {tau_j^l}`` the spectrum is
``Gamma_j + A_j`` where

* ``Gamma_j`` puts ``N`` points over every point of the box's dual lattice,
  displaced along a direction ``omega`` orthogonal to the class, chosen so
  that projections onto every other class's subspace stay delta-separated;
* ``A_j`` is a set of phases in the orthogonal complement whose matrix
  ``exp(-2 pi i tau^l . alpha^s)`` is a well-conditioned Vandermonde matrix.

The frame sum then dominates ``eps^2 N / m`` on each class while the
cross-class leakage is bounded by a Bessel constant independent of ``N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import DirectionSearchFailed, InvalidInput, PhaseDegenerate, SeparationStall
from .frame_core import Spectrum, Tag, certified_bessel_constant
from .geometry import FacetClassification, classify_facets

MAX_CANDIDATES = 10**6
DEFAULT_SEARCH = tuple(k / 16 for k in range(1, 33))


@dataclass
class ObliqueLattice:
    """``Gamma_j``: ``N`` points ``z + c * delta' * omega`` over every base lattice point ``z``.

    Points are stored round by round (all ``z`` get their first shift, then
    their second, ...), so the lattice for ``N`` is a prefix of the one for
    ``N + 1``.
    """

    class_id: int
    omega: np.ndarray | None
    N: int
    delta: float
    delta_prime: float
    window: float
    base: np.ndarray  # integer lattice coordinates, one row per retained z
    points: np.ndarray
    base_index: np.ndarray  # which row of ``base`` each point sits over
    shifts: np.ndarray  # integer multiple c of delta'

    def fiber_counts(self) -> np.ndarray:
        return np.bincount(self.base_index, minlength=len(self.base))


@dataclass
class PhaseSet:
    class_id: int
    alpha0: np.ndarray
    elements: np.ndarray
    epsilon: float
    matrix: np.ndarray
    magnitude: float = 0.0


@dataclass
class LowerBoundCertificate:
    """``eps^2 N/m - (m-1) C_delta M^2`` and the smallest ``N`` making it positive.

    ``value_linear``/``n_min_linear`` use ``eps`` in place of ``eps^2``, the
    other reading of the final estimate; both are reported.
    """

    value: float
    value_linear: float
    n_min: int
    n_min_linear: int
    c_delta: float
    epsilon: float
    N: int
    m: int
    M: int
    delta: float
    d: int

    @property
    def positive(self) -> bool:
        return self.value > 0


@dataclass
class FrameConstruction:
    spectrum: Spectrum
    classification: FacetClassification
    lattices: list
    phases: list
    certificate: LowerBoundCertificate
    notes: list = field(default_factory=list)
    duplicates_removed: int = 0


# --------------------------------------------------------------------------


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(v) > 1e-12)
    # adding 0.0 turns -0.0 into 0.0 so printed and serialised vectors are tidy
    return (-v if nz.size and v[nz[0]] < 0 else v) + 0.0


def _foreign(classes: FacetClassification, j: int) -> list:
    return [c for i, c in enumerate(classes.classes) if i != j]


def choose_direction(
    classes: FacetClassification,
    j: int,
    trials: int = 1000,
    theta_min: float = 1e-3,
    seed: int = 0,
) -> np.ndarray | None:
    """Unit vector in ``V_j^perp`` making angle >= ``theta_min`` with every foreign ``V_l^perp``.

    One-dimensional complements are tried deterministically (both signs);
    otherwise directions are sampled with a seeded generator.  Returns
    ``None`` when the class is alone and has no complement.
    """
    perp = classes.classes[j].perp_basis()
    foreign = _foreign(classes, j)
    if perp.shape[0] == 0:
        if foreign:
            raise DirectionSearchFailed(f"class {j} spans the whole space; no transverse direction")
        return None
    if not foreign:
        return _canonical_sign(perp[0])
    bound = math.sin(theta_min)

    def admissible(w):
        return all(np.linalg.norm(c.basis @ w) >= bound for c in foreign)

    if perp.shape[0] == 1:
        w = _canonical_sign(perp[0])
        for cand in (w, -w):
            if admissible(cand):
                return cand
        raise DirectionSearchFailed(f"class {j}: the normal line lies in a foreign complement")
    rng = np.random.default_rng([seed, j])
    for _ in range(trials):
        g = rng.standard_normal(perp.shape[0])
        w = g @ perp
        w /= np.linalg.norm(w)
        if admissible(w):
            return w
    raise DirectionSearchFailed(
        f"class {j}: no admissible direction in {trials} trials; raise trials or lower theta_min"
    )


def base_lattice(sides, basis, window: float):
    """Dual lattice of the box (``z_i / side_i`` along ``b_i``) within ``window``.

    Sorted by frequency norm, ties broken lexicographically on ``z``.
    """
    sides = np.asarray(sides, dtype=float)
    k = sides.size
    kmax = [int(math.floor(window * s + 1e-9)) for s in sides]
    axes = [np.arange(-m, m + 1) for m in kmax]
    z = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k)
    norm = np.linalg.norm(z / sides, axis=1)
    keep = norm <= window * (1 + 1e-12)
    z, norm = z[keep], norm[keep]
    order = np.lexsort(tuple(z[:, i] for i in reversed(range(k))) + (norm,))
    z = z[order]
    return z, (z / sides) @ np.atleast_2d(basis)


def _order_to_shift(o: int) -> int:
    # scan order 0, 1, -1, 2, -2, ...
    return (o + 1) // 2 if o % 2 else -(o // 2)


def build_gamma(
    classes: FacetClassification,
    j: int,
    omega,
    N: int,
    delta: float,
    window: float,
) -> ObliqueLattice:
    """Greedy construction of ``Gamma_j`` with delta-separated foreign projections."""
    if N < 1 or delta <= 0 or window < 0:
        raise InvalidInput("need N >= 1, delta > 0, window >= 0")
    cls = classes.classes[j]
    foreign = _foreign(classes, j)
    z, base_pts = base_lattice(cls.sides, cls.basis, window)
    if omega is None:
        if N > 1:
            raise InvalidInput("N > 1 needs a transverse direction")
        omega_arr, dprime = None, delta
    else:
        omega_arr = np.asarray(omega, dtype=float)
        if np.linalg.norm(cls.basis @ omega_arr) > 1e-9:
            raise InvalidInput("omega must be orthogonal to the class subspace")
        lens = [np.linalg.norm(c.basis @ omega_arr) for c in foreign]
        dprime = delta / min(lens) if lens else delta
    n_base = len(z)
    total = n_base * N
    d = classes.dim
    points = np.empty((total, d))
    base_index = np.empty(total, dtype=int)
    shifts = np.empty(total, dtype=int)
    # accepted projections, in each foreign subspace's own coordinates
    proj = [np.empty((total, c.dim)) for c in foreign]
    dirs = [c.basis @ omega_arr for c in foreign] if omega_arr is not None else []
    used = [set() for _ in range(n_base)]
    tol = 1e-12 * max(1.0, delta)
    count = 0
    for _round in range(N):
        for i in range(n_base):
            p = base_pts[i]
            blocked = set(used[i])
            for f, (c, u) in enumerate(zip(foreign, dirs)):
                if count == 0:
                    break
                q = c.basis @ p
                v = proj[f][:count] - q
                uu = float(u @ u)
                along = v @ u / uu
                perp2 = np.sum(v * v, axis=1) - along**2 * uu
                hit = perp2 < delta**2
                if not np.any(hit):
                    continue
                half = np.sqrt(np.maximum(delta**2 - perp2[hit], 0.0)) / math.sqrt(uu)
                centre = along[hit]
                lo = np.ceil((centre - half + tol) / dprime).astype(np.int64)
                hi = np.floor((centre + half - tol) / dprime).astype(np.int64)
                width = int(np.max(hi - lo)) + 1 if lo.size else 0
                for off in range(max(width, 0)):
                    sel = lo + off <= hi
                    blocked.update((lo[sel] + off).tolist())
            for o in range(MAX_CANDIDATES):
                c_shift = _order_to_shift(o)
                if c_shift not in blocked:
                    break
            else:
                raise SeparationStall(f"class {j}: no admissible shift for lattice point {z[i].tolist()}")
            pt = p if omega_arr is None else p + c_shift * dprime * omega_arr
            points[count] = pt
            base_index[count] = i
            shifts[count] = c_shift
            for f, c in enumerate(foreign):
                proj[f][count] = c.basis @ pt
            used[i].add(c_shift)
            count += 1
    return ObliqueLattice(j, omega_arr, N, delta, dprime, window, z, points, base_index, shifts)


def _phase_matrix(proj: np.ndarray, a: float) -> np.ndarray:
    s = np.arange(1, proj.size + 1)
    return np.exp(-2j * np.pi * a * np.outer(proj, s))


def build_alpha(classes: FacetClassification, j: int, search_grid=DEFAULT_SEARCH) -> PhaseSet:
    """Phases ``alpha^s = s * alpha0`` in ``V_j^perp`` maximising the smallest singular value.

    ``alpha0`` points along the complement component of ``tau^1 - tau^2``
    (other differences are tried if that direction does not separate all
    translates); its length is scanned over ``search_grid`` divided by the
    spread of the projected translations.
    """
    cls = classes.classes[j]
    perp = cls.perp_basis()
    taus = cls.translations
    n = len(taus)
    d = classes.dim
    if n == 1:
        if perp.shape[0] == 0:
            a0 = np.zeros(d)
        else:
            a0 = _canonical_sign(perp[0]) * search_grid[0]
        return PhaseSet(j, a0, a0[None, :].copy(), 1.0, np.ones((1, 1), dtype=complex), float(np.linalg.norm(a0)))
    if perp.shape[0] == 0:
        raise PhaseDegenerate(f"class {j} has several translates but no complement")
    comp = (taus @ perp.T) @ perp
    candidates = []
    for a, b in [(0, 1)] + [(a, b) for a in range(n) for b in range(a + 1, n) if (a, b) != (0, 1)]:
        diff = comp[a] - comp[b]
        if np.linalg.norm(diff) > 1e-12:
            candidates.append(_canonical_sign(diff / np.linalg.norm(diff)))
    best = None
    for u in candidates:
        proj = taus @ u
        spread = float(proj.max() - proj.min())
        if spread <= 1e-12:
            continue
        for g in search_grid:
            a = g / spread
            M = _phase_matrix(proj, a)
            eps = float(np.linalg.svd(M, compute_uv=False)[-1])
            if best is None or eps > best[0] + 1e-12:
                best = (eps, u, a, M)
        if best is not None and best[0] >= 1e-8:
            break
    if best is None or best[0] < 1e-8:
        raise PhaseDegenerate(f"class {j}: translates have (nearly) coinciding complement projections")
    eps, u, a, M = best
    a0 = a * u
    elems = np.arange(1, n + 1)[:, None] * a0
    return PhaseSet(j, a0, elems, eps, M, float(a))


def phase_matrix(classes: FacetClassification, phases: PhaseSet) -> np.ndarray:
    """Assemble ``exp(-2 pi i tau^l . alpha^s)`` directly from the stored phases."""
    taus = classes.classes[phases.class_id].translations
    return np.exp(-2j * np.pi * taus @ phases.elements.T)


def lower_bound_certificate(
    eps: float,
    N: int,
    m: int,
    delta: float,
    M: int,
    d: int,
    c_delta: float | None = None,
) -> LowerBoundCertificate:
    """Predicted lower frame bound ``eps^2 N/m - (m-1) C_delta M^2`` and its threshold in ``N``."""
    if min(eps, N, m, delta, M, d) <= 0:
        raise InvalidInput("all inputs must be positive")
    c = certified_bessel_constant(delta, d) if c_delta is None else float(c_delta)
    loss = (m - 1) * c * M**2

    def threshold(gain):
        x = loss * m / gain
        return int(math.floor(x)) + 1

    return LowerBoundCertificate(
        value=eps**2 * N / m - loss,
        value_linear=eps * N / m - loss,
        n_min=threshold(eps**2),
        n_min_linear=threshold(eps),
        c_delta=c,
        epsilon=eps,
        N=N,
        m=m,
        M=M,
        delta=delta,
        d=d,
    )


def separation_audit(classes: FacetClassification, lattices) -> dict:
    """Minimum pairwise distance of ``P_{V_l}(Gamma_j)`` for every ordered pair ``j != l``."""
    out = {}
    for g in lattices:
        for l, c in enumerate(classes.classes):
            if l == g.class_id:
                continue
            pts = g.points @ c.basis.T
            if len(pts) < 2:
                out[(g.class_id, l)] = math.inf
                continue
            dist, _ = cKDTree(pts).query(pts, k=2)
            out[(g.class_id, l)] = float(dist[:, 1].min())
    return out


def audit_passes(audit: dict, delta: float, rtol: float = 1e-9) -> bool:
    """True when every audited projection is delta-separated up to rounding."""
    return all(v >= delta * (1 - rtol) for v in audit.values())


def build_frame_spectrum(
    facets,
    N: int,
    delta: float = 0.1,
    window: float = 12.0,
    *,
    theta_min: float = 1e-3,
    trials: int = 1000,
    seed: int = 0,
    search_grid=DEFAULT_SEARCH,
) -> FrameConstruction:
    """Classify, build ``Gamma_j`` and ``A_j`` per class, and take the union of ``Gamma_j + A_j``."""
    classes = facets if isinstance(facets, FacetClassification) else classify_facets(facets)
    lattices, phases, freqs, tags = [], [], [], []
    for j in range(classes.m):
        omega = choose_direction(classes, j, trials, theta_min, seed)
        gamma = build_gamma(classes, j, omega, N, delta, window)
        alpha = build_alpha(classes, j, search_grid)
        lattices.append(gamma)
        phases.append(alpha)
        for s, a in enumerate(alpha.elements, start=1):
            freqs.append(gamma.points + a)
            tags.extend(
                Tag(j, tuple(int(v) for v in gamma.base[b]), s, int(c))
                for b, c in zip(gamma.base_index, gamma.shifts)
            )
    freqs = np.vstack(freqs)
    notes = list(classes.reductions)
    removed = 0
    dup = cKDTree(freqs).query_pairs(1e-12, output_type="ndarray")
    if len(dup):
        drop = np.zeros(len(freqs), dtype=bool)
        drop[np.unique(dup[:, 1])] = True
        removed = int(drop.sum())
        notes.append(f"{int(drop.sum())} coinciding frequencies across classes removed")
        freqs = freqs[~drop]
        tags = [t for t, k in zip(tags, drop) if not k]
    spectrum = Spectrum(freqs, tags, None, delta, window)
    eps = min(p.epsilon for p in phases)
    d = max(c.dim for c in classes.classes)
    cert = lower_bound_certificate(eps, N, classes.m, delta, classes.max_class_size, d)
    if any(np.any(np.abs(c.sides - 1) > 1e-9) for c in classes.classes):
        notes.append("certificate constant assumes unit cubes; classes with other side lengths present")
    return FrameConstruction(spectrum, classes, lattices, phases, cert, notes, removed)
