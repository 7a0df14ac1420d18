"""Group-averaged eigenbases on the sphere (and a flat-torus cross-check).

If a finite isometry group ``G`` tiles ``S^2`` by a domain ``D``, the
averaging operator ``P f = mean_{g in G} f o g`` maps each spherical-harmonic
space ``E_l`` into itself and is an orthogonal projection there.  Its fixed
vectors, restricted to ``D``, form an orthogonal basis of ``L^2(D)``.

Harmonics are real, orthonormal on ``S^2`` and free of the Condon-Shortley
phase; coordinates in ``E_l`` are ordered ``m = -l, ..., l``:

* ``m > 0``: ``sqrt(2) N_l^m P_l^m(cos theta) cos(m phi)``
* ``m = 0``: ``N_l^0 P_l(cos theta)``
* ``m < 0``: ``sqrt(2) N_l^|m| P_l^|m|(cos theta) sin(|m| phi)``

with ``P_l^m >= 0`` near the north pole for ``m >= 0``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import GridTooCoarse, InvalidInput, NotIdempotent

GROUP_TOL = 1e-12
FORBIDDEN = (0.01, 0.99)


# --------------------------------------------------------------------------
# groups


def _rot_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


@dataclass(frozen=True, eq=False)
class IsometryGroup:
    """Finite group of orthogonal 3x3 matrices, checked exhaustively on construction."""

    elements: tuple
    name: str = "custom"

    def __post_init__(self):
        els = tuple(np.asarray(g, dtype=float).reshape(3, 3) for g in self.elements)
        object.__setattr__(self, "elements", els)
        eye = np.eye(3)
        for g in els:
            if np.max(np.abs(g.T @ g - eye)) > GROUP_TOL:
                raise InvalidInput("group elements must be orthogonal")
        if self.index(eye) is None:
            raise InvalidInput("group must contain the identity")
        for g in els:
            if self.index(g.T) is None:
                raise InvalidInput("group is not closed under inverses")
        for g, h in itertools.product(els, repeat=2):
            if self.index(g @ h) is None:
                raise InvalidInput("group is not closed under products")

    @property
    def order(self) -> int:
        return len(self.elements)

    def index(self, g) -> int | None:
        for i, h in enumerate(self.elements):
            if np.max(np.abs(h - g)) <= GROUP_TOL * 10:
                return i
        return None

    def is_abelian(self) -> bool:
        return all(np.allclose(g @ h, h @ g, atol=GROUP_TOL) for g, h in itertools.combinations(self.elements, 2))

    @classmethod
    def generate(cls, generators, name: str = "custom", max_order: int = 10_000) -> "IsometryGroup":
        """Closure of ``generators`` under multiplication."""
        gens = [np.asarray(g, dtype=float) for g in generators]
        els = [np.eye(3)]
        frontier = [np.eye(3)]
        while frontier:
            new = []
            for a in frontier:
                for g in gens:
                    p = a @ g
                    if not any(np.max(np.abs(p - e)) <= 1e-10 for e in els):
                        els.append(p)
                        new.append(p)
                        if len(els) > max_order:
                            raise InvalidInput("generators do not produce a small finite group")
            frontier = new
        return cls(tuple(els), name)


def dihedral_group(n: int) -> IsometryGroup:
    """``{sigma^k, sigma^k tau}``: rotations by ``2 pi k / n`` about z and half-turns about horizontal axes."""
    if n < 2:
        raise InvalidInput("dihedral group needs n >= 2")
    tau = np.diag([1.0, -1.0, -1.0])
    rots = [_rot_z(2 * math.pi * k / n) for k in range(n)]
    return IsometryGroup(tuple(rots + [r @ tau for r in rots]), f"dihedral-{n}")


def cyclic_group(n: int) -> IsometryGroup:
    if n < 1:
        raise InvalidInput("cyclic group needs n >= 1")
    return IsometryGroup(tuple(_rot_z(2 * math.pi * k / n) for k in range(n)), f"cyclic-{n}")


def trivial_group() -> IsometryGroup:
    return IsometryGroup((np.eye(3),), "trivial")


def parse_group(spec: str) -> IsometryGroup:
    """``"dihedral:3"``, ``"cyclic:4"`` or ``"trivial"``."""
    kind, _, arg = spec.partition(":")
    if kind == "trivial":
        return trivial_group()
    try:
        n = int(arg)
    except ValueError:
        raise InvalidInput(f"cannot parse group {spec!r}") from None
    if kind == "dihedral":
        return dihedral_group(n)
    if kind == "cyclic":
        return cyclic_group(n)
    raise InvalidInput(f"unknown group kind {kind!r}")


def rotation_angle(g) -> float:
    """Rotation angle of a proper rotation, from its trace."""
    return math.acos(max(-1.0, min(1.0, (np.trace(g) - 1) / 2)))


def character(l: int, angle: float) -> float:
    """Character of ``E_l`` at a rotation by ``angle``: ``sin((2l+1)a/2) / sin(a/2)``."""
    if abs(math.sin(angle / 2)) < 1e-12:
        return float(2 * l + 1)
    return math.sin((2 * l + 1) * angle / 2) / math.sin(angle / 2)


# --------------------------------------------------------------------------
# real spherical harmonics


def to_angles(x):
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    theta = np.arccos(np.clip(x[..., 2] / r, -1.0, 1.0))
    phi = np.arctan2(x[..., 1], x[..., 0])
    return theta, phi


def real_harmonics(l: int, x) -> np.ndarray:
    """Values of ``Y_{l,-l..l}`` at unit vectors ``x`` (``n x 3``); returns ``n x (2l+1)``."""
    theta, phi = to_angles(np.atleast_2d(x))
    ms = np.arange(0, l + 1)
    # scipy includes (-1)^m; remove it
    Y = special.sph_harm_y(l, ms[None, :], theta[:, None], phi[:, None]) * ((-1.0) ** ms)[None, :]
    out = np.empty((theta.size, 2 * l + 1))
    out[:, l] = Y[:, 0].real
    out[:, l + 1:] = math.sqrt(2) * Y[:, 1:].real
    out[:, :l] = (math.sqrt(2) * Y[:, 1:].imag)[:, ::-1]
    return out


def sphere_grid(n_theta: int, n_phi: int):
    """Gauss-Legendre in ``cos theta`` times uniform longitude; returns points and weights."""
    ct, wt = np.polynomial.legendre.leggauss(n_theta)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    st = np.sqrt(1 - ct**2)
    pts = np.stack(
        [np.outer(st, np.cos(phi)), np.outer(st, np.sin(phi)), np.repeat(ct[:, None], n_phi, axis=1)], axis=-1
    ).reshape(-1, 3)
    w = np.outer(wt, np.full(n_phi, 2 * np.pi / n_phi)).reshape(-1)
    return pts, w


def _grid_for(l, grid):
    return sphere_grid(l + 1, 2 * l + 2) if grid is None else grid


def character_trace(g, l: int, grid=None) -> float:
    """Trace of ``f -> f o g`` on ``E_l``, by quadrature."""
    pts, w = _grid_for(l, grid)
    Y = real_harmonics(l, pts)
    Yg = real_harmonics(l, pts @ np.asarray(g).T)
    return float(np.einsum("n,nm,nm->", w, Yg, Y))


def projector_matrix(G: IsometryGroup, l: int, grid=None) -> np.ndarray:
    """Matrix of the averaging operator on ``E_l`` in the real-harmonic basis.

    Entry ``(m, m')`` is ``<P Y_m', Y_m>``, with ``Y o g`` evaluated
    pointwise on a grid exact for degree ``2l`` products.
    """
    if l < 0:
        raise InvalidInput("degree must be nonnegative")
    pts, w = _grid_for(l, grid)
    Y = real_harmonics(l, pts)
    ident = (Y * w[:, None]).T @ Y
    err = float(np.max(np.abs(ident - np.eye(2 * l + 1))))
    if err > 1e-9:
        raise GridTooCoarse(f"degree {l}: harmonic Gram deviates from identity by {err:.3g}")
    avg = np.zeros_like(Y)
    for g in G.elements:
        avg += real_harmonics(l, pts @ g.T)
    avg /= G.order
    return (Y * w[:, None]).T @ avg


def fixed_subspace(pmat, symmetric_tol: float = 1e-8):
    """Orthonormal eigenvalue-1 eigenvectors of a projector matrix, and their count.

    Vectors are rows, sign-normalised so their largest entry is positive.
    """
    P = np.asarray(pmat, dtype=float)
    if np.max(np.abs(P - P.T), initial=0.0) > symmetric_tol:
        raise NotIdempotent("projector matrix is not symmetric")
    ev, vec = np.linalg.eigh(0.5 * (P + P.T))
    bad = (ev > FORBIDDEN[0]) & (ev < FORBIDDEN[1])
    if np.any(bad):
        raise NotIdempotent(f"eigenvalues {ev[bad].tolist()} are neither 0 nor 1")
    V = vec[:, ev >= 0.5].T
    for row in V:
        k = np.argmax(np.abs(row))
        if row[k] < 0:
            row *= -1
    return V, int(V.shape[0])


@dataclass
class ProjectedEigenbasis:
    group: IsometryGroup
    lmax: int
    projectors: list
    vectors: list
    dims: list
    traces: list = field(default_factory=list)

    @property
    def size(self) -> int:
        return int(sum(self.dims))

    def degrees(self) -> np.ndarray:
        return np.concatenate([np.full(d, l) for l, d in enumerate(self.dims)]).astype(int)

    def evaluate(self, x) -> np.ndarray:
        """All fixed basis functions at the points ``x``; columns ordered by degree."""
        cols = [real_harmonics(l, x) @ V.T for l, V in enumerate(self.vectors) if V.shape[0]]
        return np.hstack(cols) if cols else np.zeros((np.atleast_2d(x).shape[0], 0))

    def to_dict(self) -> dict:
        return {
            "group": self.group.name,
            "order": self.group.order,
            "lmax": self.lmax,
            "convention": "real spherical harmonics, no Condon-Shortley phase, m = -l..l",
            "degrees": [
                {"l": l, "dimension": d, "projector": P.tolist(), "vectors": V.tolist()}
                for l, (d, P, V) in enumerate(zip(self.dims, self.projectors, self.vectors))
            ],
        }


def projected_eigenbasis(G: IsometryGroup, lmax: int) -> ProjectedEigenbasis:
    """Projector, fixed vectors and fixed dimension for every degree ``l <= lmax``."""
    if lmax < 0:
        raise InvalidInput("lmax must be nonnegative")
    Ps, Vs, dims, traces = [], [], [], []
    for l in range(lmax + 1):
        P = projector_matrix(G, l)
        if np.max(np.abs(P @ P - P)) > 1e-8 or np.max(np.abs(P - P.T)) > 1e-10:
            raise NotIdempotent(f"degree {l}: averaging matrix is not an orthogonal projection")
        V, d = fixed_subspace(P)
        tr = float(np.trace(P))
        if abs(tr - d) > 1e-6:
            raise NotIdempotent(f"degree {l}: trace {tr} disagrees with fixed dimension {d}")
        Ps.append(P)
        Vs.append(V)
        dims.append(d)
        traces.append(tr)
    return ProjectedEigenbasis(G, lmax, Ps, Vs, dims, traces)


# --------------------------------------------------------------------------
# fundamental domains


@dataclass(frozen=True, eq=False)
class WedgeDomain:
    """A candidate fundamental domain on ``S^2``.

    ``kind="wedge"``: upper hemisphere with longitude in ``[0, 2 pi / n)``;
    ``kind="sphere"``: all of ``S^2``; ``kind="custom"``: any indicator.
    """

    kind: str
    n: int = 1
    indicator_fn: object = None

    @classmethod
    def wedge(cls, n: int) -> "WedgeDomain":
        if n < 1:
            raise InvalidInput("wedge needs n >= 1")
        return cls("wedge", n)

    @classmethod
    def sphere(cls) -> "WedgeDomain":
        return cls("sphere")

    @classmethod
    def custom(cls, indicator) -> "WedgeDomain":
        return cls("custom", indicator_fn=indicator)

    def indicator(self, x) -> np.ndarray:
        x = np.atleast_2d(x)
        if self.kind == "sphere":
            return np.ones(len(x), dtype=bool)
        if self.kind == "custom":
            return np.asarray(self.indicator_fn(x), dtype=bool)
        phi = np.mod(np.arctan2(x[:, 1], x[:, 0]), 2 * np.pi)
        return (x[:, 2] >= 0) & (phi < 2 * np.pi / self.n)

    @property
    def area(self) -> float:
        if self.kind == "wedge":
            return 2 * np.pi / self.n
        if self.kind == "sphere":
            return 4 * np.pi
        pts = fibonacci_sphere(100_000)
        return 4 * np.pi * float(np.mean(self.indicator(pts)))

    def quadrature(self, n: int):
        """Product rule on the domain: Gauss-Legendre in colatitude and in longitude for wedges."""
        if self.kind == "sphere":
            return sphere_grid(n, 2 * n)
        if self.kind != "wedge":
            raise InvalidInput("quadrature is available for wedge and sphere domains")
        t, wt = np.polynomial.legendre.leggauss(n)
        theta = 0.25 * np.pi * (t + 1)
        wth = 0.25 * np.pi * wt * np.sin(theta)
        span = 2 * np.pi / self.n
        phi = 0.5 * span * (t + 1)
        wph = 0.5 * span * wt
        st = np.sin(theta)
        pts = np.stack(
            [np.outer(st, np.cos(phi)), np.outer(st, np.sin(phi)), np.repeat(np.cos(theta)[:, None], n, axis=1)],
            axis=-1,
        ).reshape(-1, 3)
        return pts, np.outer(wth, wph).reshape(-1)


def fibonacci_sphere(n: int) -> np.ndarray:
    i = np.arange(n) + 0.5
    z = 1 - 2 * i / n
    phi = np.pi * (1 + 5**0.5) * i
    r = np.sqrt(1 - z**2)
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


@dataclass
class TilingReport:
    overlap: float
    coverage: float
    area_ratio: float
    samples: int

    @property
    def passed(self) -> bool:
        return self.overlap < 1e-3 and self.coverage > 1 - 1e-3


def tiling_check(D: WedgeDomain, G: IsometryGroup, samples: int = 100_000) -> TilingReport:
    """Estimate pairwise overlap of the images ``g D`` and the fraction of ``S^2`` they cover."""
    if samples < 100_000:
        raise InvalidInput("tiling_check needs at least 1e5 samples")
    x = fibonacci_sphere(samples)
    # x in g D  <=>  g^{-1} x in D
    member = np.stack([D.indicator(x @ g) for g in G.elements])
    overlap = 0.0
    for a, b in itertools.combinations(range(G.order), 2):
        overlap = max(overlap, float(np.mean(member[a] & member[b])))
    coverage = float(np.mean(member.any(axis=0)))
    return TilingReport(overlap, coverage, G.order * D.area / (4 * np.pi), samples)


@dataclass
class BasisVerification:
    gram: np.ndarray
    offdiag_max: float
    diag_min: float
    diag_max: float
    expected_diag: float
    reconstruction_error: float
    invariance_error: float

    def to_dict(self) -> dict:
        return {
            "offdiag_max": self.offdiag_max,
            "diag_min": self.diag_min,
            "diag_max": self.diag_max,
            "expected_diag": self.expected_diag,
            "reconstruction_error": self.reconstruction_error,
            "invariance_error": self.invariance_error,
        }


def _random_polynomial(rng, degree: int):
    exps = [(a, b, c) for a in range(degree + 1) for b in range(degree + 1 - a) for c in range(degree + 1 - a - b)]
    coef = rng.standard_normal(len(exps))
    A, B, C = np.array(exps).T

    def f(x):
        pw = x[:, :, None] ** np.arange(degree + 1)
        return (pw[:, 0, A] * pw[:, 1, B] * pw[:, 2, C]) @ coef

    return f


def group_average(G: IsometryGroup, f):
    return lambda x: sum(f(x @ g.T) for g in G.elements) / G.order


def verify_basis(
    D: WedgeDomain,
    basis: ProjectedEigenbasis,
    trials: int = 20,
    seed: int = 0,
    nodes: int | None = None,
) -> BasisVerification:
    """Gram matrix over ``D``, reconstruction of invariant polynomials, and invariance of the basis."""
    n = nodes or 2 * basis.lmax + 40
    pts, w = D.quadrature(n)
    E = basis.evaluate(pts)
    gram = (E * w[:, None]).T @ E
    off = gram - np.diag(np.diag(gram))
    rng = np.random.default_rng(seed)
    weighted = E * w[:, None]
    diag = np.diag(gram)
    recon = 0.0
    for _ in range(trials):
        f = group_average(basis.group, _random_polynomial(rng, basis.lmax))
        vals = f(pts)
        coef = (weighted.T @ vals) / diag
        recon = max(recon, float(np.max(np.abs(E @ coef - vals)) / max(np.max(np.abs(vals)), 1e-300)))
    probe = fibonacci_sphere(1000)
    base = basis.evaluate(probe)
    inv = max(float(np.max(np.abs(basis.evaluate(probe @ g.T) - base), initial=0.0)) for g in basis.group.elements)
    return BasisVerification(
        gram,
        float(np.max(np.abs(off), initial=0.0)),
        float(diag.min()) if diag.size else 0.0,
        float(diag.max()) if diag.size else 0.0,
        1.0 / basis.group.order,
        recon,
        inv,
    )


# --------------------------------------------------------------------------
# flat torus R^2 / Z^2 with a group of rational translations


@dataclass
class TorusBasis:
    translations: np.ndarray
    modes: np.ndarray
    projector_diag: np.ndarray
    fixed: np.ndarray


def torus_fixed_modes(translations, K: int, grid: int | None = None) -> TorusBasis:
    """Fixed exponentials ``e^{2 pi i k.x}`` (``|k|_inf <= K``) of the averaging operator.

    ``translations`` lists the group elements (including zero).  The
    projector diagonal ``<P e_k, e_k>`` is computed by pointwise composition
    on a uniform grid, which is exact for these trigonometric polynomials.
    """
    t = np.atleast_2d(np.asarray(translations, dtype=float))
    n = grid or 4 * K + 4
    g1 = np.arange(n) / n
    X = np.stack(np.meshgrid(g1, g1, indexing="ij"), axis=-1).reshape(-1, 2)
    ax = np.arange(-K, K + 1)
    modes = np.stack(np.meshgrid(ax, ax, indexing="ij"), axis=-1).reshape(-1, 2)
    diag = np.empty(len(modes))
    for i, k in enumerate(modes):
        e = np.exp(2j * np.pi * X @ k)
        avg = np.mean([np.exp(2j * np.pi * (X + s) @ k) for s in t], axis=0)
        diag[i] = float(np.real(np.vdot(e, avg)) / len(X))
    if np.any((diag > FORBIDDEN[0]) & (diag < FORBIDDEN[1])):
        raise NotIdempotent("torus projector has eigenvalues away from 0 and 1")
    return TorusBasis(t, modes, diag, modes[diag > 0.5])
