"""Convex bodies, flat facets and the gauge/support-function machinery.

Bodies are used for the curved side of the story (balls and ellipsoids
with closed-form support functions, plus polytope hulls), facets for the
flat side (boxes inside affine subspaces that make up a polytope boundary).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import ConvexHull
from scipy.spatial.distance import cdist

from .errors import DegenerateFacet, EmptyCap, HypothesisViolation, InvalidInput

SUBSPACE_TOL = 1e-9
ORTHO_TOL = 1e-12
MIN_SIDE = 1e-12


# --------------------------------------------------------------------------
# convex bodies


@dataclass(frozen=True, eq=False)
class ConvexBody:
    """A convex body containing the origin in its interior.

    ``kind`` is one of ``"ball"``, ``"ellipsoid"`` or ``"polytope"``.
    For balls ``params`` is ``(radius,)``, for ellipsoids the semi-axes,
    for polytopes the vertex array (``n x d``).
    """

    kind: str
    params: np.ndarray
    dim: int
    _hull: ConvexHull | None = field(default=None, repr=False, compare=False)

    @classmethod
    def ball(cls, dim: int, radius: float = 1.0) -> "ConvexBody":
        if dim < 2:
            raise InvalidInput("dimension must be >= 2")
        if radius <= 0:
            raise InvalidInput("radius must be positive")
        return cls("ball", np.array([float(radius)]), int(dim))

    @classmethod
    def ellipsoid(cls, semi_axes) -> "ConvexBody":
        a = np.asarray(semi_axes, dtype=float)
        if a.ndim != 1 or a.size < 2:
            raise InvalidInput("ellipsoid needs at least two semi-axes")
        if np.any(a <= 0):
            raise InvalidInput("semi-axes must be strictly positive")
        return cls("ellipsoid", a, a.size)

    @classmethod
    def polytope(cls, vertices) -> "ConvexBody":
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] < 2 or v.shape[0] <= v.shape[1]:
            raise InvalidInput("polytope needs more than d vertices in R^d, d >= 2")
        hull = ConvexHull(v)
        # equations: n.x + c <= 0 inside, origin interior <=> c < 0
        if np.any(hull.equations[:, -1] >= -1e-12):
            raise InvalidInput("origin must lie in the interior of the hull")
        return cls("polytope", v[hull.vertices], v.shape[1], hull)

    @property
    def inradius(self) -> float:
        if self.kind == "ball":
            return float(self.params[0])
        if self.kind == "ellipsoid":
            return float(self.params.min())
        return float(np.min(-self._hull.equations[:, -1]))

    @property
    def circumradius(self) -> float:
        if self.kind == "ball":
            return float(self.params[0])
        if self.kind == "ellipsoid":
            return float(self.params.max())
        return float(np.max(np.linalg.norm(self.params, axis=1)))

    def norm_constant(self) -> float:
        """C_K >= 1 with |x|/C_K <= dual_norm(x) <= C_K |x|."""
        return max(1.0, self.circumradius, 1.0 / self.inradius)

    def support_lipschitz(self) -> float:
        """Lipschitz constant of the support function (the circumradius)."""
        return self.circumradius


def minkowski_functional(body: ConvexBody, x) -> np.ndarray | float:
    """Gauge inf{t > 0 : x/t in K}; vectorised over the last axis."""
    x = np.asarray(x, dtype=float)
    if body.kind == "ball":
        out = np.linalg.norm(x, axis=-1) / body.params[0]
    elif body.kind == "ellipsoid":
        out = np.sqrt(np.sum((x / body.params) ** 2, axis=-1))
    else:
        eq = body._hull.equations
        normals, offs = eq[:, :-1], -eq[:, -1]
        out = np.max(np.maximum(x @ normals.T / offs, 0.0), axis=-1)
    return out if np.ndim(out) else float(out)


def dual_norm(body: ConvexBody, xi) -> np.ndarray | float:
    """Support function sup_{x in K} x.xi; vectorised over the last axis.

    Exact for every supported kind: closed form for balls and ellipsoids,
    a max over vertices for polytopes.
    """
    xi = np.asarray(xi, dtype=float)
    if body.kind == "ball":
        out = body.params[0] * np.linalg.norm(xi, axis=-1)
    elif body.kind == "ellipsoid":
        out = np.sqrt(np.sum((body.params * xi) ** 2, axis=-1))
    else:
        out = np.max(xi @ body.params.T, axis=-1)
    return out if np.ndim(out) else float(out)


# --------------------------------------------------------------------------
# subspaces and facets


@dataclass(frozen=True, eq=False)
class AffineSubspace:
    """``offset + span(basis)``; ``basis`` holds k orthonormal rows in R^d."""

    basis: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.basis, dtype=float))
        o = np.asarray(self.offset, dtype=float).reshape(-1)
        if b.shape[1] != o.size:
            raise InvalidInput("basis and offset dimensions disagree")
        if not 0 < b.shape[0] <= b.shape[1]:
            raise InvalidInput("subspace dimension must satisfy 0 < k <= d")
        if np.max(np.abs(b @ b.T - np.eye(b.shape[0]))) > ORTHO_TOL:
            raise InvalidInput("basis vectors must be orthonormal")
        object.__setattr__(self, "basis", b)
        object.__setattr__(self, "offset", o)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis.T @ self.basis

    def complement(self) -> np.ndarray:
        """Orthonormal basis (rows) of the orthogonal complement of the direction."""
        return orthogonal_complement(self.basis)


def orthogonal_complement(basis) -> np.ndarray:
    basis = np.atleast_2d(basis)
    d = basis.shape[1]
    if basis.shape[0] == d:
        return np.zeros((0, d))
    u, s, vt = np.linalg.svd(basis)
    return vt[basis.shape[0]:]


def project(V, x) -> np.ndarray:
    """Orthogonal projection of ``x`` (rows) onto the direction space of ``V``.

    ``V`` is an :class:`AffineSubspace` or an array of orthonormal rows.
    """
    basis = V.basis if isinstance(V, AffineSubspace) else np.atleast_2d(V)
    x = np.asarray(x, dtype=float)
    return (x @ basis.T) @ basis


@dataclass(frozen=True, eq=False)
class Facet:
    """Box ``{offset + sum t_i b_i : 0 <= t_i <= side_i}`` in an affine subspace."""

    subspace: AffineSubspace
    sides: np.ndarray
    class_id: int | None = None

    def __post_init__(self):
        s = np.asarray(self.sides, dtype=float).reshape(-1)
        if s.size != self.subspace.dim:
            raise InvalidInput("need one side length per basis vector")
        if np.any(s < MIN_SIDE):
            raise DegenerateFacet(f"side lengths must be >= {MIN_SIDE}")
        object.__setattr__(self, "sides", s)

    @classmethod
    def from_arrays(cls, basis, offset, sides, class_id=None) -> "Facet":
        return cls(AffineSubspace(basis, offset), sides, class_id)

    @property
    def dim(self) -> int:
        return self.subspace.dim

    @property
    def ambient_dim(self) -> int:
        return self.subspace.ambient_dim

    @property
    def translation(self) -> np.ndarray:
        return self.subspace.offset

    @property
    def volume(self) -> float:
        return float(np.prod(self.sides))

    def corners(self) -> np.ndarray:
        b, o = self.subspace.basis, self.subspace.offset
        ts = np.array(list(itertools.product(*[(0.0, s) for s in self.sides])))
        return o + ts @ b

    def contains(self, x, tol: float = 1e-9) -> np.ndarray:
        x = np.atleast_2d(x) - self.subspace.offset
        c = x @ self.subspace.basis.T
        resid = np.linalg.norm(x - c @ self.subspace.basis, axis=1)
        inside = np.all((c >= -tol) & (c <= self.sides + tol), axis=1)
        return inside & (resid <= tol)


# --------------------------------------------------------------------------
# classification into translate classes


@dataclass
class FacetClass:
    """One translate class: ``Q_j + {tau_j^1, ...}`` with ``Q_j`` a box at the origin."""

    basis: np.ndarray
    sides: np.ndarray
    translations: np.ndarray
    members: list

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def size(self) -> int:
        return self.translations.shape[0]

    def perp_basis(self) -> np.ndarray:
        return orthogonal_complement(self.basis)

    def facets(self) -> list:
        return [Facet.from_arrays(self.basis, t, self.sides) for t in self.translations]


@dataclass
class FacetClassification:
    classes: list
    labels: np.ndarray
    dim: int
    violations: list = field(default_factory=list)
    reductions: list = field(default_factory=list)

    @property
    def m(self) -> int:
        return len(self.classes)

    @property
    def valid(self) -> bool:
        return not self.violations

    @property
    def max_class_size(self) -> int:
        return max(c.size for c in self.classes)


def _same_direction(b1, b2) -> bool:
    if b1.shape != b2.shape:
        return False
    return np.linalg.norm(b1.T @ b1 - b2.T @ b2, 2) < SUBSPACE_TOL


def _contained(small, big) -> bool:
    return np.max(np.abs(small - small @ big.T @ big)) < SUBSPACE_TOL


def classify_facets(facets, strict: bool = True) -> FacetClassification:
    """Partition facets into classes of parallel translates.

    Parallel facets lying in one affine subspace are merged into their
    common bounding box, and all boxes of a direction class are enlarged to
    a common shape, so that each class is ``Q_j + {tau_j^l}`` with distinct
    affine subspaces.  A frame for the enlarged boxes restricts to a frame
    for the originals.  Both structural hypotheses are checked; with
    ``strict`` a violation raises :class:`HypothesisViolation`.
    """
    facets = list(facets)
    if not facets:
        raise InvalidInput("need at least one facet")
    d = facets[0].ambient_dim
    if any(f.ambient_dim != d for f in facets):
        raise InvalidInput("facets live in different ambient dimensions")

    groups: list[list[int]] = []
    for i, f in enumerate(facets):
        for g in groups:
            if _same_direction(facets[g[0]].subspace.basis, f.subspace.basis):
                g.append(i)
                break
        else:
            groups.append([i])

    classes, reductions = [], []
    labels = np.empty(len(facets), dtype=int)
    for j, g in enumerate(groups):
        b0 = facets[g[0]].subspace.basis
        proj = b0.T @ b0
        clusters: list[dict] = []
        for i in g:
            f = facets[i]
            corners = f.corners()
            perp = f.translation - f.translation @ proj
            coords = corners @ b0.T
            for c in clusters:
                if np.linalg.norm(c["perp"] - perp) < SUBSPACE_TOL:
                    c["lo"] = np.minimum(c["lo"], coords.min(0))
                    c["hi"] = np.maximum(c["hi"], coords.max(0))
                    c["members"].append(i)
                    reductions.append(f"facets {c['members']} share an affine subspace; merged")
                    break
            else:
                clusters.append({"perp": perp, "lo": coords.min(0), "hi": coords.max(0), "members": [i]})
        spans = np.array([c["hi"] - c["lo"] for c in clusters])
        sides = spans.max(axis=0)
        if np.any(np.abs(spans - sides) > SUBSPACE_TOL):
            reductions.append(f"class {j}: boxes enlarged to common sides {sides.tolist()}")
        taus = np.array([c["perp"] + c["lo"] @ b0 for c in clusters])
        members = [c["members"] for c in clusters]
        classes.append(FacetClass(b0.copy(), sides, taus, members))
        labels[g] = j

    violations = []
    for a, b in itertools.permutations(range(len(classes)), 2):
        ca, cb = classes[a], classes[b]
        if ca.dim > cb.dim and _contained(cb.basis, ca.basis):
            violations.append(
                f"class {b} (dim {cb.dim}) has a translate inside the span of class {a} (dim {ca.dim})"
            )
    out = FacetClassification(classes, labels, d, violations, reductions)
    if strict and violations:
        raise HypothesisViolation("; ".join(violations))
    return out


# --------------------------------------------------------------------------
# common boundaries


def polygon_boundary(vertices) -> list:
    """Segment facets of a closed polygon given by its vertices in order."""
    v = np.asarray(vertices, dtype=float)
    out = []
    for a, b in zip(v, np.roll(v, -1, axis=0)):
        e = b - a
        length = np.linalg.norm(e)
        out.append(Facet.from_arrays(e / length, a, [length]))
    return out


def equilateral_triangle(side: float = 1.0) -> list:
    return polygon_boundary(side * np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]]))


def unit_square_boundary() -> list:
    return polygon_boundary([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def box_boundary(sides) -> list:
    """The 2d faces of an axis-parallel box ``[0, s_1] x ... x [0, s_d]``."""
    s = np.asarray(sides, dtype=float)
    d = s.size
    eye = np.eye(d)
    out = []
    for axis in range(d):
        keep = [i for i in range(d) if i != axis]
        for level in (0.0, s[axis]):
            out.append(Facet.from_arrays(eye[keep], level * eye[axis], s[keep]))
    return out


# --------------------------------------------------------------------------
# JSON


def polytope_to_dict(facets) -> dict:
    return {
        "dimension": int(facets[0].ambient_dim),
        "facets": [
            {
                "basis": f.subspace.basis.tolist(),
                "offset": f.subspace.offset.tolist(),
                "sides": f.sides.tolist(),
            }
            for f in facets
        ],
    }


def polytope_from_dict(doc: dict) -> list:
    try:
        d = int(doc["dimension"])
        out = []
        for k, item in enumerate(doc["facets"]):
            b = np.atleast_2d(np.asarray(item["basis"], dtype=float))
            norms = np.linalg.norm(b, axis=1, keepdims=True)
            if np.any(norms == 0):
                raise InvalidInput(f"facet {k}: zero basis vector")
            # repair rounding in hand-written files; orthogonality is still enforced
            q, r = np.linalg.qr((b / norms).T)
            q = q.T * np.sign(np.diag(r))[:, None]
            if np.max(np.abs(q - b / norms)) > 1e-6:
                raise InvalidInput(f"facet {k}: basis is not orthonormal")
            f = Facet.from_arrays(q, item["offset"], item["sides"])
            if f.ambient_dim != d:
                raise InvalidInput(f"facet {k}: expected dimension {d}")
            out.append(f)
    except KeyError as exc:
        raise InvalidInput(f"missing field {exc}") from None
    return out


def load_polytope(path) -> list:
    return polytope_from_dict(json.loads(Path(path).read_text()))


def save_polytope(facets, path) -> None:
    Path(path).write_text(json.dumps(polytope_to_dict(facets), indent=2))


# --------------------------------------------------------------------------
# level-set caps


def _cap_directions(center: np.ndarray, half_angle: float, n: int) -> np.ndarray:
    d = center.size
    if d == 2:
        a0 = np.arctan2(center[1], center[0])
        ang = a0 + np.linspace(-half_angle, half_angle, n)
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    if d == 3:
        # Fibonacci points on the spherical cap around the north pole, then rotated
        i = np.arange(n) + 0.5
        z = 1 - (1 - np.cos(half_angle)) * i / n
        phi = np.pi * (1 + 5**0.5) * i
        rr = np.sqrt(np.clip(1 - z**2, 0, None))
        pts = np.stack([rr * np.cos(phi), rr * np.sin(phi), z], axis=1)
        c = center / np.linalg.norm(center)
        frame = np.vstack([orthogonal_complement(c[None, :]), c])
        if np.linalg.det(frame) < 0:
            frame[0] *= -1
        return pts @ frame
    raise InvalidInput("cap sampling is implemented for d = 2, 3")


def _diameter(points: np.ndarray) -> float:
    if len(points) < 2:
        return 0.0
    try:
        idx = ConvexHull(points, qhull_options="QJ").vertices
        pts = points[idx]
    except Exception:
        pts = points
    best = 0.0
    step = max(1, 2_000_000 // len(pts))
    for i in range(0, len(pts), step):
        best = max(best, float(np.max(cdist(pts[i:i + step], pts))))
    return best


def cap_diameter(body: ConvexBody, lam, t: float, r: float | None = None, samples: int = 10_000) -> float:
    """Sampled diameter of ``B_r(lam) ∩ {xi : dual_norm(xi) = t}``.

    Rays from the origin are shot through a cone around ``lam`` wide enough
    to contain the whole ball; the level-set point on each ray follows from
    homogeneity of the support function.  The result is a lower bound on
    the true diameter.  ``r`` defaults to ``2 * C_K``.
    """
    lam = np.asarray(lam, dtype=float)
    if np.linalg.norm(lam) <= 0 or t <= 0:
        raise InvalidInput("need |lam| > 0 and t > 0")
    if r is None:
        r = 2 * body.norm_constant()
    dist = np.linalg.norm(lam)
    half = np.pi if dist <= r else np.arcsin(r / dist) * 1.0001
    dirs = _cap_directions(lam, min(half, np.pi), samples)
    pts = dirs * (t / dual_norm(body, dirs))[:, None]
    pts = pts[np.linalg.norm(pts - lam, axis=1) <= r]
    if len(pts) == 0:
        raise EmptyCap(f"level set {t} does not meet B_{r}({lam.tolist()})")
    return _diameter(pts)
