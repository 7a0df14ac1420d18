"""Surface measures as weighted point clouds, and their Fourier transforms.

Facet measures keep their tensor-product structure (``TensorPiece``) so the
exponential sums factor into one-dimensional sums; everything else goes
through a chunked direct summation.
"""

from __future__ import annotations

import functools
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import special

from .errors import AliasRisk, InvalidInput, ResolutionTooLow, TooCloseToOrigin, UnsupportedDimension
from .geometry import ConvexBody, Facet, dual_norm

NYQUIST_FACTOR = 4.0
_CHUNK = 1 << 22  # complex entries per temporary block


@dataclass(frozen=True, eq=False)
class TensorPiece:
    """Tensor-product rule on ``offset + sum_k s_k basis_k``.

    ``nodes[k]``/``weights[k]`` are the one-dimensional rule along axis k;
    the piece occupies ``points[start:start + size]`` in C order.
    """

    offset: np.ndarray
    basis: np.ndarray
    nodes: tuple
    weights: tuple
    sides: np.ndarray
    start: int = 0

    @property
    def size(self) -> int:
        return int(np.prod([len(n) for n in self.nodes]))

    def shifted(self, start: int) -> "TensorPiece":
        return TensorPiece(self.offset, self.basis, self.nodes, self.weights, self.sides, start)


@dataclass(frozen=True, eq=False)
class QuadratureMeasure:
    """Positive weights on points of R^d approximating a surface measure."""

    points: np.ndarray
    weights: np.ndarray
    provenance: str = "custom"
    resolution: float = math.inf
    pieces: tuple | None = field(default=None, repr=False)
    rebuild: object = field(default=None, repr=False)

    def __post_init__(self):
        p = np.atleast_2d(np.asarray(self.points, dtype=float))
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if p.shape[0] != w.size:
            raise InvalidInput("points and weights have different lengths")
        if w.size == 0:
            raise InvalidInput("empty measure")
        if np.any(w <= 0):
            raise InvalidInput("weights must be strictly positive")
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def total_mass(self) -> float:
        return float(math.fsum(self.weights))

    def __len__(self) -> int:
        return self.weights.size

    def at_resolution(self, resolution: float) -> "QuadratureMeasure":
        """The same underlying measure discretised at another resolution."""
        if self.rebuild is None:
            raise InvalidInput("this measure does not know how to rediscretise itself")
        return self.rebuild(resolution)

    def translated(self, v) -> "QuadratureMeasure":
        v = np.asarray(v, dtype=float)
        pieces = None
        if self.pieces is not None:
            pieces = tuple(
                TensorPiece(p.offset + v, p.basis, p.nodes, p.weights, p.sides, p.start) for p in self.pieces
            )
        rebuild = None
        if self.rebuild is not None:
            inner = self.rebuild
            rebuild = lambda res: inner(res).translated(v)  # noqa: E731
        return QuadratureMeasure(self.points + v, self.weights, self.provenance, self.resolution, pieces, rebuild)

    def to_dict(self) -> dict:
        doc = {
            "dimension": self.dim,
            "provenance": self.provenance,
            "resolution": None if math.isinf(self.resolution) else self.resolution,
            "points": self.points.tolist(),
            "weights": self.weights.tolist(),
        }
        if self.pieces is not None:
            doc["facets"] = [
                {"basis": p.basis.tolist(), "offset": p.offset.tolist(), "sides": p.sides.tolist()}
                for p in self.pieces
            ]
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "QuadratureMeasure":
        res = doc.get("resolution")
        if "facets" in doc and res is not None:
            from .geometry import polytope_from_dict

            m = polytope_quadrature(polytope_from_dict(doc), res)
            if len(m) == len(doc["weights"]) and np.allclose(m.points, doc["points"]):
                return m
        return cls(
            np.asarray(doc["points"], dtype=float),
            np.asarray(doc["weights"], dtype=float),
            doc.get("provenance", "custom"),
            math.inf if res is None else float(res),
        )


def save_measure(mu: QuadratureMeasure, path) -> None:
    Path(path).write_text(json.dumps(mu.to_dict()))


def load_measure(path) -> QuadratureMeasure:
    return QuadratureMeasure.from_dict(json.loads(Path(path).read_text()))


# --------------------------------------------------------------------------
# constructors


def _gauss(n: int, length: float):
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1) * (length / 2), w * (length / 2)


def facet_quadrature(f: Facet, resolution: float) -> QuadratureMeasure:
    """Tensor Gauss-Legendre rule on a box facet, ``resolution`` nodes per unit length."""
    if resolution < 2:
        raise ResolutionTooLow("need at least 2 nodes per unit length")
    rules = [_gauss(max(1, math.ceil(resolution * s - 1e-9)), s) for s in f.sides]
    nodes = tuple(r[0] for r in rules)
    weights = tuple(r[1] for r in rules)
    grids = np.meshgrid(*nodes, indexing="ij")
    local = np.stack([g.reshape(-1) for g in grids], axis=1)
    w = np.ones(local.shape[0])
    for k, g in enumerate(np.meshgrid(*weights, indexing="ij")):
        w = w * g.reshape(-1)
    pts = f.subspace.offset + local @ f.subspace.basis
    piece = TensorPiece(f.subspace.offset, f.subspace.basis, nodes, weights, f.sides)
    return QuadratureMeasure(
        pts, w, "facet grid", float(resolution), (piece,), functools.partial(facet_quadrature, f)
    )


def union(*measures: QuadratureMeasure) -> QuadratureMeasure:
    """Sum of measures (concatenated rules)."""
    if len(measures) == 1 and not isinstance(measures[0], QuadratureMeasure):
        measures = tuple(measures[0])
    pts = np.vstack([m.points for m in measures])
    w = np.concatenate([m.weights for m in measures])
    pieces, start = [], 0
    structured = all(m.pieces is not None for m in measures)
    for m in measures:
        if structured:
            pieces.extend(p.shifted(p.start + start) for p in m.pieces)
        start += len(m)
    prov = measures[0].provenance if len({m.provenance for m in measures}) == 1 else "mixed"
    res = min(m.resolution for m in measures)
    rebuild = None
    if all(m.rebuild is not None for m in measures):
        parts = [m.rebuild for m in measures]
        rebuild = lambda r: union(*[p(r) for p in parts])  # noqa: E731
    return QuadratureMeasure(pts, w, prov, res, tuple(pieces) if structured else None, rebuild)


def polytope_quadrature(facets, resolution: float) -> QuadratureMeasure:
    return union(*[facet_quadrature(f, resolution) for f in facets])


def sphere_quadrature(d: int, radius: float = 1.0, resolution: float = 16.0) -> QuadratureMeasure:
    """Surface measure of the radius-``radius`` sphere in R^d, d in {2, 3}.

    d = 2: equispaced trapezoid rule on the circle.  d = 3: Gauss-Legendre in
    cos(colatitude) times equispaced longitudes.
    """
    if d not in (2, 3):
        raise UnsupportedDimension("sphere quadrature supports d = 2, 3")
    if resolution <= 0 or radius <= 0:
        raise InvalidInput("radius and resolution must be positive")
    n_phi = max(8, math.ceil(resolution * 2 * math.pi * radius))
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    if d == 2:
        pts = radius * np.stack([np.cos(phi), np.sin(phi)], axis=1)
        w = np.full(n_phi, 2 * math.pi * radius / n_phi)
        return QuadratureMeasure(
            pts, w, "circle arc", float(resolution), None, functools.partial(sphere_quadrature, d, radius)
        )
    n_t = max(4, math.ceil(resolution * math.pi * radius))
    z, wz = np.polynomial.legendre.leggauss(n_t)
    zz, pp = np.meshgrid(z, phi, indexing="ij")
    s = np.sqrt(1 - zz**2)
    pts = radius * np.stack([s * np.cos(pp), s * np.sin(pp), zz], axis=-1).reshape(-1, 3)
    w = (radius**2 * np.outer(wz, np.full(n_phi, 2 * math.pi / n_phi))).reshape(-1)
    return QuadratureMeasure(
        pts, w, "sphere grid", float(resolution), None, functools.partial(sphere_quadrature, d, radius)
    )


def ellipse_quadrature(semi_axes, resolution: float = 16.0) -> QuadratureMeasure:
    """Arclength measure on the ellipse with the given semi-axes (trapezoid in angle)."""
    a, b = map(float, semi_axes)
    n = max(8, math.ceil(resolution * 2 * math.pi * max(a, b)))
    t = 2 * math.pi * np.arange(n) / n
    pts = np.stack([a * np.cos(t), b * np.sin(t)], axis=1)
    w = np.hypot(a * np.sin(t), b * np.cos(t)) * (2 * math.pi / n)
    return QuadratureMeasure(
        pts, w, "ellipse arc", float(resolution), None, functools.partial(ellipse_quadrature, (a, b))
    )


# --------------------------------------------------------------------------
# transforms


def required_resolution(freqs, factor: float = NYQUIST_FACTOR) -> float:
    freqs = np.atleast_2d(freqs)
    return factor * float(np.max(np.abs(freqs))) if freqs.size else 0.0


def check_nyquist(mu: QuadratureMeasure, freqs, factor: float = NYQUIST_FACTOR) -> bool:
    need = required_resolution(freqs, factor)
    if mu.resolution < need:
        warnings.warn(
            f"resolution {mu.resolution:g} below {need:g} nodes per unit length; "
            "exponential sums may alias",
            AliasRisk,
            stacklevel=3,
        )
        return False
    return True


def _piece_cross(piece: TensorPiece, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    out = np.outer(np.exp(-2j * np.pi * (P @ piece.offset)), np.exp(2j * np.pi * (Q @ piece.offset)))
    for b, s, w in zip(piece.basis, piece.nodes, piece.weights):
        sw = np.sqrt(w)
        left = np.exp(-2j * np.pi * np.outer(P @ b, s)) * sw
        right = np.exp(2j * np.pi * np.outer(s, Q @ b)) * sw[:, None]
        out *= left @ right
    return out


def cross_transform(mu: QuadratureMeasure, P, Q) -> np.ndarray:
    """Matrix ``sum_i w_i exp(-2 pi i p.x_i) exp(2 pi i q.x_i)`` = mu_hat(p - q)."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if mu.pieces is not None:
        out = np.zeros((len(P), len(Q)), dtype=complex)
        for piece in mu.pieces:
            out += _piece_cross(piece, P, Q)
        return out
    sw = np.sqrt(mu.weights)
    right = np.exp(2j * np.pi * (mu.points @ Q.T)) * sw[:, None]
    out = np.empty((len(P), len(Q)), dtype=complex)
    step = max(1, _CHUNK // max(1, len(mu)))
    for i in range(0, len(P), step):
        left = np.exp(-2j * np.pi * (P[i:i + step] @ mu.points.T)) * sw
        out[i:i + step] = left @ right
    return out


def fourier_transform(mu: QuadratureMeasure, xi, check: bool = True):
    """``mu_hat(xi) = sum_i w_i exp(-2 pi i xi.x_i)``.

    ``xi`` is one frequency (shape ``(d,)``) or a batch (``(m, d)``).  An
    :class:`AliasRisk` warning is issued when the rule is coarser than the
    Nyquist rule for the largest requested coordinate.
    """
    xi = np.asarray(xi, dtype=float)
    single = xi.ndim == 1
    X = np.atleast_2d(xi)
    if X.shape[1] != mu.dim:
        raise InvalidInput(f"frequency dimension {X.shape[1]} != measure dimension {mu.dim}")
    if check:
        check_nyquist(mu, X)
    if mu.pieces is not None:
        out = np.zeros(len(X), dtype=complex)
        for piece in mu.pieces:
            val = np.exp(-2j * np.pi * (X @ piece.offset))
            for b, s, w in zip(piece.basis, piece.nodes, piece.weights):
                val = val * (np.exp(-2j * np.pi * np.outer(X @ b, s)) @ w)
            out += val
    else:
        out = np.empty(len(X), dtype=complex)
        step = max(1, _CHUNK // len(mu))
        for i in range(0, len(X), step):
            out[i:i + step] = np.exp(-2j * np.pi * (X[i:i + step] @ mu.points.T)) @ mu.weights
    return out[0] if single else out


def bessel_j0(x):
    return special.j0(x)


def sphere_ft_closed_form(d: int, xi, radius: float = 1.0):
    """Transform of the surface measure of the radius-``radius`` sphere, d in {2, 3}."""
    if d not in (2, 3):
        raise UnsupportedDimension("closed form available for d = 2, 3")
    xi = np.asarray(xi, dtype=float)
    r = np.linalg.norm(xi, axis=-1) * radius
    if d == 2:
        out = 2 * np.pi * radius * special.j0(2 * np.pi * r)
    else:
        # 2 sin(2 pi r)/r written through sinc to stay finite at r = 0
        out = 4 * np.pi * radius**2 * np.sinc(2 * r)
    return out.astype(complex) if np.ndim(out) else complex(out)


# --------------------------------------------------------------------------
# stationary-phase leading term


@dataclass(frozen=True, eq=False)
class HerzAsymptotic:
    """Leading oscillatory term of the surface-measure transform of a smooth body.

    Implemented for balls and ellipsoids, which are centrally symmetric, so
    the two stationary points combine into one cosine with amplitude
    ``2 K^{-1/2}`` (K the Gaussian curvature at the point with normal
    ``xi/|xi|``).
    """

    body: ConvexBody

    def __post_init__(self):
        if self.body.kind not in ("ball", "ellipsoid"):
            raise InvalidInput("closed-form amplitude is available for balls and ellipsoids only")

    @property
    def dim(self) -> int:
        return self.body.dim

    @property
    def order(self) -> float:
        return (self.dim - 1) / 2

    @property
    def phase_shift(self) -> float:
        return (self.dim - 1) / 8

    def amplitude(self, direction) -> np.ndarray:
        u = np.asarray(direction, dtype=float)
        u = u / np.linalg.norm(u, axis=-1, keepdims=True)
        d = self.dim
        if self.body.kind == "ball":
            return np.full(u.shape[:-1], 2 * self.body.params[0] ** ((d - 1) / 2))
        a = self.body.params
        h = dual_norm(self.body, u)
        return 2 * np.prod(a) / h ** ((d + 1) / 2)


def herz_eval(h: HerzAsymptotic, xi):
    """``C(xi/|xi|) |xi|^{-(d-1)/2} cos(2 pi (rho*(xi) - (d-1)/8))`` for |xi| > 1."""
    xi = np.asarray(xi, dtype=float)
    r = np.linalg.norm(xi, axis=-1)
    if np.any(r <= 1):
        raise TooCloseToOrigin("leading term is only evaluated for |xi| > 1")
    val = h.amplitude(xi) * r ** (-h.order) * np.cos(2 * np.pi * (dual_norm(h.body, xi) - h.phase_shift))
    return val if np.ndim(val) else float(val)
