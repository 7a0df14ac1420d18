"""Frame and Bessel bound estimation for a (measure, frequency set) pair.

For a finite test space ``span{f_1..f_p}`` in L^2(mu) the frame sum
``sum_lambda |<f, e_lambda>|^2`` is the quadratic form ``c* T* T c`` with
``T[lambda, q] = <f_q, e_lambda>``; the norm is ``c* G c``.  The extremal
generalised eigenvalues of ``(T* T, G)`` estimate the frame bounds of the
discretised problem.  They are *estimates*, not certificates; the only
certified quantity here is :func:`certified_bessel_constant`.
"""

from __future__ import annotations

import functools
import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import special
from scipy.ndimage import maximum_filter1d
from scipy.spatial import cKDTree

from .errors import DeltaOutOfRange, IllConditionedTestGram, InvalidInput
from .measure import NYQUIST_FACTOR, QuadratureMeasure, check_nyquist, cross_transform

GRAM_COND_MAX = 1e10


class SpectrumReachWarning(UserWarning):
    """The test band reaches beyond the frequencies of the spectrum."""


# --------------------------------------------------------------------------
# spectra


@dataclass(frozen=True)
class Tag:
    cls: int
    lattice: tuple
    phase: int
    shift: int = 0


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Finite frequency set with optional per-frequency tags.

    ``separation`` (if given) is checked on construction.  ``delta`` and
    ``window`` are construction metadata of built spectra.
    """

    frequencies: np.ndarray
    tags: tuple | None = None
    separation: float | None = None
    delta: float | None = None
    window: float | None = None

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        if f.ndim == 1:
            f = f[:, None]
        object.__setattr__(self, "frequencies", f)
        if self.tags is not None:
            if len(self.tags) != len(f):
                raise InvalidInput("one tag per frequency required")
            object.__setattr__(self, "tags", tuple(self.tags))
        if len(f) > 1:
            tree = cKDTree(f)
            if tree.query_pairs(1e-12):
                raise InvalidInput("frequencies must be pairwise distinct")
            if self.separation is not None:
                if tree.query_pairs(self.separation * (1 - 1e-12)):
                    raise InvalidInput(f"frequencies are not {self.separation}-separated")

    def __len__(self) -> int:
        return len(self.frequencies)

    @property
    def dim(self) -> int:
        return self.frequencies.shape[1]

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.frequencies, axis=1)

    @classmethod
    def lattice(cls, d: int, radius: float, spacing: float = 1.0, exclude_origin: bool = False) -> "Spectrum":
        """``spacing * Z^d`` intersected with the closed ball of the given radius."""
        pts = lattice_ball(d, radius, spacing)
        if exclude_origin:
            pts = pts[np.any(pts != 0, axis=1)]
        return cls(pts, window=radius)

    def subset(self, mask) -> "Spectrum":
        mask = np.asarray(mask)
        tags = None if self.tags is None else tuple(t for t, k in zip(self.tags, mask) if k)
        return Spectrum(self.frequencies[mask], tags, self.separation, self.delta, self.window)

    def to_dict(self) -> dict:
        doc = {"frequencies": self.frequencies.tolist()}
        if self.tags is not None:
            doc["tags"] = [{"class": t.cls, "lattice": list(t.lattice), "phase": t.phase, "shift": t.shift} for t in self.tags]
        doc["delta"] = self.delta
        doc["window"] = self.window
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "Spectrum":
        tags = None
        if doc.get("tags") is not None:
            tags = [Tag(int(t["class"]), tuple(int(v) for v in t["lattice"]), int(t["phase"]), int(t.get("shift", 0))) for t in doc["tags"]]
        return cls(np.asarray(doc["frequencies"], dtype=float), tags, None, doc.get("delta"), doc.get("window"))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "Spectrum":
        return cls.from_dict(json.loads(Path(path).read_text()))


def lattice_ball(d: int, radius: float, spacing: float = 1.0) -> np.ndarray:
    """Points of ``spacing * Z^d`` with norm <= radius, sorted by norm then lexicographically."""
    k = int(math.floor(radius / spacing + 1e-12))
    ax = np.arange(-k, k + 1)
    grid = np.stack(np.meshgrid(*([ax] * d), indexing="ij"), axis=-1).reshape(-1, d)
    sq = np.sum(grid.astype(float) ** 2, axis=1)
    keep = sq * spacing**2 <= radius**2 * (1 + 1e-12)
    grid, sq = grid[keep], sq[keep]
    order = np.lexsort(tuple(grid[:, i] for i in reversed(range(d))) + (sq,))
    return grid[order] * spacing


# --------------------------------------------------------------------------
# analysis operator and test spaces


def analysis_matrix(mu: QuadratureMeasure, spec: Spectrum) -> np.ndarray:
    """``A[lambda, i] = sqrt(w_i) exp(-2 pi i lambda.x_i)``.

    ``A @ (sqrt(w) * f(x))`` is the quadrature value of ``<f, e_lambda>``.
    """
    lam = spec.frequencies if isinstance(spec, Spectrum) else np.atleast_2d(spec)
    check_nyquist(mu, lam)
    return np.exp(-2j * np.pi * (lam @ mu.points.T)) * np.sqrt(mu.weights)


@dataclass
class TestSpace:
    """Finite family of test functions together with its two matrices."""

    kind: str
    labels: list
    gram: np.ndarray
    analysis: object  # callable: frequencies -> T matrix

    @property
    def dim(self) -> int:
        return len(self.labels)


def _facet_modes(piece, band: float) -> np.ndarray:
    # integer mode vectors k with |sum_i k_i b_i / side_i| <= band
    k = len(piece.sides)
    kmax = [int(math.floor(band * s + 1e-9)) for s in piece.sides]
    axes = [np.arange(-m, m + 1) for m in kmax]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k)
    freq = np.linalg.norm(grid / piece.sides, axis=1)
    grid = grid[freq <= band + 1e-9]
    return grid


def _mode_sum(piece, lam: np.ndarray, modes: np.ndarray) -> np.ndarray:
    """``sum_nodes w exp(-2 pi i lam.x) exp(2 pi i k.s/side)`` for one facet piece."""
    out = np.exp(-2j * np.pi * (lam @ piece.offset))[:, None] * np.ones(len(modes))
    for axis, (b, s, w) in enumerate(zip(piece.basis, piece.nodes, piece.weights)):
        left = np.exp(-2j * np.pi * np.outer(lam @ b, s)) * w
        right = np.exp(2j * np.pi * np.outer(s, modes[:, axis] / piece.sides[axis]))
        out = out * (left @ right)
    return out


def facet_mode_space(mu: QuadratureMeasure, band: float) -> TestSpace:
    """Local Fourier modes ``exp(2 pi i k.s/side)`` on each facet, frequency <= band.

    Facets are disjoint up to null sets, so modes on different facets are
    orthogonal and modes on one facet are orthonormal up to quadrature error.
    """
    labels, blocks = [], []
    for pi, piece in enumerate(mu.pieces):
        modes = _facet_modes(piece, band)
        labels.extend((pi, tuple(int(v) for v in k)) for k in modes)
        blocks.append(modes)

    def analysis(lam):
        lam = np.atleast_2d(lam)
        return np.hstack([_mode_sum(p, lam, m) for p, m in zip(mu.pieces, blocks)])

    gram = np.zeros((len(labels), len(labels)), dtype=complex)
    pos = 0
    for piece, modes in zip(mu.pieces, blocks):
        n = len(modes)
        local = np.ones((n, n), dtype=complex)
        for axis, (s, w) in enumerate(zip(piece.nodes, piece.weights)):
            kk = modes[:, axis] / piece.sides[axis]
            e = np.exp(2j * np.pi * np.outer(s, kk))
            local *= (e.conj().T * w) @ e
        gram[pos:pos + n, pos:pos + n] = local
        pos += n
    return TestSpace("facet modes", labels, gram, analysis)


def exponential_space(mu: QuadratureMeasure, band: float, spacing: float = 0.5) -> TestSpace:
    """Global exponentials ``exp(2 pi i xi.x)``, xi on ``spacing * Z^d`` within the band."""
    xi = lattice_ball(mu.dim, band, spacing)
    gram = cross_transform(mu, xi, xi)
    return TestSpace(
        "exponentials",
        [tuple(v) for v in xi.tolist()],
        gram,
        lambda lam: cross_transform(mu, lam, xi),
    )


def build_test_space(mu: QuadratureMeasure, band: float, kind: str = "auto", spacing: float = 0.5) -> TestSpace:
    if kind == "auto":
        kind = "facet modes" if mu.pieces is not None else "exponentials"
    if kind == "facet modes":
        if mu.pieces is None:
            raise InvalidInput("facet modes need a facet-structured measure")
        return facet_mode_space(mu, band)
    if kind == "exponentials":
        return exponential_space(mu, band, spacing)
    raise InvalidInput(f"unknown test space {kind!r}")


# --------------------------------------------------------------------------
# bounds


@dataclass
class FrameReport:
    a_est: float
    b_est: float
    band: float
    resolution: float
    test_space: str
    test_dim: int
    history: list = field(default_factory=list)
    spectrum_size: int = 0
    gram_condition: float = 1.0
    certified_lower: bool = False
    certified_upper: bool = False

    def __post_init__(self):
        if not 0 <= self.a_est <= self.b_est * (1 + 1e-12) + 1e-15:
            raise InvalidInput(f"inconsistent bounds a={self.a_est}, b={self.b_est}")

    @property
    def drift(self) -> float:
        """Largest relative change of either bound between the last two resolutions."""
        if len(self.history) < 2:
            return math.nan
        (_, a0, b0), (_, a1, b1) = self.history[-2:]
        da = abs(a1 - a0) / max(abs(a1), 1e-300) if a1 > 0 else abs(a1 - a0)
        return max(da, abs(b1 - b0) / max(abs(b1), 1e-300))

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["history"] = [list(h) for h in self.history]
        doc["drift"] = self.drift
        doc["certified"] = {"lower": self.certified_lower, "upper": self.certified_upper}
        return doc


def _bounds_once(mu, lam, band, kind, spacing, gram_cutoff):
    space = build_test_space(mu, band, kind, spacing)
    if space.dim == 0:
        raise InvalidInput("test space is empty; increase the band")
    ev, vec = np.linalg.eigh(space.gram)
    top = ev[-1]
    cond = top / ev[0] if ev[0] > 0 else math.inf
    if gram_cutoff is None:
        if cond > GRAM_COND_MAX:
            raise IllConditionedTestGram(
                f"test Gram condition {cond:.3g} exceeds {GRAM_COND_MAX:g}; coarsen the test grid "
                "or pass gram_cutoff to keep only its numerically independent part"
            )
        keep = np.ones(ev.size, dtype=bool)
    else:
        keep = ev > gram_cutoff * top
    step = max(1, (1 << 21) // max(1, len(mu)))
    T = np.vstack([space.analysis(lam[i:i + step]) for i in range(0, len(lam), step)])
    S = (T @ vec[:, keep]) / np.sqrt(ev[keep])
    sv = np.linalg.svd(S, compute_uv=False)
    r = int(keep.sum())
    b = float(sv[0] ** 2) if sv.size else 0.0
    a = float(sv[-1] ** 2) if len(lam) >= r and sv.size == r else 0.0
    return a, b, space, float(ev[keep].max() / ev[keep].min())


def frame_bounds(
    mu: QuadratureMeasure,
    spec: Spectrum,
    band: float,
    *,
    test_space: str = "auto",
    spacing: float = 0.5,
    resolutions=None,
    levels: int = 2,
    gram_cutoff: float | None = None,
    nyquist_factor: float = NYQUIST_FACTOR,
) -> FrameReport:
    """Estimate lower/upper frame bounds of ``E(spec)`` on band-limited test functions.

    The test space is chosen from the measure: local Fourier modes on each
    facet for facet measures, global exponentials on a ``spacing`` grid
    otherwise.  The problem is solved at ``levels`` resolutions (each double
    the previous, starting from the Nyquist requirement for the largest
    difference frequency); the finest one is reported and all go into
    ``history``.
    """
    lam = spec.frequencies
    if lam.shape[1] != mu.dim:
        raise InvalidInput("spectrum and measure dimensions differ")
    reach = float(spec.norms.max()) if len(spec) else 0.0
    if band > reach:
        warnings.warn(f"band {band} exceeds spectrum reach {reach:g}", SpectrumReachWarning, stacklevel=2)
    need = nyquist_factor * (float(np.max(np.abs(lam))) + band)
    if resolutions is None:
        if mu.rebuild is None:
            resolutions = [mu.resolution]
        else:
            base = max(need, 2.0) if math.isinf(mu.resolution) else max(mu.resolution, need, 2.0)
            resolutions = [base * 2**k for k in range(levels)]
    history, space, cond = [], None, 1.0
    for res in resolutions:
        m = mu if res == mu.resolution else mu.at_resolution(res)
        if m.resolution < need:
            check_nyquist(m, [[need / nyquist_factor]], nyquist_factor)
        a, b, space, cond = _bounds_once(m, lam, band, test_space, spacing, gram_cutoff)
        history.append((float(res), a, b))
    _, a, b = history[-1]
    return FrameReport(
        a_est=a,
        b_est=b,
        band=float(band),
        resolution=float(resolutions[-1]),
        test_space=space.kind,
        test_dim=space.dim,
        history=history,
        spectrum_size=len(spec),
        gram_condition=cond,
    )


def frame_sum(mu: QuadratureMeasure, spec, f_values) -> float:
    """``sum_lambda |int f e^{-2 pi i lambda x} dmu|^2`` by quadrature; f sampled at the nodes."""
    lam = spec.frequencies if isinstance(spec, Spectrum) else np.atleast_2d(spec)
    coeff = np.exp(-2j * np.pi * (lam @ mu.points.T)) @ (mu.weights * np.asarray(f_values))
    return float(np.sum(np.abs(coeff) ** 2))


# --------------------------------------------------------------------------
# certified Bessel constant for delta-separated sets on the unit cube


def _smoothstep(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = (t > 0) & (t < 1)
    ti = t[inside]
    with np.errstate(over="ignore"):
        out[inside] = 1.0 / (1.0 + np.exp(1.0 / ti - 1.0 / (1.0 - ti)))
    out[t >= 1] = 1.0
    return out


def cutoff(x):
    """Smooth bump equal to 1 on [0, 1], supported in [-1, 2]."""
    x = np.asarray(x, dtype=float)
    return np.where(x <= 0.5, _smoothstep(x + 1), _smoothstep(2 - x))


@functools.lru_cache(maxsize=1)
def _cutoff_norms():
    # L1 norms of phi'', x phi and (x phi)'' on a fine grid, with 1% headroom
    x = np.linspace(-1, 2, 600_001)
    h = x[1] - x[0]
    p = cutoff(x)
    d2 = np.gradient(np.gradient(p, h), h)
    xp = x * p
    xd2 = np.gradient(np.gradient(xp, h), h)
    l1 = lambda v: float(np.sum(np.abs(v)) * h * 1.01)  # noqa: E731
    return l1(d2), l1(xp), l1(xd2)


@functools.lru_cache(maxsize=1)
def _cutoff_transform(log2n: int = 22, length: float = 2048.0):
    n = 1 << log2n
    dx = length / n
    x = (np.arange(n) - n // 2) * dx
    F = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(cutoff(x)))) * dx
    xi = (np.arange(n) - n // 2) / length
    return xi, np.abs(F), 1.0 / length, 1.0 / dx


@functools.lru_cache(maxsize=64)
def maximal_l1_norm(radius: float, extent: float = 1000.0) -> float:
    """Upper bound for ``|| sup_{|y - .| <= radius} |phi_hat(y)| ||_1`` in one dimension."""
    xi, A, h, fs = _cutoff_transform()
    n2, n_x, n_x2 = _cutoff_norms()
    e2 = n2 / (4 * np.pi**2)  # |phi_hat(xi)| <= e2 / xi^2
    lip0 = 2 * np.pi * n_x
    lip2 = n_x2 / (2 * np.pi)  # |phi_hat'(xi)| <= lip2 / xi^2
    alias = 4 * e2 / (fs - extent) ** 2
    lo, hi = xi[:-1], xi[1:]
    xc = np.minimum(np.abs(lo), np.abs(hi))
    xc[(lo < 0) & (hi > 0)] = 0.0
    with np.errstate(divide="ignore"):
        lip = np.minimum(lip0, np.where(xc > 0, lip2 / xc**2, np.inf))
    upper = np.maximum(A[:-1], A[1:]) + lip * h / 2 + alias
    w = int(math.ceil(radius / h))
    env = maximum_filter1d(upper, 2 * w + 1, mode="nearest")
    inside = (lo >= -extent) & (hi <= extent)
    core = float(np.sum(env[inside]) * h)
    tail = 2 * e2 / (extent - radius)
    return core + tail


def certified_bessel_constant(delta: float, d: int) -> float:
    """Upper Bessel bound valid for every delta-separated set on L^2([0, 1]^d).

    Uses the cutoff ``phi`` (1 on the cube, supported in ``[-1, 2]^d``) and
    the maximal function of ``phi_hat`` over balls of radius ``delta/2``:
    those balls around distinct points are disjoint, giving
    ``||phi_hat^#||_1^2 / (v_d (delta/2)^d)``.  The d-dimensional maximal
    function is bounded by the product of one-dimensional ones.
    """
    if not 0 < delta <= 2:
        raise DeltaOutOfRange("delta must lie in (0, 2]")
    if d < 1:
        raise InvalidInput("dimension must be >= 1")
    rho = delta / 2
    l1 = maximal_l1_norm(round(rho, 15)) ** d
    vol = np.pi ** (d / 2) / special.gamma(d / 2 + 1)
    return float(l1**2 / (vol * rho**d))


def exact_bessel_bound_unit_interval(points) -> float:
    """Optimal Bessel bound of ``E(points)`` on L^2([0, 1]): top eigenvalue of their Gram."""
    g = np.asarray(points, dtype=float).reshape(-1)
    diff = g[:, None] - g[None, :]
    gram = np.exp(-1j * np.pi * diff) * np.sinc(diff)
    return float(np.linalg.eigvalsh(gram)[-1])
