import math
import warnings

import numpy as np
import pytest
from scipy import integrate, special

from surfframe.errors import AliasRisk, ResolutionTooLow, TooCloseToOrigin, UnsupportedDimension
from surfframe.geometry import ConvexBody, Facet, unit_square_boundary
from surfframe.measure import (
    HerzAsymptotic,
    QuadratureMeasure,
    cross_transform,
    ellipse_quadrature,
    facet_quadrature,
    fourier_transform,
    herz_eval,
    load_measure,
    polytope_quadrature,
    save_measure,
    sphere_ft_closed_form,
    sphere_quadrature,
    union,
)

SEGMENT = Facet.from_arrays([[1.0, 0.0]], [0, 0], [1.0])
SQUARE = Facet.from_arrays(np.eye(2), [0, 0], [1.0, 1.0])


def circle_ft_oracle(s):
    """Adaptive quadrature of int_0^{2 pi} exp(-2 pi i s cos t) dt (real part; the rest vanishes)."""
    val, _ = integrate.quad(lambda t: math.cos(2 * math.pi * s * math.cos(t)), 0, 2 * math.pi, limit=500, epsabs=1e-12)
    return val


class TestQuadrature:
    def test_unit_segment(self):
        mu = facet_quadrature(SEGMENT, 10)
        assert len(mu) == 10 and mu.total_mass == pytest.approx(1.0, rel=1e-12)

    def test_unit_square(self):
        mu = facet_quadrature(SQUARE, 10)
        assert len(mu) == 100 and mu.total_mass == pytest.approx(1.0, rel=1e-12)

    def test_two_by_three(self):
        mu = facet_quadrature(Facet.from_arrays(np.eye(2), [0, 0], [2.0, 3.0]), 10)
        assert mu.total_mass == pytest.approx(6.0, rel=1e-12)

    def test_too_coarse(self):
        with pytest.raises(ResolutionTooLow):
            facet_quadrature(SEGMENT, 1.5)

    @pytest.mark.parametrize("d,r,mass", [(2, 1.0, 2 * np.pi), (3, 1.0, 4 * np.pi), (3, 2.0, 16 * np.pi)])
    def test_sphere_mass(self, d, r, mass):
        assert sphere_quadrature(d, r, 8).total_mass == pytest.approx(mass, rel=1e-10)

    def test_sphere_dimension(self):
        with pytest.raises(UnsupportedDimension):
            sphere_quadrature(4, 1.0, 4)

    def test_ellipse_perimeter(self):
        a, b = 2.0, 0.5
        # complete elliptic integral of the second kind, m = 1 - b^2/a^2
        exact = 4 * a * special.ellipe(1 - (b / a) ** 2)
        assert ellipse_quadrature([a, b], 16).total_mass == pytest.approx(exact, rel=1e-12)

    def test_weights_positive(self):
        with pytest.raises(ValueError):
            QuadratureMeasure(np.zeros((2, 2)), np.array([1.0, -1.0]), "custom", 1.0)

    def test_union_and_resolution(self):
        mu = polytope_quadrature(unit_square_boundary(), 8)
        assert mu.total_mass == pytest.approx(4.0)
        fine = mu.at_resolution(16)
        assert fine.total_mass == pytest.approx(4.0) and len(fine) == 2 * len(mu)

    def test_json_roundtrip(self, tmp_path):
        mu = polytope_quadrature(unit_square_boundary(), 6)
        save_measure(mu, tmp_path / "m.json")
        back = load_measure(tmp_path / "m.json")
        np.testing.assert_allclose(back.points, mu.points)
        assert back.pieces is not None
        circ = sphere_quadrature(2, 1.0, 4)
        save_measure(circ, tmp_path / "c.json")
        np.testing.assert_allclose(load_measure(tmp_path / "c.json").weights, circ.weights)


class TestFourierTransform:
    def test_zero_frequency(self):
        for mu in (facet_quadrature(SQUARE, 5), sphere_quadrature(3, 1.0, 4), ellipse_quadrature([1, 2], 4)):
            assert fourier_transform(mu, np.zeros(mu.dim)) == pytest.approx(mu.total_mass, rel=1e-12)

    def test_circle_against_adaptive_oracle(self):
        mu = sphere_quadrature(2, 1.0, 4 * 5)
        val = fourier_transform(mu, [5.0, 0.0])
        assert abs(val - circle_ft_oracle(5.0)) <= 1e-8
        assert abs(val - 2 * np.pi * special.j0(10 * np.pi)) <= 1e-8

    def test_square_against_sinc_and_oracle(self):
        a, b = 1.3, -2.7
        mu = facet_quadrature(SQUARE, 4 * 3)
        val = fourier_transform(mu, [a, b])
        closed = np.exp(-1j * np.pi * (a + b)) * np.sinc(a) * np.sinc(b)
        assert abs(val - closed) <= 1e-8
        re, _ = integrate.dblquad(lambda y, x: math.cos(2 * math.pi * (a * x + b * y)), 0, 1, 0, 1, epsabs=1e-11)
        im, _ = integrate.dblquad(lambda y, x: -math.sin(2 * math.pi * (a * x + b * y)), 0, 1, 0, 1, epsabs=1e-11)
        assert abs(val - complex(re, im)) <= 1e-8

    def test_conjugate_symmetry_and_positivity(self):
        rng = np.random.default_rng(0)
        xi = rng.uniform(-3, 3, (100, 2))
        for mu in (polytope_quadrature(unit_square_boundary(), 12), sphere_quadrature(2, 1.0, 12)):
            plus = fourier_transform(mu, xi)
            minus = fourier_transform(mu, -xi)
            np.testing.assert_allclose(minus, np.conj(plus), atol=1e-12)
            assert np.all(np.abs(plus) <= mu.total_mass * (1 + 1e-12))

    def test_alias_warning(self):
        mu = facet_quadrature(SEGMENT, 4)
        with pytest.warns(AliasRisk):
            fourier_transform(mu, [10.0, 0.0])
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            fourier_transform(mu, [10.0, 0.0], check=False)

    def test_cross_transform_is_difference_transform(self):
        mu = polytope_quadrature(unit_square_boundary(), 12)
        rng = np.random.default_rng(1)
        P, Q = rng.uniform(-1, 1, (4, 2)), rng.uniform(-1, 1, (3, 2))
        expected = np.array([[fourier_transform(mu, p - q) for q in Q] for p in P])
        np.testing.assert_allclose(cross_transform(mu, P, Q), expected, atol=1e-12)
        circ = sphere_quadrature(2, 1.0, 12)
        expected = np.array([[fourier_transform(circ, p - q) for q in Q] for p in P])
        np.testing.assert_allclose(cross_transform(circ, P, Q), expected, atol=1e-12)

    def test_translation_phase(self):
        mu = facet_quadrature(SQUARE, 10)
        v = np.array([0.3, -1.1])
        xi = np.array([1.2, 0.4])
        shifted = mu.translated(v)
        assert fourier_transform(shifted, xi) == pytest.approx(np.exp(-2j * np.pi * xi @ v) * fourier_transform(mu, xi))


class TestClosedForms:
    def test_origin_values(self):
        assert sphere_ft_closed_form(2, [0, 0]) == pytest.approx(2 * np.pi)
        assert sphere_ft_closed_form(3, [0, 0, 0]) == pytest.approx(4 * np.pi)

    def test_circle_at_ten(self):
        mu = sphere_quadrature(2, 1.0, 40)
        xi = np.array([6.0, 8.0])
        assert abs(sphere_ft_closed_form(2, xi) - fourier_transform(mu, xi)) <= 1e-8

    def test_against_quadrature_up_to_50(self):
        rng = np.random.default_rng(2)
        for d in (2, 3):
            mu = sphere_quadrature(d, 1.0, 4 * 50)
            dirs = rng.standard_normal((20, d))
            dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
            xi = dirs * rng.uniform(0, 50, (20, 1))
            np.testing.assert_allclose(fourier_transform(mu, xi), sphere_ft_closed_form(d, xi), atol=1e-8)

    def test_sphere_formula(self):
        r = 0.37
        assert sphere_ft_closed_form(3, [0, 0, r]).real == pytest.approx(2 * np.sin(2 * np.pi * r) / r)

    def test_j0_against_integral_definition(self):
        # J0(x) = (1/pi) int_0^pi cos(x sin t) dt, at 20 points
        for x in np.linspace(0.1, 60, 20):
            val, _ = integrate.quad(lambda t: math.cos(x * math.sin(t)), 0, math.pi, limit=400)
            assert special.j0(x) == pytest.approx(val / math.pi, abs=1e-12)


class TestHerz:
    def test_circle_at_25(self):
        h = HerzAsymptotic(ConvexBody.ball(2))
        val = herz_eval(h, [25.0, 0.0])
        assert val == pytest.approx(0.4 * math.sqrt(2) / 2, rel=1e-12)
        assert abs(val - 2 * np.pi * special.j0(2 * np.pi * 25)) <= 0.01

    def test_cosine_zero(self):
        h = HerzAsymptotic(ConvexBody.ball(2))
        assert herz_eval(h, [30.0 + 3 / 8, 0.0]) == pytest.approx(0.0, abs=1e-12)

    def test_too_close(self):
        with pytest.raises(TooCloseToOrigin):
            herz_eval(HerzAsymptotic(ConvexBody.ball(2)), [1.0, 0.0])

    def test_sphere_amplitude_matches_closed_form(self):
        h = HerzAsymptotic(ConvexBody.ball(3))
        for s in (40.3, 77.9):
            xi = np.array([0.0, s, 0.0])
            assert herz_eval(h, xi) == pytest.approx(sphere_ft_closed_form(3, xi).real, abs=1e-12)

    def test_ellipse_leading_term(self):
        body = ConvexBody.ellipsoid([2.0, 0.5])
        h = HerzAsymptotic(body)
        mu = ellipse_quadrature([2.0, 0.5], 4 * 200)
        xi = np.array([[120.0, 35.0], [-10.0, 150.0]])
        resid = np.abs(fourier_transform(mu, xi).real - herz_eval(h, xi))
        scale = h.amplitude(xi) * np.linalg.norm(xi, axis=1) ** -0.5
        assert np.all(resid < 0.05 * scale)
        assert np.all(h.amplitude(np.random.default_rng(0).standard_normal((50, 2))) > 0)

    def test_residual_slope(self):
        from surfframe.harness import herz_study

        st = herz_study()
        assert st["residual_slope"] <= -1.3
        assert st["max_zero_offset"] <= 0.02

    def test_decay_order_stable(self):
        s1 = np.linspace(10, 200, 4000)
        s2 = np.linspace(10, 400, 8000)
        sup = lambda s: np.max(np.sqrt(s) * np.abs(sphere_ft_closed_form(2, np.stack([s, 0 * s], 1))))  # noqa: E731
        assert sup(s2) == pytest.approx(sup(s1), rel=0.02)
