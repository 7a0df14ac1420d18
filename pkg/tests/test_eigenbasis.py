import math

import numpy as np
import pytest
from scipy import integrate

from surfframe.errors import GridTooCoarse, InvalidInput, NotIdempotent
from surfframe.eigenbasis import (
    IsometryGroup,
    WedgeDomain,
    character,
    character_trace,
    cyclic_group,
    dihedral_group,
    fibonacci_sphere,
    fixed_subspace,
    parse_group,
    projected_eigenbasis,
    projector_matrix,
    real_harmonics,
    rotation_angle,
    sphere_grid,
    tiling_check,
    torus_fixed_modes,
    trivial_group,
    verify_basis,
)



def oracle_dims(G, lmax):
    # character formula on rotation angles
    return [round(sum(character(l, rotation_angle(g)) for g in G.elements) / G.order) for l in range(lmax + 1)]


@pytest.fixture(scope="module")
def d3_basis():
    return projected_eigenbasis(dihedral_group(3), 12)


class TestGroups:
    def test_dihedral_three(self):
        G = dihedral_group(3)
        assert G.order == 6
        sigma = G.elements[1]
        tau = G.elements[3]
        np.testing.assert_allclose(sigma @ tau, tau @ np.linalg.inv(sigma), atol=1e-12)
        assert not G.is_abelian()

    def test_dihedral_two_abelian(self):
        G = dihedral_group(2)
        assert G.order == 4 and G.is_abelian()

    def test_proper_rotations(self):
        for G in (dihedral_group(5), cyclic_group(4)):
            for g in G.elements:
                assert np.linalg.det(g) == pytest.approx(1.0)
                np.testing.assert_allclose(g.T @ g, np.eye(3), atol=1e-12)

    def test_axioms_exhaustive(self):
        G = dihedral_group(4)
        for a in G.elements:
            assert G.index(np.linalg.inv(a)) is not None
            for b in G.elements:
                assert G.index(a @ b) is not None
        assert G.index(np.eye(3)) is not None

    def test_not_closed_rejected(self):
        rot = cyclic_group(4).elements[1]
        with pytest.raises(InvalidInput):
            IsometryGroup([np.eye(3), rot], "bad")

    def test_generate(self):
        G = IsometryGroup.generate([cyclic_group(3).elements[1], np.diag([1.0, -1.0, -1.0])])
        assert G.order == 6

    def test_parse(self):
        assert parse_group("dihedral:3").order == 6
        assert parse_group("cyclic:4").order == 4
        assert parse_group("trivial").order == 1
        for bad in ("dihedral", "dihedral:x", "foo:3"):
            with pytest.raises(InvalidInput):
                parse_group(bad)
        with pytest.raises(InvalidInput):
            dihedral_group(1)


class TestHarmonics:
    def test_degree_one_convention(self):
        x = fibonacci_sphere(50)
        c = math.sqrt(3 / (4 * math.pi))
        np.testing.assert_allclose(real_harmonics(1, x), c * x[:, [1, 2, 0]], atol=1e-12)

    def test_orthonormal(self):
        pts, w = sphere_grid(20, 40)
        for l in (0, 3, 7):
            Y = real_harmonics(l, pts)
            np.testing.assert_allclose((Y * w[:, None]).T @ Y, np.eye(2 * l + 1), atol=1e-12)

    def test_grid_integrates_area(self):
        _, w = sphere_grid(5, 10)
        assert w.sum() == pytest.approx(4 * math.pi)

    def test_character_trace(self):
        G = dihedral_group(3)
        for g in G.elements:
            for l in (0, 2, 5):
                assert character_trace(g, l) == pytest.approx(character(l, rotation_angle(g)), abs=1e-10)


class TestProjector:
    def test_trivial_group(self):
        for l in (0, 2, 6):
            np.testing.assert_allclose(projector_matrix(trivial_group(), l), np.eye(2 * l + 1), atol=1e-12)

    def test_constants(self):
        for G in (dihedral_group(3), cyclic_group(5)):
            assert projector_matrix(G, 0) == pytest.approx(np.ones((1, 1)))

    def test_d3_degree_one_vanishes(self):
        G = dihedral_group(3)
        assert np.max(np.abs(projector_matrix(G, 1))) < 1e-10
        assert np.max(np.abs(projector_matrix(G, 1, grid=sphere_grid(4, 8)))) < 1e-10

    def test_idempotent_and_symmetric(self):
        G = dihedral_group(3)
        for l in range(17):
            P = projector_matrix(G, l)
            assert np.max(np.abs(P - P.T)) <= 1e-10
            assert np.max(np.abs(P @ P - P)) <= 1e-8

    def test_grid_too_coarse(self):
        with pytest.raises(GridTooCoarse):
            projector_matrix(dihedral_group(3), 4, grid=sphere_grid(2, 4))

    def test_negative_degree(self):
        with pytest.raises(InvalidInput):
            projector_matrix(trivial_group(), -1)


class TestFixedSubspace:
    def test_identity(self):
        V, d = fixed_subspace(np.eye(5))
        assert d == 5 and np.allclose(V @ V.T, np.eye(5))

    def test_zero(self):
        V, d = fixed_subspace(np.zeros((3, 3)))
        assert d == 0 and V.shape == (0, 3)

    def test_forbidden_band(self):
        with pytest.raises(NotIdempotent):
            fixed_subspace(0.5 * np.eye(2))

    def test_asymmetric(self):
        with pytest.raises(NotIdempotent):
            fixed_subspace(np.array([[1.0, 0.5], [0.0, 0.0]]))

    def test_d3_degree_three_matches_trace(self):
        P = projector_matrix(dihedral_group(3), 3)
        _, d = fixed_subspace(P)
        assert d == round(np.trace(P)) and abs(np.trace(P) - d) < 1e-6


class TestEigenbasis:
    def test_dimensions_match_character_formula(self, d3_basis):
        assert list(d3_basis.dims) == oracle_dims(dihedral_group(3), 12)
        assert list(d3_basis.dims) == [1, 0, 1, 1, 2, 1, 3, 2, 3, 3, 4, 3, 5]

    def test_other_groups(self):
        for G in (cyclic_group(4), dihedral_group(2), dihedral_group(5)):
            assert list(projected_eigenbasis(G, 8).dims) == oracle_dims(G, 8)

    def test_traces(self, d3_basis):
        assert np.max(np.abs(np.asarray(d3_basis.traces) - np.asarray(d3_basis.dims))) < 1e-6

    def test_invariance(self, d3_basis):
        x = fibonacci_sphere(1000)
        base = d3_basis.evaluate(x)
        assert base.shape == (1000, d3_basis.size)
        for g in d3_basis.group.elements:
            assert np.max(np.abs(d3_basis.evaluate(x @ g.T) - base)) <= 1e-8

    def test_orthonormal_on_sphere(self, d3_basis):
        pts, w = sphere_grid(20, 40)
        E = d3_basis.evaluate(pts)
        np.testing.assert_allclose((E * w[:, None]).T @ E, np.eye(d3_basis.size), atol=1e-10)

    def test_json(self, d3_basis):
        doc = d3_basis.to_dict()
        assert doc["lmax"] == 12 and len(doc["degrees"]) == 13


class TestDomain:
    def test_wedge_area(self):
        assert WedgeDomain.wedge(3).area == pytest.approx(4 * math.pi / 6, rel=1e-12)
        assert WedgeDomain.sphere().area == pytest.approx(4 * math.pi)

    def test_half_open_boundary(self):
        D = WedgeDomain.wedge(4)
        on_start = np.array([[1.0, 0.0, 0.5]])
        on_end = np.array([[0.0, 1.0, 0.5]])
        assert D.indicator(on_start)[0] and not D.indicator(on_end)[0]

    def test_wedge_quadrature_area(self):
        _, w = WedgeDomain.wedge(3).quadrature(20)
        assert w.sum() == pytest.approx(4 * math.pi / 6, rel=1e-12)

    def test_wedge_quadrature_against_dblquad(self):
        # int_D z^2 over the wedge, by scipy on (theta, phi)
        n = 3
        ref, _ = integrate.dblquad(
            lambda t, p: math.cos(t) ** 2 * math.sin(t), 0, 2 * math.pi / n, 0, math.pi / 2
        )
        pts, w = WedgeDomain.wedge(n).quadrature(20)
        assert w @ pts[:, 2] ** 2 == pytest.approx(ref, rel=1e-10)


class TestTiling:
    def test_matching_wedge(self):
        rep = tiling_check(WedgeDomain.wedge(3), dihedral_group(3))
        assert rep.passed and rep.overlap < 1e-3 and rep.coverage > 1 - 1e-3

    def test_mismatched_wedge(self):
        assert not tiling_check(WedgeDomain.wedge(3), dihedral_group(4)).passed

    def test_sphere_trivial(self):
        assert tiling_check(WedgeDomain.sphere(), trivial_group()).passed

    def test_sample_minimum(self):
        with pytest.raises(InvalidInput):
            tiling_check(WedgeDomain.wedge(3), dihedral_group(3), samples=1000)


class TestVerifyBasis:
    def test_d3_wedge(self, d3_basis):
        rep = verify_basis(WedgeDomain.wedge(3), d3_basis, trials=20)
        assert rep.offdiag_max < 1e-6
        assert rep.diag_min == pytest.approx(1 / 6, rel=1e-8) and rep.diag_max == pytest.approx(1 / 6, rel=1e-8)
        assert rep.reconstruction_error < 1e-8 and rep.invariance_error <= 1e-8


class TestTorus:
    def test_half_translation(self):
        tb = torus_fixed_modes([[0.0, 0.0], [0.5, 0.0]], 4)
        assert len(tb.fixed) == 5 * 9
        assert np.all(tb.fixed[:, 0] % 2 == 0)
        np.testing.assert_allclose(np.sort(np.unique(np.round(tb.projector_diag, 12))), [0.0, 1.0], atol=1e-12)

    def test_trivial_translation_keeps_everything(self):
        tb = torus_fixed_modes([[0.0, 0.0]], 3)
        assert len(tb.fixed) == 49

    def test_non_group_detected(self):
        with pytest.raises(NotIdempotent):
            torus_fixed_modes([[0.0, 0.0], [0.25, 0.0]], 2)
