import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import alphas, lambdas, points
from gaussgeom.chart import SQRT2, ChartPoint, alpha_christoffels, cubic_form_closed, metric_at, metric_field
from gaussgeom.errors import DomainError, SingularMetricError
from gaussgeom.lie import (
    IDENTITY,
    BilinearMap,
    GroupElement,
    InnerProduct,
    LieAlgebra2,
    act_on_line,
    alpha_connection_left_invariant,
    bi_invariance_check,
    bracket,
    connection_from_nu,
    frame_to_coordinates,
    group_inv,
    group_mul,
    left_translation,
    levi_civita_left_invariant,
    pullback_metric,
    standardize,
    torsion,
    u_map,
)
from gaussgeom.statstruct import StatisticalStructure, skewness

E1, E2 = np.eye(2)
elements = st.builds(GroupElement, st.floats(-10, 10), st.floats(0.05, 20))
sym_maps = st.lists(st.floats(-3, 3), min_size=6, max_size=6).map(
    lambda v: BilinearMap(np.array([[[v[0], v[1]], [v[1], v[2]]], [[v[3], v[4]], [v[4], v[5]]]]), True)
)


def random_gram(rng):
    a = rng.normal(size=(2, 2))
    return a @ a.T + 0.5 * np.eye(2)


class TestAlgebra:
    def test_affine_bracket(self):
        np.testing.assert_array_equal(bracket(LieAlgebra2.affine(), E1, E2), -E1)

    @given(lambdas)
    def test_scaled_frame_bracket(self, lam):
        np.testing.assert_allclose(bracket(LieAlgebra2.scaled_frame(lam), E1, E2), -E1 / lam)

    @given(st.lists(st.floats(-5, 5), min_size=2, max_size=2))
    def test_self_bracket_vanishes(self, v):
        assert np.abs(bracket(LieAlgebra2.scaled_frame(1.3), v, v)).max() < 1e-14

    def test_rejects_non_antisymmetric(self):
        with pytest.raises(ValueError):
            LieAlgebra2(np.ones((2, 2, 2)))

    def test_matrix_commutator(self):
        # [E1, E2] computed from the 2x2 matrices themselves
        m1 = np.array([[0.0, 1.0], [0.0, 0.0]])
        m2 = np.array([[1.0, 0.0], [0.0, 0.0]])
        np.testing.assert_array_equal(m1 @ m2 - m2 @ m1, -m1)


class TestUMap:
    @given(lambdas)
    def test_known_values(self, lam):
        U = u_map(LieAlgebra2.scaled_frame(lam))
        np.testing.assert_allclose(U(E1, E1), E2 / lam, atol=1e-15)
        np.testing.assert_allclose(U(E1, E2), -E1 / (2 * lam), atol=1e-15)
        np.testing.assert_allclose(U(E2, E2), 0.0, atol=1e-15)

    def test_abelian(self):
        ip = InnerProduct(random_gram(np.random.default_rng(1)))
        assert np.all(u_map(LieAlgebra2.abelian(), ip).comps == 0)

    @pytest.mark.parametrize("seed", range(5))
    def test_defining_identity_general_gram(self, seed):
        rng = np.random.default_rng(seed)
        alg = LieAlgebra2(np.einsum("k,ij->kij", rng.normal(size=2), np.array([[0, 1], [-1, 0]])))
        ip = InnerProduct(random_gram(rng))
        U = u_map(alg, ip)
        assert U.symmetric
        for X in np.eye(2):
            for Y in np.eye(2):
                for Z in np.eye(2):
                    lhs = 2 * ip(U(X, Y), Z)
                    rhs = ip(bracket(alg, Z, X), Y) + ip(X, bracket(alg, Z, Y))
                    assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_singular_gram(self):
        with pytest.raises(SingularMetricError):
            InnerProduct(np.zeros((2, 2)))

    def test_bi_invariance(self):
        alg = LieAlgebra2.scaled_frame(SQRT2)
        assert not bi_invariance_check(alg, InnerProduct())
        assert bi_invariance_check(LieAlgebra2.abelian(), InnerProduct(np.diag([2.0, 3.0])))
        assert bi_invariance_check(alg, InnerProduct(), tol=10)


class TestConnections:
    @given(lambdas)
    def test_levi_civita_table(self, lam):
        mg = levi_civita_left_invariant(LieAlgebra2.scaled_frame(lam))
        np.testing.assert_allclose(mg(E1, E1), E2 / lam, atol=1e-15)
        np.testing.assert_allclose(mg(E1, E2), -E1 / lam, atol=1e-15)
        np.testing.assert_allclose(mg(E2, E1), 0.0, atol=1e-15)
        np.testing.assert_allclose(mg(E2, E2), 0.0, atol=1e-15)

    @given(lambdas)
    def test_levi_civita_skew_part_is_half_bracket(self, lam):
        alg = LieAlgebra2.scaled_frame(lam)
        mg = levi_civita_left_invariant(alg)
        np.testing.assert_allclose(mg.skew.comps, 0.5 * alg.structure, atol=1e-15)
        np.testing.assert_allclose(mg.sym.comps, u_map(alg).comps, atol=1e-15)

    def test_abelian_levi_civita(self):
        assert np.all(levi_civita_left_invariant(LieAlgebra2.abelian()).comps == 0)

    @given(lambdas)
    def test_torsion(self, lam):
        alg = LieAlgebra2.scaled_frame(lam)
        assert np.abs(torsion(alg, levi_civita_left_invariant(alg)).comps).max() < 1e-15
        T = torsion(alg, BilinearMap.zero())
        np.testing.assert_allclose(T(E1, E2), E1 / lam, atol=1e-15)
        np.testing.assert_allclose(T.comps, -T.comps.transpose(0, 2, 1))

    @given(sym_maps)
    def test_symmetric_map_on_abelian_is_torsion_free(self, nu):
        assert np.all(torsion(LieAlgebra2.abelian(), nu).comps == 0)

    @given(lambdas, sym_maps)
    def test_connection_from_nu_torsion_free_and_injective(self, lam, nu):
        alg = LieAlgebra2.scaled_frame(lam)
        mu = connection_from_nu(alg, nu)
        assert np.abs(torsion(alg, mu).comps).max() < 1e-14
        np.testing.assert_allclose(mu.sym.comps, nu.comps, atol=1e-15)

    @given(lambdas)
    def test_connection_from_nu_examples(self, lam):
        alg = LieAlgebra2.scaled_frame(lam)
        np.testing.assert_allclose(connection_from_nu(alg, u_map(alg)).comps, levi_civita_left_invariant(alg).comps)
        mu = connection_from_nu(alg, BilinearMap.zero())
        np.testing.assert_allclose(mu(E1, E2), -E1 / (2 * lam))
        np.testing.assert_allclose(mu(E2, E1), E1 / (2 * lam))

    def test_connection_from_nu_abelian_identity(self):
        nu = BilinearMap(np.arange(8.0).reshape(2, 2, 2) + np.arange(8.0).reshape(2, 2, 2).transpose(0, 2, 1), True)
        np.testing.assert_array_equal(connection_from_nu(LieAlgebra2.abelian(), nu).comps, nu.comps)

    def test_connection_from_nu_rejects_non_symmetric(self):
        with pytest.raises(ValueError):
            connection_from_nu(LieAlgebra2.affine(), BilinearMap(np.arange(8.0).reshape(2, 2, 2)))

    @given(lambdas)
    def test_alpha_zero_is_levi_civita(self, lam):
        np.testing.assert_allclose(
            alpha_connection_left_invariant(0.0, lam).comps,
            levi_civita_left_invariant(LieAlgebra2.scaled_frame(lam)).comps,
            atol=1e-15,
        )

    def test_alpha_one_fisher(self):
        mu = alpha_connection_left_invariant(1.0, SQRT2)
        np.testing.assert_allclose(mu(E1, E1), 0.0, atol=1e-15)
        np.testing.assert_allclose(mu(E2, E2), -SQRT2 * E2, atol=1e-15)

    @given(alphas, lambdas)
    def test_alpha_family_torsion_free(self, alpha, lam):
        assert np.abs(torsion(LieAlgebra2.scaled_frame(lam), alpha_connection_left_invariant(alpha, lam)).comps).max() < 1e-14


class TestGroup:
    def test_identity(self):
        b = GroupElement(3.0, 4.0)
        assert group_mul(IDENTITY, b) == b

    def test_product(self):
        a, b = GroupElement(1, 2), GroupElement(3, 4)
        assert group_mul(a, b) == GroupElement(7, 8)
        np.testing.assert_array_equal((a @ b).matrix(), a.matrix() @ b.matrix())

    def test_inverse(self):
        assert group_inv(IDENTITY) == IDENTITY
        assert group_inv(GroupElement(3, 2)) == GroupElement(-1.5, 0.5)
        np.testing.assert_allclose(group_inv(GroupElement(3, 2)).matrix(), np.linalg.inv(GroupElement(3, 2).matrix()))

    def test_rejects_bad_element(self):
        with pytest.raises(DomainError):
            GroupElement(0, 0)

    @given(elements, elements, elements)
    def test_associativity(self, a, b, c):
        l, r = (a @ b) @ c, a @ (b @ c)
        assert l.x == pytest.approx(r.x, rel=1e-12, abs=1e-12)
        assert l.y == pytest.approx(r.y, rel=1e-12)

    @given(elements)
    def test_inverse_law(self, a):
        for e in (a @ group_inv(a), group_inv(a) @ a):
            assert e.x == pytest.approx(0.0, abs=1e-12 * (1 + abs(a.x)))
            assert e.y == pytest.approx(1.0, rel=1e-12)

    def test_act_on_line(self):
        assert act_on_line(IDENTITY, 2.5) == 2.5
        assert act_on_line(GroupElement(3, 2), 1) == 5

    @given(elements, elements, st.floats(-100, 100))
    def test_action_law(self, a, b, t):
        assert act_on_line(a @ b, t) == pytest.approx(act_on_line(a, act_on_line(b, t)), rel=1e-12, abs=1e-12)
        assert act_on_line(a, act_on_line(group_inv(a), t)) == pytest.approx(t, rel=1e-12, abs=1e-9)

    @given(st.floats(-5, 5), st.floats(0.1, 10), st.floats(-50, 50))
    def test_standardization(self, mu, sigma, t):
        assert standardize(mu, sigma, t) == pytest.approx((t - mu) / sigma, rel=1e-12, abs=1e-12)

    def test_left_translation(self):
        p = ChartPoint(3, 4)
        assert left_translation(IDENTITY, p) == p
        assert left_translation(GroupElement(1, 2), p) == ChartPoint(7, 8)

    @given(elements, points, lambdas)
    def test_metric_left_invariance(self, a, p, lam):
        pulled = pullback_metric(a, metric_field(lam), p)
        g = metric_at(lam, p).components
        np.testing.assert_allclose(pulled, g, rtol=1e-12)


class TestFrameDictionary:
    @given(alphas, lambdas, points)
    def test_alpha_table_round_trip(self, alpha, lam, p):
        pushed = frame_to_coordinates(lam, p, alpha_connection_left_invariant(alpha, lam), "connection")
        np.testing.assert_allclose(pushed, alpha_christoffels(alpha, lam, p), rtol=1e-12, atol=1e-12 / p.y)

    @given(lambdas, points)
    def test_inner_product_gives_metric(self, lam, p):
        np.testing.assert_allclose(frame_to_coordinates(lam, p, InnerProduct()), metric_at(lam, p).components, rtol=1e-14)

    def test_skewness_to_cubic(self):
        K = skewness(StatisticalStructure.alpha(1.0, SQRT2))
        C_frame = np.einsum("lij->ijl", K.comps)  # orthonormal frame: C_ijl = K^l_ij
        C = frame_to_coordinates(SQRT2, ChartPoint(0, 1), C_frame)
        assert C[0, 0, 1] == pytest.approx(2.0)
        assert C[1, 1, 1] == pytest.approx(8.0)

    @given(lambdas, points)
    def test_cubic_dictionary_general(self, lam, p):
        K = skewness(StatisticalStructure.alpha(1.0, lam))
        C = frame_to_coordinates(lam, p, np.einsum("lij->ijl", K.comps))
        np.testing.assert_allclose(C, cubic_form_closed(lam, p).components, rtol=1e-12)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            frame_to_coordinates(1.0, (0, 1), np.zeros(2), "spinor")
