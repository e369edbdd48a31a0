import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from summingnorms.estimate import Budget, EstimateKind
from summingnorms.spaces import INF, Functional, SpaceSpec, Vector, dual_norm, make_rng
from summingnorms.tensors import (
    SCALARS,
    HomogeneousPolynomial,
    MultilinearMap,
    compose,
    evaluate_box,
    evaluate_diag,
    fix_point,
    multiply,
    op_norm,
    polarization_value,
    polynomial_from_values,
    power_times,
    product_form,
    restrict,
)


def bilinear(A, u=INF, v=INF):
    A = np.asarray(A, dtype=float)
    return MultilinearMap((SpaceSpec(u, A.shape[0]), SpaceSpec(v, A.shape[1])), SCALARS, A)


def brute_bilinear_on_cube(A):
    """sup over x in {+-1}^N of ||A^T x||_1, the l_inf x l_inf norm of a bilinear form."""
    N = A.shape[0]
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=N)))
    return float(np.abs(signs @ A).sum(axis=1).max())


class TestEvaluation:
    def test_dot_product(self):
        T = bilinear(np.eye(2), 2.0, 2.0)
        assert T([1.0, 2.0], [3.0, 4.0]).coords[0] == 11.0

    def test_product_form(self):
        assert product_form(2)([2.0], [3.0]).coords[0] == 6.0
        assert product_form(3)([2.0], [3.0], [-1.0]).coords[0] == -6.0

    def test_vector_valued(self):
        T = MultilinearMap.linear([[1.0, 2.0], [0.0, 1.0], [3.0, 0.0]], SpaceSpec(2, 2), SpaceSpec(1, 3))
        assert np.array_equal(T([1.0, 1.0]).coords, [3.0, 1.0, 3.0])
        assert np.array_equal(T.matrix, [[1.0, 2.0], [0.0, 1.0], [3.0, 0.0]])

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000), st.floats(-5, 5), st.floats(-5, 5))
    def test_linear_in_each_slot(self, seed, a, b):
        rng = make_rng(seed, 1)
        T = MultilinearMap((SpaceSpec(2, 2), SpaceSpec(1, 3), SpaceSpec(INF, 2)), SpaceSpec(2, 2),
                           rng.standard_normal((2, 3, 2, 2)))
        x, y, z, w = rng.standard_normal(2), rng.standard_normal(3), rng.standard_normal(2), rng.standard_normal(3)
        lhs = T(x, a * y + b * w, z).coords
        rhs = a * T(x, y, z).coords + b * T(x, w, z).coords
        assert np.allclose(lhs, rhs, atol=1e-9)

    def test_box_and_diagonal(self):
        rng = make_rng(0, 1)
        T = bilinear(rng.standard_normal((3, 2)), 2.0, 2.0)
        X, Y = rng.standard_normal((4, 3)), rng.standard_normal((4, 2))
        box = evaluate_box(T, [X, Y])
        diag = evaluate_diag(T, [X, Y])
        assert box.shape == (4, 4, 1)
        for j, k in itertools.product(range(4), repeat=2):
            assert box[j, k, 0] == pytest.approx(T(X[j], Y[k]).coords[0])
        assert np.allclose(diag[:, 0], np.diagonal(box[..., 0]))

    def test_wrong_arguments(self):
        T = bilinear(np.eye(2))
        with pytest.raises(ValueError):
            T([1.0, 0.0])
        with pytest.raises(ValueError):
            T([1.0, 0.0, 0.0], [1.0, 0.0])
        with pytest.raises(ValueError):
            MultilinearMap((SpaceSpec(2, 2),), SCALARS, np.zeros((3, 1)))
        with pytest.raises(ValueError):
            MultilinearMap((SpaceSpec(2, 2),), SCALARS, [np.nan, 0.0])


class TestOperatorNorm:
    @pytest.mark.parametrize("N", range(1, 11))
    def test_identity_form_on_l_inf(self, N):
        est = op_norm(bilinear(np.eye(N)))
        assert est.kind is EstimateKind.EXACT
        assert est.value == pytest.approx(float(N), rel=1e-12)
        assert est.value == brute_bilinear_on_cube(np.eye(N))

    @pytest.mark.parametrize("seed", range(8))
    def test_random_forms_against_sign_enumeration(self, seed):
        N = 2 + seed % 7
        A = make_rng(seed, 5).standard_normal((N, N))
        est = op_norm(bilinear(A))
        assert est.value == pytest.approx(brute_bilinear_on_cube(A), rel=1e-12)
        x, y = est.witness
        assert abs(x.coords @ A @ y.coords) == pytest.approx(est.value, rel=1e-12)

    @pytest.mark.parametrize("u,v", [(2.0, 2.0), (3.0, 1.5), (1.0, 2.0), (INF, 3.0)])
    def test_rank_one_is_product_of_dual_norms(self, u, v):
        rng = make_rng(3, 0)
        phi, psi = rng.standard_normal(3), rng.standard_normal(4)
        T = bilinear(np.outer(phi, psi), u, v)
        expected = dual_norm(Functional(SpaceSpec(u, 3), phi)) * dual_norm(Functional(SpaceSpec(v, 4), psi))
        assert op_norm(T).value == pytest.approx(expected, rel=1e-8)

    @pytest.mark.parametrize("n", [1, 2, 4])
    def test_product_form_has_norm_one(self, n):
        assert op_norm(product_form(n)).value == pytest.approx(1.0)

    def test_spectral_norm_on_hilbert_spaces(self):
        A = make_rng(2, 0).standard_normal((4, 3))
        est = op_norm(bilinear(A, 2.0, 2.0))
        assert est.kind is EstimateKind.LOWER
        assert est.value == pytest.approx(np.linalg.norm(A, 2), rel=1e-8)

    @pytest.mark.parametrize("seed", range(5))
    def test_ascent_never_exceeds_enumeration(self, seed):
        A = make_rng(seed, 6).standard_normal((5, 5))
        exact = op_norm(bilinear(A), mode="exact").value
        for restarts in (1, 4):
            low = op_norm(bilinear(A), Budget(restarts=restarts), mode="ascent").value
            assert low <= exact * (1 + 1e-12)

    def test_exact_refused_past_cap(self):
        with pytest.raises(ValueError):
            op_norm(bilinear(np.eye(3), 2.0, 2.0), mode="exact")
        with pytest.raises(ValueError):
            op_norm(bilinear(np.eye(3)), mode="fast")


class TestPolynomials:
    def test_linear_times_functional(self):
        space = SpaceSpec(2, 2)
        gamma = Functional(space, [1.0, -2.0])
        P = HomogeneousPolynomial.from_linear(MultilinearMap.linear([[3.0, 1.0]], space, SCALARS))
        Q = multiply(gamma, P)
        # sym(x, y) = (gamma(x) P(y) + gamma(y) P(x)) / 2
        x, y = np.array([1.0, 2.0]), np.array([-1.0, 0.5])
        expected = 0.5 * ((x @ gamma.coords) * (y @ [3.0, 1.0]) + (y @ gamma.coords) * (x @ [3.0, 1.0]))
        assert Q.sym(x, y).coords[0] == pytest.approx(expected)

    @pytest.mark.parametrize("degree", [1, 2, 3])
    def test_product_is_pointwise(self, degree):
        rng = make_rng(degree, 8)
        space, cod = SpaceSpec(3.0, 3), SpaceSpec(2.0, 2)
        P = HomogeneousPolynomial.from_tensor(rng.standard_normal((3,) * degree + (2,)), degree, space, cod)
        gamma = Functional(space, rng.standard_normal(3))
        Q = multiply(gamma, P)
        assert Q.degree == degree + 1
        for x in rng.standard_normal((100, 3)):
            assert np.allclose(Q(x).coords, gamma(Vector(space, x)) * P(x).coords, atol=1e-10)

    def test_power_times(self):
        rng = make_rng(4, 8)
        space = SpaceSpec(2, 2)
        T = MultilinearMap.linear(rng.standard_normal((3, 2)), space, SpaceSpec(1, 3))
        gamma = Functional(space, rng.standard_normal(2))
        P = power_times(gamma, T, 3)
        assert P.degree == 4
        for x in rng.standard_normal((20, 2)):
            assert np.allclose(P(x).coords, (x @ gamma.coords) ** 3 * (T.matrix @ x), atol=1e-10)

    @pytest.mark.parametrize("degree", [2, 3])
    def test_polarization_round_trip(self, degree):
        rng = make_rng(degree, 9)
        space = SpaceSpec(2, 3)
        P = HomogeneousPolynomial.from_tensor(rng.standard_normal((3,) * degree), degree, space)
        xs = list(rng.standard_normal((degree, 3)))
        assert np.allclose(polarization_value(lambda z: P(z).coords, xs), P.sym(*xs).coords, atol=1e-10)
        back = polynomial_from_values(lambda z: P(z).coords, degree, space)
        assert np.allclose(back.sym.coeffs, P.sym.coeffs, atol=1e-10)

    def test_symmetry_required(self):
        space = SpaceSpec(2, 2)
        sym = MultilinearMap((space, space), SCALARS, [[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(ValueError):
            HomogeneousPolynomial(2, space, SCALARS, sym)

    def test_fix_point(self):
        rng = make_rng(1, 9)
        space = SpaceSpec(2, 3)
        P = HomogeneousPolynomial.from_tensor(rng.standard_normal((3, 3, 3)), 3, space)
        a, x = rng.standard_normal(3), rng.standard_normal(3)
        assert fix_point(P, a, 1)(x).coords[0] == pytest.approx(P.sym(a, x, x).coords[0])
        assert fix_point(P, a, 2)(x).coords[0] == pytest.approx(P.sym(a, a, x).coords[0])
        assert np.allclose(fix_point(P, a, 0).sym.coeffs, P.sym.coeffs)
        with pytest.raises(ValueError):
            fix_point(P, a, 3)


class TestRestrictions:
    def test_restrict_freezes_slot(self):
        rng = make_rng(0, 10)
        T = MultilinearMap((SpaceSpec(2, 2), SpaceSpec(1, 3), SpaceSpec(INF, 2)), SpaceSpec(2, 2),
                           rng.standard_normal((2, 3, 2, 2)))
        a, x, z = rng.standard_normal(3), rng.standard_normal(2), rng.standard_normal(2)
        R = restrict(T, 1, a)
        assert R.domain == (SpaceSpec(2, 2), SpaceSpec(INF, 2))
        assert np.allclose(R(x, z).coords, T(x, a, z).coords)
        with pytest.raises(ValueError):
            restrict(T, 3, a)

    @pytest.mark.parametrize("seed", range(10))
    def test_restriction_norm_bound(self, seed):
        rng = make_rng(seed, 11)
        T = bilinear(rng.standard_normal((4, 4)))
        a = rng.standard_normal(4)
        lhs = op_norm(restrict(T, 0, a)).value
        rhs = np.abs(a).max() * op_norm(T).value
        assert lhs <= rhs * (1 + 1e-12)

    def test_compose(self):
        rng = make_rng(1, 12)
        T = bilinear(rng.standard_normal((2, 3)), 2.0, 2.0)
        u = MultilinearMap.linear(rng.standard_normal((2, 4)), SpaceSpec(1, 4), SpaceSpec(2, 2))
        outer = MultilinearMap.linear([[2.0], [-1.0]], SCALARS, SpaceSpec(2, 2))
        C = compose(outer, T, [u, None])
        x, y = rng.standard_normal(4), rng.standard_normal(3)
        assert C.domain[0] == SpaceSpec(1, 4) and C.codomain == SpaceSpec(2, 2)
        assert np.allclose(C(x, y).coords, outer.matrix @ T(u.matrix @ x, y).coords)
        with pytest.raises(ValueError):
            compose(None, T, [None, u])
