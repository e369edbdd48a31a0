import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from summingnorms.estimate import Budget
from summingnorms.spaces import INF, SpaceSpec, make_rng
from summingnorms.summing import (
    InadmissibleExponents,
    SummingKind,
    SummingParams,
    check_triviality,
    estimate_norm,
    evaluate_witness,
    maximize_functionals,
    restriction_transport,
)
from summingnorms.tensors import SCALARS, MultilinearMap, compose, op_norm, product_form, restrict

L2 = SpaceSpec(2.0, 2)


def signed_partitions(N, blocks):
    """Every assignment of coordinates to at most ``blocks`` members with a sign each."""
    for owner in itertools.product(range(blocks), repeat=N):
        for signs in itertools.product((-1.0, 1.0), repeat=N):
            X = np.zeros((blocks, N))
            X[list(owner), range(N)] = signs
            yield X


def pi1_on_cube(matrix, codomain, blocks):
    """1-summing norm of a map on l_inf^N: the extreme families have unit weak-1 norm."""
    return max(float(codomain.norm(X @ matrix.T).sum()) for X in signed_partitions(matrix.shape[1], blocks))


class TestParams:
    @pytest.mark.parametrize("params,constraint", [
        (SummingParams.as_linear(1, 2), "1/p > 1/q"),
        (SummingParams.as_linear_pqr(1, 4, 4), "1/p > 1/q + 1/r"),
        (SummingParams.as_multi(1, (4, 4)), "1/p > 1/q_1 + ... + 1/q_n"),
        (SummingParams.as_multi_r(1, (4, 4), 4), "1/p > 1/q_1 + ... + 1/q_n + 1/r"),
        (SummingParams.multiple(1, (1, 2)), "1/p > 1/q_i"),
        (SummingParams.multiple_r(1, (2,), 2.5), "1/p > 1/q_i + 1/r"),
        (SummingParams.mixing(1, 2, (1,)), "q > s"),
        (SummingParams.mixing(2, 1, (2,)), "p_k > q"),
        (SummingParams.mixing(INF, 1, (1,)), "s = inf"),
    ])
    def test_constraint_names(self, params, constraint):
        v = params.violation(2)
        assert v is not None and v[0] == constraint
        with pytest.raises(InadmissibleExponents) as info:
            params.check(2)
        assert info.value.constraint == constraint
        assert str(info.value).startswith(f"inadmissible exponents: {constraint}")

    def test_offending_slot(self):
        assert SummingParams.multiple(1, (1, 2, 1)).violation() == ("1/p > 1/q_i", 1)

    @pytest.mark.parametrize("params", [
        SummingParams.as_linear(2, 2), SummingParams.as_linear(2, 1), SummingParams.multiple(2, (1, 2)),
        SummingParams.multiple_r(1, (2,), 2), SummingParams.as_multi(1, (2, 2)), SummingParams.mixing(2, 1, (1,)),
    ])
    def test_admissible(self, params):
        assert params.violation(2) is None

    def test_malformed(self):
        with pytest.raises(ValueError):
            SummingParams(SummingKind.MIXING_MULTI, 1, (1,))
        with pytest.raises(ValueError):
            SummingParams(SummingKind.MULTIPLE, 1, (1,), s=2)
        with pytest.raises(ValueError):
            SummingParams(SummingKind.AS_LINEAR, 1, (1, 1))
        with pytest.raises(ValueError):
            SummingParams.multiple(1, (1, 1)).weak_exponents(3)
        with pytest.raises(ValueError):
            SummingParams.as_multi(0.5, (2, 2))


class TestExamples:
    @pytest.mark.parametrize("seed", range(5))
    def test_product_map_ratio_one(self, seed):
        rng = make_rng(seed, 3)
        xs = [rng.standard_normal((3, 1)), rng.standard_normal((4, 1))]
        w = evaluate_witness(product_form(2), SummingParams.multiple(1, (1, 1)), xs)
        assert w.ratio == pytest.approx(1.0, rel=1e-12)
        assert w.certified

    def test_zero_map(self):
        T = MultilinearMap((L2, L2), L2, np.zeros((2, 2, 2)))
        assert estimate_norm(T, SummingParams.multiple(2, (1, 1)), Budget(restarts=2, iters=10)).value == 0.0

    @pytest.mark.parametrize("u,expected", [(1.0, 1.0), (INF, 2.0)])
    def test_identity_on_two_basis_vectors(self, u, expected):
        E = SpaceSpec(u, 2)
        w = evaluate_witness(MultilinearMap.linear(np.eye(2), E, E), SummingParams.as_linear(1, 1), [np.eye(2)])
        assert w.lhs == 2.0
        assert w.ratio == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("seed", range(4))
    def test_one_slot_kinds_coincide(self, seed):
        rng = make_rng(seed, 4)
        T = MultilinearMap.linear(rng.standard_normal((2, 3)), SpaceSpec(3.0, 3), L2)
        X = rng.standard_normal((4, 3))
        ratios = [evaluate_witness(T, params, [X]).ratio for params in (
            SummingParams.as_linear(2, 1.5), SummingParams.as_multi(2, (1.5,)), SummingParams.multiple(2, (1.5,)))]
        assert ratios[0] == pytest.approx(ratios[1], rel=1e-12)
        assert ratios[0] == pytest.approx(ratios[2], rel=1e-12)

    def test_functionals_required_or_refused(self):
        T = MultilinearMap.linear(np.eye(2), L2, L2)
        with pytest.raises(ValueError):
            evaluate_witness(T, SummingParams.multiple_r(1, (2,), 2), [np.eye(2)])
        with pytest.raises(ValueError):
            evaluate_witness(T, SummingParams.multiple(1, (1,)), [np.eye(2)], phis=np.eye(2))
        with pytest.raises(InadmissibleExponents):
            evaluate_witness(T, SummingParams.as_linear(1, 2), [np.eye(2)])


class TestEstimator:
    @pytest.mark.parametrize("seed", range(6))
    def test_one_summing_on_cube_against_partitions(self, seed):
        rng = make_rng(seed, 5)
        N = 2 + seed % 2
        M = rng.standard_normal((2, N))
        T = MultilinearMap.linear(M, SpaceSpec(INF, N), L2)
        oracle = pi1_on_cube(M, L2, 3)
        est = estimate_norm(T, SummingParams.as_linear(1, 1), Budget(restarts=6, iters=200, m_max=3))
        assert est.value <= oracle * (1 + 1e-9)
        assert est.value >= oracle * (1 - 1e-6)

    @pytest.mark.parametrize("seed", range(4))
    def test_witness_ratio_recomputes(self, seed):
        rng = make_rng(seed, 6)
        T = MultilinearMap((SpaceSpec(1, 2), SpaceSpec(INF, 2)), L2, rng.standard_normal((2, 2, 2)))
        params = SummingParams.multiple_r(1, (2, 2), 2)
        est = estimate_norm(T, params, Budget(restarts=3, iters=40, m_max=2))
        w = est.witness
        again = evaluate_witness(T, params, [f.flat for f in w.x_families], w.phis)
        assert again.ratio == pytest.approx(est.value, rel=1e-12)

    def test_single_members_reach_operator_norm(self):
        rng = make_rng(1, 6)
        T = MultilinearMap((SpaceSpec(INF, 3), SpaceSpec(INF, 3)), SCALARS, rng.standard_normal((3, 3)))
        est = estimate_norm(T, SummingParams.multiple(2, (1, 1)), Budget(restarts=2, iters=20, m_max=1))
        assert est.value == pytest.approx(op_norm(T).value, rel=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_r_infinite_matches_plain_kind(self, seed):
        rng = make_rng(seed, 7)
        T = MultilinearMap((L2, L2), L2, rng.standard_normal((2, 2, 2)))
        xs = [rng.standard_normal((2, 2)), rng.standard_normal((3, 2))]
        plain = evaluate_witness(T, SummingParams.multiple(2, (1, 1)), xs)
        tested = maximize_functionals(T, SummingParams.multiple_r(2, (1, 1), INF), xs)
        assert tested.ratio == pytest.approx(plain.ratio, rel=1e-9)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000), st.sampled_from([1.0, 2.0, 3.0]))
    def test_tested_ratio_below_plain_ratio(self, seed, r):
        rng = make_rng(seed, 8)
        T = MultilinearMap((SpaceSpec(1, 2), SpaceSpec(3.0, 2)), L2, rng.standard_normal((2, 2, 2)))
        xs = [rng.standard_normal((2, 2)), rng.standard_normal((2, 2))]
        phis = rng.standard_normal((2, 2, 2))
        tested = evaluate_witness(T, SummingParams.multiple_r(2, (2, 2), r), xs, phis)
        plain = evaluate_witness(T, SummingParams.multiple(2, (2, 2)), xs)
        assert tested.ratio <= plain.ratio * (1 + 1e-12)

    @pytest.mark.parametrize("lam", [0.25, 7.0])
    def test_homogeneous_in_the_map(self, lam):
        rng = make_rng(2, 9)
        T = MultilinearMap((L2, L2), L2, rng.standard_normal((2, 2, 2)))
        xs = [rng.standard_normal((3, 2)), rng.standard_normal((2, 2))]
        params = SummingParams.multiple(2, (1, 1))
        base = evaluate_witness(T, params, xs).ratio
        assert evaluate_witness(T.scaled(lam), params, xs).ratio == pytest.approx(lam * base, rel=1e-12)
        budget = Budget(restarts=2, iters=30, m_max=2)
        assert estimate_norm(T.scaled(lam), params, budget).value == pytest.approx(
            lam * estimate_norm(T, params, budget).value, rel=1e-6)

    def test_deterministic(self):
        T = MultilinearMap((L2, L2), L2, make_rng(0, 9).standard_normal((2, 2, 2)))
        params = SummingParams.mixing(2, 1, (1, 1))
        budget = Budget(restarts=2, iters=20, m_max=2, seed=5)
        a, b = estimate_norm(T, params, budget), estimate_norm(T, params, budget)
        assert a.value == b.value
        assert np.array_equal(a.witness.phis.coords, b.witness.phis.coords)


class TestTransport:
    @pytest.mark.parametrize("seed", range(10))
    def test_composition(self, seed):
        rng = make_rng(seed, 10)
        E = SpaceSpec(INF, 2)
        T = MultilinearMap((L2, L2), L2, rng.standard_normal((2, 2, 2)))
        u1 = MultilinearMap.linear(rng.standard_normal((2, 2)), E, L2)
        u2 = MultilinearMap.linear(rng.standard_normal((2, 2)), E, L2)
        v = MultilinearMap.linear(rng.standard_normal((2, 2)), L2, SpaceSpec(1, 2))
        C = compose(v, T, [u1, u2])
        params = SummingParams.multiple(2, (1, 1))
        xs = [rng.standard_normal((3, 2)), rng.standard_normal((2, 2))]
        composed = evaluate_witness(C, params, xs)
        pushed = evaluate_witness(T, params, [xs[0] @ u1.matrix.T, xs[1] @ u2.matrix.T])
        v_norm = max(float(SpaceSpec(1, 2).norm(v.matrix @ e)) for e in np.array([[np.cos(t), np.sin(t)]
                                                                                    for t in np.linspace(0, np.pi, 20001)]))
        v_norm *= 1 + 1e-6  # grid sup of a convex function on the circle, padded
        bound = v_norm * op_norm(u1).value * op_norm(u2).value * pushed.ratio
        assert composed.ratio <= bound * (1 + 1e-9)

    def test_restriction_at_zero(self):
        rng = make_rng(0, 11)
        T = MultilinearMap((L2, L2), L2, rng.standard_normal((2, 2, 2)))
        params = SummingParams.multiple(2, (1,))
        wa = evaluate_witness(restrict(T, 0, np.zeros(2)), params, [rng.standard_normal((3, 2))])
        wt = restriction_transport(T, params, np.zeros(2), wa, pad_to=3)
        assert wa.lhs == 0.0 and wt.lhs == 0.0 and wt.rhs == 0.0

    @pytest.mark.parametrize("seed", range(200))
    def test_rhs_gains_norm_of_a(self, seed):
        rng = make_rng(seed, 12)
        E = SpaceSpec((1.0, 2.0, 3.0, INF)[seed % 4], 2)
        T = MultilinearMap((E, E), L2, rng.standard_normal((2, 2, 2)))
        a = rng.standard_normal(2)
        if seed % 5 == 0:
            a = a / E.norm(a)
        kinds = [SummingParams.multiple(2, (1,)), SummingParams.multiple_r(1, (2,), 2)]
        params = kinds[seed % 2]
        X = rng.standard_normal((3, 2))
        phis = rng.standard_normal((3, 2)) if params.uses_r else None
        wa = evaluate_witness(restrict(T, 0, a), params, [X], phis)
        wt = restriction_transport(T, params, a, wa, pad_to=3)
        assert wt.lhs == pytest.approx(wa.lhs, rel=1e-12)
        assert wt.rhs == pytest.approx(float(E.norm(a)) * wa.rhs, rel=1e-9)

    def test_diagonal_kinds_refused(self):
        T = MultilinearMap((L2, L2), L2, np.zeros((2, 2, 2)))
        params = SummingParams.as_multi(2, (2,))
        w = evaluate_witness(restrict(T, 0, [1.0, 0.0]), params, [np.eye(2)])
        with pytest.raises(ValueError):
            restriction_transport(T, params, [1.0, 0.0], w)


class TestTriviality:
    @pytest.mark.parametrize("params,n,delta", [
        (SummingParams.as_linear(1, 2), 1, 0.5),
        (SummingParams.multiple_r(1, (2,), 2.5), 2, 0.1),
        (SummingParams.multiple_r(1, (2,), 4), 1, 0.25),
        (SummingParams.multiple(1, (1, 4)), 2, 0.75),
        (SummingParams.as_multi(1, (4, 4)), 2, 0.5),
        (SummingParams.mixing(2, 1, (2,)), 2, 0.5),
    ])
    def test_measured_slope(self, params, n, delta):
        T = MultilinearMap((L2,) * n, L2, make_rng(n, 13).standard_normal((2,) * n + (2,)))
        rep = check_triviality(params, T)
        assert rep.diverges
        assert rep.predicted_exponent == pytest.approx(delta, rel=1e-12)
        assert rep.measured_exponent == pytest.approx(delta, rel=1e-9)

    def test_zero_map_is_the_only_member(self):
        T = MultilinearMap((L2,), L2, np.zeros((2, 2)))
        rep = check_triviality(SummingParams.as_linear(1, 2), T)
        assert rep.zero_map and not rep.diverges and max(rep.ratios) == 0.0

    def test_admissible_refused(self):
        T = MultilinearMap((L2,), L2, np.eye(2))
        with pytest.raises(ValueError):
            check_triviality(SummingParams.as_linear(2, 1), T)
        with pytest.raises(ValueError):
            check_triviality(SummingParams.mixing(1, 2, (1,)), T)
