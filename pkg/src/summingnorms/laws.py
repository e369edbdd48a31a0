"""Executable checks of summing-norm inequalities on concrete instances.

Each law returns a :class:`LawReport` made of one or more :class:`Check`
comparisons ``lhs <= rhs``.  A check can only *fail* when the comparison is
certifiable: the left side must be exact or a lower bound and the right side
exact or an upper bound.  Any other violated comparison is inconclusive.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .estimate import Budget, EstimateKind, NormEstimate
from .seqnorms import VectorFamily, mixed_norm_dual, mixed_norm_primal, strong_norm, weak_norm, weak_norm_array
from .spaces import INF, Functional, SpaceSpec, Vector, lp_norm, reciprocal
from .summing import (
    MultiIndexedFunctionals,
    SummingKind,
    SummingParams,
    SummingWitness,
    check_triviality,
    estimate_norm,
    evaluate_witness,
    maximize_functionals,
    restriction_transport,
)
from .tensors import (
    HomogeneousPolynomial,
    MultilinearMap,
    compose,
    evaluate_box,
    fix_point,
    multiply,
    op_norm,
    power_times,
    restrict,
)

EXACT, LOWER, UPPER = EstimateKind.EXACT, EstimateKind.LOWER, EstimateKind.UPPER
SQRT2 = math.sqrt(2.0)


class Verdict(str, enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Check:
    name: str
    lhs: float
    rhs: float
    lhs_kind: EstimateKind
    rhs_kind: EstimateKind
    tolerance: float
    margin: float
    verdict: Verdict


def compare(name: str, lhs: float, lhs_kind: EstimateKind, rhs: float, rhs_kind: EstimateKind,
            tolerance: float) -> Check:
    """The single place where verdicts are decided."""
    margin = rhs - lhs
    if margin >= -tolerance:
        verdict = Verdict.PASS
    elif lhs_kind in (EXACT, LOWER) and rhs_kind in (EXACT, UPPER):
        verdict = Verdict.FAIL
    else:
        verdict = Verdict.INCONCLUSIVE
    return Check(name, float(lhs), float(rhs), lhs_kind, rhs_kind, float(tolerance), float(margin), verdict)


def rel_tol(scale: float, rel: float = 1e-9) -> float:
    return rel * max(1.0, abs(scale))


@dataclass(frozen=True)
class LawReport:
    law_id: str
    instance: dict
    checks: tuple[Check, ...]
    witness: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    informational: bool = False

    @property
    def verdict(self) -> Verdict:
        if not self.checks:
            return Verdict.INCONCLUSIVE
        vs = [c.verdict for c in self.checks]
        if Verdict.FAIL in vs:
            return Verdict.FAIL
        if Verdict.INCONCLUSIVE in vs or self.informational:
            return Verdict.INCONCLUSIVE
        return Verdict.PASS

    @property
    def primary(self) -> Check:
        return self.checks[0]

    @property
    def lhs(self) -> float:
        return self.primary.lhs

    @property
    def rhs(self) -> float:
        return self.primary.rhs

    @property
    def margin(self) -> float:
        return self.primary.margin

    @property
    def tolerance(self) -> float:
        return self.primary.tolerance

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS

    def as_dict(self) -> dict:
        from .serialize import to_jsonable

        return {
            "law_id": self.law_id,
            "verdict": self.verdict.value,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "tolerance": self.tolerance,
            "instance": to_jsonable(self.instance),
            "checks": to_jsonable(list(self.checks)),
            "witness": to_jsonable(self.witness),
            "details": to_jsonable(self.details),
        }


def _kind(est: NormEstimate, claimed: EstimateKind) -> EstimateKind:
    # an uncertified estimate is not a bound in its claimed direction
    if est.kind is EXACT:
        return EXACT
    if not est.certified:
        return LOWER if claimed is UPPER else claimed
    return claimed


def _exact_if(flag: bool, otherwise: EstimateKind = LOWER) -> EstimateKind:
    return EXACT if flag else otherwise


# ---------------------------------------------------------------------------
# Littlewood and Bohnenblust-Hille


def _require_scalar_cube_form(T: MultilinearMap) -> None:
    if not T.is_scalar:
        raise ValueError("expected a scalar-valued form")
    if any(s.exponent is not INF for s in T.domain):
        raise ValueError("expected l_inf domains")


def littlewood_43(T: MultilinearMap, exhaustive: bool = True, budget: Budget | None = None,
                  instance: dict | None = None) -> LawReport:
    """(sum |T(e_i, e_j)|^{4/3})^{3/4} <= sqrt(2) ||T|| for a bilinear form on l_inf^N."""
    if T.arity != 2:
        raise ValueError("Littlewood's inequality is about bilinear forms")
    _require_scalar_cube_form(T)
    lhs = float(lp_norm(T.coeffs, 4.0 / 3.0))
    norm = op_norm(T, budget, mode="exact" if exhaustive else "ascent")
    ratio = lhs / norm.value if norm.value > 0 else 0.0
    # the ratio is exact with an exact norm, otherwise it overestimates
    check = compare("ratio <= sqrt(2)", ratio, EXACT if norm.is_exact else UPPER, SQRT2, EXACT, 1e-9)
    inst = {"N": T.domain[0].dim, "exhaustive": exhaustive, **(instance or {})}
    return LawReport("littlewood43", inst, (check,),
                     witness={"maximizer": [v.coords for v in norm.witness]},
                     details={"lhs": lhs, "op_norm": norm.value, "op_norm_kind": norm.kind.value,
                              "ratio": ratio})


def bohnenblust_hille(T: MultilinearMap, families: Sequence[np.ndarray] | None = None,
                      budget: Budget | None = None, instance: dict | None = None) -> LawReport:
    """Multiple (2n/(n+1); 1, ..., 1) ratio of a scalar n-linear form.

    For n = 2 the ratio is checked against sqrt(2) ||T||.  For n >= 3 only the
    empirical ratio and its normalization by ||T|| are recorded.
    """
    n = T.arity
    if n < 2:
        raise ValueError("needs n >= 2")
    if not T.is_scalar:
        raise ValueError("expected a scalar-valued form")
    rho = 2.0 * n / (n + 1)
    if families is None:
        families = [np.eye(s.dim) for s in T.domain]
    b = budget or Budget()
    params = SummingParams.multiple(rho, (1.0,) * n)
    w = evaluate_witness(T, params, families, budget=b)
    norm = op_norm(T, b)
    const = w.ratio / norm.value if norm.value > 0 else 0.0
    details = {"exponent": rho, "ratio": w.ratio, "op_norm": norm.value, "op_norm_kind": norm.kind.value,
               "normalized_ratio": const, "weak_norms": list(w.weak_norms)}
    inst = {"n": n, "dims": [s.dim for s in T.domain], **(instance or {})}
    if n == 2:
        exact = norm.is_exact and w.certified
        check = compare("ratio <= sqrt(2) ||T||", w.ratio, _exact_if(w.certified),
                        SQRT2 * norm.value, UPPER if exact else LOWER, rel_tol(norm.value))
        return LawReport("bh", inst, (check,), details=details)
    check = compare("normalized ratio recorded", const, _exact_if(w.certified and norm.is_exact, UPPER),
                    math.inf, EXACT, 0.0)
    return LawReport("bh", inst, (check,), details=details, informational=True)


def bh_exponent_probe(make_tensor, n: int, dims: Sequence[int], exponents: Sequence[float],
                      budget: Budget | None = None) -> dict:
    """Growth of (sum |T(e_i...)|^t)^{1/t} / ||T|| with N for several exponents t.

    ``make_tensor(n, N)`` returns a scalar n-linear form on l_inf^N.  The
    fitted log-log slope is reported per exponent; it is an exploratory
    measurement, not an assertion.
    """
    table = {float(t): [] for t in exponents}
    kinds = []
    for N in dims:
        T = make_tensor(n, N)
        norm = op_norm(T, budget)
        kinds.append(norm.kind.value)
        for t in exponents:
            table[float(t)].append(float(lp_norm(T.coeffs, t)) / norm.value)
    logs = np.log(np.asarray(dims, dtype=float))
    slopes = {t: float(np.polyfit(logs, np.log(v), 1)[0]) for t, v in table.items()}
    return {"n": n, "dims": list(dims), "ratios": table, "slopes": slopes, "norm_kinds": kinds,
            "critical_exponent": 2.0 * n / (n + 1)}


# ---------------------------------------------------------------------------
# mixed norms


def maurey_duality(fam: VectorFamily, s, q, budget: Budget | None = None, gap_tolerance: float = 0.05,
                   instance: dict | None = None) -> LawReport:
    """Maurey lower bound never exceeds the factorization upper bound; report the gap."""
    primal = mixed_norm_primal(fam, s, q, budget)
    dual = mixed_norm_dual(fam, s, q, budget)
    up_kind = _kind(primal, UPPER)
    c1 = compare("dual <= primal", dual.value, LOWER, primal.value, up_kind, rel_tol(primal.value))
    gap = (primal.value - dual.value) / primal.value if primal.value > 0 else 0.0
    c2 = compare("relative gap <= tolerance", gap, UPPER if up_kind is UPPER else LOWER,
                 gap_tolerance, EXACT, 0.0)
    inst = {"space": fam.space, "m": fam.size, "s": s, "q": q, **(instance or {})}
    return LawReport("maurey", inst, (c1, c2),
                     witness={"taus": primal.witness.taus, "atoms": dual.witness.atom_coords,
                              "weights": dual.witness.weights},
                     details={"primal": primal.value, "dual": dual.value, "gap": gap,
                              "primal_certified": primal.certified, "primal_info": primal.info,
                              "dual_info": dual.info})


def mixing_characterization(A: MultilinearMap, s, q, p_list: Sequence, families: Sequence[np.ndarray],
                            budget: Budget | None = None, gap_tolerance: float = 0.10,
                            instance: dict | None = None) -> LawReport:
    """Two routes to the mixing constant on the same inputs.

    Route (a) brackets the mixed (s, q) norm of the output family; route (b)
    maximizes the functional-list inequality over functionals of unit l_s
    norm with the inputs fixed.  (b) is a lower bound of (a).
    """
    params = SummingParams.mixing(s, q, p_list)
    params.check(A.arity)
    b = budget or Budget()
    Z = VectorFamily(A.codomain, evaluate_box(A, families))
    if params.s == params.p:
        up = weak_norm(Z, params.p, b)
        low = up
    else:
        up = mixed_norm_primal(Z, params.s, params.p, b)
        low = mixed_norm_dual(Z, params.s, params.p, b)
    wb = maximize_functionals(A, params, families, b)
    weak_prod = math.prod(wb.weak_norms[:-1])
    route_b = wb.lhs / wb.weak_norms[-1] if wb.weak_norms[-1] > 0 else 0.0
    up_kind = _kind(up, UPPER) if params.s != params.p else (EXACT if up.is_exact else LOWER)
    c1 = compare("route (b) <= route (a)", route_b, LOWER, up.value, up_kind, rel_tol(up.value))
    gap = (up.value - route_b) / up.value if up.value > 0 else 0.0
    c2 = compare("relative gap <= tolerance", gap, UPPER if up_kind in (EXACT, UPPER) else LOWER,
                 gap_tolerance, EXACT, 0.0)
    inst = {"dims": [d.dim for d in A.domain], "codomain": A.codomain, "s": s, "q": q,
            "p_list": list(p_list), "m": [len(f) for f in families], **(instance or {})}
    return LawReport("mixing", inst, (c1, c2),
                     witness={"phis": wb.phis.coords},
                     details={"route_a_upper": up.value, "route_a_lower": low.value, "route_b": route_b,
                              "gap": gap, "sigma_upper": up.value / weak_prod if weak_prod > 0 else 0.0,
                              "sigma_lower": route_b / weak_prod if weak_prod > 0 else 0.0})


# ---------------------------------------------------------------------------
# coherence and compatibility


def _uniform_q(params: SummingParams):
    qs = set(params.q_list)
    if len(qs) != 1:
        raise ValueError("polynomial ideals use one weak exponent for every slot")
    return params.q_list[0]


def _random_witness(rng: np.random.Generator, T: MultilinearMap, params: SummingParams, m: int):
    xs = [rng.standard_normal((m, s.dim)) for s in T.domain]
    if params.kind is SummingKind.MIXING_MULTI:
        phis = rng.standard_normal((m + 1, T.codomain.dim))
    elif params.kind is SummingKind.MULTIPLE_R:
        phis = rng.standard_normal((m,) * T.arity + (T.codomain.dim,))
    else:
        phis = None
    return xs, phis


def _ratio_check(name: str, small: SummingWitness, factor: float, big: SummingWitness) -> tuple[Check, float]:
    """small.ratio <= factor * big.ratio, with the achieved constant."""
    kind_small = EXACT if small.certified else UPPER
    kind_big = EXACT if big.certified else LOWER
    bound = factor * big.ratio
    beta = small.ratio / bound if bound > 0 else 0.0
    return compare(name, small.ratio, kind_small, bound, kind_big, rel_tol(bound, 1e-12)), beta


def restriction_check(P: HomogeneousPolynomial, params: SummingParams, a, xs, phis,
                      budget: Budget | None = None) -> tuple[list[Check], float]:
    """Test data for P_a becomes test data for P by inserting (a, 0, ..., 0)."""
    n = P.degree
    slot = n - 1 if params.kind is SummingKind.MIXING_MULTI else 0
    Pa = restrict(P.sym, slot, a)
    wa = evaluate_witness(Pa, params, xs, phis, budget)
    m = max(1, len(xs[0]))
    wt = restriction_transport(P.sym, params, a, wa, slot=slot, pad_to=m, budget=budget)
    an = float(P.space.norm(np.asarray(getattr(a, "coords", a), dtype=float)))
    checks = [compare("transported lhs equals lhs", abs(wt.lhs - wa.lhs), EXACT, 0.0, EXACT,
                      rel_tol(wa.lhs, 1e-12))]
    c, beta = _ratio_check("ratio(P_a) <= ||a|| ratio(P)", wa, an, wt)
    checks.append(c)
    return checks, beta


def _reblock(xs: list[np.ndarray], phis: np.ndarray, gamma: np.ndarray, k: int):
    """Test data for P from test data for gamma*P, one term of the polarization sum.

    Slot k of gamma*P is absorbed into its neighbour l: the merged family is
    z_(a, b) = gamma(x^(k)_a) x^(l)_b, and the functionals are re-indexed to
    match the merged index.
    """
    n1 = len(xs)
    l = k + 1 if k + 1 < n1 else k - 1
    m_k, m_l = xs[k].shape[0], xs[l].shape[0]
    g = xs[k] @ gamma
    z = (g[:, None, None] * xs[l][None, :, :]).reshape(m_k * m_l, -1)
    new_xs = []
    for i in range(n1):
        if i == k:
            continue
        new_xs.append(z if i == l else xs[i])
    # move axis k next to axis l (k first), then merge them
    order = [i for i in range(n1) if i != k]
    pos_l = order.index(l)
    perm = order[:pos_l] + [k] + order[pos_l:]
    ph = np.transpose(phis, perm + [n1])
    shape = list(ph.shape)
    shape[pos_l:pos_l + 2] = [shape[pos_l] * shape[pos_l + 1]]
    return new_xs, ph.reshape(shape), l


def product_check(P: HomogeneousPolynomial, params: SummingParams, gamma: Functional, xs, phis,
                  budget: Budget | None = None) -> tuple[list[Check], float, list[tuple]]:
    """Bound test data for gamma*P by test data for P through the polarization formula.

    Returns the checks, the achieved constant and the re-blocked witnesses
    (families, functionals) for P, one per term.
    """
    if params.kind not in (SummingKind.MULTIPLE_R, SummingKind.MULTIPLE):
        raise ValueError("the product transport is stated for the multiple kinds")
    Q = multiply(gamma, P)
    n1 = Q.degree
    b = budget or Budget()
    wq = evaluate_witness(Q.sym, params, xs, phis, b)
    xs = [np.asarray(x, dtype=float) for x in xs]
    gnorm = float(P.space.dual_norm(gamma.coords))
    if phis is None:
        # r = inf: the witness functionals are the norming ones
        Y = evaluate_box(Q.sym, xs)
        from .spaces import norming_coords

        phis = norming_coords(Y.reshape(-1, Y.shape[-1]), P.codomain.exponent).reshape(Y.shape)
        params_r = SummingParams.multiple_r(params.p, params.q_list, INF)
        wq_r = evaluate_witness(Q.sym, params_r, xs, phis, b)
    else:
        params_r = params
        wq_r = wq
    phis = np.asarray(phis, dtype=float)
    checks = []
    if params is not params_r:
        checks.append(compare("norming functionals reproduce lhs", abs(wq_r.lhs - wq.lhs), EXACT, 0.0, EXACT,
                              rel_tol(wq.lhs, 1e-10)))
    # terms of the polarization sum, evaluated in the original indexing
    terms = []
    S = P.sym
    for k in range(n1):
        rest = [xs[i] for i in range(n1) if i != k]
        vals = evaluate_box(S, rest)  # indices without k
        g = xs[k] @ gamma.coords
        vals = np.expand_dims(vals, k) * g.reshape((1,) * k + (-1,) + (1,) * (n1 - k - 1) + (1,))
        a = np.sum(vals * phis, axis=-1)
        terms.append(float(lp_norm(a, params_r.p)))
    checks.append(compare("lhs(gamma P) <= mean of terms", wq_r.lhs, EXACT, sum(terms) / n1, EXACT,
                          rel_tol(wq_r.lhs, 1e-12)))
    children = []
    bounds = []
    certified = True
    for k in range(n1):
        new_xs, new_phi, l = _reblock(xs, phis, gamma.coords, k)
        wp = evaluate_witness(S, params_r, new_xs, new_phi, b)
        checks.append(compare(f"term {k} equals re-blocked lhs", abs(wp.lhs - terms[k]), EXACT, 0.0, EXACT,
                              rel_tol(terms[k], 1e-12)))
        if params_r is not params:
            # without functionals the child lhs only grows, since |phi(y)| <= ||y||
            child_phi = None
            wc = evaluate_witness(S, params, new_xs, None, b)
            checks.append(compare(f"term {k} <= child lhs", terms[k], EXACT, wc.lhs, EXACT, rel_tol(wc.lhs, 1e-12)))
            bounds.append(wc.ratio)
            certified &= wc.certified
        else:
            child_phi = new_phi
            wc = wp
            bounds.append(wp.ratio)
        children.append((new_xs, child_phi))
        certified &= wp.certified
        # weak norm of the merged family and of the re-indexed functionals
        q = _uniform_q(params_r)
        zk, _, zex = weak_norm_array(new_xs[[i for i in range(n1) if i != k].index(l)], P.space, q)
        xk, _, xex = weak_norm_array(xs[k], P.space, q)
        xl, _, lex = weak_norm_array(xs[l], P.space, q)
        ok = zex and xex and lex
        checks.append(compare(f"merged weak norm {k}", zk, _exact_if(zex, LOWER), gnorm * xk * xl,
                              EXACT if ok else LOWER, rel_tol(gnorm * xk * xl, 1e-12)))
        checks.append(compare(f"functionals weak norm {k}", abs(wp.weak_norms[-1] - wq_r.weak_norms[-1]), EXACT,
                              0.0, EXACT, rel_tol(wq_r.weak_norms[-1], 1e-12)))
    bound = gnorm * sum(bounds) / n1
    kind_q = EXACT if wq_r.certified else UPPER
    checks.append(compare("ratio(gamma P) <= ||gamma|| mean ratio(P)", wq_r.ratio, kind_q, bound,
                          EXACT if certified else UPPER, rel_tol(bound, 1e-12)))
    beta = wq_r.ratio / bound if bound > 0 else 0.0
    return checks, beta, children


def coherence_compatibility(P: HomogeneousPolynomial, params: SummingParams, a, gamma: Functional,
                            seed: int = 0, m: int = 2, budget: Budget | None = None,
                            instance: dict | None = None) -> LawReport:
    """Witness transport for P_a, gamma*P, P_{a^(n-1)} and gamma^(n-1) T on seeded test data."""
    from .spaces import make_rng

    params.check(P.degree)
    _uniform_q(params)
    n = P.degree
    if n < 2:
        raise ValueError("needs degree >= 2")
    rng = make_rng(seed, 0x51)
    checks: list[Check] = []
    betas1, betas2 = [], []

    # (i) P_a
    Pa = restrict(P.sym, 0, a)
    xs, phis = _random_witness(rng, Pa, params, m)
    cs, beta = restriction_check(P, params, a, xs, phis, budget)
    checks += cs
    betas1.append(beta)

    # P_{a^(n-1)}: insert a one slot at a time
    lin = fix_point(P, a, n - 1)
    xs, phis = _random_witness(rng, lin.sym, params, m)
    cur = evaluate_witness(lin.sym, params, xs, phis, budget)
    first = cur
    an = float(P.space.norm(np.asarray(getattr(a, "coords", a), dtype=float)))
    for j in range(n - 2, -1, -1):
        T_j = fix_point(P, a, j).sym
        nxt = restriction_transport(T_j, params, a, cur, slot=0, pad_to=max(1, len(xs[0])), budget=budget)
        c, beta = _ratio_check(f"ratio(P_a^{j + 1}) <= ||a|| ratio(P_a^{j})", cur, an, nxt)
        checks.append(c)
        betas1.append(beta)
        cur = nxt
    c, beta = _ratio_check("ratio(P_a^(n-1)) <= ||a||^(n-1) ratio(P)", first, an ** (n - 1), cur)
    checks.append(c)
    betas1.append(beta)

    details = {}
    if params.kind in (SummingKind.MULTIPLE_R, SummingKind.MULTIPLE):
        # (ii) gamma * P
        Q = multiply(gamma, P)
        xs, phis = _random_witness(rng, Q.sym, params, m)
        cs, beta, _ = product_check(P, params, gamma, xs, phis, budget)
        checks += cs
        betas2.append(beta)
        # gamma^(n-1) T for the linear map T = P_{a^(n-1)}
        T = lin.sym
        top = power_times(gamma, T, n - 1)
        xs, phis = _random_witness(rng, top.sym, params, m)
        frontier = [(n - 1, xs, phis)]
        while frontier:
            j, xs_j, ph_j = frontier.pop(0)
            if j == 0:
                continue
            below = power_times(gamma, T, j - 1)
            cs, beta, kids = product_check(below, params, gamma, xs_j, ph_j, budget)
            checks += cs
            betas2.append(beta)
            frontier += [(j - 1, kx, kp) for kx, kp in kids]
    else:
        details["product"] = "not applicable to this kind"

    betas = betas1 + betas2
    details.update({"beta1": 1.0, "beta2": 1.0 if betas2 else None,
                    "max_achieved_beta1": max(betas1), "max_achieved_beta2": max(betas2) if betas2 else None})
    inst = {"degree": n, "space": P.space, "codomain": P.codomain, "params": params.describe(), "seed": seed,
            "m": m, **(instance or {})}
    summary = compare("achieved constants <= 1", max(betas), EXACT if all(c.lhs_kind is EXACT for c in checks) else UPPER,
                      1.0, EXACT, 1e-12)
    return LawReport("coherence", inst, (summary, *checks), details=details)


# ---------------------------------------------------------------------------
# quotient theorem


def pi_s_upper(u: MultilinearMap, s) -> tuple[float, bool]:
    """Upper bound on the s-summing norm of a linear map, exact for rank <= 1."""
    if u.arity != 1:
        raise ValueError("expected a linear map")
    M = u.matrix  # rows: codomain
    F, G = u.domain[0], u.codomain
    if not np.any(M):
        return 0.0, True
    U, sv, Vt = np.linalg.svd(M)
    if len(sv) == 1 or sv[1] <= 1e-13 * sv[0]:
        # u(y) = psi(y) w: the ratio is at most ||w|| ||psi|| and a norming y attains it
        return float(sv[0] * G.norm(U[:, 0]) * F.dual_norm(Vt[0])), True
    cols = sum(float(F.dual_norm(np.eye(F.dim)[i]) * G.norm(M[:, i])) for i in range(F.dim))
    rows = sum(float(F.dual_norm(M[k]) * G.norm(np.eye(G.dim)[k])) for k in range(G.dim))
    svd = sum(float(sv[i] * G.norm(U[:, i]) * F.dual_norm(Vt[i])) for i in range(len(sv)))
    return min(cols, rows, svd), False


def quotient_theorem(A: MultilinearMap, u: MultilinearMap, s, q, p_list: Sequence, families: Sequence[np.ndarray],
                     phis: np.ndarray | None = None, budget: Budget | None = None,
                     instance: dict | None = None) -> LawReport:
    """Composition with an s-summing map turns mixing test data into multiple summing data, and back."""
    params = SummingParams.mixing(s, q, p_list)
    params.check(A.arity)
    b = budget or Budget()
    s, q = params.s, params.p
    F = A.codomain
    Zarr = evaluate_box(A, families)
    Z = VectorFamily(F, Zarr)
    if s == q:
        up = mixed_norm_primal(Z, s, q, b)
    else:
        up = mixed_norm_primal(Z, s, q, b)
    up_kind = _kind(up, UPPER)
    r = math.inf if reciprocal(q) == reciprocal(s) else 1.0 / (reciprocal(q) - reciprocal(s))
    taus = up.witness.taus.reshape(-1)
    ys = up.witness.ys.flat
    checks = []

    # forward: lhs(u o A) <= pi_s(u) * mixed norm of the outputs
    pi, pi_exact = pi_s_upper(u, s)
    uZ = Zarr.reshape(-1, F.dim) @ u.coeffs
    lhs_fw = float(lp_norm(u.codomain.norm(uZ), q))
    uy = float(lp_norm(u.codomain.norm(ys @ u.coeffs), s))
    tau_r = float(lp_norm(taus, INF if math.isinf(r) else r))
    checks.append(compare("Hoelder step", lhs_fw, EXACT, tau_r * uy, EXACT, rel_tol(lhs_fw, 1e-12)))
    wy, _, wy_exact = weak_norm_array(ys, F, s, cap=b.enum_cap)
    checks.append(compare("summing step", uy, EXACT, pi * wy, EXACT if (pi_exact and wy_exact) else
                          (UPPER if wy_exact else LOWER), rel_tol(pi * wy)))
    pi_kind = EXACT if pi_exact else UPPER
    rhs_fw = pi * up.value
    rhs_kind = up_kind if pi_kind is EXACT or up_kind is not EXACT else UPPER
    if pi_kind is UPPER and up_kind is LOWER:
        rhs_kind = LOWER
    checks.insert(0, compare("lhs(u o A) <= pi_s(u) mx(A(X))", lhs_fw, EXACT, rhs_fw, rhs_kind, rel_tol(rhs_fw)))

    # backward: S(y) = (phi_j(y))_j into l_s^k
    if phis is None:
        phis = maximize_functionals(A, params, families, b).phis.coords
    phis = np.asarray(phis, dtype=float).reshape(-1, F.dim)
    k = phis.shape[0]
    phi_s = float(lp_norm(F.dual_norm(phis), s))
    Lk = SpaceSpec(s, k)
    S = MultilinearMap.linear(phis, F, Lk)
    test_families = [Zarr.reshape(-1, F.dim)]
    est = estimate_norm(S, SummingParams.as_linear(s, s), b.replace(restarts=min(b.restarts, 4), m_max=min(b.m_max, 3)))
    test_families.append(est.witness.x_families[0].flat)
    for i, Y in enumerate(test_families):
        w = evaluate_witness(S, SummingParams.as_linear(s, s), [Y], budget=b)
        checks.append(compare(f"pi_s(S) witness {i} <= ||phi||_s", w.ratio, EXACT if w.certified else UPPER,
                              phi_s, EXACT, rel_tol(phi_s)))
    jj = evaluate_witness(A, params, families, phis, b)
    SA = compose(S, A)
    mult = evaluate_witness(SA, SummingParams.multiple(q, params.q_list), families, budget=b)
    checks.append(compare("(jj) lhs equals lhs(S o A)", abs(jj.lhs - mult.lhs), EXACT, 0.0, EXACT,
                          rel_tol(jj.lhs, 1e-12)))
    checks.append(compare("(jj) lhs <= ||phi||_s mx(A(X))", jj.lhs, EXACT, phi_s * up.value, up_kind,
                          rel_tol(phi_s * up.value)))
    weak_prod = math.prod(jj.weak_norms[:-1])
    inst = {"dims": [d.dim for d in A.domain], "codomain": F, "target": u.codomain, "s": s, "q": q,
            "p_list": list(p_list), **(instance or {})}
    return LawReport("quotient", inst, tuple(checks),
                     witness={"taus": taus, "phis": phis},
                     details={"pi_s_upper": pi, "pi_s_exact": pi_exact, "mixed_upper": up.value,
                              "lhs_forward": lhs_fw, "ratio_forward": lhs_fw / weak_prod if weak_prod > 0 else 0.0,
                              "phi_s": phi_s, "jj_lhs": jj.lhs})


# ---------------------------------------------------------------------------
# triviality, inclusion and endpoint laws


def triviality_law(params: SummingParams, T: MultilinearMap, lengths=(2, 4, 8, 16), rel: float = 0.02,
                   instance: dict | None = None) -> LawReport:
    rep = check_triviality(params, T, lengths)
    inst = {"params": params.describe(), "dims": [d.dim for d in T.domain], **(instance or {})}
    details = {"constraint": rep.constraint, "predicted_exponent": rep.predicted_exponent,
               "measured_exponent": rep.measured_exponent, "lengths": list(rep.lengths),
               "ratios": list(rep.ratios), "zero_map": rep.zero_map}
    if rep.zero_map:
        c = compare("zero map has ratio 0", max(rep.ratios), EXACT, 0.0, EXACT, 0.0)
    else:
        err = abs(rep.measured_exponent - rep.predicted_exponent) / abs(rep.predicted_exponent)
        c = compare("relative exponent error", err, EXACT, rel, EXACT, 0.0)
    return LawReport("triviality", inst, (c,), details=details)


def inclusion_law(T: MultilinearMap, p, q_list, r, budget: Budget | None = None,
                  instance: dict | None = None) -> LawReport:
    """Test data (X, phi) for the r-kind never beats X alone for the plain multiple kind."""
    b = budget or Budget()
    pr = SummingParams.multiple_r(p, q_list, r)
    est = estimate_norm(T, pr, b)
    w = est.witness
    plain = evaluate_witness(T, SummingParams.multiple(p, q_list), [f.flat for f in w.x_families], budget=b)
    c = compare("ratio_r(X, phi) <= ratio(X)", w.ratio, EXACT if w.certified else UPPER, plain.ratio,
                EXACT if plain.certified else LOWER, rel_tol(plain.ratio, 1e-12))
    inst = {"dims": [d.dim for d in T.domain], "p": p, "q_list": list(q_list), "r": r, **(instance or {})}
    return LawReport("inclusion", inst, (c,), details={"ratio_r": w.ratio, "ratio_plain": plain.ratio})


def endpoints_law(fam: VectorFamily, q, budget: Budget | None = None, tol: float = 1e-6,
                  instance: dict | None = None) -> LawReport:
    """Mixed norm equals the weak norm at s = q and the strong norm at s = inf."""
    weak = weak_norm(fam, q, budget)
    strong = strong_norm(fam, q)
    at_q = mixed_norm_primal(fam, q, q, budget)
    at_inf = mixed_norm_primal(fam, INF, q, budget)
    kind_w = EXACT if weak.is_exact and at_q.is_exact else LOWER
    c1 = compare("|mx(q,q) - weak_q|", abs(at_q.value - weak.value), kind_w, tol, EXACT, 0.0)
    c2 = compare("|mx(inf,q) - strong_q|", abs(at_inf.value - strong.value), EXACT, tol, EXACT, 0.0)
    inst = {"space": fam.space, "m": fam.size, "q": q, **(instance or {})}
    return LawReport("endpoints", inst, (c1, c2),
                     details={"weak": weak.value, "strong": strong.value, "mx_qq": at_q.value,
                              "mx_inf_q": at_inf.value})
