"""Dense multilinear maps and homogeneous polynomials on l_u^N spaces."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .estimate import Budget, EstimateKind, NormEstimate
from .spaces import (
    INF,
    Functional,
    SpaceSpec,
    Vector,
    ball_vertices,
    dual_exponent,
    enumeration_cap,
    lp_norm,
    make_rng,
    norming_coords,
    random_unit_rows,
)

SCALARS = SpaceSpec(1.0, 1)
_STREAM_OPNORM = 0x21
# largest number of enumerated argument tuples in the exact operator norm
_MAX_ENUMERATION = 1 << 22


@dataclass(frozen=True, eq=False)
class MultilinearMap:
    """n-linear map with ``coeffs[i_1, ..., i_n, f]`` = f-th output coordinate of T(e_i1, ..., e_in).

    A scalar-valued form uses the one-dimensional codomain ``SCALARS``.
    """

    domain: tuple[SpaceSpec, ...]
    codomain: SpaceSpec
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        dom = tuple(self.domain)
        if not dom:
            raise ValueError("a multilinear map needs at least one slot")
        arr = np.array(self.coeffs, dtype=float)
        expected = tuple(d.dim for d in dom) + (self.codomain.dim,)
        if arr.shape == expected[:-1] and self.codomain.dim == 1:
            arr = arr[..., None]
        if arr.shape != expected:
            raise ValueError(f"coefficient shape {arr.shape} does not match {expected}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coefficients must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "domain", dom)
        object.__setattr__(self, "coeffs", arr)

    @property
    def arity(self) -> int:
        return len(self.domain)

    @property
    def is_scalar(self) -> bool:
        return self.codomain.dim == 1

    @classmethod
    def linear(cls, matrix, domain: SpaceSpec, codomain: SpaceSpec) -> "MultilinearMap":
        """Linear map from its usual matrix (rows index the codomain)."""
        return cls((domain,), codomain, np.asarray(matrix, dtype=float).T)

    @property
    def matrix(self) -> np.ndarray:
        if self.arity != 1:
            raise ValueError("only linear maps have a matrix")
        return self.coeffs.T

    def scaled(self, factor: float) -> "MultilinearMap":
        return MultilinearMap(self.domain, self.codomain, self.coeffs * factor)

    def __call__(self, *args) -> Vector:
        return evaluate(self, args)


def _coords(arg, space: SpaceSpec) -> np.ndarray:
    if isinstance(arg, Vector):
        if arg.space.dim != space.dim:
            raise ValueError("argument dimension does not match the slot")
        return arg.coords
    x = np.asarray(arg, dtype=float)
    if x.shape[-1] != space.dim:
        raise ValueError("argument dimension does not match the slot")
    return x


def evaluate(T: MultilinearMap, args: Sequence) -> Vector:
    if len(args) != T.arity:
        raise ValueError(f"expected {T.arity} arguments, got {len(args)}")
    out = T.coeffs
    for x, space in zip(args, T.domain):
        out = np.tensordot(_coords(x, space), out, axes=(0, 0))
    return Vector(T.codomain, out)


def evaluate_box(T: MultilinearMap, families: Sequence[np.ndarray]) -> np.ndarray:
    """Values on every index tuple: result[j_1, ..., j_n, :] = T(x1[j_1], ..., xn[j_n])."""
    if len(families) != T.arity:
        raise ValueError(f"expected {T.arity} families, got {len(families)}")
    out = T.coeffs
    for X, space in zip(families, T.domain):
        out = np.tensordot(out, _coords(X, space), axes=(0, 1))
    return np.moveaxis(out, 0, -1)


def evaluate_diag(T: MultilinearMap, families: Sequence[np.ndarray]) -> np.ndarray:
    """Values on the diagonal: result[j, :] = T(x1[j], ..., xn[j])."""
    if len(families) != T.arity:
        raise ValueError(f"expected {T.arity} families, got {len(families)}")
    arrays = [_coords(X, s) for X, s in zip(families, T.domain)]
    m = {a.shape[0] for a in arrays}
    if len(m) != 1:
        raise ValueError("diagonal evaluation needs families of equal length")
    out = np.einsum("ja,a...->j...", arrays[0], T.coeffs)
    for X in arrays[1:]:
        out = np.einsum("ja,ja...->j...", X, out)
    return out


# ---------------------------------------------------------------------------
# operator norm


def _exact_op_norm(T: MultilinearMap, cap: int) -> tuple[float, list[np.ndarray]] | None:
    n = T.arity
    enum_slots = n - 1 if T.is_scalar else n
    verts = [ball_vertices(T.domain[k], cap, half=True) for k in range(enum_slots)]
    if any(v is None for v in verts):
        return None
    if math.prod(v.shape[0] for v in verts) * (T.domain[-1].dim if T.is_scalar else 1) > _MAX_ENUMERATION:
        return None
    out = T.coeffs
    for V in verts:
        out = np.tensordot(out, V, axes=(0, 1))
    # out axes: remaining slots (last slot if scalar), codomain, then one per enumerated slot
    if T.is_scalar:
        c = out[:, 0, ...]  # (N_n, K_1, ..., K_{n-1})
        vals = lp_norm(c, dual_exponent(T.domain[-1].exponent), axis=0)
    else:
        vals = lp_norm(out, T.codomain.exponent, axis=0)
    flat = int(np.argmax(vals))
    idx = np.unravel_index(flat, vals.shape)
    args = [verts[k][idx[k]].copy() for k in range(enum_slots)]
    if T.is_scalar:
        c_best = c[(slice(None),) + tuple(idx)]
        args.append(norming_coords(c_best, dual_exponent(T.domain[-1].exponent)))
    return float(vals[idx]), args


def _contract_except(T: MultilinearMap, xs: list[np.ndarray], psi: np.ndarray, skip: int) -> np.ndarray:
    # linear functional of slot ``skip`` obtained by fixing every other slot
    out = np.tensordot(T.coeffs, psi, axes=(T.arity, 0))
    for k in range(T.arity - 1, -1, -1):
        if k != skip:
            out = np.tensordot(out, xs[k], axes=(k, 0))
    return out


def _value(T: MultilinearMap, xs: list[np.ndarray]) -> float:
    out = T.coeffs
    for x in xs:
        out = np.tensordot(x, out, axes=(0, 0))
    return float(lp_norm(out, T.codomain.exponent))


def _alternating(T: MultilinearMap, xs: list[np.ndarray], iters: int) -> tuple[float, list[np.ndarray]]:
    n = T.arity
    cod = T.codomain.exponent
    val = _value(T, xs)
    for _ in range(iters):
        prev = val
        out = evaluate(T, xs).coords
        psi = norming_coords(out, cod)
        for k in range(n):
            c = _contract_except(T, xs, psi, k)
            xs[k] = norming_coords(c, dual_exponent(T.domain[k].exponent))
        val = _value(T, xs)
        if not val > prev * (1 + 1e-14):
            break
    return val, xs


def op_norm(T: MultilinearMap, budget: Budget | None = None, *, mode: str = "auto",
            restarts: int | None = None) -> NormEstimate:
    """sup ||T(x_1, ..., x_n)|| over the product of unit balls.

    Exact when the balls of all enumerated slots have few extreme points;
    otherwise the best value from alternating maximization (a lower bound).
    """
    if mode not in ("auto", "exact", "ascent"):
        raise ValueError(f"unknown operator-norm mode {mode!r}")
    b = budget or Budget(restarts=32)
    cap = enumeration_cap() if b.enum_cap is None else b.enum_cap
    if mode != "ascent":
        res = _exact_op_norm(T, cap)
        if res is not None:
            val, args = res
            wit = [Vector(s, a) for s, a in zip(T.domain, args)]
            return NormEstimate(val, EstimateKind.EXACT, witness=wit, budget=b)
        if mode == "exact":
            raise ValueError("operator norm is not enumerable within the cap")
    count = b.restarts if restarts is None else restarts
    best_val, best_xs = -1.0, None
    for i in range(count):
        rng = make_rng(b.seed, _STREAM_OPNORM, i)
        xs = []
        for space in T.domain:
            if i % 2 == 0:
                g = rng.choice((-1.0, 1.0), size=space.dim)
                g = g / lp_norm(g, space.exponent)
            else:
                g = random_unit_rows(rng, 1, space)[0]
            xs.append(g)
        val, xs = _alternating(T, xs, b.iters)
        if val > best_val:
            best_val, best_xs = val, [x.copy() for x in xs]
    wit = [Vector(s, x) for s, x in zip(T.domain, best_xs)]
    return NormEstimate(best_val, EstimateKind.LOWER, witness=wit, budget=b)


# ---------------------------------------------------------------------------
# structural constructions


def restrict(T: MultilinearMap, slot: int, a) -> MultilinearMap:
    """T with argument ``slot`` frozen at ``a``."""
    if not 0 <= slot < T.arity:
        raise ValueError("slot out of range")
    if T.arity == 1:
        raise ValueError("cannot freeze the only slot of a linear map")
    av = _coords(a, T.domain[slot])
    coeffs = np.tensordot(T.coeffs, av, axes=([slot], [0]))
    dom = T.domain[:slot] + T.domain[slot + 1:]
    return MultilinearMap(dom, T.codomain, coeffs)


def compose(outer: MultilinearMap | None, T: MultilinearMap,
            inner: Sequence[MultilinearMap | None] | None = None) -> MultilinearMap:
    """outer o T o (inner_1, ..., inner_n); ``None`` stands for the identity."""
    coeffs = T.coeffs
    dom = list(T.domain)
    if inner is not None:
        if len(inner) != T.arity:
            raise ValueError("one inner map per slot is required")
        for k, u in enumerate(inner):
            if u is None:
                continue
            if u.arity != 1 or u.codomain.dim != T.domain[k].dim:
                raise ValueError(f"inner map {k} does not land in slot {k}")
            coeffs = np.moveaxis(np.tensordot(u.coeffs, coeffs, axes=([1], [k])), 0, k)
            dom[k] = u.domain[0]
    cod = T.codomain
    if outer is not None:
        if outer.arity != 1 or outer.domain[0].dim != T.codomain.dim:
            raise ValueError("outer map does not start at the codomain")
        coeffs = np.tensordot(coeffs, outer.coeffs, axes=([-1], [0]))
        cod = outer.codomain
    return MultilinearMap(tuple(dom), cod, coeffs)


def symmetrize(coeffs: np.ndarray, degree: int) -> np.ndarray:
    """Average over all permutations of the first ``degree`` axes."""
    coeffs = np.asarray(coeffs, dtype=float)
    tail = tuple(range(degree, coeffs.ndim))
    perms = list(itertools.permutations(range(degree)))
    total = np.zeros_like(coeffs)
    for perm in perms:
        total += np.transpose(coeffs, perm + tail)
    return total / len(perms)


@dataclass(frozen=True, eq=False)
class HomogeneousPolynomial:
    """P(x) = sym(x, ..., x) with ``sym`` symmetric in its ``degree`` slots."""

    degree: int
    space: SpaceSpec
    codomain: SpaceSpec
    sym: MultilinearMap

    def __post_init__(self) -> None:
        if self.degree < 1:
            raise ValueError("degree must be at least 1")
        if self.sym.domain != (self.space,) * self.degree or self.sym.codomain != self.codomain:
            raise ValueError("symmetric map does not match the polynomial's spaces")
        c = self.sym.coeffs
        for perm in itertools.permutations(range(self.degree)):
            if not np.allclose(np.transpose(c, perm + (self.degree,)), c, rtol=0, atol=1e-12 * max(1.0, np.abs(c).max())):
                raise ValueError("coefficients are not symmetric")

    @classmethod
    def from_tensor(cls, coeffs, degree: int, space: SpaceSpec,
                    codomain: SpaceSpec = SCALARS) -> "HomogeneousPolynomial":
        """Build from any coefficient tensor; it is symmetrized first."""
        arr = np.asarray(coeffs, dtype=float)
        if arr.ndim == degree and codomain.dim == 1:
            arr = arr[..., None]
        sym = MultilinearMap((space,) * degree, codomain, symmetrize(arr, degree))
        return cls(degree, space, codomain, sym)

    @classmethod
    def from_linear(cls, T: MultilinearMap) -> "HomogeneousPolynomial":
        if T.arity != 1:
            raise ValueError("expected a linear map")
        return cls(1, T.domain[0], T.codomain, T)

    def __call__(self, x) -> Vector:
        return evaluate(self.sym, [x] * self.degree)

    def scaled(self, factor: float) -> "HomogeneousPolynomial":
        return HomogeneousPolynomial(self.degree, self.space, self.codomain, self.sym.scaled(factor))


def polarize(P: HomogeneousPolynomial) -> MultilinearMap:
    """The symmetric multilinear map associated with ``P``."""
    return P.sym


def polarization_value(P: Callable[[np.ndarray], np.ndarray], xs: Sequence[np.ndarray]) -> np.ndarray:
    """Symmetric map at (x_1..x_n) recovered from values of P alone.

    Uses 1/(2^n n!) sum over signs eps of eps_1...eps_n P(sum eps_k x_k).
    """
    n = len(xs)
    xs = [np.asarray(x, dtype=float) for x in xs]
    total = 0.0
    for eps in itertools.product((1.0, -1.0), repeat=n):
        point = sum(e * x for e, x in zip(eps, xs))
        total = total + np.prod(eps) * np.asarray(P(point), dtype=float)
    return total / (2 ** n * math.factorial(n))


def polynomial_from_values(P: Callable[[np.ndarray], np.ndarray], degree: int, space: SpaceSpec,
                           codomain: SpaceSpec = SCALARS) -> HomogeneousPolynomial:
    """Recover a homogeneous polynomial's symmetric tensor from point evaluations."""
    N = space.dim
    eye = np.eye(N)
    coeffs = np.zeros((N,) * degree + (codomain.dim,))
    for idx in itertools.product(range(N), repeat=degree):
        coeffs[idx] = np.reshape(polarization_value(P, [eye[i] for i in idx]), codomain.dim)
    return HomogeneousPolynomial.from_tensor(coeffs, degree, space, codomain)


def multiply(gamma: Functional, P: HomogeneousPolynomial) -> HomogeneousPolynomial:
    """gamma * P, with symmetric map (1/(n+1)) sum_k gamma(x_k) P_sym(x without x_k)."""
    if gamma.space.dim != P.space.dim:
        raise ValueError("functional and polynomial live on different spaces")
    n = P.degree
    base = np.multiply.outer(gamma.coords, P.sym.coeffs)  # gamma on slot 0
    total = np.zeros_like(base)
    for k in range(n + 1):
        total += np.moveaxis(base, 0, k)
    sym = MultilinearMap((P.space,) * (n + 1), P.codomain, total / (n + 1))
    return HomogeneousPolynomial(n + 1, P.space, P.codomain, sym)


def power_times(gamma: Functional, T: MultilinearMap, k: int) -> HomogeneousPolynomial:
    """gamma^k T for a linear map T, by repeated multiplication."""
    P = HomogeneousPolynomial.from_linear(T)
    for _ in range(k):
        P = multiply(gamma, P)
    return P


def fix_point(P: HomogeneousPolynomial, a, k: int) -> HomogeneousPolynomial:
    """P_{a^k}: the first k symmetric slots frozen at ``a``."""
    if not 0 <= k < P.degree:
        raise ValueError("need 0 <= k < degree")
    av = _coords(a, P.space)
    coeffs = P.sym.coeffs
    for _ in range(k):
        coeffs = np.tensordot(av, coeffs, axes=(0, 0))
    d = P.degree - k
    sym = MultilinearMap((P.space,) * d, P.codomain, coeffs)
    return HomogeneousPolynomial(d, P.space, P.codomain, sym)


def product_form(n: int) -> MultilinearMap:
    """(lambda_1, ..., lambda_n) -> lambda_1 ... lambda_n on the scalar field."""
    return MultilinearMap((SCALARS,) * n, SCALARS, np.ones((1,) * (n + 1)))
