"""Witness-based lower bounds for summing norms of linear and multilinear maps.

Every kind compares a left-hand side built from the values T(x^(1), ..., x^(n))
with a product of weak norms of the inputs.  Seven kinds are supported:

``as_linear``       (sum_j ||u(x_j)||^p)^(1/p) <= C ||x||_{w,q}
``as_linear_pqr``   (sum_j |phi_j(u(x_j))|^p)^(1/p) <= C ||phi||_{w,r} ||x||_{w,q}
``as_multi``        diagonal sums, one weak exponent per slot
``as_multi_r``      diagonal sums tested against functionals phi_j
``multiple``        sums over the full index box
``multiple_r``      full box tested against functionals phi_{j_1...j_n}
``mixing_multi``    (sum_box (sum_i |phi_i(T(...))|^s)^(q/s))^(1/q)
                    <= C prod ||x^(l)||_{w,p_l} ||(||phi_i||)||_s

For ``mixing_multi`` the outer exponent q is stored in ``SummingParams.p``
and the weak exponents p_l in ``q_list``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .estimate import Budget, EstimateKind, NormEstimate
from .seqnorms import VectorFamily, weak_norm_array
from .spaces import (
    INF,
    Exponent,
    SpaceSpec,
    Vector,
    as_exponent,
    dual_exponent,
    lp_norm,
    make_rng,
    norming_coords,
    random_unit_rows,
    reciprocal,
)
from .tensors import MultilinearMap, evaluate_box, evaluate_diag, op_norm

_STREAM_SUMMING = 0x31
_SLOTS = "abcdefgh"
_BOX = "ijklmnop"
_TOL = 1e-12


class SummingKind(str, enum.Enum):
    AS_LINEAR = "as_linear"
    AS_LINEAR_PQR = "as_linear_pqr"
    AS_MULTI = "as_multi"
    AS_MULTI_R = "as_multi_r"
    MULTIPLE = "multiple"
    MULTIPLE_R = "multiple_r"
    MIXING_MULTI = "mixing_multi"


DIAGONAL_KINDS = frozenset({SummingKind.AS_LINEAR, SummingKind.AS_LINEAR_PQR,
                            SummingKind.AS_MULTI, SummingKind.AS_MULTI_R})
MATCHED_PHI_KINDS = frozenset({SummingKind.AS_LINEAR_PQR, SummingKind.AS_MULTI_R,
                               SummingKind.MULTIPLE_R})
LINEAR_KINDS = frozenset({SummingKind.AS_LINEAR, SummingKind.AS_LINEAR_PQR})

# for one slot the diagonal and the box coincide
_BOX_EQUIVALENT = {
    SummingKind.AS_LINEAR: SummingKind.MULTIPLE,
    SummingKind.AS_MULTI: SummingKind.MULTIPLE,
    SummingKind.AS_LINEAR_PQR: SummingKind.MULTIPLE_R,
    SummingKind.AS_MULTI_R: SummingKind.MULTIPLE_R,
}


class InadmissibleExponents(ValueError):
    """Raised with the violated constraint, e.g. ``1/p > 1/q_i + 1/r``."""

    def __init__(self, constraint: str, detail: str = "") -> None:
        self.constraint = constraint
        super().__init__(f"inadmissible exponents: {constraint}" + (f" ({detail})" if detail else ""))


def _fmt(u: Exponent) -> str:
    return "inf" if u is INF else f"{u:g}"


@dataclass(frozen=True)
class SummingParams:
    kind: SummingKind
    p: Exponent
    q_list: tuple[Exponent, ...]
    r: Exponent = INF
    s: Exponent | None = None

    def __post_init__(self) -> None:
        kind = SummingKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "p", as_exponent(self.p))
        qs = self.q_list if isinstance(self.q_list, (tuple, list)) else (self.q_list,)
        if not qs:
            raise ValueError("q_list must not be empty")
        object.__setattr__(self, "q_list", tuple(as_exponent(q) for q in qs))
        object.__setattr__(self, "r", as_exponent(self.r))
        if kind is SummingKind.MIXING_MULTI:
            if self.s is None:
                raise ValueError("mixing_multi needs the inner exponent s")
            object.__setattr__(self, "s", as_exponent(self.s))
        elif self.s is not None:
            raise ValueError(f"{kind.value} takes no exponent s")
        if kind in LINEAR_KINDS and len(self.q_list) != 1:
            raise ValueError(f"{kind.value} takes a single weak exponent")

    # convenience constructors ------------------------------------------------
    @classmethod
    def as_linear(cls, p, q) -> "SummingParams":
        return cls(SummingKind.AS_LINEAR, p, (q,))

    @classmethod
    def as_linear_pqr(cls, p, q, r) -> "SummingParams":
        return cls(SummingKind.AS_LINEAR_PQR, p, (q,), r)

    @classmethod
    def as_multi(cls, p, qs) -> "SummingParams":
        return cls(SummingKind.AS_MULTI, p, tuple(qs))

    @classmethod
    def as_multi_r(cls, p, qs, r) -> "SummingParams":
        return cls(SummingKind.AS_MULTI_R, p, tuple(qs), r)

    @classmethod
    def multiple(cls, p, qs) -> "SummingParams":
        return cls(SummingKind.MULTIPLE, p, tuple(qs))

    @classmethod
    def multiple_r(cls, p, qs, r) -> "SummingParams":
        return cls(SummingKind.MULTIPLE_R, p, tuple(qs), r)

    @classmethod
    def mixing(cls, s, q, ps) -> "SummingParams":
        return cls(SummingKind.MIXING_MULTI, q, tuple(ps), INF, s)

    # ------------------------------------------------------------------------
    def weak_exponents(self, n: int) -> tuple[Exponent, ...]:
        if len(self.q_list) == n:
            return self.q_list
        if len(self.q_list) == 1:
            return self.q_list * n
        raise ValueError(f"{len(self.q_list)} weak exponents given for {n} slots")

    @property
    def uses_r(self) -> bool:
        return self.kind in MATCHED_PHI_KINDS

    def violation(self, n: int | None = None) -> tuple[str, int | None] | None:
        """The violated admissibility constraint and offending slot, or None."""
        qs = self.q_list if n is None else self.weak_exponents(n)
        ip = reciprocal(self.p)
        iq = [reciprocal(q) for q in qs]
        ir = reciprocal(self.r)
        k = self.kind
        if k is SummingKind.AS_LINEAR:
            if ip > iq[0] + _TOL:
                return "1/p > 1/q", 0
        elif k is SummingKind.AS_LINEAR_PQR:
            if ip > iq[0] + ir + _TOL:
                return "1/p > 1/q + 1/r", 0
        elif k is SummingKind.AS_MULTI:
            if ip > sum(iq) + _TOL:
                return "1/p > 1/q_1 + ... + 1/q_n", None
        elif k is SummingKind.AS_MULTI_R:
            if ip > sum(iq) + ir + _TOL:
                return "1/p > 1/q_1 + ... + 1/q_n + 1/r", None
        elif k is SummingKind.MULTIPLE:
            gaps = [ip - t for t in iq]
            i = int(np.argmax(gaps))
            if gaps[i] > _TOL:
                return "1/p > 1/q_i", i
        elif k is SummingKind.MULTIPLE_R:
            gaps = [ip - t - ir for t in iq]
            i = int(np.argmax(gaps))
            if gaps[i] > _TOL:
                return "1/p > 1/q_i + 1/r", i
        else:
            if self.s is INF:
                return "s = inf", None
            if reciprocal(self.s) > ip + _TOL:
                return "q > s", None
            gaps = [t - ip for t in iq]  # p_k > q  <=>  1/p_k < 1/q
            i = int(np.argmin(gaps))
            if gaps[i] < -_TOL:
                return "p_k > q", i
        return None

    def check(self, n: int | None = None) -> None:
        v = self.violation(n)
        if v is not None:
            raise InadmissibleExponents(v[0], self.describe())

    def describe(self) -> str:
        parts = [f"p={_fmt(self.p)}", "q=(" + ", ".join(_fmt(q) for q in self.q_list) + ")"]
        if self.uses_r:
            parts.append(f"r={_fmt(self.r)}")
        if self.s is not None:
            parts.append(f"s={_fmt(self.s)}")
        return f"{self.kind.value} " + " ".join(parts)


@dataclass(frozen=True, eq=False)
class MultiIndexedFunctionals:
    """Functionals on ``space`` indexed by a box; ``coords`` has shape box + (dim,)."""

    space: SpaceSpec
    coords: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.coords, dtype=float)
        if arr.ndim < 2 or arr.shape[-1] != self.space.dim:
            raise ValueError("functional coordinates must have shape box + (dim,)")
        arr.flags.writeable = False
        object.__setattr__(self, "coords", arr)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.coords.shape[:-1]

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def flat(self) -> np.ndarray:
        return self.coords.reshape(self.size, self.space.dim)

    def as_family(self) -> VectorFamily:
        """The same functionals as vectors of the dual space."""
        return VectorFamily(self.space.dual, self.coords)


@dataclass(frozen=True, eq=False)
class SummingWitness:
    x_families: tuple[VectorFamily, ...]
    phis: MultiIndexedFunctionals | None
    lhs: float
    rhs: float
    ratio: float
    certified: bool
    weak_norms: tuple[float, ...] = field(default=())


def _ratio(lhs: float, rhs: float) -> float:
    if rhs > 0:
        return lhs / rhs
    return 0.0 if lhs == 0 else math.inf


# ---------------------------------------------------------------------------
# evaluation


def _lp_grad(a: np.ndarray, p: Exponent, axis=None) -> np.ndarray:
    """Gradient of a -> ||a||_p (a subgradient at kinks; zero at a = 0)."""
    a = np.asarray(a, dtype=float)
    if p is INF:
        g = np.zeros_like(a)
        if axis is None:
            if a.size:
                k = int(np.argmax(np.abs(a)))
                g.flat[k] = np.sign(a.flat[k])
        else:
            k = np.argmax(np.abs(a), axis=axis)
            np.put_along_axis(g, np.expand_dims(k, axis), np.sign(np.take_along_axis(a, np.expand_dims(k, axis), axis)), axis)
        return g
    if p == 1.0:
        return np.sign(a)
    L = lp_norm(a, p, axis=axis)
    L = np.asarray(L) if axis is None else np.expand_dims(L, axis)
    safe = np.where(L > 0, L, 1.0)
    return np.sign(a) * (np.abs(a) / safe) ** (p - 1.0)


@dataclass
class _Eval:
    ratio: float
    lhs: float
    rhs: float
    certified: bool
    Y: np.ndarray
    x_weak: list  # (value, maximizing functional) per slot
    phi_weak: tuple | None  # (value, maximizer) for matched phis
    weak_values: tuple = ()


class _Problem:
    """Arrays-only view of one summing-norm instance."""

    def __init__(self, T: MultilinearMap, params: SummingParams, budget: Budget, inner_restarts: int | None = None):
        self.T = T
        self.params = params
        self.n = T.arity
        kind = params.kind
        if self.n == 1 and kind in _BOX_EQUIVALENT:
            kind = _BOX_EQUIVALENT[kind]
        self.kind = kind
        self.diag = kind in DIAGONAL_KINDS
        self.matched = kind in MATCHED_PHI_KINDS
        self.mixing = kind is SummingKind.MIXING_MULTI
        self.qs = params.weak_exponents(self.n)
        self.p = params.p
        self.r = params.r
        self.s = params.s
        self.F = T.codomain
        self.budget = budget
        self.weak_kw = dict(cap=budget.enum_cap, restarts=budget.restarts if inner_restarts is None else inner_restarts,
                            iters=budget.iters, seed=budget.seed)

    # -- shapes ------------------------------------------------------------
    def outputs(self, xs: Sequence[np.ndarray]) -> np.ndarray:
        return evaluate_diag(self.T, xs) if self.diag else evaluate_box(self.T, xs)

    def out_shape(self, xs: Sequence[np.ndarray]) -> tuple[int, ...]:
        return (xs[0].shape[0],) if self.diag else tuple(x.shape[0] for x in xs)

    # -- sides -------------------------------------------------------------
    def lhs(self, Y: np.ndarray, phi: np.ndarray | None) -> float:
        if self.mixing:
            V = Y @ phi.T
            return float(lp_norm(lp_norm(V, self.s, axis=-1), self.p))
        if self.matched:
            return float(lp_norm(np.sum(Y * phi, axis=-1), self.p))
        return float(lp_norm(self.F.norm(Y), self.p))

    def _weak(self, X, space, q, warm=None):
        return weak_norm_array(X, space, q, **self.weak_kw)

    def evaluate(self, xs: Sequence[np.ndarray], phi: np.ndarray | None) -> _Eval:
        Y = self.outputs(xs)
        lhs = self.lhs(Y, phi)
        certified = True
        rhs = 1.0
        x_weak = []
        values = []
        for X, space, q in zip(xs, self.T.domain, self.qs):
            val, fphi, exact = self._weak(X, space, q)
            certified &= exact
            x_weak.append((val, fphi))
            values.append(val)
            rhs *= val
        phi_weak = None
        if self.matched:
            val, xstar, exact = self._weak(phi.reshape(-1, self.F.dim), self.F.dual, self.r)
            certified &= exact
            phi_weak = (val, xstar)
            values.append(val)
            rhs *= val
        elif self.mixing:
            val = float(lp_norm(self.F.dual_norm(phi), self.s))
            values.append(val)
            rhs *= val
        return _Eval(_ratio(lhs, rhs), lhs, rhs, certified, Y, x_weak, phi_weak, tuple(values))

    # -- gradients of log lhs ------------------------------------------------
    def lhs_grads(self, Y: np.ndarray, phi: np.ndarray | None) -> tuple[np.ndarray, np.ndarray | None]:
        """d lhs / d Y and d lhs / d phi."""
        if self.mixing:
            V = Y @ phi.T
            inner = lp_norm(V, self.s, axis=-1)
            GV = _lp_grad(inner, self.p)[..., None] * _lp_grad(V, self.s, axis=-1)
            GY = GV @ phi
            k = phi.shape[0]
            Gphi = GV.reshape(-1, k).T @ Y.reshape(-1, self.F.dim)
            return GY, Gphi
        if self.matched:
            a = np.sum(Y * phi, axis=-1)
            ga = _lp_grad(a, self.p)
            return ga[..., None] * phi, ga[..., None] * Y
        a = self.F.norm(Y)
        ga = _lp_grad(a, self.p)
        return ga[..., None] * norming_coords(Y.reshape(-1, self.F.dim), self.F.exponent).reshape(Y.shape), None

    def x_grad(self, xs: Sequence[np.ndarray], GY: np.ndarray, k: int) -> np.ndarray:
        n = self.n
        slots = _SLOTS[:n]
        ops = [self.T.coeffs]
        subs = [slots + "z"]
        if self.diag:
            for l in range(n):
                if l != k:
                    ops.append(xs[l])
                    subs.append("y" + slots[l])
            ops.append(GY)
            subs.append("yz")
            out = "y" + slots[k]
        else:
            box = _BOX[:n]
            for l in range(n):
                if l != k:
                    ops.append(xs[l])
                    subs.append(box[l] + slots[l])
            ops.append(GY)
            subs.append(box + "z")
            out = box[k] + slots[k]
        return np.einsum(",".join(subs) + "->" + out, *ops, optimize=True)

    # -- closed-form phi choices --------------------------------------------
    def phi_closed_form(self, Y: np.ndarray) -> np.ndarray:
        """Best functionals of the form t_b * (norming functional of Y_b)."""
        flatY = Y.reshape(-1, self.F.dim)
        psi = norming_coords(flatY, self.F.exponent)
        a = self.F.norm(flatY)
        t = np.zeros_like(a)
        p, r = self.p, self.r
        if r is INF:
            t[:] = 1.0
        elif p is not INF and r > p:
            top = a.max()
            t = (a / top) ** (p / (r - p)) if top > 0 else np.ones_like(a)
        else:
            t[int(np.argmax(a))] = 1.0
        return (t[:, None] * psi).reshape(Y.shape)

    def mixing_starts(self, Y: np.ndarray) -> list[np.ndarray]:
        flatY = Y.reshape(-1, self.F.dim)
        _, phi_weak, _ = weak_norm_array(flatY, self.F, self.p, **self.weak_kw)
        starts = [phi_weak[None, :]]
        norms = self.F.norm(flatY)
        order = np.argsort(-norms, kind="stable")[: min(15, flatY.shape[0])]
        atoms = [phi_weak] + [norming_coords(flatY[j], self.F.exponent) for j in order if norms[j] > 0]
        if len(atoms) > 1:
            starts.append(np.array(atoms))
        return starts


# ---------------------------------------------------------------------------
# public evaluation


def _as_arrays(T: MultilinearMap, xs: Sequence) -> list[np.ndarray]:
    if len(xs) != T.arity:
        raise ValueError(f"expected {T.arity} families, got {len(xs)}")
    out = []
    for X, space in zip(xs, T.domain):
        arr = X.flat if isinstance(X, VectorFamily) else np.asarray(X, dtype=float)
        arr = arr.reshape(-1, arr.shape[-1]) if arr.ndim > 1 else arr.reshape(-1, space.dim)
        if arr.shape[-1] != space.dim:
            raise ValueError("family dimension does not match its slot")
        out.append(arr)
    return out


def _phi_array(prob: _Problem, xs: list[np.ndarray], phis) -> np.ndarray | None:
    if not (prob.matched or prob.mixing):
        if phis is not None:
            raise ValueError(f"{prob.params.kind.value} takes no functionals")
        return None
    if phis is None:
        raise ValueError(f"{prob.params.kind.value} needs functionals")
    arr = phis.coords if isinstance(phis, MultiIndexedFunctionals) else np.asarray(phis, dtype=float)
    if arr.shape[-1] != prob.F.dim:
        raise ValueError("functionals do not act on the codomain")
    if prob.mixing:
        return arr.reshape(-1, prob.F.dim)
    expected = prob.out_shape(xs) + (prob.F.dim,)
    if arr.size != int(np.prod(expected)):
        raise ValueError(f"functionals must be indexed by the box {expected[:-1]}")
    return arr.reshape(expected)


def _witness(prob: _Problem, xs: list[np.ndarray], phi: np.ndarray | None, ev: _Eval) -> SummingWitness:
    fams = tuple(VectorFamily(s, x) for s, x in zip(prob.T.domain, xs))
    mphi = None if phi is None else MultiIndexedFunctionals(prob.F, phi)
    return SummingWitness(fams, mphi, ev.lhs, ev.rhs, ev.ratio, ev.certified, ev.weak_values)


def evaluate_witness(T: MultilinearMap, params: SummingParams, xs: Sequence, phis=None,
                     budget: Budget | None = None, *, check: bool = True) -> SummingWitness:
    """Exact evaluation of both sides on explicit test data."""
    if check:
        params.check(T.arity)
    b = budget or Budget()
    prob = _Problem(T, params, b)
    arrs = _as_arrays(T, xs)
    if prob.diag and len({x.shape[0] for x in arrs}) != 1:
        raise ValueError("diagonal kinds need families of equal length")
    phi = _phi_array(prob, arrs, phis)
    return _witness(prob, arrs, phi, prob.evaluate(arrs, phi))


def lhs_rhs(T: MultilinearMap, params: SummingParams, xs: Sequence, phis=None,
            budget: Budget | None = None) -> tuple[float, float]:
    w = evaluate_witness(T, params, xs, phis, budget)
    return w.lhs, w.rhs


# ---------------------------------------------------------------------------
# block ascent


def _normalize_rows(X: np.ndarray, space: SpaceSpec, dual: bool = False) -> np.ndarray:
    n = space.dual_norm(X) if dual else space.norm(X)
    return X / np.where(n > 0, n, 1.0)[:, None]


def _initial_families(prob: _Problem, m: int, rr: int, rng: np.random.Generator) -> list[np.ndarray]:
    xs = []
    for space in prob.T.domain:
        if rr == 0:
            X = np.eye(space.dim)[np.arange(m) % space.dim]
        elif rr == 1:
            X = rng.choice((-1.0, 1.0), size=(m, space.dim))
        else:
            X = rng.standard_normal((m, space.dim))
        xs.append(_normalize_rows(X, space))
    return xs


class _Ascent:
    def __init__(self, prob: _Problem, xs: list[np.ndarray], phi: np.ndarray | None):
        self.prob = prob
        self.xs = [x.copy() for x in xs]
        self.phi = None if phi is None else phi.copy()
        self.ev = self._eval(self.xs, self.phi)
        self.eta = [0.5] * (prob.n + 1)

    def _eval(self, xs, phi) -> _Eval:
        prob = self.prob
        ev = prob.evaluate(xs, phi)
        if prob.matched:
            cf = prob.phi_closed_form(ev.Y)
            ev_cf = prob.evaluate(xs, cf)
            if ev_cf.ratio >= ev.ratio * (1 - 1e-12):
                self._last_phi = cf
                return ev_cf
        self._last_phi = phi
        return ev

    def _try(self, block: int, direction: np.ndarray) -> bool:
        cur = self.phi if block == self.prob.n else self.xs[block]
        size = np.linalg.norm(cur)
        gnorm = np.linalg.norm(direction)
        if gnorm == 0 or size == 0 or not np.isfinite(gnorm):
            return False
        step = direction * (size / gnorm)
        eta = self.eta[block]
        for _ in range(8):
            cand = cur + eta * step
            xs = list(self.xs)
            phi = self.phi
            if block == self.prob.n:
                phi = cand
            else:
                xs[block] = cand
            ev = self._eval(xs, phi)
            if ev.ratio > self.ev.ratio * (1 + 1e-12):
                self.xs, self.phi, self.ev = xs, self._last_phi, ev
                self.eta[block] = min(eta * 1.5, 4.0)
                return True
            eta *= 0.5
        self.eta[block] = max(eta, 1e-6)
        return False

    def phi_step(self) -> bool:
        prob, ev = self.prob, self.ev
        if ev.lhs == 0:
            return False
        _, Gphi = prob.lhs_grads(ev.Y, self.phi)
        g = Gphi / ev.lhs
        if prob.matched:
            val, xstar = ev.phi_weak
            if val > 0:
                flat = self.phi.reshape(-1, prob.F.dim)
                c = flat @ xstar
                g = g - (_lp_grad(c, prob.r)[:, None] * xstar[None, :]).reshape(g.shape) / val
        else:
            norms = prob.F.dual_norm(self.phi)
            total = lp_norm(norms, prob.s)
            if total > 0:
                g = g - _lp_grad(norms, prob.s)[:, None] * norming_coords(self.phi, prob.F.dual.exponent) / total
        return self._try(prob.n, g)

    def x_step(self, k: int) -> bool:
        prob, ev = self.prob, self.ev
        if ev.lhs == 0:
            return False
        GY, _ = prob.lhs_grads(ev.Y, self.phi)
        g = prob.x_grad(self.xs, GY, k) / ev.lhs
        val, fphi = ev.x_weak[k]
        if val > 0:
            c = self.xs[k] @ fphi
            g = g - _lp_grad(c, prob.qs[k])[:, None] * fphi[None, :] / val
        return self._try(k, g)

    def renormalize(self) -> None:
        prob = self.prob
        xs = [x / v if v > 0 else x for x, (v, _) in zip(self.xs, self.ev.x_weak)]
        phi = self.phi
        if prob.matched and self.ev.phi_weak[0] > 0:
            phi = phi / self.ev.phi_weak[0]
        elif prob.mixing:
            tot = lp_norm(prob.F.dual_norm(phi), prob.s)
            if tot > 0:
                phi = phi / tot
        ev = self._eval(xs, phi)
        if ev.ratio >= self.ev.ratio * (1 - 1e-13):
            self.xs, self.phi, self.ev = xs, self._last_phi, ev

    def run(self, sweeps: int, with_x: bool = True) -> None:
        for _ in range(sweeps):
            before = self.ev.ratio
            if self.phi is not None:
                self.phi_step()
            if with_x:
                for k in range(self.prob.n):
                    self.x_step(k)
            self.renormalize()
            if not self.ev.ratio > before * (1 + 1e-9):
                break


def _start_phi(prob: _Problem, xs: list[np.ndarray]) -> np.ndarray | None:
    if not (prob.matched or prob.mixing):
        return None
    Y = prob.outputs(xs)
    if prob.matched:
        return prob.phi_closed_form(Y)
    best, best_ratio = None, -1.0
    for start in prob.mixing_starts(Y):
        asc = _Ascent(prob, xs, start)
        asc.run(10, with_x=False)
        if asc.ev.ratio > best_ratio:
            best, best_ratio = asc.phi, asc.ev.ratio
    return best


def estimate_norm(T: MultilinearMap, params: SummingParams, budget: Budget | None = None) -> NormEstimate:
    """Best ratio lhs/rhs found by block ascent over test data (a lower bound).

    For every family length m = 1..m_max and restart i, the start is keyed by
    (seed, m, i); the result is the first maximal ratio in that order.
    """
    params.check(T.arity)
    b = budget or Budget()
    prob = _Problem(T, params, b, inner_restarts=min(b.restarts, 4))
    final = _Problem(T, params, b)
    best: SummingWitness | None = None
    for m in range(1, b.m_max + 1):
        for rr in range(b.restarts):
            rng = make_rng(b.seed, _STREAM_SUMMING, m, rr)
            if m == 1 and rr == 0:
                # single members reach the operator norm
                xs = [v.coords[None, :].copy() for v in op_norm(T, b.replace(restarts=max(b.restarts, 8))).witness]
            else:
                xs = _initial_families(prob, m, rr, rng)
            asc = _Ascent(prob, xs, _start_phi(prob, xs))
            asc.run(b.iters)
            ev = final.evaluate(asc.xs, asc.phi)
            if best is None or ev.ratio > best.ratio:
                best = _witness(final, asc.xs, asc.phi, ev)
    return NormEstimate(best.ratio, EstimateKind.LOWER, witness=best, budget=b, certified=best.certified,
                        info={"kind": params.kind.value})


def maximize_functionals(T: MultilinearMap, params: SummingParams, xs: Sequence,
                         budget: Budget | None = None) -> SummingWitness:
    """With the input families fixed, maximize the ratio over the functionals only."""
    b = budget or Budget()
    prob = _Problem(T, params, b)
    arrs = _as_arrays(T, xs)
    if not (prob.matched or prob.mixing):
        raise ValueError(f"{params.kind.value} has no functionals to optimize")
    best = None
    starts = [prob.phi_closed_form(prob.outputs(arrs))] if prob.matched else prob.mixing_starts(prob.outputs(arrs))
    if prob.mixing:
        for i in range(b.restarts):
            rng = make_rng(b.seed, _STREAM_SUMMING, 0, i)
            k = starts[-1].shape[0]
            starts.append(random_unit_rows(rng, k, prob.F, dual=True))
    for start in starts:
        asc = _Ascent(prob, arrs, start)
        asc.run(b.iters, with_x=False)
        if best is None or asc.ev.ratio > best.ratio:
            # the ascent rescales the inputs; report on the caller's families
            best = _witness(prob, arrs, asc.phi, prob.evaluate(arrs, asc.phi))
    return best


# ---------------------------------------------------------------------------
# triviality regime


@dataclass(frozen=True)
class TrivialityReport:
    params: SummingParams
    zero_map: bool
    constraint: str | None
    predicted_exponent: float
    lengths: tuple[int, ...]
    ratios: tuple[float, ...]
    measured_exponent: float | None
    slot: int | None
    diverges: bool


def check_triviality(params: SummingParams, T: MultilinearMap,
                     lengths: Sequence[int] = (2, 4, 8, 16)) -> TrivialityReport:
    """Exhibit unbounded ratios for inadmissible exponents.

    The test data repeats one basis vector (and one functional) m times in the
    offending slot(s); the ratio then grows like m to the returned exponent.
    A zero map is reported as the only member of the class.
    """
    n = T.arity
    v = params.violation(n)
    if v is None:
        raise ValueError(f"exponents are admissible ({params.describe()}); nothing diverges")
    constraint, slot = v
    if params.kind is SummingKind.MIXING_MULTI and constraint != "p_k > q":
        raise ValueError(f"{constraint}: the mixed norm itself is undefined, not trivial")
    kind = params.kind
    if n == 1 and kind in _BOX_EQUIVALENT:
        kind = _BOX_EQUIVALENT[kind]
    qs = params.weak_exponents(n)
    ip, ir = reciprocal(params.p), reciprocal(params.r)
    iq = [reciprocal(q) for q in qs]
    if kind in DIAGONAL_KINDS:
        repeated = list(range(n))
        delta = ip - sum(iq) - (ir if kind in MATCHED_PHI_KINDS else 0.0)
    elif kind is SummingKind.MIXING_MULTI:
        repeated = [slot]
        delta = ip - iq[slot]
    else:
        repeated = [slot]
        delta = ip - iq[slot] - (ir if kind in MATCHED_PHI_KINDS else 0.0)

    if not np.any(T.coeffs):
        return TrivialityReport(params, True, constraint, delta, tuple(lengths),
                                tuple(0.0 for _ in lengths), None, slot, False)
    idx = np.unravel_index(int(np.argmax(np.abs(T.coeffs))), T.coeffs.shape)
    basis = [np.eye(s.dim)[idx[k]] for k, s in enumerate(T.domain)]
    fstar = np.eye(T.codomain.dim)[idx[-1]]
    ratios = []
    for m in lengths:
        xs = [np.tile(basis[k], (m if k in repeated else 1, 1)) for k in range(n)]
        phis = None
        if kind in MATCHED_PHI_KINDS:
            shape = (m,) if kind in DIAGONAL_KINDS else tuple(x.shape[0] for x in xs)
            phis = np.broadcast_to(fstar, shape + (T.codomain.dim,)).copy()
        elif kind is SummingKind.MIXING_MULTI:
            phis = fstar[None, :]
        w = evaluate_witness(T, params, xs, phis, check=False)
        ratios.append(w.ratio)
    slope = float(np.polyfit(np.log(lengths), np.log(ratios), 1)[0])
    return TrivialityReport(params, False, constraint, delta, tuple(lengths), tuple(ratios),
                            slope, slot, slope > 0)


# ---------------------------------------------------------------------------
# witness transport


def restriction_transport(T: MultilinearMap, params: SummingParams, a, witness: SummingWitness,
                          slot: int = 0, pad_to: int = 1, budget: Budget | None = None) -> SummingWitness:
    """Turn test data for T with ``slot`` frozen at ``a`` into test data for T.

    The new family in ``slot`` is (a, 0, ..., 0) of length ``pad_to``; box
    functionals are copied onto the new index and zero elsewhere.  Both sides
    are evaluated exactly; lhs is unchanged and the rhs gains ||a||.
    """
    kind = params.kind
    if kind in DIAGONAL_KINDS and T.arity > 1:
        raise ValueError("restriction transport is defined for box-indexed kinds")
    av = a.coords if isinstance(a, Vector) else np.asarray(a, dtype=float)
    space = T.domain[slot]
    new = np.zeros((pad_to, space.dim))
    new[0] = av
    xs = [f.flat for f in witness.x_families]
    xs.insert(slot, new)
    phis = None
    if witness.phis is not None:
        if kind is SummingKind.MIXING_MULTI:
            phis = witness.phis.flat
        else:
            old = witness.phis.coords
            box = tuple(x.shape[0] for x in xs)
            phis = np.zeros(box + (T.codomain.dim,))
            index = [slice(None)] * (len(box) + 1)
            index[slot] = 0
            phis[tuple(index)] = old.reshape(tuple(x.shape[0] for i, x in enumerate(xs) if i != slot) + (T.codomain.dim,))
    return evaluate_witness(T, params, xs, phis, budget, check=False)
