"""Strong, weak and mixed (s, q) norms of finite vector families.

The mixed norm is bracketed from both sides: ``mixed_norm_primal`` evaluates
an explicit factorization x_i = tau_i y_i (an upper bound) and
``mixed_norm_dual`` evaluates the Maurey functional at an explicit discrete
probability measure on the dual ball (a lower bound).
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .estimate import Budget, EstimateKind, NormEstimate
from .spaces import (
    INF,
    Exponent,
    Functional,
    SpaceSpec,
    Vector,
    as_exponent,
    ball_vertices,
    dual_ball_vertices,
    dual_exponent,
    enumeration_cap,
    from_reciprocal,
    lp_norm,
    make_rng,
    norming_coords,
    random_unit_rows,
    reciprocal,
)

log = logging.getLogger(__name__)

# evaluation chunk for extreme-point sweeps (rows x members)
_CHUNK_ENTRIES = 4_000_000
# largest extreme-point pool used directly as the atom/constraint set
_POOL_MAX = 4096
_STREAM_WEAK = 0x11
_STREAM_PRIMAL = 0x12
_STREAM_DUAL = 0x13


@dataclass(frozen=True, eq=False)
class VectorFamily:
    """Vectors of one space indexed by a box; ``coords`` has shape index_shape + (dim,)."""

    space: SpaceSpec
    coords: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.coords, dtype=float)
        if arr.ndim < 2:
            raise ValueError("family coordinates need an index axis and a coordinate axis")
        if arr.shape[-1] != self.space.dim:
            raise ValueError(f"members have {arr.shape[-1]} coordinates, space has dim {self.space.dim}")
        if arr.size == 0:
            raise ValueError("a family needs at least one member")
        if not np.all(np.isfinite(arr)):
            raise ValueError("family coordinates must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "coords", arr)

    @classmethod
    def from_vectors(cls, vectors: Sequence[Vector]) -> "VectorFamily":
        if not vectors:
            raise ValueError("a family needs at least one member")
        space = vectors[0].space
        if any(v.space != space for v in vectors):
            raise ValueError("family members live in different spaces")
        return cls(space, np.array([v.coords for v in vectors]))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.coords.shape[:-1]

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def __len__(self) -> int:
        return self.size

    @property
    def flat(self) -> np.ndarray:
        return self.coords.reshape(self.size, self.space.dim)

    @property
    def members(self) -> list[Vector]:
        return [Vector(self.space, row) for row in self.flat]

    def scaled(self, factor: float) -> "VectorFamily":
        return VectorFamily(self.space, self.coords * factor)


@dataclass(frozen=True, eq=False)
class FactorizationWitness:
    """x_i = taus[i] * ys[i] with ||taus||_r = 1 (zero members get tau = 0, y = 0)."""

    taus: np.ndarray
    ys: VectorFamily

    def reconstruct(self) -> np.ndarray:
        return self.taus.reshape(self.ys.shape + (1,)) * self.ys.coords


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    atoms: tuple[Functional, ...]
    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=float)
        if w.shape != (len(self.atoms),) or len(self.atoms) == 0:
            raise ValueError("one weight per atom is required")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be a probability vector")
        for a in self.atoms:
            if a.space.dual_norm(a.coords) > 1 + 1e-12:
                raise ValueError("atoms must lie in the dual unit ball")
        w.flags.writeable = False
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "weights", w)

    @property
    def atom_coords(self) -> np.ndarray:
        return np.array([a.coords for a in self.atoms])


# ---------------------------------------------------------------------------
# weak norm


def _weak_by_vertices(X: np.ndarray, V: np.ndarray, p: Exponent) -> tuple[float, np.ndarray]:
    best, arg = -1.0, 0
    step = max(1, _CHUNK_ENTRIES // max(1, X.shape[0]))
    for start in range(0, V.shape[0], step):
        vals = lp_norm(V[start:start + step] @ X.T, p, axis=1)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, arg = float(vals[k]), start + k
    return best, V[arg].copy()


def _weak_by_signs(X: np.ndarray, u: Exponent) -> tuple[float, np.ndarray]:
    # p = 1: sup_phi sum_j |phi(x_j)| = max over signs of ||sum_j eps_j x_j||
    m = X.shape[0]
    E = ball_vertices(SpaceSpec(INF, m), cap=m, half=True)
    sums = E @ X
    vals = lp_norm(sums, u, axis=1)
    k = int(np.argmax(vals))
    return float(vals[k]), norming_coords(sums[k], u)


def _weak_ascent(X: np.ndarray, u: Exponent, p: Exponent, restarts: int, iters: int,
                 seed: int) -> tuple[float, np.ndarray]:
    """Conditional-gradient ascent of phi -> ||(phi(x_j))||_p over the dual ball.

    Each step jumps to the dual-ball point maximizing the linearization, which
    never decreases a convex objective.  Starts: norming functionals of every
    member, the top singular direction, then ``restarts`` random directions.
    """
    starts = [norming_coords(X, u)]
    _, _, vt = np.linalg.svd(X, full_matrices=False)
    starts.append(vt[:1] / lp_norm(vt[0], dual_exponent(u)))
    starts.append(np.vstack([random_unit_rows(make_rng(seed, _STREAM_WEAK, i), 1,
                                              SpaceSpec(u, X.shape[1]), dual=True)
                             for i in range(restarts)]))
    phi = np.vstack(starts)
    val = lp_norm(phi @ X.T, p, axis=1)
    live = np.ones(phi.shape[0], dtype=bool)
    for _ in range(iters):
        if not live.any():
            break
        a = phi[live] @ X.T
        top = np.max(np.abs(a), axis=1, keepdims=True)
        top = np.where(top > 0, top, 1.0)
        if p is INF:
            j = np.argmax(np.abs(a), axis=1)
            rows = np.arange(a.shape[0])
            g = np.sign(a[rows, j])[:, None] * X[j]
        else:
            g = (np.sign(a) * (np.abs(a) / top) ** (p - 1.0)) @ X
        cand = norming_coords(g, u)
        cval = lp_norm(cand @ X.T, p, axis=1)
        better = cval > val[live] * (1 + 1e-15)
        idx = np.flatnonzero(live)
        phi[idx[better]] = cand[better]
        val[idx[better]] = cval[better]
        live[idx[~better]] = False
    k = int(np.argmax(val))  # first maximizer in start order
    best_val, best_phi = float(val[k]), phi[k].copy()
    return best_val, best_phi


def weak_norm_array(X: np.ndarray, space: SpaceSpec, p: Exponent, *, cap: int | None = None,
                    restarts: int = 16, iters: int = 200, seed: int = 0,
                    mode: str = "auto") -> tuple[float, np.ndarray, bool]:
    """Weak l_p norm of the rows of ``X`` in ``space``: (value, maximizing phi, exact?)."""
    if mode not in ("auto", "exact", "ascent"):
        raise ValueError(f"unknown weak-norm mode {mode!r}")
    X = np.asarray(X, dtype=float).reshape(-1, space.dim)
    u = space.exponent
    if not np.any(X):
        e = np.zeros(space.dim)
        e[0] = 1.0
        return 0.0, e, True
    if p is INF:
        norms = lp_norm(X, u, axis=1)
        j = int(np.argmax(norms))
        return float(norms[j]), norming_coords(X[j], u), True
    if mode != "ascent":
        V = dual_ball_vertices(space, cap, half=True)
        if V is not None:
            val, phi = _weak_by_vertices(X, V, p)
            return val, phi, True
        if u == 2.0 and p == 2.0:
            _, sv, vt = np.linalg.svd(X, full_matrices=False)
            return float(sv[0]), vt[0].copy(), True
        limit = enumeration_cap() if cap is None else cap
        if p == 1.0 and X.shape[0] <= limit:
            val, phi = _weak_by_signs(X, u)
            return val, phi, True
        if mode == "exact":
            raise ValueError(f"no exact weak-norm path for {space} with p={p}")
    val, phi = _weak_ascent(X, u, p, restarts, iters, seed)
    return val, phi, False


def _budget(budget: Budget | None) -> Budget:
    return Budget() if budget is None else budget


def _check_exponent(p: object, what: str = "p") -> Exponent:
    try:
        return as_exponent(p)
    except ValueError as exc:
        raise ValueError(f"{what} must lie in [1, inf]: {exc}") from None


def strong_norm(fam: VectorFamily, p: object) -> NormEstimate:
    p = as_exponent(p, minimum=np.finfo(float).tiny)
    norms = fam.space.norm(fam.flat)
    return NormEstimate(float(lp_norm(norms, p)), EstimateKind.EXACT, witness=None)


def weak_norm(fam: VectorFamily, p: object, budget: Budget | None = None, *,
              mode: str = "auto") -> NormEstimate:
    """Weak l_p norm; exact on enumerable or closed-form cases, otherwise a lower bound.

    ``mode="ascent"`` forces the iterative path, ``mode="exact"`` refuses it.
    """
    p = _check_exponent(p)
    b = _budget(budget)
    val, phi, exact = weak_norm_array(fam.flat, fam.space, p, cap=b.enum_cap, restarts=b.restarts,
                                      iters=b.iters, seed=b.seed, mode=mode)
    kind = EstimateKind.EXACT if exact else EstimateKind.LOWER
    return NormEstimate(val, kind, witness=Functional(fam.space, phi), budget=b)


# ---------------------------------------------------------------------------
# mixed norm: shared pieces


def _mixed_exponents(s: object, q: object) -> tuple[Exponent, Exponent, Exponent]:
    s = _check_exponent(s, "s")
    q = _check_exponent(q, "q")
    if reciprocal(q) < reciprocal(s):
        raise ValueError("mixed (s, q) norm needs q <= s")
    r = from_reciprocal(max(reciprocal(q) - reciprocal(s), 0.0))
    return s, q, r


def _pow2_scale(X: np.ndarray, space: SpaceSpec) -> float:
    # power of two so that rescaling is exact in floating point
    top = float(np.max(space.norm(X)))
    return math.ldexp(1.0, math.frexp(top)[1]) if top > 0 else 1.0


def factorization_value(witness: FactorizationWitness, s: object, q: object,
                        budget: Budget | None = None) -> tuple[float, bool]:
    """||tau||_r * ||y||_{w,s} for an explicit factorization, with exactness flag."""
    s, q, r = _mixed_exponents(s, q)
    b = _budget(budget)
    w, _, exact = weak_norm_array(witness.ys.flat, witness.ys.space, s, cap=b.enum_cap,
                                  restarts=b.restarts, iters=b.iters, seed=b.seed)
    return float(lp_norm(witness.taus, r)) * w, exact


def maurey_value(fam: VectorFamily, measure: DiscreteMeasure, s: object, q: object) -> float:
    """(sum_j (int |phi(z_j)|^s dmu)^{q/s})^{1/q} for a discrete measure."""
    s, q, _ = _mixed_exponents(s, q)
    if s is INF:
        raise ValueError("the Maurey functional needs s < inf")
    return _maurey(measure.atom_coords @ fam.flat.T, measure.weights, s, q)


def _maurey(C: np.ndarray, w: np.ndarray, s: float, q: float) -> float:
    # C[a, j] = phi_a(z_j)
    top = np.max(np.abs(C)) if C.size else 0.0
    if top == 0:
        return 0.0
    S = w @ (np.abs(C / top) ** s)
    return float(lp_norm(S ** (1.0 / s), q)) * top


# ---------------------------------------------------------------------------
# primal: minimize ||tau||_r ||x / tau||_{w,s}


def _solve_master(C: np.ndarray, beta: float) -> tuple[np.ndarray, float] | None:
    """min_v max_k <C_k, v>  s.t.  sum v^-beta <= 1, v > 0  (v = tau^-s)."""
    import cvxpy as cp

    scale = float(C.max())
    if scale <= 0:
        return None
    A = C / scale
    v = cp.Variable(A.shape[1], pos=True)
    prob = cp.Problem(cp.Minimize(cp.max(A @ v)), [cp.sum(cp.power(v, -beta)) <= 1])
    for solver in ("CLARABEL", "SCS"):
        try:
            # an inaccurate solve is fine: the factorization it yields is re-evaluated exactly
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UserWarning)
                prob.solve(solver=solver)
        except (cp.SolverError, ArithmeticError, ValueError) as exc:
            log.debug("master solve with %s failed: %s", solver, exc)
            continue
        if v.value is not None and prob.status in ("optimal", "optimal_inaccurate"):
            vals = np.maximum(np.asarray(v.value, dtype=float), 1e-300)
            return vals, float(prob.value) * scale
    return None


def mixed_norm_primal(fam: VectorFamily, s: object, q: object,
                      budget: Budget | None = None) -> NormEstimate:
    """Upper bound for the mixed (s, q) norm from an explicit factorization.

    Endpoints are closed forms: tau = 1 when s = q, tau_i = ||x_i|| when
    s = inf.  Otherwise tau is optimized through the convex program in
    v = tau^{-s} with the dual-ball constraints generated on demand.
    """
    s, q, r = _mixed_exponents(s, q)
    b = _budget(budget)
    space = fam.space
    X = fam.flat
    weak_kw = dict(cap=b.enum_cap, restarts=b.restarts, iters=b.iters, seed=b.seed)
    norms = space.norm(X)

    def finish(taus: np.ndarray, info: dict) -> NormEstimate:
        safe = np.where(taus > 0, taus, 1.0)
        ys = np.where((taus > 0)[:, None], X / safe[:, None], 0.0)
        wit = FactorizationWitness(taus.reshape(fam.shape), VectorFamily(space, ys.reshape(fam.coords.shape)))
        value, exact = factorization_value(wit, s, q, b)
        if s == q:
            kind = EstimateKind.EXACT if exact else EstimateKind.LOWER
        elif s is INF:
            kind = EstimateKind.EXACT
        else:
            kind = EstimateKind.UPPER
        return NormEstimate(value, kind, witness=wit, budget=b, certified=exact, info=info)

    if s == q:
        return finish(np.ones(X.shape[0]), {"path": "closed-form", "r": "inf"})
    if s is INF:
        return finish(norms.copy(), {"path": "closed-form", "r": float(q)})

    nz = norms > 0
    taus = np.zeros(X.shape[0])
    if not np.any(nz):
        return finish(taus, {"path": "zero family"})
    scale = _pow2_scale(X[nz], space)
    Z = X[nz] / scale
    zn = norms[nz] / scale

    def evaluate(t: np.ndarray) -> tuple[float, np.ndarray, bool]:
        t = t / lp_norm(t, r)
        w, phi, exact = weak_norm_array(Z / t[:, None], space, s, **weak_kw)
        return w, phi, exact

    # tau_i = ||x_i||^{q/r} never exceeds the strong norm
    cands = [zn ** (q / r), np.ones(Z.shape[0])]
    best_val, best_tau = math.inf, None
    phis = []
    for t in cands:
        val, phi, _ = evaluate(t)
        phis.append(phi)
        if val < best_val:
            best_val, best_tau = val, t / lp_norm(t, r)

    V = dual_ball_vertices(space, b.enum_cap, half=True)
    complete = V is not None and V.shape[0] <= _POOL_MAX
    if complete:
        active = np.array(V)
    else:
        seeds = random_unit_rows(make_rng(b.seed, _STREAM_PRIMAL), 32, space, dual=True)
        active = np.vstack([norming_coords(Z, space.exponent), *phis, seeds])
    beta = r / s
    rounds = 0
    lower = 0.0
    max_rounds = max(10, b.iters // 4)
    while rounds < max_rounds:
        rounds += 1
        C = np.abs(active @ Z.T) ** s
        solved = _solve_master(C, beta)
        if solved is None:
            log.warning("mixed-norm master problem could not be solved; keeping best factorization")
            break
        v, mval = solved
        lower = max(lower, mval ** (1.0 / s))
        t = v ** (-1.0 / s)
        val, phi, _ = evaluate(t)
        if val < best_val:
            best_val, best_tau = val, t / lp_norm(t, r)
        if complete or best_val <= lower * (1 + 1e-9):
            break
        active = np.vstack([active, phi])
    taus[nz] = best_tau
    return finish(taus, {"path": "convex program", "rounds": rounds, "r": float(r),
                         "restricted_lower": lower * scale})


# ---------------------------------------------------------------------------
# dual: maximize the Maurey functional over discrete measures


def _maximize_weights(B: np.ndarray, gamma: float, logw: np.ndarray | None = None,
                      iters: int = 2000) -> tuple[np.ndarray, float]:
    """Exponentiated-gradient ascent of H(w) = sum_j (w @ B)_j^gamma on the simplex.

    H is concave for gamma <= 1; step sizes adapt and every accepted step
    increases H, so the iteration is monotone.
    """
    K = B.shape[0]
    logw = np.zeros(K) if logw is None else logw.copy()

    def weights(lw: np.ndarray) -> np.ndarray:
        e = np.exp(lw - lw.max())
        return e / e.sum()

    w = weights(logw)
    S = w @ B
    H = float(np.sum(S ** gamma))
    eta = 1.0
    for _ in range(iters):
        Sg = np.where(S > 0, S, np.finfo(float).tiny) ** (gamma - 1.0)
        h = (B @ Sg) / np.sum(S ** gamma)  # sum_a w_a h_a = 1
        accepted = False
        while eta > 1e-12:
            lw = logw + eta * h
            wn = weights(lw)
            Sn = wn @ B
            Hn = float(np.sum(Sn ** gamma))
            if Hn > H:
                accepted = True
                break
            eta *= 0.25
        if not accepted:
            break
        gain = Hn - H
        logw, w, S, H = lw - lw.max(), wn, Sn, Hn
        eta = min(eta * 2.0, 1e8)
        if gain <= 1e-15 * H:
            break
    return w, H


def _improve_atoms(A: np.ndarray, w: np.ndarray, Z: np.ndarray, u: Exponent, s: float,
                   gamma: float) -> tuple[np.ndarray, float]:
    """One conditional-gradient pass over the atoms with backtracking."""
    ud = dual_exponent(u)

    def H_of(At: np.ndarray) -> float:
        return float(np.sum((w @ np.abs(At @ Z.T) ** s) ** gamma))

    H = H_of(A)
    A = A.copy()
    for a in range(A.shape[0]):
        if w[a] <= 0:
            continue
        c = A @ Z.T
        S = w @ np.abs(c) ** s
        Sg = np.where(S > 0, S, np.finfo(float).tiny) ** (gamma - 1.0)
        g = (Sg * np.sign(c[a]) * np.abs(c[a]) ** (s - 1.0)) @ Z
        if not np.any(g):
            continue
        target = norming_coords(g, u)  # dual-ball point maximizing <., g>
        eta = 1.0
        while eta >= 1.0 / 64:
            cand = (1 - eta) * A[a] + eta * target
            n = lp_norm(cand, ud)
            if n > 0:
                trial = A.copy()
                trial[a] = cand / n
                Ht = H_of(trial)
                if Ht > H:
                    A, H = trial, Ht
                    break
            eta *= 0.5
    return A, H


def mixed_norm_dual(fam: VectorFamily, s: object, q: object, budget: Budget | None = None) -> NormEstimate:
    """Lower bound for the mixed (s, q) norm via the Maurey functional.

    When the dual ball has a small set of extreme points, every one of them is
    an atom and only the weights are optimized; the objective is concave in
    the weights, so this finds the supremum over all measures.  Otherwise
    ``budget.atoms`` (default m + 1) free atoms and weights are improved in
    alternation from several starts.
    """
    s, q, _ = _mixed_exponents(s, q)
    if s is INF or q is INF or not q < s:
        raise ValueError("the Maurey characterization needs q < s < inf")
    b = _budget(budget)
    space = fam.space
    u = space.exponent
    X = fam.flat
    norms = space.norm(X)
    nz = norms > 0
    gamma = q / s
    if not np.any(nz):
        e = np.zeros(space.dim)
        e[0] = 1.0
        meas = DiscreteMeasure((Functional(space, e),), np.ones(1))
        return NormEstimate(0.0, EstimateKind.LOWER, witness=meas, budget=b)
    scale = _pow2_scale(X[nz], space)
    Z = X[nz] / scale
    m = Z.shape[0]

    _, phi_weak, _ = weak_norm_array(Z, space, q, cap=b.enum_cap, restarts=b.restarts,
                                     iters=b.iters, seed=b.seed)
    best = (_maurey(phi_weak[None, :] @ Z.T, np.ones(1), s, q), phi_weak[None, :], np.ones(1))

    V = dual_ball_vertices(space, b.enum_cap, half=True)
    if V is not None and V.shape[0] <= _POOL_MAX:
        B = np.abs(V @ Z.T) ** s
        top = B.max()
        w, _ = _maximize_weights(B / top, gamma, iters=20 * b.iters)
        val = _maurey(V @ Z.T, w, s, q)
        if val > best[0]:
            best = (val, np.array(V), w)
        path = "extreme points"
    else:
        k = b.atoms if b.atoms is not None else m + 1
        for i in range(b.restarts):
            if i == 0:
                extra = norming_coords(Z, u)
            else:
                extra = random_unit_rows(make_rng(b.seed, _STREAM_DUAL, i), m, space, dual=True)
            A = np.vstack([phi_weak, extra])
            if A.shape[0] < k:
                fill = random_unit_rows(make_rng(b.seed, _STREAM_DUAL, i, 1), k - A.shape[0], space, dual=True)
                A = np.vstack([A, fill])
            A = A[:k]
            logw = None
            H = -1.0
            for _ in range(b.iters):
                B = np.abs(A @ Z.T) ** s
                w, _ = _maximize_weights(B, gamma, logw, iters=200)
                logw = np.log(np.maximum(w, 1e-300))
                A, Hn = _improve_atoms(A, w, Z, u, s, gamma)
                if Hn <= H * (1 + 1e-10):
                    break
                H = Hn
            B = np.abs(A @ Z.T) ** s
            w, _ = _maximize_weights(B, gamma, logw, iters=200)
            val = _maurey(A @ Z.T, w, s, q)
            if val > best[0]:
                best = (val, A, w)
        path = "free atoms"

    val, A, w = best
    keep = w > 1e-15 * w.max()
    wk = w[keep] / w[keep].sum()
    pruned = _maurey(A[keep] @ Z.T, wk, s, q)
    if pruned >= val:
        val, A, w = pruned, A[keep], wk
    meas = DiscreteMeasure(tuple(Functional(space, a) for a in A), w)
    # evaluate on the original family so the value matches the witness
    value = maurey_value(fam, meas, s, q)
    return NormEstimate(value, EstimateKind.LOWER, witness=meas, budget=b,
                        info={"path": path, "atoms": len(meas.atoms)})
