"""Seeded batches of law checks, one function per law id."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import corpus
from .estimate import Budget
from .laws import (
    LawReport,
    Verdict,
    bh_exponent_probe,
    bohnenblust_hille,
    coherence_compatibility,
    endpoints_law,
    inclusion_law,
    littlewood_43,
    maurey_duality,
    mixing_characterization,
    quotient_theorem,
    triviality_law,
)
from .spaces import INF, Functional, SpaceSpec, make_rng
from .summing import SummingParams
from .tensors import SCALARS, HomogeneousPolynomial, MultilinearMap

LAW_IDS = ("littlewood43", "bh", "maurey", "mixing", "coherence", "quotient", "triviality", "inclusion", "endpoints")
STREAM_VERIFY = 0x7E


@dataclass
class VerifyOptions:
    count: int = 20
    seed: int = 0
    N: int | None = None
    n: int | None = None
    m: int | None = None
    p: object = None
    q: object = None
    r: object = None
    s: object = None
    exhaustive: bool = True
    budget: Budget = field(default_factory=Budget)


def _rng(opts: VerifyOptions, i: int) -> np.random.Generator:
    return make_rng(opts.seed, STREAM_VERIFY, i)


def _tag(opts: VerifyOptions, i: int) -> dict:
    return {"seed": opts.seed, "index": i}


def littlewood_batch(opts: VerifyOptions) -> list[LawReport]:
    """Random sign and Gaussian forms, then the identity and Fourier forms for every N."""
    dims = [opts.N] if opts.N else list(range(2, 9))
    out = []
    for i in range(opts.count):
        N = dims[i % len(dims)]
        rng = _rng(opts, i)
        gen = corpus.sign_tensor if i % 2 == 0 else corpus.gaussian_tensor
        T = gen(rng, corpus.cube_spaces(2, N))
        out.append(littlewood_43(T, opts.exhaustive, opts.budget,
                                 instance={**_tag(opts, i), "family": gen.__name__.replace("_tensor", "")}))
    for N in dims:
        for name, T in (("identity", corpus.identity_tensor(2, N)), ("fourier", corpus.fourier_tensor(2, N))):
            out.append(littlewood_43(T, opts.exhaustive, opts.budget, instance={"family": name, "structured": True}))
    return out


def bh_batch(opts: VerifyOptions) -> list[LawReport]:
    n = opts.n or 3
    dims = [opts.N] if opts.N else list(range(2, 7))
    out = []
    for i in range(opts.count):
        N = dims[i % len(dims)]
        T = corpus.sign_tensor(_rng(opts, i), corpus.cube_spaces(n, N))
        out.append(bohnenblust_hille(T, budget=opts.budget, instance={**_tag(opts, i), "family": "sign"}))
    out.append(bohnenblust_hille(corpus.identity_tensor(n, dims[0]), budget=opts.budget,
                                 instance={"family": "product-diagonal"}))
    return out


def bh_probe(opts: VerifyOptions) -> dict:
    n = opts.n or 2
    rho = 2.0 * n / (n + 1)
    return bh_exponent_probe(corpus.fourier_tensor, n, [2, 3, 4, 5, 6, 7, 8][: 7 if n == 2 else 4],
                             [1.0, rho - 0.2, rho], opts.budget)


def _mixed_pairs(opts: VerifyOptions):
    if opts.s is not None or opts.q is not None:
        return [(opts.s if opts.s is not None else 2.0, opts.q if opts.q is not None else 1.0)]
    return [(2.0, 1.0), (4.0, 2.0), (3.0, 1.5)]


def maurey_batch(opts: VerifyOptions) -> list[LawReport]:
    pairs = _mixed_pairs(opts)
    out = []
    for i in range(opts.count):
        fam = corpus.random_family_instance(opts.seed, i, max_dim=opts.N or 5, max_len=opts.m or 5)
        s, q = pairs[i % len(pairs)]
        out.append(maurey_duality(fam, s, q, opts.budget, instance=_tag(opts, i)))
    return out


def endpoints_batch(opts: VerifyOptions) -> list[LawReport]:
    qs = [opts.q] if opts.q is not None else [1.0, 2.0]
    out = []
    for i in range(opts.count):
        fam = corpus.random_family_instance(opts.seed, i, max_dim=opts.N or 5, max_len=opts.m or 5)
        for q in qs:
            out.append(endpoints_law(fam, q, opts.budget, instance=_tag(opts, i)))
    return out


def _bilinear_to_l2(rng: np.random.Generator, N: int, n: int = 2, codim: int = 2) -> MultilinearMap:
    return corpus.gaussian_tensor(rng, corpus.cube_spaces(n, N), SpaceSpec(2.0, codim))


def mixing_batch(opts: VerifyOptions) -> list[LawReport]:
    s = opts.s if opts.s is not None else 2.0
    q = opts.q if opts.q is not None else 1.0
    p = opts.p if opts.p is not None else 1.0
    n, N, m = opts.n or 2, opts.N or 2, opts.m or 3
    out = []
    for i in range(opts.count):
        rng = _rng(opts, i)
        A = _bilinear_to_l2(rng, N, n)
        fams = [rng.standard_normal((m, N)) for _ in range(n)]
        out.append(mixing_characterization(A, s, q, [p] * n, fams, opts.budget, instance=_tag(opts, i)))
    return out


def quotient_batch(opts: VerifyOptions) -> list[LawReport]:
    s = opts.s if opts.s is not None else 2.0
    q = opts.q if opts.q is not None else 1.0
    p = opts.p if opts.p is not None else 1.0
    n, N, m = opts.n or 2, opts.N or 2, opts.m or 2
    out = []
    F = SpaceSpec(2.0, 2)
    for i in range(opts.count):
        rng = _rng(opts, i)
        A = _bilinear_to_l2(rng, N, n)
        fams = [rng.standard_normal((m, N)) for _ in range(n)]
        # rank-one u = psi (x) w on F, into l_1^2
        psi, w = rng.standard_normal(F.dim), rng.standard_normal(2)
        u = MultilinearMap.linear(np.outer(w, psi), F, SpaceSpec(1.0, 2))
        out.append(quotient_theorem(A, u, s, q, [p] * n, fams, budget=opts.budget, instance=_tag(opts, i)))
    return out


_COHERENCE_PARAMS = (
    SummingParams.multiple_r(2.0, (1.0,), 2.0),
    SummingParams.multiple(2.0, (1.0,)),
    SummingParams.multiple_r(1.0, (2.0,), 2.0),
    SummingParams.mixing(2.0, 1.0, (1.0,)),
)


def coherence_batch(opts: VerifyOptions) -> list[LawReport]:
    degrees = [opts.n] if opts.n else [2, 3]
    N = opts.N or 2
    m = opts.m or 2
    out = []
    for i in range(opts.count):
        rng = _rng(opts, i)
        n = degrees[i % len(degrees)]
        u = (1.0, 2.0, INF)[int(rng.integers(3))]
        E = SpaceSpec(u, N)
        F = SpaceSpec(2.0, 2)
        P = HomogeneousPolynomial.from_tensor(rng.standard_normal((N,) * n + (F.dim,)), n, E, F)
        a = rng.standard_normal(N)
        gamma = Functional(E, rng.standard_normal(N))
        params = _COHERENCE_PARAMS[i % len(_COHERENCE_PARAMS)]
        out.append(coherence_compatibility(P, params, a, gamma, seed=opts.seed * 1000 + i, m=m, budget=opts.budget,
                                           instance={"index": i}))
    return out


def _triviality_params(opts: VerifyOptions) -> list[SummingParams]:
    if opts.p is not None or opts.q is not None or opts.r is not None:
        return [SummingParams.multiple_r(opts.p if opts.p is not None else 1.0,
                                         (opts.q if opts.q is not None else 4.0,),
                                         opts.r if opts.r is not None else 4.0)]
    # 1/p - 1/q - 1/r = 0.1 and 0.25
    return [SummingParams.multiple_r(1.0, (2.0,), 2.5), SummingParams.multiple_r(1.0, (2.0,), 4.0)]


def triviality_batch(opts: VerifyOptions) -> list[LawReport]:
    out = []
    plist = _triviality_params(opts)
    N = opts.N or 2
    for i in range(opts.count):
        rng = _rng(opts, i)
        params = plist[i % len(plist)]
        n = opts.n or 1 + i % 2
        T = corpus.gaussian_tensor(rng, (SpaceSpec(2.0, N),) * n, SpaceSpec(2.0, N))
        out.append(triviality_law(params, T, instance=_tag(opts, i)))
    return out


def inclusion_batch(opts: VerifyOptions) -> list[LawReport]:
    p = opts.p if opts.p is not None else 2.0
    q = opts.q if opts.q is not None else 1.0
    r = opts.r if opts.r is not None else 2.0
    n, N = opts.n or 2, opts.N or 2
    out = []
    for i in range(opts.count):
        A = _bilinear_to_l2(_rng(opts, i), N, n)
        out.append(inclusion_law(A, p, [q] * n, r, opts.budget.replace(seed=opts.seed + i), instance=_tag(opts, i)))
    return out


BATCHES: dict[str, Callable[[VerifyOptions], list[LawReport]]] = {
    "littlewood43": littlewood_batch,
    "bh": bh_batch,
    "maurey": maurey_batch,
    "mixing": mixing_batch,
    "coherence": coherence_batch,
    "quotient": quotient_batch,
    "triviality": triviality_batch,
    "inclusion": inclusion_batch,
    "endpoints": endpoints_batch,
}


def run(law_id: str, opts: VerifyOptions) -> list[LawReport]:
    try:
        batch = BATCHES[law_id]
    except KeyError:
        raise ValueError(f"unknown law id {law_id!r}; expected one of {', '.join(LAW_IDS)}") from None
    return batch(opts)


def tally(reports: list[LawReport]) -> dict[str, int]:
    counts = {v.value: 0 for v in Verdict}
    for rep in reports:
        counts[rep.verdict.value] += 1
    return counts
