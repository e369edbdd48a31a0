"""Seeded instance generators shared by the CLI, the verify batches and the tests."""

from __future__ import annotations

import numpy as np

from .seqnorms import VectorFamily
from .spaces import INF, SpaceSpec, make_rng
from .tensors import SCALARS, MultilinearMap

STREAM_CORPUS = 0xC0
TENSOR_KINDS = ("gaussian-tensor", "sign-tensor", "fourier-tensor", "identity-tensor")
FAMILY_KINDS = ("basis-family", "gaussian-family")


def cube_spaces(n: int, N: int) -> tuple[SpaceSpec, ...]:
    return (SpaceSpec(INF, N),) * n


def _shape(domain, codomain: SpaceSpec) -> tuple[int, ...]:
    return tuple(s.dim for s in domain) + (() if codomain == SCALARS else (codomain.dim,))


def gaussian_tensor(rng: np.random.Generator, domain, codomain: SpaceSpec = SCALARS) -> MultilinearMap:
    return MultilinearMap(tuple(domain), codomain, rng.standard_normal(_shape(domain, codomain)))


def sign_tensor(rng: np.random.Generator, domain, codomain: SpaceSpec = SCALARS) -> MultilinearMap:
    return MultilinearMap(tuple(domain), codomain, rng.choice([-1.0, 1.0], size=_shape(domain, codomain)))


def fourier_coeffs(n: int, N: int) -> np.ndarray:
    """Real Fourier (Hartley) tensor cas(2 pi (j1 j2 + j2 j3 + ...) / N)."""
    grids = np.meshgrid(*[np.arange(N)] * n, indexing="ij")
    phase = sum(grids[k] * grids[k + 1] for k in range(n - 1)) if n > 1 else grids[0] * 0
    angle = 2.0 * np.pi * (phase % N) / N
    return np.cos(angle) + np.sin(angle)


def fourier_tensor(n: int, N: int) -> MultilinearMap:
    return MultilinearMap(cube_spaces(n, N), SCALARS, fourier_coeffs(n, N))


def identity_tensor(n: int, N: int) -> MultilinearMap:
    coeffs = np.zeros((N,) * n)
    idx = np.arange(N)
    coeffs[(idx,) * n] = 1.0
    return MultilinearMap(cube_spaces(n, N), SCALARS, coeffs)


def basis_family(space: SpaceSpec) -> VectorFamily:
    return VectorFamily(space, np.eye(space.dim))


def gaussian_family(rng: np.random.Generator, space: SpaceSpec, m: int) -> VectorFamily:
    return VectorFamily(space, rng.standard_normal((m, space.dim)))


def random_family_instance(seed: int, index: int, max_dim: int = 5, max_len: int = 5,
                           exponents=(1.0, 2.0, INF)) -> VectorFamily:
    """One member of the seeded family corpus: random space, length and entries."""
    rng = make_rng(seed, STREAM_CORPUS, 1, index)
    u = exponents[int(rng.integers(len(exponents)))]
    N = int(rng.integers(1, max_dim + 1))
    m = int(rng.integers(1, max_len + 1))
    X = rng.standard_normal((m, N))
    # some members are exactly zero or repeated, which stresses the factorization paths
    if m > 1 and rng.random() < 0.2:
        X[int(rng.integers(m))] = 0.0
    if m > 1 and rng.random() < 0.2:
        X[-1] = X[0]
    return VectorFamily(SpaceSpec(u, N), X)


def generate(kind: str, n: int, N: int, seed: int, m: int | None = None, exponent=INF):
    """Tensor or family named by ``kind``; deterministic in ``seed``."""
    if n < 1 or N < 1:
        raise ValueError("dimensions must be positive")
    rng = make_rng(seed, STREAM_CORPUS, 0)
    space = SpaceSpec(exponent, N)
    if kind == "gaussian-tensor":
        return gaussian_tensor(rng, (space,) * n)
    if kind == "sign-tensor":
        return sign_tensor(rng, (space,) * n)
    if kind == "fourier-tensor":
        return MultilinearMap((space,) * n, SCALARS, fourier_coeffs(n, N))
    if kind == "identity-tensor":
        return MultilinearMap((space,) * n, SCALARS, identity_tensor(n, N).coeffs)
    if kind == "basis-family":
        return basis_family(space)
    if kind == "gaussian-family":
        return gaussian_family(rng, space, m or N)
    raise ValueError(f"unknown generator kind {kind!r}")
