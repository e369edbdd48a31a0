"""Finite-dimensional real l_u^N spaces, their duals and unit-ball geometry.

Exponents are floats >= 1 or the enum member ``INF``. Floating infinity is
accepted at the API boundary and converted to ``INF`` immediately.
"""

from __future__ import annotations

import enum
import functools
import itertools
import math
import os
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np


class Extended(enum.Enum):
    INF = "inf"

    def __repr__(self) -> str:
        return "INF"

    def __str__(self) -> str:
        return "inf"


INF = Extended.INF
Exponent = Union[float, Extended]

DEFAULT_ENUM_CAP = 16
ENUM_CAP_ENV = "SUMMING_ENUM_CAP"


def as_exponent(u: object, *, minimum: float = 1.0) -> Exponent:
    """Normalize an exponent: INF, "inf", math.inf or a real number >= minimum."""
    if u is INF:
        return INF
    if isinstance(u, str):
        if u.strip().lower() in ("inf", "infinity", "∞"):
            return INF
        try:
            u = float(u)
        except ValueError:
            raise ValueError(f"not an exponent: {u!r}") from None
    if isinstance(u, bool) or not isinstance(u, (int, float, np.integer, np.floating)):
        raise TypeError(f"not an exponent: {u!r}")
    u = float(u)
    if math.isnan(u):
        raise ValueError("exponent is NaN")
    if math.isinf(u):
        if u < 0:
            raise ValueError("exponent must be positive")
        return INF
    if u < minimum:
        raise ValueError(f"exponent {u} is below {minimum}")
    return u


def reciprocal(u: Exponent) -> float:
    """1/u with 1/INF = 0."""
    return 0.0 if u is INF else 1.0 / u


def from_reciprocal(t: float) -> Exponent:
    """Inverse of :func:`reciprocal` (t = 0 gives INF)."""
    if t < 0:
        raise ValueError("reciprocal exponent must be nonnegative")
    return INF if t == 0 else 1.0 / t


def dual_exponent(u: object) -> Exponent:
    u = as_exponent(u)
    if u is INF:
        return 1.0
    if u == 1.0:
        return INF
    return 1.0 / (1.0 - 1.0 / u)


def format_exponent(u: Exponent) -> str:
    return "inf" if u is INF else repr(float(u))


def enumeration_cap() -> int:
    """Largest dimension for which sign vectors are enumerated (env-configurable)."""
    raw = os.environ.get(ENUM_CAP_ENV)
    if raw is None:
        return DEFAULT_ENUM_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"{ENUM_CAP_ENV} must be an integer, got {raw!r}") from None
    if cap < 1:
        raise ValueError(f"{ENUM_CAP_ENV} must be positive")
    return cap


def lp_norm(a, u: Exponent, axis=None) -> np.ndarray | float:
    """l_u norm of ``a`` along ``axis`` (all entries when axis is None).

    Entries are rescaled by their maximum before powering so large exponents
    neither overflow nor underflow.
    """
    a = np.abs(np.asarray(a, dtype=float))
    if u is INF:
        return a.max(axis=axis, initial=0.0)
    if u == 1.0:
        return a.sum(axis=axis)
    top = a.max(axis=axis, keepdims=True, initial=0.0)
    safe = np.where(top > 0, top, 1.0)
    total = np.sum((a / safe) ** u, axis=axis, keepdims=True)
    out = total ** (1.0 / u) * top
    if axis is None:
        return float(out.reshape(()))
    return np.squeeze(out, axis=axis)


@dataclass(frozen=True)
class SpaceSpec:
    """The real space l_u^N."""

    exponent: Exponent
    dim: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "exponent", as_exponent(self.exponent))
        if isinstance(self.dim, bool) or int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))

    @functools.cached_property
    def dual(self) -> "SpaceSpec":
        return SpaceSpec(dual_exponent(self.exponent), self.dim)

    def norm(self, coords, axis=-1):
        return lp_norm(coords, self.exponent, axis=axis)

    def dual_norm(self, coords, axis=-1):
        return lp_norm(coords, self.dual.exponent, axis=axis)

    def __str__(self) -> str:
        return f"l_{format_exponent(self.exponent)}^{self.dim}"


def dual_space(space: SpaceSpec) -> SpaceSpec:
    return space.dual


def _frozen_coords(coords, dim: int) -> np.ndarray:
    arr = np.array(coords, dtype=float).reshape(-1)
    if arr.shape != (dim,):
        raise ValueError(f"expected {dim} coordinates, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("coordinates must be finite")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Vector:
    space: SpaceSpec
    coords: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "coords", _frozen_coords(self.coords, self.space.dim))

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, Vector) and self.space == other.space
                and np.array_equal(self.coords, other.coords))

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class Functional:
    """A linear functional on ``space`` (its predual), acting by dot product."""

    space: SpaceSpec
    coords: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "coords", _frozen_coords(self.coords, self.space.dim))

    def __call__(self, v: Vector | np.ndarray) -> float:
        x = v.coords if isinstance(v, Vector) else np.asarray(v, dtype=float)
        if x.shape[-1] != self.space.dim:
            raise ValueError("dimension mismatch")
        return float(x @ self.coords)

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, Functional) and self.space == other.space
                and np.array_equal(self.coords, other.coords))

    __hash__ = None  # type: ignore[assignment]


def norm(v: Vector) -> float:
    return float(v.space.norm(v.coords))


def dual_norm(phi: Functional) -> float:
    return float(phi.space.dual_norm(phi.coords))


def norming_coords(x, u: Exponent) -> np.ndarray:
    """Coordinates of a norming element for each row of ``x`` viewed in l_u.

    Returns ``w`` of dual norm 1 with <w, x> = ||x||_u; rows equal to zero get
    the first basis vector.  Works on a single vector or a stack of rows.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x2 = np.atleast_2d(x)
    w = np.zeros_like(x2)
    if u is INF:
        k = np.argmax(np.abs(x2), axis=1)
        rows = np.arange(x2.shape[0])
        picked = x2[rows, k]
        w[rows, k] = np.where(picked < 0, -1.0, 1.0)
    elif u == 1.0:
        w = np.sign(x2)
    else:
        n = lp_norm(x2, u, axis=1)
        safe = np.where(n > 0, n, 1.0)[:, None]
        w = np.sign(x2) * np.abs(x2 / safe) ** (u - 1.0)
    zero = ~np.any(x2 != 0, axis=1)
    if np.any(zero):
        w[zero] = 0.0
        w[zero, 0] = 1.0
    return w[0] if single else w


def norming_functional(v: Vector) -> Functional:
    """Functional of dual norm 1 attaining <phi, v> = ||v||."""
    return Functional(v.space, norming_coords(v.coords, v.space.exponent))


def norming_vector(phi: Functional) -> Vector:
    """Unit vector x with phi(x) = ||phi||_*."""
    u_dual = dual_exponent(phi.space.exponent)
    return Vector(phi.space, norming_coords(phi.coords, u_dual))


def _half_sign_vectors(n: int) -> np.ndarray:
    # one of each +/- pair: first coordinate fixed to +1
    if n == 1:
        return np.ones((1, 1))
    rest = np.array(list(itertools.product((1.0, -1.0), repeat=n - 1)), dtype=float)
    rest = rest.reshape(-1, n - 1)
    return np.hstack([np.ones((rest.shape[0], 1)), rest])


@functools.lru_cache(maxsize=128)
def _vertices(exponent: Exponent, n: int, cap: int, half: bool) -> np.ndarray | None:
    if exponent == 1.0:
        eye = np.eye(n)
        pts = eye if half else np.vstack([eye, -eye])
    elif exponent is INF and n <= cap:
        pts = _half_sign_vectors(n)
        if not half:
            pts = np.vstack([pts, -pts])
    else:
        return None
    pts.flags.writeable = False
    return pts


def ball_vertices(space: SpaceSpec, cap: int | None = None, *, half: bool = False) -> np.ndarray | None:
    """Extreme points of the closed unit ball of ``space`` as rows, or None.

    With ``half=True`` only one point of each antipodal pair is returned,
    which is all that is needed when maximizing an even convex function.
    The returned array is shared and read-only.
    """
    cap = enumeration_cap() if cap is None else cap
    return _vertices(space.exponent, space.dim, cap, half)


def dual_ball_vertices(space: SpaceSpec, cap: int | None = None, *, half: bool = False) -> np.ndarray | None:
    return ball_vertices(space.dual, cap, half=half)


def extreme_points(space: SpaceSpec, cap: int | None = None) -> list[Functional] | None:
    """Extreme points of the dual unit ball as functionals on ``space``; None if unavailable."""
    pts = dual_ball_vertices(space, cap)
    if pts is None:
        return None
    return [Functional(space, row) for row in pts]


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Counter-based generator for one (seed, stream...) key."""
    key = [int(seed), *(int(s) for s in stream)]
    if any(k < 0 for k in key):
        raise ValueError("seeds and stream ids must be nonnegative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def random_unit_rows(rng: np.random.Generator, count: int, space: SpaceSpec, *, dual: bool = False) -> np.ndarray:
    g = rng.standard_normal((count, space.dim))
    u = dual_exponent(space.exponent) if dual else space.exponent
    n = lp_norm(g, u, axis=1)
    n = np.where(n > 0, n, 1.0)
    return g / n[:, None]


def sample_dual_sphere(space: SpaceSpec, seed: int, count: int) -> list[Functional]:
    if count < 1:
        raise ValueError("count must be at least 1")
    rows = random_unit_rows(make_rng(seed, 0x5EED), count, space, dual=True)
    return [Functional(space, r) for r in rows]


def canonical_basis(space: SpaceSpec) -> list[Vector]:
    return [Vector(space, e) for e in np.eye(space.dim)]


def as_coords(items: Sequence[Vector] | np.ndarray, dim: int | None = None) -> np.ndarray:
    """Stack vectors (or pass through an array) into a float array of rows."""
    if isinstance(items, np.ndarray):
        arr = np.asarray(items, dtype=float)
    else:
        arr = np.array([getattr(v, "coords", v) for v in items], dtype=float)
    if dim is not None and arr.shape[-1] != dim:
        raise ValueError(f"expected rows of length {dim}, got {arr.shape[-1]}")
    return arr
