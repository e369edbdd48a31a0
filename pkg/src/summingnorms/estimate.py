"""Return type shared by every norm computation."""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field
from typing import Any


class EstimateKind(str, enum.Enum):
    EXACT = "exact"
    LOWER = "lower-bound"
    UPPER = "upper-bound"


@dataclass(frozen=True)
class Budget:
    """Search effort for iterative estimators.

    Restart ``i`` always uses the random stream keyed by ``(seed, ..., i)``,
    so a larger ``restarts`` runs a superset of the smaller run's starts.
    """

    restarts: int = 16
    iters: int = 200
    seed: int = 0
    m_max: int = 4
    atoms: int | None = None
    enum_cap: int | None = None

    def __post_init__(self) -> None:
        for name in ("restarts", "iters", "m_max"):
            if getattr(self, name) < 1:
                raise ValueError(f"budget {name} must be positive")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if self.atoms is not None and self.atoms < 1:
            raise ValueError("atom count must be positive")

    def replace(self, **changes: Any) -> "Budget":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class NormEstimate:
    value: float
    kind: EstimateKind
    witness: Any = None
    budget: Budget | None = None
    certified: bool = True
    info: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.value >= 0:
            raise ValueError(f"norm estimate must be nonnegative, got {self.value}")

    @property
    def is_exact(self) -> bool:
        return self.kind is EstimateKind.EXACT
