"""Run-wide knobs shared by the verification routines and the CLI."""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

from .expr import Sampled

SEED_ENV = "JACOBI_KIT_SEED"


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    samples: int = 200
    tol: float = 1e-9
    trials: int = 50
    deg: int = 3
    machine: bool = False

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("sample count must be at least 1")
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.deg < 0:
            raise ValueError("degree bound must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")

    @property
    def sampled(self) -> Sampled:
        return Sampled(self.samples, self.seed, self.tol)

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)


def default_seed() -> int:
    value = os.environ.get(SEED_ENV)
    return int(value) if value else 0
