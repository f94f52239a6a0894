"""Experiment configuration."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import as_op, check_exponent, rank_one
from .prob import Ensemble, SeedSpec
from .semigroup import TimeGrid

__all__ = ["ExperimentConfig", "default_test_vector"]


def default_test_vector(dim: int) -> np.ndarray:
    """The rank-one projector onto the normalized all-ones vector."""
    u = np.ones(dim) / np.sqrt(dim)
    return rank_one(u)


@dataclass(frozen=True)
class ExperimentConfig:
    ensemble: Ensemble
    x: np.ndarray
    grid: TimeGrid = field(default_factory=TimeGrid.uniform)
    n_schedule: tuple[int, ...] = (8, 32, 128, 512)
    trials: int = 200
    eps: float = 0.1
    p: float = 2.0
    seed: SeedSpec = field(default_factory=SeedSpec)
    # Exhaustive checks run by the verify command.
    verify_n: tuple[int, ...] = (1, 2, 3)
    verify_t: tuple[float, ...] = (0.25, 1.0)
    # Schatten exponents for the T_p convergence probe.
    probe_p: tuple[float, ...] = (1.0, 4.0 / 3.0, 1.5, 2.0)

    def __post_init__(self):
        object.__setattr__(self, "x", as_op(self.x, self.ensemble.dim))
        sched = tuple(int(n) for n in self.n_schedule)
        if not sched or sched[0] < 1 or any(b <= a for a, b in zip(sched, sched[1:])):
            raise ValueError(f"n_schedule must be strictly ascending positive integers, got {sched}")
        object.__setattr__(self, "n_schedule", sched)
        if int(self.trials) < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        object.__setattr__(self, "trials", int(self.trials))
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        p = check_exponent(self.p)
        if p > 2:
            raise ValueError(f"p must lie in [1, 2], got {p}")
        object.__setattr__(self, "p", p)
        if not isinstance(self.seed, SeedSpec):
            object.__setattr__(self, "seed", SeedSpec(self.seed))
        object.__setattr__(self, "verify_n", tuple(int(n) for n in self.verify_n))
        object.__setattr__(self, "verify_t", tuple(float(t) for t in self.verify_t))
        probe = tuple(check_exponent(q) for q in self.probe_p)
        if any(q > 2 for q in probe):
            raise ValueError(f"probe exponents must lie in [1, 2], got {probe}")
        object.__setattr__(self, "probe_p", probe)

    @property
    def dim(self) -> int:
        return self.ensemble.dim
