"""Semigroups ``exp(A t)`` of pre-channels and the product ``W_n(t)``.

``W_n(t) = exp(A_1 t/n) exp(A_2 t/n) ... exp(A_n t/n)`` with factor 1 leftmost,
so ``A_n`` acts first on an operator.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .operators import as_op
from .prob import Ensemble, expect, expect_map
from .superop import PreChannel, compose, vec

__all__ = [
    "EXPM_NORM_LIMIT",
    "TimeGrid",
    "chernoff_error",
    "chernoff_trajectory",
    "composition_W",
    "composition_moments",
    "delta",
    "expm",
    "f_term",
    "mean_semigroup",
    "subsets",
]

# Largest accepted (2,2)-norm of A t; beyond this the squaring phase loses accuracy.
EXPM_NORM_LIMIT = 32.0


@dataclass(frozen=True)
class TimeGrid:
    """Ascending time points on ``[0, T]``, both endpoints included."""

    points: tuple[float, ...]

    def __post_init__(self):
        pts = tuple(float(t) for t in self.points)
        if len(pts) < 1:
            raise ValueError("time grid needs at least one point")
        if pts[0] != 0.0:
            raise ValueError(f"time grid must start at 0, got {pts[0]}")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValueError("time grid points must be strictly ascending")
        if not all(np.isfinite(pts)):
            raise ValueError("time grid points must be finite")
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, T: float = 1.0, count: int = 65) -> TimeGrid:
        if T <= 0 or count < 2:
            raise ValueError(f"uniform grid needs T > 0 and count >= 2, got T={T}, count={count}")
        pts = np.linspace(0.0, T, count)
        pts[-1] = T
        return cls(tuple(pts))

    @property
    def T(self) -> float:
        return self.points[-1]

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.points)

    def __len__(self) -> int:
        return len(self.points)


def _expm_reps(reps: np.ndarray, times: np.ndarray) -> np.ndarray:
    """``exp(rep * t)`` for every rep and every time, shape ``(K, G, m, m)``."""
    reps = np.asarray(reps)
    times = np.asarray(times, dtype=float)
    scaled = reps[:, None, :, :] * times[None, :, None, None]
    norms = np.linalg.norm(scaled, ord=2, axis=(-2, -1))
    worst = float(norms.max()) if norms.size else 0.0
    if not np.isfinite(worst) or worst > EXPM_NORM_LIMIT:
        raise OverflowError(
            f"||A t|| = {worst:.3g} exceeds the exponential's accuracy limit {EXPM_NORM_LIMIT}; "
            "rescale the generator or shorten the horizon"
        )
    return scipy.linalg.expm(scaled)


def expm(U: PreChannel, t: float = 1.0) -> PreChannel:
    """``exp(U t)`` by scaling and squaring with a Pade approximant."""
    return PreChannel(_expm_reps(U.rep[None], np.array([t]))[0, 0])


def mean_semigroup(E: Ensemble, t: float) -> PreChannel:
    """``E exp(A t) = sum_k p_k exp(A_k t)``."""
    return expect_map(E, lambda A: expm(A, t))


def composition_W(factors: Sequence[PreChannel], t: float) -> PreChannel:
    """``exp(A_1 t/n) ... exp(A_n t/n)``, factor 1 leftmost."""
    if not factors:
        raise ValueError("composition needs at least one factor")
    n = len(factors)
    return compose(*[expm(A, t / n) for A in factors])


def delta(E: Ensemble, A_sample: PreChannel, t: float) -> PreChannel:
    """Centered factor ``exp(A t) - E exp(A t)``."""
    return expm(A_sample, t) - mean_semigroup(E, t)


def _check_positions(n: int, positions: Sequence[int]) -> tuple[int, ...]:
    pos = tuple(int(a) for a in positions)
    if any(b <= a for a, b in zip(pos, pos[1:])):
        raise ValueError(f"positions must be strictly ascending, got {pos}")
    if pos and (pos[0] < 1 or pos[-1] > n):
        raise ValueError(f"positions must lie in [1, {n}], got {pos}")
    return pos


def f_term(
    E: Ensemble,
    n: int,
    positions: Sequence[int],
    deltas: Sequence[PreChannel],
    t: float,
    *,
    mean: PreChannel | None = None,
) -> PreChannel:
    """Word ``M^(a1-1) D_1 M^(a2-a1-1) ... D_k M^(n-ak)`` with ``M = E exp(A t)``.

    ``deltas[i]`` is placed at ``positions[i]`` (1-based).  Pass ``mean`` to
    reuse a precomputed ``mean_semigroup(E, t)``.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    pos = _check_positions(n, positions)
    if len(deltas) != len(pos):
        raise ValueError(f"{len(pos)} positions but {len(deltas)} delta factors")
    M = mean_semigroup(E, t) if mean is None else mean
    slots = dict(zip(pos, deltas))
    rep = np.eye(M.rep.shape[0], dtype=complex)
    for j in range(1, n + 1):
        rep = rep @ (slots[j].rep if j in slots else M.rep)
    return PreChannel(rep)


def subsets(n: int):
    """All ascending tuples drawn from ``1..n``, including the empty one."""
    for k in range(n + 1):
        yield from itertools.combinations(range(1, n + 1), k)


def composition_moments(E: Ensemble, n: int, t: float) -> tuple[PreChannel, PreChannel]:
    """Exact ``E W_n(t)`` and ``E W_n(t)^* W_n(t)`` for i.i.d. factors.

    Uses ``E W_n = (E exp(A t/n))^n`` and the layer recursion
    ``Y -> sum_k p_k B_k^* Y B_k`` applied ``n`` times to the identity.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    B = _expm_reps(E.reps, np.array([t / n]))[:, 0]
    mean = np.tensordot(E.probs, B, axes=1)
    first = np.linalg.matrix_power(mean, n)
    Bh = np.conj(np.swapaxes(B, -1, -2))
    Y = np.eye(B.shape[-1], dtype=complex)
    for _ in range(n):
        Y = np.einsum("k,kij,jl,klm->im", E.probs, Bh, Y, B)
    return PreChannel(first), PreChannel(Y)


def chernoff_trajectory(E: Ensemble, x, n: int, grid: TimeGrid) -> np.ndarray:
    """``||(exp(E[A] t) - (E exp(A t/n))^n) x||_2`` at every grid time."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    x = as_op(x, E.dim)
    times = grid.array
    target = _expm_reps(expect(E).rep[None], times)[0]
    mean = np.tensordot(E.probs, _expm_reps(E.reps, times / n), axes=1)
    approx = np.linalg.matrix_power(mean, n)
    return np.linalg.norm((target - approx) @ vec(x), axis=-1)


def chernoff_error(E: Ensemble, x, n: int, grid: TimeGrid) -> float:
    """Sample-free gap ``max_t ||(exp(E[A] t) - E W_n(t)) x||_2``."""
    return float(chernoff_trajectory(E, x, n, grid).max())
