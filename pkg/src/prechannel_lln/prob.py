"""Finite-support random pre-channels.

Every expectation is an exact finite sum over the atoms, so the identities
for integrals of random pre-channels can be checked to rounding error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .operators import as_op, check_exponent, dual_exponent, pairing, schatten_norm
from .superop import PreChannel, adjoint, apply, compose

__all__ = [
    "PROB_TOL",
    "Ensemble",
    "SeedSpec",
    "centered",
    "chebyshev_bound",
    "deviation_prob_exact",
    "expect",
    "expect_map",
    "product_ensemble",
    "sample_iid",
    "sample_indices",
    "second_moment_form",
    "variance_superop",
]

PROB_TOL = 1e-12


@dataclass(frozen=True)
class Ensemble:
    """A discrete law: ``channels[k]`` occurs with probability ``probs[k]``."""

    channels: tuple[PreChannel, ...]
    probs: np.ndarray
    generator: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        channels = tuple(self.channels)
        if not channels:
            raise ValueError("an ensemble needs at least one atom")
        dim = channels[0].dim
        for ch in channels:
            if not isinstance(ch, PreChannel):
                raise TypeError(f"atoms must be PreChannel, got {type(ch).__name__}")
            if ch.dim != dim:
                raise ValueError(f"atoms have mixed dimensions {dim} and {ch.dim}")
        probs = np.array(self.probs, dtype=float).reshape(-1)
        if probs.shape[0] != len(channels):
            raise ValueError(f"{len(channels)} atoms but {probs.shape[0]} probabilities")
        if not np.all(np.isfinite(probs)) or np.any(probs <= 0):
            raise ValueError("probabilities must be finite and strictly positive")
        total = float(probs.sum())
        if abs(total - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1 (tolerance {PROB_TOL})")
        probs.flags.writeable = False
        object.__setattr__(self, "channels", channels)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, channels: Sequence[PreChannel], generator: dict | None = None) -> Ensemble:
        k = len(channels)
        return cls(tuple(channels), np.full(k, 1.0 / k), generator)

    @property
    def dim(self) -> int:
        return self.channels[0].dim

    @property
    def size(self) -> int:
        return len(self.channels)

    @property
    def reps(self) -> np.ndarray:
        """Stacked atom matrices, shape ``(size, d^2, d^2)``."""
        return np.stack([ch.rep for ch in self.channels])

    def __len__(self) -> int:
        return len(self.channels)

    def __iter__(self):
        return iter(zip(self.channels, self.probs))


def expect(E: Ensemble) -> PreChannel:
    return PreChannel(np.tensordot(E.probs, E.reps, axes=1))


def expect_map(E: Ensemble, f: Callable[[PreChannel], PreChannel]) -> PreChannel:
    """Expectation of ``f(A)``: ``sum_k p_k f(A_k)``."""
    images = [f(ch) for ch in E.channels]
    return PreChannel(np.tensordot(E.probs, np.stack([U.rep for U in images]), axes=1))


def centered(E: Ensemble) -> Ensemble:
    """The law of ``A - E[A]``; its expectation vanishes."""
    mean = expect(E)
    return Ensemble(tuple(ch - mean for ch in E.channels), E.probs)


def variance_superop(E: Ensemble) -> PreChannel:
    """``E[(A - EA)^* (A - EA)]``, positive semidefinite under the HS pairing."""
    mean = expect(E)
    return expect_map(E, lambda A: compose(adjoint(A - mean), A - mean))


def product_ensemble(ensembles: Sequence[Ensemble]) -> Ensemble:
    """Law of ``A_1 A_2 ... A_m`` for independent ``A_i ~ ensembles[i]``.

    The support is the full product of supports (atoms are not merged).
    """
    channels: list[PreChannel] = []
    probs: list[float] = []
    grids = np.meshgrid(*[np.arange(E.size) for E in ensembles], indexing="ij")
    for idx in zip(*(g.reshape(-1) for g in grids)):
        factors = [E.channels[i] for E, i in zip(ensembles, idx)]
        channels.append(compose(*factors))
        probs.append(float(np.prod([E.probs[i] for E, i in zip(ensembles, idx)])))
    probs_arr = np.asarray(probs)
    # Products of probabilities can drift from 1 by more than ulps for large supports.
    return Ensemble(tuple(channels), probs_arr / probs_arr.sum())


@dataclass(frozen=True)
class SeedSpec:
    """Root seed plus counter-based streams keyed by integer labels.

    ``stream(*label)`` returns a Philox generator whose key depends only on
    the root seed and the label, so a draw never depends on which worker
    computes it or in what order.
    """

    root: int = 0

    def __post_init__(self):
        root = int(self.root)
        if not 0 <= root < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {root}")
        object.__setattr__(self, "root", root)

    def stream(self, *label: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.root, spawn_key=tuple(int(v) for v in label))
        return np.random.Generator(np.random.Philox(ss))


def sample_indices(E: Ensemble, n: int, seed: SeedSpec, trial: int = 0) -> np.ndarray:
    """Atom indices of the factors ``1..n`` for trial ``trial``.

    Factor ``j`` uses the ``j``-th uniform of the trial stream, mapped through
    the cumulative distribution.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    return _draw_indices(E.probs, n, seed, trial)


def _draw_indices(probs: np.ndarray, n: int, seed: SeedSpec, trial: int) -> np.ndarray:
    u = seed.stream(n, trial).random(n)
    return np.minimum(np.searchsorted(np.cumsum(probs), u, side="right"), len(probs) - 1)


def sample_iid(E: Ensemble, n: int, seed: SeedSpec, trial: int = 0) -> list[PreChannel]:
    return [E.channels[i] for i in sample_indices(E, n, seed, trial)]


def deviation_prob_exact(E: Ensemble, x, eps: float) -> float:
    """``Pr{ ||(A - EA) x||_2 > eps }`` by enumerating the support."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    x = as_op(x, E.dim)
    mean_x = apply(expect(E), x)
    prob = 0.0
    for ch, pk in E:
        if schatten_norm(apply(ch, x) - mean_x, 2) > eps:
            prob += pk
    return min(prob, 1.0)


def chebyshev_bound(E: Ensemble, x, eps: float, p=2.0) -> float:
    """Chebyshev-type bound ``||(var A) x||_{p*} ||x||_p / eps^2`` for ``1 <= p <= 2``."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    p = check_exponent(p)
    if p > 2:
        raise ValueError(f"Chebyshev bound needs 1 <= p <= 2, got {p}")
    x = as_op(x, E.dim)
    vx = apply(variance_superop(E), x)
    return schatten_norm(vx, dual_exponent(p)) * schatten_norm(x, p) / eps**2


def second_moment_form(E: Ensemble, x) -> tuple[complex, float]:
    """Both sides of ``<(var A) x, x> = E ||(A - EA) x||_2^2``."""
    x = as_op(x, E.dim)
    lhs = pairing(apply(variance_superop(E), x), x)
    mean_x = apply(expect(E), x)
    rhs = sum(pk * schatten_norm(apply(ch, x) - mean_x, 2) ** 2 for ch, pk in E)
    return lhs, float(rhs)
