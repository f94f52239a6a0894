"""Ensemble generators.

Each family is a function ``family(dim, seed, **params) -> Ensemble`` that
records ``{"family", "params", "seed"}`` so the ensemble can be regenerated.
"""

from __future__ import annotations

import numpy as np

from .operators import as_op
from .prob import Ensemble
from .superop import PreChannel, commutator_generator, from_left_right

__all__ = [
    "FAMILIES",
    "SHIPPED_SEED",
    "generate",
    "ginibre",
    "lindblad_like",
    "random_hermitian",
    "random_operator",
    "shipped",
    "two_point",
    "uniform_atoms",
]

SHIPPED_SEED = 20240601


def random_operator(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Standard complex Gaussian (Ginibre) matrix."""
    return (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    G = random_operator(rng, dim)
    return (G + G.conj().T) / 2


def _rescaled(rep: np.ndarray, budget: float) -> np.ndarray:
    s = np.linalg.norm(rep, 2)
    return rep if s == 0 else rep * (budget / s)


def _probs(rng: np.random.Generator, k: int, random_probs: bool) -> np.ndarray:
    if not random_probs:
        return np.full(k, 1.0 / k)
    w = rng.dirichlet(np.ones(k))
    # Dirichlet draws can be arbitrarily close to 0; keep every atom visible.
    w = np.maximum(w, 1e-3)
    return w / w.sum()


def two_point(dim: int = 2, seed: int = 0, a: float = 1.0, rep=None) -> Ensemble:
    """The symmetric law ``{+A, -A}`` with probability 1/2 each.

    ``A`` is ``rep`` when given; otherwise ``a`` for ``dim = 1`` and a
    Ginibre direction of (2,2)-norm ``a`` for ``dim >= 2``.
    """
    if a < 0:
        raise ValueError(f"two-point scale must be nonnegative, got {a}")
    if rep is not None:
        A = PreChannel(rep, dim)
    elif dim == 1:
        A = PreChannel([[a]])
    else:
        rng = np.random.default_rng(seed)
        G = random_operator(rng, dim * dim)
        A = PreChannel(_rescaled(G, a))
    gen = {"family": "two-point", "params": {"dim": dim, "a": a}, "seed": seed}
    return Ensemble((A, -A), np.array([0.5, 0.5]), gen)


def ginibre(
    dim: int = 2, seed: int = 0, atoms: int = 3, budget: float = 1.0, random_probs: bool = False
) -> Ensemble:
    """Atoms with i.i.d. complex Gaussian matrix entries, each rescaled to (2,2)-norm ``budget``."""
    if atoms < 1 or budget <= 0:
        raise ValueError("ginibre needs atoms >= 1 and budget > 0")
    rng = np.random.default_rng(seed)
    channels = tuple(PreChannel(_rescaled(random_operator(rng, dim * dim), budget)) for _ in range(atoms))
    gen = {
        "family": "ginibre",
        "params": {"dim": dim, "atoms": atoms, "budget": budget, "random_probs": random_probs},
        "seed": seed,
    }
    return Ensemble(channels, _probs(rng, atoms, random_probs), gen)


def lindblad_generator(H, L) -> PreChannel:
    """``X -> -i[H, X] + L X L^dagger - (L^dagger L X + X L^dagger L) / 2``."""
    H = as_op(H)
    L = as_op(L, H.shape[0])
    LdL = L.conj().T @ L
    eye = np.eye(H.shape[0], dtype=complex)
    dissipator = (
        from_left_right(L, L.conj().T).rep
        - 0.5 * from_left_right(LdL, eye).rep
        - 0.5 * from_left_right(eye, LdL).rep
    )
    return PreChannel(commutator_generator(H).rep + dissipator)


def lindblad_like(
    dim: int = 2, seed: int = 0, atoms: int = 3, budget: float = 1.0, random_probs: bool = False
) -> Ensemble:
    """Atoms are Lindblad generators with random Hermitian ``H`` and random ``L``,
    each rescaled to (2,2)-norm ``budget``."""
    if atoms < 1 or budget <= 0:
        raise ValueError("lindblad-like needs atoms >= 1 and budget > 0")
    rng = np.random.default_rng(seed)
    channels = []
    for _ in range(atoms):
        G = lindblad_generator(random_hermitian(rng, dim), random_operator(rng, dim))
        channels.append(PreChannel(_rescaled(G.rep, budget)))
    gen = {
        "family": "lindblad-like",
        "params": {"dim": dim, "atoms": atoms, "budget": budget, "random_probs": random_probs},
        "seed": seed,
    }
    return Ensemble(tuple(channels), _probs(rng, atoms, random_probs), gen)


def uniform_atoms(reps, probs=None, seed: int = 0) -> Ensemble:
    """User-supplied atom matrices; uniform probabilities unless ``probs`` is given."""
    channels = tuple(PreChannel(r) for r in reps)
    probs = np.full(len(channels), 1.0 / len(channels)) if probs is None else np.asarray(probs, float)
    gen = {"family": "uniform-atoms", "params": {"atoms": len(channels)}, "seed": seed}
    return Ensemble(channels, probs, gen)


FAMILIES = {
    "two-point": two_point,
    "ginibre": ginibre,
    "lindblad-like": lindblad_like,
    "uniform-atoms": uniform_atoms,
}


def generate(family: str, params: dict | None = None, seed: int = 0) -> Ensemble:
    try:
        factory = FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown ensemble family {family!r}; known: {sorted(FAMILIES)}") from None
    params = dict(params or {})
    try:
        E = factory(seed=seed, **params)
    except TypeError as exc:
        raise ValueError(f"invalid parameters for {family!r}: {exc}") from None
    return E


def shipped(family: str = "two-point", dim: int = 2) -> Ensemble:
    """The fixed reference ensembles used by the demos and the acceptance tests."""
    if family == "two-point":
        return two_point(dim=dim, seed=SHIPPED_SEED, a=0.5)
    if family == "ginibre":
        return ginibre(dim=dim, seed=SHIPPED_SEED, atoms=3, budget=1.0)
    if family == "lindblad-like":
        return lindblad_like(dim=dim, seed=SHIPPED_SEED, atoms=3, budget=1.0)
    raise ValueError(f"no shipped ensemble for family {family!r}")
