"""Dense operators on a d-dimensional Hilbert space and their Schatten norms.

An operator is a plain ``(d, d)`` complex numpy array.  Schatten exponents are
floats in ``[1, inf]`` with ``math.inf`` standing for the operator norm.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "INF",
    "RANK_TOL",
    "as_op",
    "check_exponent",
    "dual_exponent",
    "identity",
    "pairing",
    "rank_one",
    "schatten_norm",
    "singular_values",
]

INF = math.inf

# Singular values below RANK_TOL * sigma_max count as zero where rank matters.
RANK_TOL = 1e-14


def as_op(X, dim: int | None = None) -> np.ndarray:
    """Validate ``X`` as a square, finite operator and return it as complex."""
    X = np.asarray(X, dtype=complex)
    if X.ndim != 2 or X.shape[0] != X.shape[1] or X.shape[0] < 1:
        raise ValueError(f"operator must be a non-empty square array, got shape {X.shape}")
    if dim is not None and X.shape[0] != dim:
        raise ValueError(f"operator has dimension {X.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(X)):
        raise ValueError("operator entries must be finite")
    return X


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def rank_one(u, v=None) -> np.ndarray:
    """The rank-one operator ``|u><v|`` (``v`` defaults to ``u``)."""
    u = np.asarray(u, dtype=complex)
    v = u if v is None else np.asarray(v, dtype=complex)
    return np.outer(u, v.conj())


def check_exponent(p) -> float:
    p = float(p)
    if math.isnan(p) or p < 1:
        raise ValueError(f"Schatten exponent must lie in [1, inf], got {p}")
    return p


def dual_exponent(p) -> float:
    """Return ``q`` with ``1/p + 1/q = 1``; 1 and inf are exchanged."""
    p = check_exponent(p)
    if p == 1:
        return INF
    if p == INF:
        return 1.0
    return p / (p - 1)


def singular_values(X) -> np.ndarray:
    """All singular values of ``X`` in descending order."""
    X = as_op(X)
    try:
        s = np.linalg.svd(X, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"singular value decomposition failed for a {X.shape[0]}x{X.shape[0]} operator"
        ) from exc
    return s


def _norm_from_singular_values(s: np.ndarray, p: float) -> np.ndarray:
    # Works along the last axis so batched callers can share it.
    if p == INF:
        return s[..., 0]
    if p == 1:
        return s.sum(axis=-1)
    smax = s[..., :1]
    safe = np.where(smax > 0, smax, 1.0)
    # Scale by sigma_max to avoid overflow/underflow in s**p.
    return safe[..., 0] * np.sum((s / safe) ** p, axis=-1) ** (1.0 / p)


def schatten_norm(X, p=2.0) -> float:
    """Schatten p-norm: the l_p norm of the singular values of ``X``."""
    p = check_exponent(p)
    return float(_norm_from_singular_values(singular_values(X), p))


def pairing(Y, X) -> complex:
    """Hilbert-Schmidt pairing ``tr(Y^dagger X)``, conjugate-linear in ``Y``."""
    Y = as_op(Y)
    X = as_op(X)
    if Y.shape != X.shape:
        raise ValueError(f"dimension mismatch: {Y.shape[0]} vs {X.shape[0]}")
    return complex(np.vdot(Y, X))
