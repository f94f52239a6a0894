"""Pre-channels: linear maps on operators stored as matrices acting on vec(X).

Vectorization stacks columns, so ``vec(L @ X @ R) = (R.T kron L) @ vec(X)``.
With the Hilbert-Schmidt pairing the adjoint of a pre-channel is the
conjugate transpose of its matrix.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .operators import INF, _norm_from_singular_values, as_op, check_exponent, schatten_norm

__all__ = [
    "NormEstimate",
    "PreChannel",
    "adjoint",
    "apply",
    "commutator_generator",
    "compose",
    "from_left_right",
    "induced_norm",
    "sot_distance",
    "unvec",
    "vec",
]


def vec(X) -> np.ndarray:
    """Column-stacking vectorization of an operator."""
    return np.asarray(X).reshape(-1, order="F")


def unvec(v, dim: int) -> np.ndarray:
    return np.asarray(v).reshape((dim, dim), order="F")


class PreChannel:
    """A linear map on ``d x d`` operators, held as its ``d^2 x d^2`` matrix.

    Instances are treated as immutable: the underlying array is marked
    read-only.  ``@`` composes, ``+``/``-`` and scalar ``*`` act on the matrix.
    """

    __slots__ = ("rep", "dim")

    def __init__(self, rep, dim: int | None = None):
        rep = np.array(rep, dtype=complex)
        if rep.ndim != 2 or rep.shape[0] != rep.shape[1]:
            raise ValueError(f"pre-channel matrix must be square, got shape {rep.shape}")
        d = int(round(np.sqrt(rep.shape[0])))
        if d < 1 or d * d != rep.shape[0]:
            raise ValueError(f"pre-channel matrix size {rep.shape[0]} is not a perfect square")
        if dim is not None and dim != d:
            raise ValueError(f"pre-channel acts on dimension {d}, expected {dim}")
        if not np.all(np.isfinite(rep)):
            raise ValueError("pre-channel entries must be finite")
        rep.flags.writeable = False
        self.rep = rep
        self.dim = d

    @classmethod
    def identity(cls, dim: int) -> PreChannel:
        return cls(np.eye(dim * dim, dtype=complex))

    @classmethod
    def zero(cls, dim: int) -> PreChannel:
        return cls(np.zeros((dim * dim, dim * dim), dtype=complex))

    def _check(self, other: PreChannel) -> None:
        if not isinstance(other, PreChannel):
            raise TypeError(f"expected PreChannel, got {type(other).__name__}")
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __matmul__(self, other):
        if isinstance(other, PreChannel):
            return compose(self, other)
        return NotImplemented

    def __add__(self, other):
        self._check(other)
        return PreChannel(self.rep + other.rep)

    def __sub__(self, other):
        self._check(other)
        return PreChannel(self.rep - other.rep)

    def __neg__(self):
        return PreChannel(-self.rep)

    def __mul__(self, c):
        if np.ndim(c) != 0:
            return NotImplemented
        return PreChannel(complex(c) * self.rep)

    __rmul__ = __mul__

    def __call__(self, X) -> np.ndarray:
        return apply(self, X)

    def __repr__(self) -> str:
        return f"PreChannel(dim={self.dim})"

    def allclose(self, other: PreChannel, atol: float = 1e-12) -> bool:
        self._check(other)
        return bool(np.max(np.abs(self.rep - other.rep)) <= atol)


def apply(U: PreChannel, X) -> np.ndarray:
    X = as_op(X)
    if X.shape[0] != U.dim:
        raise ValueError(f"operator dimension {X.shape[0]} does not match pre-channel dimension {U.dim}")
    return unvec(U.rep @ vec(X), U.dim)


def compose(*channels: PreChannel) -> PreChannel:
    """``compose(U, V)(X) == U(V(X))``; accepts any number of factors."""
    if not channels:
        raise ValueError("compose needs at least one pre-channel")
    first = channels[0]
    rep = first.rep
    for V in channels[1:]:
        first._check(V)
        rep = rep @ V.rep
    return PreChannel(rep)


def adjoint(U: PreChannel) -> PreChannel:
    """Adjoint with respect to ``tr(Y^dagger X)``: the conjugate transpose."""
    return PreChannel(U.rep.conj().T)


def from_left_right(L, R) -> PreChannel:
    """The pre-channel ``X -> L @ X @ R``."""
    L = as_op(L)
    R = as_op(R, L.shape[0])
    return PreChannel(np.kron(R.T, L))


def commutator_generator(H) -> PreChannel:
    """``X -> -i [H, X]``; generates conjugation by ``exp(-iHt)``."""
    H = as_op(H)
    eye = np.eye(H.shape[0], dtype=complex)
    return PreChannel(-1j * (np.kron(eye, H) - np.kron(H.T, eye)))


class NormEstimate(NamedTuple):
    value: float
    exact: bool


def _schatten_gradient(Y: np.ndarray, q: float) -> np.ndarray:
    """Gradient of ``||Y||_q`` for the real inner product ``Re tr(G^dagger dY)``."""
    W, s, Vh = np.linalg.svd(Y)
    if s[0] == 0:
        return np.zeros_like(Y)
    if q == INF:
        weights = (s >= s[0] * (1 - 1e-12)).astype(float)
        weights /= weights.sum()
    elif q == 1:
        weights = (s > s[0] * 1e-14).astype(float)
    else:
        norm = _norm_from_singular_values(s, q)
        weights = (s / norm) ** (q - 1)
    return (W * weights) @ Vh


def _dual_attainer(G: np.ndarray, p: float) -> np.ndarray:
    """A maximizer of ``Re tr(G^dagger Z)`` over the unit Schatten p-ball."""
    W, g, Vh = np.linalg.svd(G)
    if g[0] == 0:
        return np.zeros_like(G)
    if p == 1:
        z = np.zeros_like(g)
        z[0] = 1.0
    elif p == INF:
        z = (g > g[0] * 1e-14).astype(float)
    else:
        pstar = p / (p - 1)
        z = (g / g[0]) ** (pstar - 1)
        z /= _norm_from_singular_values(z, p)
    return (W * z) @ Vh


def _ascent(U: PreChannel, p: float, q: float, X: np.ndarray) -> float:
    # Step-halved generalized power method: move toward the p-ball point that
    # maximizes the linearization of ||U X||_q, renormalize, keep improvements.
    d = U.dim
    X = X / schatten_norm(X, p)
    value = schatten_norm(apply(U, X), q)
    step = 1.0
    for _ in range(20000):
        if step < 1e-9:
            break
        grad = unvec(U.rep.conj().T @ vec(_schatten_gradient(apply(U, X), q)), d)
        target = _dual_attainer(grad, p)
        trial = (1 - step) * X + step * target
        n = schatten_norm(trial, p)
        if n == 0:
            step *= 0.5
            continue
        trial = trial / n
        trial_value = schatten_norm(apply(U, trial), q)
        if trial_value > value:
            X, value = trial, trial_value
            step = min(1.0, 2.0 * step)
        else:
            step *= 0.5
    return value


def induced_norm(
    U: PreChannel,
    p=2.0,
    q=2.0,
    *,
    restarts: int = 32,
    seed: int = 0,
    force_estimate: bool = False,
) -> NormEstimate:
    """Norm of ``U`` as a map from the Schatten p-class to the q-class.

    For ``p = q = 2`` this is the largest singular value of ``U.rep`` and is
    exact.  Other pairs are estimated from below by a generalized power method on
    ``||U X||_q`` over the unit p-sphere, best of ``restarts`` random starts.
    """
    p = check_exponent(p)
    q = check_exponent(q)
    if p == 2 and q == 2 and not force_estimate:
        return NormEstimate(float(np.linalg.norm(U.rep, 2)), True)
    rng = np.random.default_rng(seed)
    d = U.dim
    best = 0.0
    for _ in range(restarts):
        X = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        best = max(best, _ascent(U, p, q, X))
    return NormEstimate(best, False)


def sot_distance(U: PreChannel, V: PreChannel, x, q=2.0) -> float:
    """``||U x - V x||_q`` for a fixed operator ``x``."""
    U._check(V)
    return schatten_norm(apply(U, x) - apply(V, x), q)
