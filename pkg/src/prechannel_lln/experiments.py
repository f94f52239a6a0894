"""Monte-Carlo law-of-large-numbers sweeps and exhaustive identity checks."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import ExperimentConfig
from .operators import (
    _norm_from_singular_values,
    as_op,
    check_exponent,
    dual_exponent,
    rank_one,
    schatten_norm,
)
from .prob import (
    Ensemble,
    SeedSpec,
    _draw_indices,
    chebyshev_bound,
    deviation_prob_exact,
    expect,
    expect_map,
    product_ensemble,
    second_moment_form,
)
from .semigroup import (
    TimeGrid,
    _expm_reps,
    chernoff_error,
    expm,
    f_term,
    subsets,
)
from .superop import PreChannel, adjoint, apply, compose, vec

__all__ = [
    "DIAGONAL_TOL",
    "ENUMERATION_GUARD",
    "LINEAR_TOL",
    "NONLINEAR_TOL",
    "DiagonalReport",
    "EnumerationGuardError",
    "LemmaReport",
    "ProbeResult",
    "SweepRecord",
    "SweepResult",
    "conjecture_probe",
    "estimate_rate",
    "nearest_rank",
    "run_lln_sweep",
    "run_lln_trial",
    "sweep_deviations",
    "verify_diagonal_identity",
    "verify_lemma_suite",
    "w_n_ensemble",
]

LINEAR_TOL = 1e-12
NONLINEAR_TOL = 1e-10
DIAGONAL_TOL = 1e-10
ENUMERATION_GUARD = 10**6
# Medians at or below this are rounding noise; a log-log fit through them is meaningless.
DEGENERATE_MEDIAN = 1e-12
LEMMA_MODES = ("integration", "adjoint", "superop", "independence", "chebyshev")
CHEBYSHEV_EXPONENTS = (1.0, 4.0 / 3.0, 1.5, 2.0)


class EnumerationGuardError(ValueError):
    """An exhaustive enumeration would exceed ``ENUMERATION_GUARD`` terms."""


def nearest_rank(sorted_values: np.ndarray, q: float) -> float:
    """Nearest-rank quantile of an ascending array (``q`` in ``(0, 1]``)."""
    m = len(sorted_values)
    rank = max(1, math.ceil(q * m))
    return float(sorted_values[rank - 1])


# --------------------------------------------------------------------------
# Monte-Carlo trials

def _trial_block(args) -> np.ndarray:
    """Sup-deviations for a block of trials; module-level so workers can pickle it."""
    factors, target, vx, probs, root, n, trials, norms, dim = args
    seed = SeedSpec(root)
    out = np.empty((len(trials), len(norms)))
    for row, trial in enumerate(trials):
        idx = _draw_indices(probs, n, seed, trial)
        v = np.broadcast_to(vx, target.shape)[..., None]
        for k in idx[::-1]:
            v = factors[k] @ v
        diff = v[..., 0] - target
        for col, q in enumerate(norms):
            if q == 2:
                per_t = np.linalg.norm(diff, axis=-1)
            else:
                # Column-stacked vectors reshape to transposes; singular values agree.
                s = np.linalg.svd(diff.reshape(-1, dim, dim), compute_uv=False)
                per_t = _norm_from_singular_values(s, q)
            out[row, col] = per_t.max()
    return out


def sweep_deviations(
    E: Ensemble,
    x,
    n: int,
    grid: TimeGrid,
    seed: SeedSpec,
    trials: int | Sequence[int],
    norms: Sequence[float] = (2.0,),
    workers: int = 1,
) -> np.ndarray:
    """``max_t ||(W_n(t) - exp(E[A] t)) x||_q`` per trial and per norm.

    Returns an array of shape ``(len(trials), len(norms))``.  Trial ``i`` always
    draws its factors from stream ``(n, i)``, so the values do not depend on
    ``workers``.
    """
    x = as_op(x, E.dim)
    trial_ids = list(range(trials)) if isinstance(trials, int) else [int(i) for i in trials]
    norms = tuple(check_exponent(q) for q in norms)
    times = grid.array
    factors = _expm_reps(E.reps, times / n)
    vx = vec(x)
    target = _expm_reps(expect(E).rep[None], times)[0] @ vx
    common = (factors, target, vx, np.asarray(E.probs), seed.root, n)
    if workers <= 1 or len(trial_ids) < 2:
        return _trial_block(common + (trial_ids, norms, E.dim))
    chunks = [c.tolist() for c in np.array_split(trial_ids, min(workers * 4, len(trial_ids)))]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        blocks = list(pool.map(_trial_block, [common + (c, norms, E.dim) for c in chunks if c]))
    return np.concatenate(blocks, axis=0)


def run_lln_trial(E: Ensemble, x, n: int, grid: TimeGrid, seed: SeedSpec, trial: int = 0) -> float:
    """One draw of ``max_t ||(W_n(t) - exp(E[A] t)) x||_2``."""
    return float(sweep_deviations(E, x, n, grid, seed, [trial])[0, 0])


# --------------------------------------------------------------------------
# Sweeps

def _variance_bound_on_grid(E: Ensemble, x: np.ndarray, n: int, grid: TimeGrid, eps: float, p: float) -> float:
    """``max_t ||(var W_n(t)) x||_{p*} ||x||_p / eps^2`` with exact moments."""
    times = grid.array
    B = _expm_reps(E.reps, times / n)  # (K, G, m, m)
    probs = np.asarray(E.probs)
    mean = np.linalg.matrix_power(np.tensordot(probs, B, axes=1), n)
    Bh = np.conj(np.swapaxes(B, -1, -2))
    Y = np.broadcast_to(np.eye(B.shape[-1], dtype=complex), mean.shape).copy()
    for _ in range(n):
        Y = np.einsum("k,kgij,gjl,kglm->gim", probs, Bh, Y, B)
    var = Y - np.conj(np.swapaxes(mean, -1, -2)) @ mean
    vx = var @ vec(x)
    d = E.dim
    s = np.linalg.svd(vx.reshape(-1, d, d), compute_uv=False)
    pstar = dual_exponent(p)
    return float(_norm_from_singular_values(s, pstar).max() * schatten_norm(x, p) / eps**2)


@dataclass(frozen=True)
class SweepRecord:
    n: int
    median: float
    q90: float
    max: float
    exceedance: float
    chernoff_error: float
    bound: float


@dataclass
class SweepResult:
    records: list[SweepRecord]
    slope: float | None
    config_hash: str
    seed: int
    eps: float
    trials: int
    deviations: dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    CSV_COLUMNS = ("n", "median", "q90", "max", "exceedance", "chernoff_error", "bound", "slope")

    def medians(self) -> np.ndarray:
        return np.array([r.median for r in self.records])

    def csv_rows(self) -> list[list]:
        slope = "nan" if self.slope is None else self.slope
        return [
            [r.n, r.median, r.q90, r.max, r.exceedance, r.chernoff_error, r.bound, slope]
            for r in self.records
        ]

    def to_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "seed": self.seed,
            "eps": self.eps,
            "trials": self.trials,
            "slope": self.slope,
            "records": [r.__dict__ for r in self.records],
            "deviations": {str(n): v.tolist() for n, v in self.deviations.items()},
        }


def _summarize(n: int, values: np.ndarray, eps: float, chern: float, bound: float) -> SweepRecord:
    s = np.sort(values)
    return SweepRecord(
        n=n,
        median=nearest_rank(s, 0.5),
        q90=nearest_rank(s, 0.9),
        max=float(s[-1]),
        exceedance=float(np.count_nonzero(s > eps)) / len(s),
        chernoff_error=chern,
        bound=bound,
    )


def run_lln_sweep(config: ExperimentConfig, workers: int = 1) -> SweepResult:
    """Trials for every ``n`` in the schedule plus the exact Chernoff-side gap."""
    from .serialization import config_digest

    E, x, grid = config.ensemble, config.x, config.grid
    records = []
    deviations = {}
    for n in config.n_schedule:
        values = sweep_deviations(E, x, n, grid, config.seed, config.trials, (2.0,), workers)[:, 0]
        deviations[n] = values
        records.append(
            _summarize(
                n,
                values,
                config.eps,
                chernoff_error(E, x, n, grid),
                _variance_bound_on_grid(E, x, n, grid, config.eps, config.p),
            )
        )
    result = SweepResult(
        records=records,
        slope=None,
        config_hash=config_digest(config),
        seed=config.seed.root,
        eps=config.eps,
        trials=config.trials,
        deviations=deviations,
    )
    result.slope = estimate_rate(result)
    return result


def estimate_rate(sweep: SweepResult) -> float | None:
    """Least-squares slope of log(median) against log(n); ``None`` if not applicable."""
    ns = np.array([r.n for r in sweep.records], dtype=float)
    med = sweep.medians()
    if len(ns) < 3 or np.any(med <= DEGENERATE_MEDIAN) or not np.all(np.isfinite(med)):
        return None
    return float(np.polyfit(np.log(ns), np.log(med), 1)[0])


@dataclass
class ProbeResult:
    p: float
    n_schedule: tuple[int, ...]
    medians: np.ndarray
    deviations: dict[int, np.ndarray] = field(repr=False)
    label: str = "empirical evidence only"

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "label": self.label,
            "n_schedule": list(self.n_schedule),
            "medians": self.medians.tolist(),
        }


def conjecture_probe(
    E: Ensemble,
    x,
    n_schedule: Sequence[int],
    grid: TimeGrid,
    p,
    seed: SeedSpec,
    trials: int = 200,
    workers: int = 1,
) -> ProbeResult:
    """Median ``max_t ||(W_n(t) - exp(E[A] t)) x||_p`` per ``n``; no pass/fail."""
    p = check_exponent(p)
    if p > 2:
        raise ValueError(f"probe exponent must lie in [1, 2], got {p}")
    deviations = {}
    medians = []
    for n in n_schedule:
        values = sweep_deviations(E, x, n, grid, seed, trials, (p,), workers)[:, 0]
        deviations[int(n)] = values
        medians.append(nearest_rank(np.sort(values), 0.5))
    return ProbeResult(p, tuple(int(n) for n in n_schedule), np.array(medians), deviations)


# --------------------------------------------------------------------------
# Exact identities

@dataclass(frozen=True)
class LemmaReport:
    mode: str
    residual: float
    threshold: float
    passed: bool
    detail: str = ""


def _basis(dim: int):
    for i in range(dim):
        for j in range(dim):
            X = np.zeros((dim, dim), dtype=complex)
            X[i, j] = 1.0
            yield X


def _max_entry(U: PreChannel) -> float:
    return float(np.max(np.abs(U.rep)))


def _is_centered(E: Ensemble) -> bool:
    scale = max(1.0, max(_max_entry(ch) for ch in E.channels))
    return _max_entry(expect(E)) <= LINEAR_TOL * scale


def verify_lemma_suite(E: Ensemble, E2: Ensemble | None = None, mode: str = "integration", x=None) -> LemmaReport:
    """Compute both sides of one identity by exact enumeration.

    ``integration``: ``(EA) X = E(A X)`` on an operator basis.
    ``adjoint``: ``E A^* = (E A)^*``.
    ``superop``: ``E B^* A B = 0`` for centered ``A ~ E`` and ``B ~ E2``.
    ``independence``: ``E(A_1 ... A_m) = (E A_1) ... (E A_m)`` for alternating
    factors from ``E`` and ``E2``, ``m = 2, 3, 4``.
    ``chebyshev``: ``<(var A) x, x> = E||(A - EA) x||_2^2`` and the bound
    dominating the exact deviation probability.
    """
    E2 = E if E2 is None else E2
    if mode == "integration":
        mean = expect(E)
        res = 0.0
        for X in _basis(E.dim):
            rhs = sum(pk * apply(ch, X) for ch, pk in E)
            res = max(res, float(np.max(np.abs(apply(mean, X) - rhs))))
        return LemmaReport(mode, res, LINEAR_TOL, res <= LINEAR_TOL)

    if mode == "adjoint":
        res = _max_entry(expect_map(E, adjoint) - adjoint(expect(E)))
        return LemmaReport(mode, res, LINEAR_TOL, res <= LINEAR_TOL)

    if mode == "superop":
        if not _is_centered(E):
            raise ValueError("superop mode needs a centered ensemble (E[A] = 0) as the first argument")
        total = np.zeros_like(E.channels[0].rep)
        for B, qj in E2:
            Bh = adjoint(B)
            for A, pk in E:
                total = total + (pk * qj) * compose(Bh, A, B).rep
        res = float(np.max(np.abs(total)))
        return LemmaReport(mode, res, NONLINEAR_TOL, res <= NONLINEAR_TOL)

    if mode == "independence":
        res = 0.0
        for m in (2, 3, 4):
            laws = [E if i % 2 == 0 else E2 for i in range(m)]
            lhs = expect(product_ensemble(laws))
            rhs = compose(*[expect(L) for L in laws])
            res = max(res, _max_entry(lhs - rhs))
        return LemmaReport(mode, res, NONLINEAR_TOL, res <= NONLINEAR_TOL)

    if mode == "chebyshev":
        x = rank_one(np.eye(E.dim)[0]) if x is None else as_op(x, E.dim)
        lhs, rhs = second_moment_form(E, x)
        res = abs(lhs - rhs)
        rms = math.sqrt(rhs) if rhs > 0 else 1.0
        violations = 0
        for factor in np.linspace(0.1, 3.0, 10):
            eps = factor * rms
            exact = deviation_prob_exact(E, x, eps)
            for p in CHEBYSHEV_EXPONENTS:
                if exact > chebyshev_bound(E, x, eps, p):
                    violations += 1
        passed = res <= NONLINEAR_TOL and violations == 0
        return LemmaReport(mode, res, NONLINEAR_TOL, passed, f"{violations} dominance violations")

    raise ValueError(f"unknown lemma mode {mode!r}; choose from {LEMMA_MODES}")


def w_n_ensemble(E: Ensemble, n: int, t: float) -> Ensemble:
    """The law of ``W_n(t)`` over the full product support (size ``|E|^n``)."""
    if E.size**n > ENUMERATION_GUARD:
        raise EnumerationGuardError(f"{E.size}^{n} outcomes exceed the guard {ENUMERATION_GUARD}")
    factors = Ensemble(tuple(expm(A, t / n) for A in E.channels), E.probs)
    return product_ensemble([factors] * n)


@dataclass(frozen=True)
class DiagonalReport:
    n: int
    t: float
    residual: float
    cross_max: float
    terms: int
    passed: bool


def verify_diagonal_identity(E: Ensemble, n: int, t: float, cross_terms: bool = True) -> DiagonalReport:
    """``E W_n^* W_n`` versus ``sum_a E F_a^* F_a`` by enumeration over ``support^n``.

    The F-words use ``t/n`` for both the mean semigroup and the centered
    factors.  With ``cross_terms`` the largest ``||E F_a^* F_b||`` over
    ``a != b`` is reported too.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    terms = E.size**n * 4**n
    if terms > ENUMERATION_GUARD:
        raise EnumerationGuardError(
            f"diagonal identity needs {E.size}^{n} * 4^{n} = {terms} terms, above the guard {ENUMERATION_GUARD}"
        )
    tau = t / n
    steps = [expm(A, tau) for A in E.channels]
    mean = expect_map(E, lambda A: expm(A, tau))
    deltas = [B - mean for B in steps]
    tuples = list(subsets(n))
    m = steps[0].rep.shape[0]
    lhs = np.zeros((m, m), dtype=complex)
    diag = np.zeros((m, m), dtype=complex)
    cross = np.zeros((len(tuples), len(tuples), m, m), dtype=complex)
    for outcome in itertools.product(range(E.size), repeat=n):
        prob = float(np.prod([E.probs[k] for k in outcome]))
        W = compose(*[steps[k] for k in outcome]).rep
        lhs += prob * (W.conj().T @ W)
        F = np.stack([
            f_term(E, n, a, [deltas[outcome[j - 1]] for j in a], tau, mean=mean).rep for a in tuples
        ])
        Fh = np.conj(np.swapaxes(F, -1, -2))
        if cross_terms:
            cross += prob * np.einsum("aij,bjk->abik", Fh, F)
        else:
            diag += prob * np.einsum("aij,ajk->ik", Fh, F)
    if cross_terms:
        diag = np.einsum("aaij->ij", cross)
        off = [np.linalg.norm(cross[i, j], 2) for i in range(len(tuples)) for j in range(len(tuples)) if i != j]
        cross_max = float(max(off)) if off else 0.0
    else:
        cross_max = 0.0
    residual = float(np.linalg.norm(lhs - diag, 2))
    passed = residual <= DIAGONAL_TOL and cross_max <= DIAGONAL_TOL
    return DiagonalReport(n, float(t), residual, cross_max, terms, passed)
