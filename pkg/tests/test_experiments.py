import numpy as np
import pytest

from prechannel_lln import (
    Ensemble,
    ExperimentConfig,
    SeedSpec,
    SweepRecord,
    SweepResult,
    TimeGrid,
    apply,
    chebyshev_bound,
    composition_W,
    composition_moments,
    conjecture_probe,
    deviation_prob_exact,
    estimate_rate,
    expect,
    expm,
    run_lln_sweep,
    run_lln_trial,
    sample_iid,
    shipped,
    verify_diagonal_identity,
    verify_lemma_suite,
    w_n_ensemble,
)
from prechannel_lln.config import default_test_vector
from prechannel_lln.experiments import EnumerationGuardError, nearest_rank, sweep_deviations
from prechannel_lln.prob import second_moment_form

from conftest import random_channel, random_ensemble, random_op

GRID = TimeGrid.uniform(1.0, 65)


def test_nearest_rank():
    s = np.arange(1.0, 11.0)
    assert nearest_rank(s, 0.5) == 5.0
    assert nearest_rank(s, 0.9) == 9.0
    assert nearest_rank(s, 1.0) == 10.0
    assert nearest_rank(np.array([3.0]), 0.5) == 3.0


def test_trial_matches_direct_composition(rng):
    E = random_ensemble(rng, 2, 3)
    x = random_op(rng, 2)
    seed = SeedSpec(99)
    grid = TimeGrid.uniform(1.0, 9)
    for n in (1, 3, 10):
        factors = sample_iid(E, n, seed, trial=2)
        target = expect(E)
        direct = max(
            np.linalg.norm(apply(composition_W(factors, t), x) - apply(expm(target, t), x)) for t in grid.points
        )
        assert run_lln_trial(E, x, n, grid, seed, trial=2) == pytest.approx(direct, rel=1e-10, abs=1e-13)


def test_trial_examples(rng):
    A = random_channel(rng, 2)
    x = random_op(rng, 2)
    single = Ensemble((A,), [1.0])
    assert run_lln_trial(single, x, 16, GRID, SeedSpec(1)) <= 1e-12
    E = random_ensemble(rng, 2, 3)
    assert run_lln_trial(E, x, 16, TimeGrid((0.0,)), SeedSpec(1)) == 0.0
    a = run_lln_trial(E, x, 16, GRID, SeedSpec(5), trial=3)
    b = run_lln_trial(E, x, 16, GRID, SeedSpec(5), trial=3)
    assert a == b


def test_sweep_single_atom_is_zero(rng):
    A = random_channel(rng, 2)
    cfg = ExperimentConfig(Ensemble((A,), [1.0]), default_test_vector(2), n_schedule=(2, 8), trials=20)
    res = run_lln_sweep(cfg)
    for r in res.records:
        assert r.median <= 1e-12 and r.max <= 1e-12 and r.exceedance == 0.0
        assert r.chernoff_error <= 1e-12
    assert res.slope is None


def test_sweep_record_invariants():
    cfg = ExperimentConfig(shipped("ginibre"), default_test_vector(2), n_schedule=(4, 16), trials=50, seed=SeedSpec(3))
    for r in run_lln_sweep(cfg).records:
        assert 0 <= r.median <= r.q90 <= r.max
        assert 0 <= r.exceedance <= 1


def test_exceedance_reproduces_with_disjoint_seed():
    E = shipped("two-point")
    x = default_test_vector(2)
    m, n, eps = 400, 32, 0.1
    a = sweep_deviations(E, x, n, GRID, SeedSpec(1), m)[:, 0]
    b = sweep_deviations(E, x, n, GRID, SeedSpec(2), m)[:, 0]
    pa, pb = np.mean(a > eps), np.mean(b > eps)
    assert abs(pa - pb) <= 3 * np.sqrt(pa * (1 - pa) / m)


def test_median_decreases_for_two_point():
    cfg = ExperimentConfig(shipped("two-point"), default_test_vector(2), n_schedule=(8, 512), trials=200, seed=SeedSpec(4))
    meds = run_lln_sweep(cfg).medians()
    assert meds[1] < meds[0]


@pytest.mark.parametrize("family", ["two-point", "ginibre", "lindblad-like"])
def test_medians_nonincreasing_for_shipped(family):
    cfg = ExperimentConfig(shipped(family), default_test_vector(2), n_schedule=(4, 16, 64, 256), trials=200, seed=SeedSpec(8))
    meds = run_lln_sweep(cfg).medians()
    assert np.all(meds[1:] <= 1.1 * meds[:-1])


def test_estimate_rate_synthetic():
    def table(medians):
        recs = [SweepRecord(n, m, m, m, 0.0, 0.0, 0.0) for n, m in medians]
        return SweepResult(recs, None, "", 0, 0.1, 1)

    ns = [8, 32, 128, 512]
    assert estimate_rate(table([(n, 3 / np.sqrt(n)) for n in ns])) == pytest.approx(-0.5, abs=1e-12)
    assert estimate_rate(table([(n, 0.25) for n in ns])) == pytest.approx(0.0, abs=1e-12)
    assert estimate_rate(table([(n, 0.0) for n in ns])) is None
    assert estimate_rate(table([(8, 1.0), (16, 0.5)])) is None


def test_sweep_slope_matches_estimate_rate():
    cfg = ExperimentConfig(shipped("two-point"), default_test_vector(2), n_schedule=(8, 32, 128), trials=60, seed=SeedSpec(2))
    res = run_lln_sweep(cfg)
    assert res.slope == estimate_rate(res)


def test_sweep_independent_of_workers():
    cfg = ExperimentConfig(shipped("lindblad-like"), default_test_vector(2), n_schedule=(4, 16), trials=24, seed=SeedSpec(6))
    one = run_lln_sweep(cfg, workers=1)
    two = run_lln_sweep(cfg, workers=2)
    assert one.csv_rows() == two.csv_rows()
    for n in cfg.n_schedule:
        np.testing.assert_array_equal(one.deviations[n], two.deviations[n])


def test_conjecture_probe(rng):
    E = shipped("two-point")
    x = default_test_vector(2)
    cfg = ExperimentConfig(E, x, n_schedule=(4, 16, 64), trials=40, seed=SeedSpec(12))
    sweep = run_lln_sweep(cfg)
    p2 = conjecture_probe(E, x, cfg.n_schedule, cfg.grid, 2, cfg.seed, cfg.trials)
    np.testing.assert_array_equal(p2.medians, sweep.medians())
    p1 = conjecture_probe(E, x, cfg.n_schedule, cfg.grid, 1, cfg.seed, cfg.trials)
    for n in cfg.n_schedule:
        assert np.all(p1.deviations[n] >= p2.deviations[n] * (1 - 1e-12))
    assert p1.label == "empirical evidence only"
    single = Ensemble((random_channel(rng, 2),), [1.0])
    zero = conjecture_probe(single, x, (2, 4), cfg.grid, 1.5, cfg.seed, 10)
    assert np.all(zero.medians <= 1e-12)
    with pytest.raises(ValueError):
        conjecture_probe(E, x, (2,), cfg.grid, 3, cfg.seed, 10)


@pytest.mark.parametrize("mode", ["integration", "adjoint", "independence", "chebyshev"])
def test_lemma_suite_modes(rng, mode):
    for _ in range(10):
        d = rng.integers(1, 4)
        E = random_ensemble(rng, d, rng.integers(1, 4))
        E2 = random_ensemble(rng, d, rng.integers(1, 4))
        rep = verify_lemma_suite(E, E2, mode)
        assert rep.passed, rep
        assert rep.residual <= rep.threshold


def test_lemma_suite_superop(rng):
    A = random_channel(rng, 2)
    two_point = Ensemble((A, -A), [0.5, 0.5])
    rep = verify_lemma_suite(two_point, random_ensemble(rng, 2, 3), "superop")
    assert rep.passed and rep.residual <= 1e-10
    with pytest.raises(ValueError):
        verify_lemma_suite(random_ensemble(rng, 2, 2), two_point, "superop")
    with pytest.raises(ValueError):
        verify_lemma_suite(two_point, two_point, "bogus")


def test_diagonal_identity_examples(rng):
    A = random_channel(rng, 2)
    rep = verify_diagonal_identity(Ensemble((A,), [1.0]), 2, 0.5)
    assert rep.residual <= 1e-12 and rep.passed
    rep = verify_diagonal_identity(Ensemble((A, -A), [0.5, 0.5]), 2, 0.5)
    assert rep.residual <= 1e-10 and rep.cross_max <= 1e-10


def test_diagonal_identity_agrees_with_layer_recursion(rng):
    # Third route: the diagonal sum against the closed-form second moment.
    from prechannel_lln import expect_map
    from prechannel_lln.semigroup import subsets

    E = random_ensemble(rng, 2, 3)
    n, t = 3, 0.7
    tau = t / n
    mean = expect_map(E, lambda B: expm(B, tau))
    diag = np.zeros((4, 4), dtype=complex)
    # E F_a^* F_a factorizes: each Delta slot contributes E[D^* . D], each mean slot M^* . M.
    for a in subsets(n):
        Y = np.eye(4, dtype=complex)
        for j in range(1, n + 1):
            if j in a:
                Y = sum(p * (expm(B, tau) - mean).rep.conj().T @ Y @ (expm(B, tau) - mean).rep for B, p in E)
            else:
                Y = mean.rep.conj().T @ Y @ mean.rep
        diag += Y
    _, EWW = composition_moments(E, n, t)
    assert np.linalg.norm(diag - EWW.rep, 2) <= 1e-10
    assert verify_diagonal_identity(E, n, t).residual <= 1e-10


def test_cross_terms_vanish(rng):
    for _ in range(3):
        E = random_ensemble(rng, 2, 2)
        rep = verify_diagonal_identity(E, 3, 0.9)
        assert rep.cross_max <= 1e-10 and rep.residual <= 1e-10


def test_diagonal_identity_guard(rng):
    E = random_ensemble(rng, 2, 3)
    with pytest.raises(EnumerationGuardError):
        verify_diagonal_identity(E, 8, 1.0)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_centered_deviation_below_variance_form(n):
    x = default_test_vector(2)
    for family in ("two-point", "ginibre", "lindblad-like"):
        E = shipped(family)
        for t in (0.25, 1.0):
            law = w_n_ensemble(E, n, t)
            lhs, second = second_moment_form(law, x)
            EW, EWW = composition_moments(E, n, t)
            assert expect(law).allclose(EW, atol=1e-12)
            for eps in np.linspace(0.01, 0.5, 10):
                exact = deviation_prob_exact(law, x, eps)
                assert exact <= second / eps**2 + 1e-15
                assert exact <= chebyshev_bound(law, x, eps, 2) * (1 + 1e-12)
