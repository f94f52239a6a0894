import itertools

import numpy as np
import pytest

from prechannel_lln import (
    Ensemble,
    PreChannel,
    SeedSpec,
    adjoint,
    apply,
    centered,
    chebyshev_bound,
    compose,
    deviation_prob_exact,
    expect,
    expect_map,
    from_left_right,
    pairing,
    product_ensemble,
    rank_one,
    sample_iid,
    sample_indices,
    schatten_norm,
    variance_superop,
)
from prechannel_lln.prob import second_moment_form

from conftest import random_channel, random_ensemble, random_op


def test_ensemble_rejects_bad_probabilities(rng):
    A = random_channel(rng, 2)
    with pytest.raises(ValueError):
        Ensemble((A, -A), [0.45, 0.45])
    with pytest.raises(ValueError):
        Ensemble((A, -A), [1.2, -0.2])
    with pytest.raises(ValueError):
        Ensemble((A,), [0.5, 0.5])
    with pytest.raises(ValueError):
        Ensemble((A, PreChannel.identity(3)), [0.5, 0.5])
    with pytest.raises(ValueError):
        Ensemble((), [])


def test_ensemble_accepts_rounding_level_sums(rng):
    A = random_channel(rng, 2)
    E = Ensemble((A, A, A), [0.1, 0.2, 0.7 + 5e-13])
    assert E.size == 3


def test_expect_examples(rng):
    A = random_channel(rng, 2)
    assert expect(Ensemble((A,), [1.0])).allclose(A, atol=0)
    assert expect(Ensemble((A, -A), [0.5, 0.5])).allclose(PreChannel.zero(2), atol=0)


def test_integration_lemma(rng):
    for _ in range(30):
        d = rng.integers(1, 4)
        E = random_ensemble(rng, d, rng.integers(1, 5))
        x = random_op(rng, d)
        direct = sum(p * apply(A, x) for A, p in E)
        assert schatten_norm(apply(expect(E), x) - direct, 2) <= 1e-12


def test_expect_map_examples(rng):
    E = random_ensemble(rng, 2, 3)
    assert expect_map(E, lambda A: A).allclose(expect(E), atol=1e-15)
    C = random_channel(rng, 2)
    assert expect_map(E, lambda A: C).allclose(C, atol=1e-14)


def test_adjoint_lemma(rng):
    for _ in range(30):
        E = random_ensemble(rng, rng.integers(1, 4), rng.integers(1, 5))
        assert expect_map(E, adjoint).allclose(adjoint(expect(E)), atol=1e-12)


def test_variance_examples(rng):
    A = random_channel(rng, 2)
    assert variance_superop(Ensemble((A,), [1.0])).allclose(PreChannel.zero(2), atol=0)
    assert variance_superop(Ensemble((A, -A), [0.5, 0.5])).allclose(compose(adjoint(A), A), atol=1e-14)


def test_variance_is_positive_semidefinite(rng):
    for _ in range(50):
        V = variance_superop(random_ensemble(rng, rng.integers(1, 4), rng.integers(1, 5)))
        herm = (V.rep + V.rep.conj().T) / 2
        assert np.linalg.eigvalsh(herm).min() >= -1e-10
        assert np.max(np.abs(V.rep - V.rep.conj().T)) <= 1e-12


def test_variance_quadratic_form(rng):
    for _ in range(50):
        d = rng.integers(1, 4)
        E = random_ensemble(rng, d, rng.integers(1, 5))
        x = random_op(rng, d)
        mean = expect(E)
        enumerated = sum(p * schatten_norm(apply(A - mean, x), 2) ** 2 for A, p in E)
        assert abs(pairing(apply(variance_superop(E), x), x) - enumerated) <= 1e-10
        lhs, rhs = second_moment_form(E, x)
        assert abs(lhs - rhs) <= 1e-10


def test_superoperator_lemma(rng):
    for _ in range(20):
        d = rng.integers(1, 4)
        EA = centered(random_ensemble(rng, d, rng.integers(1, 4)))
        EB = random_ensemble(rng, d, rng.integers(1, 4))
        total = sum(
            (p * q) * compose(adjoint(B), A, B).rep for (A, p), (B, q) in itertools.product(EA, EB)
        )
        assert np.max(np.abs(total)) <= 1e-10


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_independence_lemma(rng, m):
    laws = [random_ensemble(rng, 2, rng.integers(1, 4)) for _ in range(m)]
    total = np.zeros((4, 4), dtype=complex)
    for combo in itertools.product(*[list(L) for L in laws]):
        prob = np.prod([p for _, p in combo])
        total += prob * compose(*[A for A, _ in combo]).rep
    assert np.max(np.abs(total - compose(*[expect(L) for L in laws]).rep)) <= 1e-10
    assert expect(product_ensemble(laws)).allclose(compose(*[expect(L) for L in laws]), atol=1e-10)


def test_sample_iid_examples(rng):
    A = random_channel(rng, 2)
    draws = sample_iid(Ensemble((A,), [1.0]), 5, SeedSpec(3))
    assert len(draws) == 5 and all(D is A for D in draws)
    E = random_ensemble(rng, 2, 3)
    a = sample_indices(E, 50, SeedSpec(9), trial=4)
    b = sample_indices(E, 50, SeedSpec(9), trial=4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, sample_indices(E, 50, SeedSpec(9), trial=5))


def test_sample_draw_depends_only_on_label(rng):
    E = random_ensemble(rng, 2, 3)
    seed = SeedSpec(2024)
    trials = [sample_indices(E, 30, seed, trial=t) for t in range(6)]
    shuffled = {t: sample_indices(E, 30, seed, trial=t) for t in [5, 2, 0, 4, 1, 3]}
    for t in range(6):
        np.testing.assert_array_equal(trials[t], shuffled[t])


def test_sample_frequencies_match_probabilities():
    rng = np.random.default_rng(1)
    E = Ensemble(tuple(random_channel(rng, 2) for _ in range(3)), [0.2, 0.5, 0.3])
    n = 100_000
    idx = sample_indices(E, n, SeedSpec(77))
    freq = np.bincount(idx, minlength=3) / n
    se = np.sqrt(E.probs * (1 - E.probs) / n)
    assert np.all(np.abs(freq - E.probs) <= 3 * se)


def test_seed_spec_validation():
    with pytest.raises(ValueError):
        SeedSpec(-1)
    with pytest.raises(ValueError):
        SeedSpec(2**64)
    SeedSpec(2**64 - 1)


def test_deviation_prob_examples(rng):
    A = random_channel(rng, 2)
    x = random_op(rng, 2)
    assert deviation_prob_exact(Ensemble((A,), [1.0]), x, 1e-3) == 0.0
    r = schatten_norm(apply(A, x), 2)
    assert deviation_prob_exact(Ensemble((A, -A), [0.5, 0.5]), x, 0.9 * r) == 1.0
    assert deviation_prob_exact(Ensemble((A, -A), [0.5, 0.5]), x, r) == 0.0
    with pytest.raises(ValueError):
        deviation_prob_exact(Ensemble((A,), [1.0]), x, 0.0)


def test_deviation_prob_agrees_with_sampling():
    rng = np.random.default_rng(5)
    E = random_ensemble(rng, 2, 3)
    x = rank_one([1, 0])
    mean_x = apply(expect(E), x)
    devs = np.array([schatten_norm(apply(A, x) - mean_x, 2) for A in E.channels])
    eps = float(np.median(devs))
    exact = deviation_prob_exact(E, x, eps)
    m = 100_000
    idx = sample_indices(E, m, SeedSpec(31))
    freq = np.mean(devs[idx] > eps)
    assert abs(freq - exact) <= 3 * np.sqrt(exact * (1 - exact) / m)


def test_chebyshev_examples(rng):
    A = random_channel(rng, 2)
    x = random_op(rng, 2)
    assert chebyshev_bound(Ensemble((A,), [1.0]), x, 0.5) == 0.0
    a, eps = 1.7, 0.4
    scalar = Ensemble((PreChannel([[a]]), PreChannel([[-a]])), [0.5, 0.5])
    assert chebyshev_bound(scalar, np.array([[1.0]]), eps, 2) == pytest.approx(a**2 / eps**2, rel=1e-14)
    with pytest.raises(ValueError):
        chebyshev_bound(scalar, np.array([[1.0]]), 0.0)
    with pytest.raises(ValueError):
        chebyshev_bound(scalar, np.array([[1.0]]), 1.0, p=3)


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0])
def test_chebyshev_dominates_exact_probability(rng, p):
    for _ in range(100):
        d = rng.integers(1, 4)
        E = random_ensemble(rng, d, rng.integers(1, 5))
        x = random_op(rng, d)
        rms = np.sqrt(second_moment_form(E, x)[1])
        eps = rng.uniform(0.1, 3) * max(rms, 1e-3)
        assert deviation_prob_exact(E, x, eps) <= chebyshev_bound(E, x, eps, p) * (1 + 1e-12)


def test_left_right_ensemble_expectation(rng):
    # Random conjugations X -> K X K^dagger average to the mixed map.
    Ks = [random_op(rng, 2) for _ in range(3)]
    E = Ensemble.uniform([from_left_right(K, K.conj().T) for K in Ks])
    X = random_op(rng, 2)
    np.testing.assert_allclose(apply(expect(E), X), sum(K @ X @ K.conj().T for K in Ks) / 3, atol=1e-12)
