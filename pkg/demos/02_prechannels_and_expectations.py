"""Pre-channels, adjoints and exact expectations of random pre-channels.

Run: python demos/02_prechannels_and_expectations.py
"""
import numpy as np

from prechannel_lln import (
    adjoint,
    apply,
    centered,
    chebyshev_bound,
    compose,
    deviation_prob_exact,
    expect,
    expect_map,
    from_left_right,
    generate,
    pairing,
    rank_one,
    variance_superop,
    verify_lemma_suite,
)

rng = np.random.default_rng(1)

# X -> K X K^dagger is the building block of quantum channels.
K = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
U = from_left_right(K, K.conj().T)
X = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
print("U(X) == K X K^dagger:", np.allclose(apply(U, X), K @ X @ K.conj().T))

# The adjoint is the conjugate-transposed matrix; it satisfies <U* Y, X> = <Y, U X>.
Y = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
print("adjoint identity:", pairing(apply(adjoint(U), Y), X), pairing(Y, apply(U, X)))

# A random pre-channel with finite support: every expectation is a finite sum.
E = generate("lindblad-like", {"dim": 2, "atoms": 3, "random_probs": True}, seed=4)
print("atoms:", E.size, "probabilities:", E.probs)
print("E[A^*] = (E[A])^*:", expect_map(E, adjoint).allclose(adjoint(expect(E))))

# The variance super-operator and the Chebyshev-type bound.
x = rank_one([1, 0])
V = variance_superop(E)
print("<(var A) x, x> =", pairing(apply(V, x), x).real)
for eps in (0.05, 0.2, 0.5):
    print(
        f"eps={eps}: Pr = {deviation_prob_exact(E, x, eps):.3f}",
        " bounds:",
        [round(chebyshev_bound(E, x, eps, p), 3) for p in (1, 1.5, 2)],
    )

# E[B^* A B] = 0 whenever A is centered and independent of B.
print(verify_lemma_suite(centered(E), E, "superop"))
print(verify_lemma_suite(E, E, "independence"))
print("compose(U, U) applied twice:", np.allclose(apply(compose(U, U), X), apply(U, apply(U, X))))
