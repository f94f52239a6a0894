"""Schatten norms, the trace pairing and Holder's inequality.

Run: python demos/01_schatten_norms_and_duality.py
"""
import numpy as np

from prechannel_lln import INF, dual_exponent, pairing, schatten_norm, singular_values

rng = np.random.default_rng(0)

# An operator is just a square complex array.
X = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
print("singular values:", singular_values(X))

# The p-norms shrink as p grows: trace norm >= Frobenius >= operator norm.
for p in (1, 4 / 3, 1.5, 2, 4, INF):
    print(f"||X||_{p:<6.4g} = {schatten_norm(X, p):.6f}")

# Frobenius norm is the Euclidean norm of the entries.
print("Frobenius check:", schatten_norm(X, 2), np.sqrt(np.sum(np.abs(X) ** 2)))

# Conjugate exponents, with 1 and inf exchanged.
for p in (1, 4 / 3, 2, INF):
    print(f"p = {p}, p* = {dual_exponent(p)}")

# The pairing tr(Y^dagger X) is bounded by ||Y||_{p*} ||X||_p.
Y = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
for p in (1, 1.5, 2):
    lhs = abs(pairing(Y, X))
    rhs = schatten_norm(Y, dual_exponent(p)) * schatten_norm(X, p)
    print(f"p={p}: |<Y, X>| = {lhs:.4f} <= {rhs:.4f}")
