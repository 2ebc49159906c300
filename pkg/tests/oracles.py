"""Independent reference implementations used to cross-check the package.

Everything here is deliberately naive: direct summation, exhaustive search,
exact rational arithmetic.  Slow but obviously correct on small instances.
Nothing in this file imports from modvar.
"""
import cmath
import itertools
import math
from fractions import Fraction

import numpy as np


def dft_dense(values):
    """O(M^2) DFT by explicit outer product, no FFT."""
    v = np.asarray(values, dtype=complex)
    M = len(v)
    n = np.arange(M)
    W = np.exp(-2j * np.pi * np.outer(n, n) / M)
    return W @ v


def convolve_loops(f, k):
    """Double-loop linear convolution of two dense coefficient arrays."""
    out = np.zeros(len(f) + len(k) - 1, dtype=complex)
    for i, a in enumerate(f):
        for j, b in enumerate(k):
            out[i + j] += a * b
    return out


def vr_dfs(seq, r):
    """r-variation by exhaustive search over increasing index subsequences."""
    seq = [complex(x) for x in seq]
    n = len(seq)
    best = 0.0
    for size in range(2, n + 1):
        for idx in itertools.combinations(range(n), size):
            tot = sum(abs(seq[j] - seq[i]) ** r
                      for i, j in zip(idx, idx[1:]))
            best = max(best, tot)
    return best ** (1.0 / r) if best > 0 else 0.0


def jumps_dfs(seq, tau):
    """Number of jumps in the longest chain with every gap >= tau."""
    seq = [complex(x) for x in seq]
    n = len(seq)
    best = 0
    for size in range(2, n + 1):
        for idx in itertools.combinations(range(n), size):
            if all(abs(seq[j] - seq[i]) >= tau
                   for i, j in zip(idx, idx[1:])):
                best = max(best, size - 1)
    return best


def vec_jumps_dfs(vecs, lam):
    """Vector-valued chain count: consecutive l2 gaps >= lam, exhaustive."""
    a = np.asarray(vecs, dtype=float)
    n = len(a)
    best = 0
    for size in range(2, n + 1):
        for idx in itertools.combinations(range(n), size):
            if all(np.linalg.norm(a[j] - a[i]) >= lam
                   for i, j in zip(idx, idx[1:])):
                best = max(best, size - 1)
    return best


def weyl_direct(Q, A, B, d):
    """Complete normalized exponential sum by direct length-Q summation.

    Phase of each term is reduced mod 1 in exact rational arithmetic before
    any float rounding.
    """
    if len(A) != d - 1:
        raise ValueError("need d-1 leading coefficients")
    total = 0j
    for n in range(1, Q + 1):
        ph = Fraction(B * n, Q)
        for k, a in enumerate(A, start=2):
            ph += Fraction(a * n ** k, Q)
        frac = ph - (ph.numerator // ph.denominator)
        total += cmath.exp(-2j * cmath.pi * float(frac))
    return total / Q


def _squarefree_divisors(Q):
    primes = []
    q = Q
    p = 2
    while p * p <= q:
        if q % p == 0:
            primes.append(p)
            while q % p == 0:
                q //= p
        p += 1
    if q > 1:
        primes.append(q)
    for size in range(len(primes) + 1):
        for combo in itertools.combinations(primes, size):
            yield math.prod(combo), (-1) ** size


def coprime_vector_count(Q, m):
    """Number of A in [1,Q]^m with gcd(A_1..A_m, Q) = 1, by inclusion-exclusion."""
    if Q == 1:
        return 1
    return sum(sign * (Q // g) ** m for g, sign in _squarefree_divisors(Q))


def phase_fraction(coeffs, n):
    """Polynomial phase mod 1 with every float coefficient taken exactly.

    A float is a dyadic rational, so Fraction(c) is lossless and the mod-1
    reduction happens before any rounding.
    """
    ph = Fraction(0)
    for k, c in enumerate(coeffs):
        ph += Fraction(c) * n ** k
    frac = ph - (ph.numerator // ph.denominator)
    return float(frac)


def rotation_orbit_exact(alpha_scaled, scale, n):
    """n-step circle rotation orbit of 0 via exact integer arithmetic."""
    return float(Fraction(alpha_scaled * n % scale, scale))


def skew_orbit_steps(alpha_scaled, scale, omega, n):
    """Skew product orbit by n single steps (x,y) -> (x+a, y+2x+a), exact."""
    a = Fraction(alpha_scaled, scale)
    x = Fraction(omega[0]) % 1
    y = Fraction(omega[1]) % 1
    for _ in range(n):
        x, y = (x + a) % 1, (y + 2 * x + a) % 1
    return float(x), float(y)
