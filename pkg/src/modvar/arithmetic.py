"""Complete Weyl sums, coprime frequency enumeration, and decay fitting.

The normalized Weyl sum at a rational frequency tuple is

    S(A/Q, B/Q) = (1/Q) sum_{r=1..Q} e(-(A_2 r^2 + ... + A_d r^d + r B) / Q).

Phase numerators are reduced mod Q in integer arithmetic before any float
enters, so each term's phase is exact.  For degree 2 and odd Q with
gcd(A, Q) = 1 the modulus is exactly Q^(-1/2) (Gauss sums); the even-Q
anomaly (|S| = 1 at Q = 2, A = B = 1: r^2 + r is always even) is why decay
statements carry a constant.

Enumeration distinguishes two coprimality conventions that look alike:
arcs require gcd(A_2, ..., A_d, Q) = 1, while the decay supremum runs over
gcd(A_2, ..., A_d, B, Q) = 1 with B included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .util import DomainError, e, write_csv

S_CAP_DEFAULT = 4
DECAY_QMAX = {2: 200, 3: 64}


@dataclass(frozen=True)
class FreqPoint:
    """Rational frequency data (A_2..A_d, B, Q), components reduced to [1, Q]."""

    Q: int
    A: tuple
    B: int

    def __post_init__(self):
        Q = int(self.Q)
        if Q < 1:
            raise DomainError("modulus Q must be positive")
        A = tuple(((int(a) - 1) % Q) + 1 for a in self.A)
        B = ((int(self.B) - 1) % Q) + 1
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def degree(self):
        return len(self.A) + 1

    def arc_coprime(self):
        """gcd(A_2, ..., A_d, Q) = 1 (B not included)."""
        return math.gcd(*self.A, self.Q) == 1

    def joint_coprime(self):
        """gcd(A_2, ..., A_d, B, Q) = 1."""
        return math.gcd(*self.A, self.B, self.Q) == 1


def weyl_sum(fp: FreqPoint, d: int) -> complex:
    """S(A/Q, B/Q) with exact integer phase reduction."""
    d = int(d)
    if d != fp.degree:
        raise DomainError(
            "degree %d does not match the %d coefficients stored" % (d, len(fp.A))
        )
    Q = fp.Q
    r = np.arange(1, Q + 1, dtype=np.int64)
    num = (r * (fp.B % Q)) % Q
    rpow = r % Q
    for a in fp.A:
        rpow = (rpow * r) % Q       # now r^j mod Q for the degree of a
        num = (num + (a % Q) * rpow) % Q
    return complex(np.mean(e(-num.astype(float) / Q)))


def weyl_row(Q: int, A, B_all=None) -> np.ndarray:
    """S(A/Q, B/Q) for B = 1..Q in one FFT.

    With v_r = e(-(sum_j A_j r^j)/Q) accumulated per residue class of r,
    S(., B/Q) is (1/Q) times the DFT of v at frequency B.
    """
    Q = int(Q)
    r = np.arange(1, Q + 1, dtype=np.int64)
    num = np.zeros(Q, dtype=np.int64)
    rpow = r % Q
    for a in A:
        rpow = (rpow * r) % Q
        num = (num + (int(a) % Q) * rpow) % Q
    v = np.zeros(Q, dtype=complex)
    np.add.at(v, (r % Q).astype(int), e(-num.astype(float) / Q))
    row = np.fft.fft(v) / Q          # index b = S at frequency b (b = 0 is B = Q)
    out = np.empty(Q, dtype=complex)
    out[: Q - 1] = row[1:]
    out[Q - 1] = row[0]
    return out                        # index i holds B = i + 1


def enumerate_freq_points(s: int, d: int, s_cap=S_CAP_DEFAULT):
    """All (A, B, Q) with 2^(s-1) <= Q < 2^s, gcd(A, Q) = 1, B in [1, Q]."""
    s = int(s)
    d = int(d)
    if s < 1:
        raise DomainError("s must be at least 1")
    if d < 2:
        raise DomainError("degree must be at least 2")
    if s > s_cap:
        est = sum(Q ** d for Q in range(2 ** (s - 1), 2 ** s))
        raise DomainError(
            "refusing s=%d > cap %d: enumeration would visit about %d tuples"
            % (s, s_cap, est)
        )
    points = []
    for Q in range(2 ** (s - 1), 2 ** s):
        for A in _coprime_vectors(Q, d - 1):
            for B in range(1, Q + 1):
                points.append(FreqPoint(Q=Q, A=A, B=B))
    return points


def _coprime_vectors(Q, m):
    """All A in [1, Q]^m with gcd(A_1, ..., A_m, Q) = 1, lexicographic."""
    def rec(prefix, g):
        if len(prefix) == m:
            if g == 1:
                yield tuple(prefix)
            return
        for a in range(1, Q + 1):
            yield from rec(prefix + [a], math.gcd(g, a))

    yield from rec([], Q)


def arc_pairs(s: int, d: int, s_cap=S_CAP_DEFAULT):
    """The (A, Q) pairs indexing major arcs at level s: gcd(A, Q) = 1."""
    s = int(s)
    d = int(d)
    if s < 1:
        raise DomainError("s must be at least 1")
    if d < 2:
        raise DomainError("degree must be at least 2")
    if s > s_cap:
        raise DomainError("refusing s=%d > cap %d" % (s, s_cap))
    pairs = []
    for Q in range(2 ** (s - 1), 2 ** s):
        for A in _coprime_vectors(Q, d - 1):
            pairs.append((A, Q))
    return pairs


def count_arc_points(s: int, d: int) -> int:
    """Direct count of enumerate_freq_points output: sum over Q of Q * #A."""
    total = 0
    for Q in range(2 ** (s - 1), 2 ** s):
        total += Q * sum(1 for _ in _coprime_vectors(Q, d - 1))
    return total


@dataclass(frozen=True)
class DecayFit:
    """Per-Q maxima of |S| over joint-coprime tuples plus a power-law fit."""

    d: int
    Q: tuple
    max_abs: tuple
    argmax: tuple            # (A..., B) attaining the max for each Q
    exponent: float          # c in max|S| ~ Q^-c
    residuals: tuple
    constant: float          # max over Q of max|S| * Q^exponent

    def to_csv(self, path):
        rows = []
        for q, m, am in zip(self.Q, self.max_abs, self.argmax):
            rows.append((q, m, "A=" + ":".join(str(x) for x in am[:-1])
                         + ";B=" + str(am[-1])))
        write_csv(path, ("Q", "max_abs_S", "argmax"), rows)


def weyl_decay_fit(d: int, Qmax: int) -> DecayFit:
    """Fit max_{(A,B,Q) joint-coprime} |S| against Q^-c, Q = 1..Qmax."""
    d = int(d)
    if d not in DECAY_QMAX:
        raise DomainError("decay fit supports degrees %s" % sorted(DECAY_QMAX))
    Qmax = int(Qmax)
    if Qmax < 2:
        raise DomainError("need Qmax >= 2 to fit a slope")
    if Qmax > DECAY_QMAX[d]:
        raise DomainError(
            "Qmax %d exceeds the degree-%d cap %d" % (Qmax, d, DECAY_QMAX[d])
        )
    Qs, maxima, argmaxima = [], [], []
    B_range = None
    for Q in range(1, Qmax + 1):
        best, best_arg = -1.0, None
        Bs = np.arange(1, Q + 1)
        for A in _all_vectors(Q, d - 1):
            gA = math.gcd(*A, Q) if A else Q
            mask = np.gcd(np.gcd(Bs, gA), Q) == 1
            if not np.any(mask):
                continue
            row = np.abs(weyl_row(Q, A))
            row[~mask] = -1.0
            i = int(np.argmax(row))
            if row[i] > best:
                best, best_arg = float(row[i]), A + (int(Bs[i]),)
        Qs.append(Q)
        maxima.append(best)
        argmaxima.append(best_arg)
    logQ = np.log(np.asarray(Qs, dtype=float))
    logS = np.log(np.asarray(maxima, dtype=float))
    slope, intercept = np.polyfit(logQ, logS, 1)
    c = -float(slope)
    resid = logS - (slope * logQ + intercept)
    const = float(np.max(np.asarray(maxima) * np.asarray(Qs, dtype=float) ** c))
    return DecayFit(d=d, Q=tuple(Qs), max_abs=tuple(maxima),
                    argmax=tuple(argmaxima), exponent=c,
                    residuals=tuple(float(x) for x in resid), constant=const)


def _all_vectors(Q, m):
    """All A in [1, Q]^m, lexicographic."""
    if m == 0:
        yield ()
        return
    for a in range(1, Q + 1):
        for rest in _all_vectors(Q, m - 1):
            yield (a,) + rest
