"""Polynomial phases with exact mod-1 arithmetic, coefficient norms, and the
scale partition driven by those norms.

Phases are P(n) = sum_j lam_j n^j measured in revolutions, so only P(n) mod 1
matters.  Every float coefficient is a dyadic rational lam_j = p_j / 2^(e_j)
exactly, hence P(n) mod 1 is an integer computation: with E = max_j e_j,

    P(n) mod 1 = (sum_j p_j 2^(E - e_j) n^j  mod 2^E) / 2^E.

Both the scalar evaluator and the range evaluator use this reduction, so the
only rounding anywhere is the final division by 2^E.  This is stronger than
compensated floating-point summation: there is no catastrophic cancellation
to control because nothing is ever cancelled inexactly.

Polynomial classes: "linear" (degree <= 1), "vanish2" (lam_0 = lam_1 = 0,
the class whose coefficient vector mu = (lam_2, ..., lam_d) drives the scale
partition), and unrestricted "general".
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .util import DomainError

DEFAULT_DEGREE_CAP = 6

_CLASS_TAGS = ("linear", "vanish2", "general")


@dataclass(frozen=True)
class Poly:
    """Polynomial phase: coeffs[j] multiplies n^j, in revolutions."""

    coeffs: tuple
    class_tag: str = "general"
    degree_cap: int = DEFAULT_DEGREE_CAP

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if self.class_tag not in _CLASS_TAGS:
            raise DomainError("unknown polynomial class %r" % (self.class_tag,))
        if len(coeffs) - 1 > self.degree_cap:
            raise DomainError(
                "degree %d exceeds cap %d" % (len(coeffs) - 1, self.degree_cap)
            )
        if self.class_tag == "linear" and any(c != 0.0 for c in coeffs[2:]):
            raise DomainError("linear polynomial has a coefficient beyond degree 1")
        if self.class_tag == "vanish2" and any(c != 0.0 for c in coeffs[:2]):
            raise DomainError(
                "vanish2 polynomial must have zero constant and linear terms"
            )
        for c in coeffs:
            if not math.isfinite(c):
                raise DomainError("coefficients must be finite")

    @property
    def degree(self):
        for j in range(len(self.coeffs) - 1, -1, -1):
            if self.coeffs[j] != 0.0:
                return j
        return 0

    @property
    def mu_vec(self):
        """Coefficients of degrees 2..d (the drift-free part)."""
        return self.coeffs[2:]

    @staticmethod
    def linear(theta, c0=0.0, degree_cap=DEFAULT_DEGREE_CAP):
        return Poly((c0, theta), "linear", degree_cap)

    @staticmethod
    def vanish2(mu, degree_cap=DEFAULT_DEGREE_CAP):
        """Build from mu = (lam_2, ..., lam_d)."""
        return Poly((0.0, 0.0) + tuple(mu), "vanish2", degree_cap)

    @staticmethod
    def zero():
        return Poly((0.0,), "general")

    def to_json(self):
        return json.dumps({"coeffs": list(self.coeffs), "class": self.class_tag})

    @staticmethod
    def from_json(text):
        obj = json.loads(text)
        return Poly(tuple(obj["coeffs"]), obj.get("class", "general"))


def _dyadic_parts(p: Poly):
    """(numerators scaled to the common denominator 2^E, E)."""
    nums = []
    E = 0
    parts = []
    for c in p.coeffs:
        num, den = float(c).as_integer_ratio()
        e = den.bit_length() - 1
        parts.append((num, e))
        E = max(E, e)
    for num, e in parts:
        nums.append(num << (E - e))
    return nums, E


def _eval_num(nums, modulus, n):
    """sum_j nums[j] * n^j mod modulus, Horner in integer arithmetic."""
    acc = 0
    for c in reversed(nums):
        acc = (acc * n + c) % modulus
    return acc


def eval_phase(p: Poly, n: int) -> float:
    """P(n) mod 1 in [0, 1), exact up to the final float rounding."""
    n = int(n)
    nums, E = _dyadic_parts(p)
    mod = 1 << E
    return _eval_num(nums, mod, n) / mod


def phase_range(p: Poly, n0: int, N: int) -> np.ndarray:
    """P(n) mod 1 for n = n0, ..., n0 + N - 1 as a float array.

    Runs the exact integer finite-difference recurrence: registers hold
    Delta^k P(n) mod 1 scaled by 2^E, and each step adds the next register.
    Exact mod 1; each output rounds once to float.
    """
    N = int(N)
    if N < 0:
        raise DomainError("range length must be nonnegative")
    if N == 0:
        return np.zeros(0)
    n0 = int(n0)
    nums, E = _dyadic_parts(p)
    mod = 1 << E
    mask = mod - 1
    d = p.degree
    # Delta^k applied to the scaled numerator at n0, via binomial combination
    base = [_eval_num(nums, mod, n0 + i) for i in range(d + 1)]
    regs = []
    for k in range(d + 1):
        acc = 0
        for i in range(k + 1):
            term = math.comb(k, i) * base[i]
            acc += term if (k - i) % 2 == 0 else -term
        regs.append(acc & mask)
    out = [0] * N
    for idx in range(N):
        out[idx] = regs[0]
        for k in range(d):
            regs[k] = (regs[k] + regs[k + 1]) & mask
    inv = 1.0 / mod if E <= 1023 else None
    if inv is not None and E <= 52:
        return np.array(out, dtype=float) * inv
    return np.array([v / mod for v in out], dtype=float)


def coeff_norm(p: Poly) -> float:
    """Sum of |lam_j| over j >= 1."""
    return float(sum(abs(c) for c in p.coeffs[1:]))


def scaled_norm(p: Poly, j: int) -> float:
    """Coefficient norm of n -> P(2^j n): sum_k |lam_k| 2^(jk), k >= 2.

    Defined for the drift-free class; at j = 0 it agrees with coeff_norm.
    """
    if p.class_tag != "vanish2":
        raise DomainError("scaled_norm requires a vanish2 polynomial")
    j = int(j)
    if j < 0:
        raise DomainError("scale index j must be nonnegative")
    return float(
        sum(abs(c) * 2.0 ** (j * k) for k, c in enumerate(p.coeffs) if k >= 2)
    )


@dataclass(frozen=True)
class ScalePartition:
    """Disjoint classification of scale indices by the scaled coefficient norm.

    j0: two monomials compete at comparable size (within a factor 2^A1).
    j_low / j_mid / j_high: remaining indices with scaled norm below,
    inside, or above the window [2^(-A1 s), 2^(A1 s)].
    j_levels[l] lists indices outside j0 whose norm falls in [2^l, 2^(l+1)).
    """

    j0: tuple
    j_low: tuple
    j_mid: tuple
    j_high: tuple
    j_levels: dict = field(compare=False)
    s: int = 1
    A1: int = 4
    j_range: tuple = (0, 0)

    @property
    def j_approx(self):
        """Indices where the norm is uncontrolled or mid-window: j0 + j_mid."""
        return tuple(sorted(set(self.j0) | set(self.j_mid)))

    def all_indices(self):
        return tuple(sorted(set(self.j0) | set(self.j_low)
                            | set(self.j_mid) | set(self.j_high)))


def partition_scales(mu: Poly, s: int, A1: int, j_range) -> ScalePartition:
    """Classify each j in j_range = (j_min, j_max) inclusive.

    An index lands in j0 when two distinct monomial sizes |mu_k| 2^(jk) are
    within a factor 2^A1 of each other (both nonzero).  Outside j0 a unique
    monomial dominates and the norm window test is meaningful.
    """
    if mu.class_tag != "vanish2":
        raise DomainError("partition_scales requires a vanish2 polynomial")
    s = int(s)
    A1 = int(A1)
    if s < 1 or A1 < 1:
        raise DomainError("s and A1 must be positive integers")
    j_min, j_max = int(j_range[0]), int(j_range[1])
    if j_min > j_max:
        raise DomainError("empty scale range")
    ks = [k for k in range(2, len(mu.coeffs)) if mu.coeffs[k] != 0.0]
    lo_thresh = 2.0 ** (-A1 * s)
    hi_thresh = 2.0 ** (A1 * s)
    ratio_cap = 2.0 ** A1

    j0, j_low, j_mid, j_high = [], [], [], []
    j_levels = {}
    for j in range(j_min, j_max + 1):
        sizes = [abs(mu.coeffs[k]) * 2.0 ** (j * k) for k in ks]
        competing = False
        for a in range(len(sizes)):
            for b in range(a + 1, len(sizes)):
                r = sizes[a] / sizes[b]
                if 1.0 / ratio_cap <= r <= ratio_cap:
                    competing = True
        if competing:
            j0.append(j)
            continue
        norm = sum(sizes)
        if norm > 0.0:
            l = int(math.floor(math.log2(norm)))
            j_levels.setdefault(l, []).append(j)
        if norm < lo_thresh:
            j_low.append(j)
        elif norm > hi_thresh:
            j_high.append(j)
        else:
            j_mid.append(j)
    return ScalePartition(
        j0=tuple(j0), j_low=tuple(j_low), j_mid=tuple(j_mid),
        j_high=tuple(j_high),
        j_levels={l: tuple(v) for l, v in sorted(j_levels.items())},
        s=s, A1=A1, j_range=(j_min, j_max),
    )
