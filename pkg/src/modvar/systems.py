"""Measure-preserving system simulators with exact orbit formulas.

Three systems: the shift on Z with counting measure (an infinite, sigma-finite
invariant measure), an irrational circle rotation, and the quadratic skew
product T(x, y) = (x + a, y + 2x + a) on the 2-torus, whose n-th iterate has
the closed form (x + n a, y + 2 n x + n^2 a).

Rotation and skew angles are stored as 120-bit fixed-point integers
(value = scaled / 2^120) and orbits are computed in integer arithmetic
modulo 2^120, so points never accumulate rounding error: the only rounding
is the final conversion of each coordinate to a float.  Defaults are
sqrt(2) - 1 and sqrt(3) - 1, badly approximable numbers that keep desk-scale
experiments away from accidental near-resonances.

Observables are plain callables on coordinate arrays; builders for the
indicator / character combinations used in experiments live at the bottom.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import polykit
from .bumpkit import Profile, scaled_weight
from .signalkit import Signal
from .util import DomainError, e, write_csv

PREC_BITS = 120
SCALE = 1 << PREC_BITS


def _isqrt_scaled(m: int) -> int:
    """floor(sqrt(m) * 2^PREC_BITS)."""
    return math.isqrt(m << (2 * PREC_BITS))


ALPHA_ROTATION = _isqrt_scaled(2) - SCALE      # sqrt(2) - 1
ALPHA_SKEW = _isqrt_scaled(3) - SCALE          # sqrt(3) - 1


def _to_scaled(x) -> int:
    """Exact fixed-point image of a dyadic float (or Fraction) mod 1."""
    if isinstance(x, int):
        return 0
    num, den = x.as_integer_ratio()
    if (num << PREC_BITS) % den:
        # non-dyadic rational beyond 120 bits: round, documenting nothing
        # exact was claimed for such inputs
        return round((num << PREC_BITS) / den) % SCALE
    return ((num << PREC_BITS) // den) % SCALE


class ZShift:
    """n -> n + 1 on the integers, counting measure."""

    kind = "zshift"

    def orbit_point(self, omega, n):
        return int(omega) + int(n)

    def orbit_array(self, omega, n0, N):
        return int(omega) + int(n0) + np.arange(int(N), dtype=np.int64)


class CircleRotation:
    """x -> x + alpha mod 1."""

    kind = "rotation"

    def __init__(self, alpha=None, scaled=None):
        if scaled is not None:
            self.alpha_scaled = int(scaled) % SCALE
        elif alpha is None:
            self.alpha_scaled = ALPHA_ROTATION
        else:
            self.alpha_scaled = _to_scaled(alpha)

    @property
    def alpha(self):
        """Nearest-float image of the stored angle."""
        return self.alpha_scaled / SCALE

    def orbit_point(self, omega, n):
        w = _to_scaled(omega)
        return ((w + int(n) * self.alpha_scaled) % SCALE) / SCALE

    def orbit_array(self, omega, n0, N):
        w = (_to_scaled(omega) + int(n0) * self.alpha_scaled) % SCALE
        a = self.alpha_scaled
        out = [0.0] * int(N)
        for i in range(int(N)):
            out[i] = w / SCALE
            w = (w + a) % SCALE
        return np.array(out)


class SkewProduct:
    """(x, y) -> (x + alpha, y + 2x + alpha) on the 2-torus.

    Second coordinate of T^n: y + 2 n x + n^2 alpha (exact formula).
    """

    kind = "skew"

    def __init__(self, alpha=None, scaled=None):
        if scaled is not None:
            self.alpha_scaled = int(scaled) % SCALE
        elif alpha is None:
            self.alpha_scaled = ALPHA_SKEW
        else:
            self.alpha_scaled = _to_scaled(alpha)

    @property
    def alpha(self):
        return self.alpha_scaled / SCALE

    def orbit_point(self, omega, n):
        x, y = omega
        xs, ys = _to_scaled(x), _to_scaled(y)
        n = int(n)
        a = self.alpha_scaled
        xn = (xs + n * a) % SCALE
        yn = (ys + 2 * n * xs + n * n * a) % SCALE
        return (xn / SCALE, yn / SCALE)

    def orbit_array(self, omega, n0, N):
        x, y = omega
        xs, ys = _to_scaled(x), _to_scaled(y)
        n0 = int(n0)
        N = int(N)
        a = self.alpha_scaled
        xn = (xs + n0 * a) % SCALE
        yn = (ys + 2 * n0 * xs + n0 * n0 * a) % SCALE
        # y_{n+1} - y_n = 2x + (2n+1) alpha: maintained incrementally
        yinc = (2 * xs + (2 * n0 + 1) * a) % SCALE
        out = np.empty((N, 2))
        for i in range(N):
            out[i, 0] = xn / SCALE
            out[i, 1] = yn / SCALE
            xn = (xn + a) % SCALE
            yn = (yn + yinc) % SCALE
            yinc = (yinc + 2 * a) % SCALE
        return out


def sample_transfer(sys, f, omega, L: int) -> Signal:
    """The transferred signal n -> f(T^n omega), n = 0..L-1."""
    L = int(L)
    if L < 1:
        raise DomainError("transfer length must be at least 1")
    vals = np.asarray(f(sys.orbit_array(omega, 0, L)), dtype=complex)
    bad = np.where(~np.isfinite(vals))[0]
    if len(bad):
        raise DomainError("observable undefined at orbit index %d" % int(bad[0]))
    return Signal(0, vals)


@dataclass(frozen=True)
class ScanTable:
    """ww_scan output: per-(P, N) averages plus per-P tail oscillation."""

    polys: tuple
    times: tuple
    values: dict                # (p_index, N) -> complex
    oscillation: dict           # p_index -> max adjacent |difference| in tail

    def to_csv(self, path):
        rows = []
        for i, p in enumerate(self.polys):
            ptxt = ":".join("%r" % c for c in p.coeffs)
            for N in self.times:
                v = self.values[(i, N)]
                rows.append((ptxt, N, v.real, v.imag, abs(v)))
        write_csv(path, ("P", "N", "re", "im", "abs"), rows)

    def summary_json(self):
        return json.dumps({
            "oscillation": {str(i): self.oscillation[i] for i in sorted(self.oscillation)},
            "times": list(self.times),
        })


def ww_scan(sys, f, omega, P_grid, N_grid, bump: Profile) -> ScanTable:
    """Smoothed averages over all (P, N) plus tail Cauchy oscillation.

    Every P must be tagged linear or vanish2 (the two classes the pointwise
    convergence statement covers).  Oscillation is the max |difference| over
    adjacent time pairs in the second half of the time grid.
    """
    polys = tuple(P_grid)
    for p in polys:
        if p.class_tag not in ("linear", "vanish2"):
            raise DomainError("scan polynomials must be linear or vanish2")
    times = tuple(N_grid.times if hasattr(N_grid, "times") else N_grid)
    if not times:
        raise DomainError("empty time grid")
    n_max = max(times)
    track = np.asarray(f(sys.orbit_array(omega, 0, n_max + 1)), dtype=complex)
    m_all = np.arange(n_max + 1)
    values = {}
    for i, p in enumerate(polys):
        modulated = e(polykit.phase_range(p, 0, n_max + 1)) * track
        for N in times:
            w = scaled_weight(bump, N, m_all[: N + 1])
            values[(i, N)] = complex(np.sum(w * modulated[: N + 1]))
    oscillation = {}
    tail = times[len(times) // 2:]
    for i in range(len(polys)):
        osc = 0.0
        for Na, Nb in zip(tail, tail[1:]):
            osc = max(osc, abs(values[(i, Nb)] - values[(i, Na)]))
        oscillation[i] = osc
    return ScanTable(polys=polys, times=times, values=values,
                     oscillation=oscillation)


# observable builders


def obs_indicator(lo, hi):
    """1_[lo, hi] on integer points (shift system)."""
    def f(pts):
        pts = np.asarray(pts)
        return ((pts >= lo) & (pts <= hi)).astype(complex)

    return f


def obs_torus_indicator(a, b):
    """1_[a, b) on the circle."""
    def f(pts):
        pts = np.mod(np.asarray(pts, dtype=float), 1.0)
        return ((pts >= a) & (pts < b)).astype(complex)

    return f


def obs_char(m=1):
    """x -> e(m x) on the circle."""
    def f(pts):
        return e(m * np.asarray(pts, dtype=float))

    return f


def obs_skew_char(m=1):
    """(x, y) -> e(m y) on the 2-torus."""
    def f(pts):
        return e(m * np.asarray(pts)[:, 1])

    return f


def obs_const(c=1.0):
    def f(pts):
        return np.full(len(pts), complex(c))

    return f
