"""Shared numerical helpers: unit-circle phases, torus distance, seeded streams.

Phases are handled in revolutions (fractions of a full turn) rather than
radians, so that reduction mod 1 can be done exactly in integer arithmetic
before any trig function sees the value.
"""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi


class DomainError(ValueError):
    """An argument lies outside the contract of the operation."""


class GridTooCoarseError(DomainError):
    """A rational frequency cannot be snapped to the grid accurately enough."""


def e(phase):
    """exp(2*pi*i*phase), phase in revolutions. Accepts scalars or arrays."""
    return np.exp(2j * np.pi * np.asarray(phase, dtype=float))


def torus_dist(x, y=0.0):
    """Distance on R/Z: min_k |x - y - k|. Vectorized."""
    d = np.mod(np.asarray(x, dtype=float) - y, 1.0)
    return np.minimum(d, 1.0 - d)


def torus_signed(x):
    """Representative of x mod 1 in [-1/2, 1/2). Vectorized."""
    d = np.mod(np.asarray(x, dtype=float), 1.0)
    return np.where(d >= 0.5, d - 1.0, d)


def frac_mod1_exact(coeff: float, n_pow: int) -> float:
    """coeff * n_pow mod 1, exactly, for float coeff and integer n_pow.

    Uses the dyadic-rational representation of the float: coeff = p / 2^k
    exactly, so coeff * n_pow mod 1 = (p * n_pow mod 2^k) / 2^k with integer
    arithmetic throughout.  The only rounding is the final division.
    """
    if n_pow == 0:
        return 0.0
    p, q = float(coeff).as_integer_ratio()
    return ((p * n_pow) % q) / q


def stream(seed: int, draw: int) -> np.random.Generator:
    """Counter-based per-draw RNG stream.

    Each (seed, draw) pair keys an independent Philox stream, so draw i is
    the same whether draws run serially or in parallel.
    """
    return np.random.Generator(np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, draw]))


def format_float(x) -> str:
    """Canonical 17-significant-digit text form used in all CSV output."""
    if isinstance(x, complex) or isinstance(x, np.complexfloating):
        return "%.17g%+.17gj" % (x.real, x.imag)
    return "%.17g" % x


def write_csv(path, header, rows):
    """Deterministic CSV writer: fixed header, '%.17g' floats, '\\n' endings."""
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = []
            for v in row:
                if isinstance(v, (float, np.floating, complex, np.complexfloating)):
                    cells.append(format_float(v))
                else:
                    cells.append(str(v))
            fh.write(",".join(cells) + "\n")
