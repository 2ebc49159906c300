"""Exact orbit arithmetic for the three model systems."""

import math
from fractions import Fraction

import numpy as np
import pytest

from modvar import polykit
from modvar.bumpkit import make_bump
from modvar.systems import (
    ALPHA_ROTATION,
    ALPHA_SKEW,
    SCALE,
    CircleRotation,
    SkewProduct,
    ZShift,
    obs_char,
    obs_const,
    obs_indicator,
    obs_skew_char,
    obs_torus_indicator,
    sample_transfer,
    ww_scan,
)
from modvar.util import DomainError

import oracles


def test_zshift_orbit():
    z = ZShift()
    assert z.orbit_point(0, 7) == 7
    assert z.orbit_point(-3, 5) == 2
    assert np.array_equal(z.orbit_array(10, 0, 4), [10, 11, 12, 13])


def test_default_angles_are_quadratic_irrationals():
    assert ALPHA_ROTATION / SCALE == pytest.approx(math.sqrt(2) - 1, abs=1e-15)
    assert ALPHA_SKEW / SCALE == pytest.approx(math.sqrt(3) - 1, abs=1e-15)


def test_rotation_orbit_matches_fraction_oracle():
    rot = CircleRotation()
    for n in [0, 1, 7, 100, 12345]:
        want = oracles.rotation_orbit_exact(rot.alpha_scaled, SCALE, n)
        assert rot.orbit_point(0, n) == pytest.approx(float(want), abs=1e-15)


def test_rotation_orbit_array_consistent():
    rot = CircleRotation(alpha=0.25)
    arr = rot.orbit_array(0.5, 3, 6)
    for i, n in enumerate(range(3, 9)):
        assert arr[i] == pytest.approx(rot.orbit_point(0.5, n), abs=1e-15)
    # dyadic angle: orbit is exactly periodic with period 4
    assert arr[0] == arr[4]


def test_rotation_dyadic_angle_is_exact():
    rot = CircleRotation(alpha=0.125)
    assert rot.alpha_scaled * 8 == SCALE
    assert rot.orbit_point(0, 8) == 0.0
    assert rot.orbit_point(0, 3) == 0.375


def test_skew_closed_form_matches_stepwise_oracle():
    sk = SkewProduct()
    got = sk.orbit_array((0, 0), 0, 101)
    for n in [1, 2, 10, 57, 100]:
        x, y = oracles.skew_orbit_steps(sk.alpha_scaled, SCALE, (0, 0), n)
        assert got[n, 0] == pytest.approx(float(x), abs=1e-15)
        assert got[n, 1] == pytest.approx(float(y), abs=1e-15)


def test_skew_orbit_point_matches_array():
    sk = SkewProduct(alpha=0.375)
    arr = sk.orbit_array((0.5, 0.25), 2, 20)
    for i, n in enumerate(range(2, 22)):
        x, y = sk.orbit_point((0.5, 0.25), n)
        assert arr[i, 0] == pytest.approx(x, abs=1e-15)
        assert arr[i, 1] == pytest.approx(y, abs=1e-15)


def test_skew_second_coordinate_formula():
    # with alpha = 1/4 and omega = (0, 0): y_n = n^2 / 4 mod 1
    sk = SkewProduct(alpha=0.25)
    for n in range(12):
        assert sk.orbit_point((0, 0), n)[1] == pytest.approx(
            (n * n % 4) / 4.0, abs=1e-15)


def test_sample_transfer_indicator():
    z = ZShift()
    f = obs_indicator(0, 4)
    sig = sample_transfer(z, f, 0, 10)
    assert sig.support_start == 0
    assert np.array_equal(sig.values.real, [1, 1, 1, 1, 1, 0, 0, 0, 0, 0])
    with pytest.raises(DomainError):
        sample_transfer(z, f, 0, 0)


def test_sample_transfer_rejects_nonfinite():
    z = ZShift()

    def bad(pts):
        out = np.ones(len(pts), dtype=complex)
        out[3] = np.nan
        return out

    with pytest.raises(DomainError):
        sample_transfer(z, bad, 0, 5)


def test_observable_builders():
    assert np.array_equal(obs_torus_indicator(0.2, 0.7)(np.array([0.1, 0.2, 0.69, 0.7])),
                          [0, 1, 1, 0])
    vals = obs_char(2)(np.array([0.0, 0.25]))
    assert vals[0] == pytest.approx(1.0)
    assert vals[1] == pytest.approx(-1.0)
    pts = np.array([[0.5, 0.25], [0.0, 0.5]])
    sk_vals = obs_skew_char(1)(pts)
    assert sk_vals[0] == pytest.approx(1j)
    assert sk_vals[1] == pytest.approx(-1.0)
    assert np.array_equal(obs_const(2.5)(np.zeros(3)), [2.5, 2.5, 2.5])


def test_ww_scan_rejects_general_polynomials():
    z = ZShift()
    with pytest.raises(DomainError):
        ww_scan(z, obs_const(), 0, [polykit.Poly.zero()], [10, 20], make_bump(0.25))


def test_ww_scan_shapes_and_oscillation():
    z = ZShift()
    bump = make_bump(0.25)
    p = polykit.Poly.linear(0.0)
    table = ww_scan(z, obs_const(), 0, [p], [8, 16, 32, 64], bump)
    assert set(table.values) == {(0, 8), (0, 16), (0, 32), (0, 64)}
    # constant observable at theta 0: every average is the weight mass
    masses = [table.values[(0, N)] for N in table.times]
    assert max(abs(m - masses[0]) for m in masses) < 0.05
    assert table.oscillation[0] < 0.05


def test_rotation_rejects_nothing_on_scaled_input():
    rot = CircleRotation(scaled=12345)
    assert rot.alpha_scaled == 12345
    assert rot.alpha == pytest.approx(12345 / SCALE)
