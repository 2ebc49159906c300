import math

import numpy as np
import pytest

from modvar import bumpkit
from modvar.bumpkit import (Profile, a_bracket, c_phi_functional, even_part,
                            littlewood_paley_split, make_Psi, make_bump,
                            make_chi, make_psi_kernel, psi_floor_index,
                            scaled_weight)


@pytest.fixture(scope="module")
def bump():
    return make_bump(0.25)


def _zero_profile():
    return Profile(lambda t, order=0: np.zeros_like(np.asarray(t, float)),
                   (0.0, 1.0))


def test_bump_plateau_and_support(bump):
    assert bump(0.5) == 1.0
    assert bump(-0.1) == 0.0
    assert bump(1.3) == 0.0


@pytest.mark.parametrize("eps0", [0.1, 0.25])
def test_bump_l1_defect_within_budget(eps0):
    b = make_bump(eps0)
    assert b.l1_defect <= eps0
    # independent quadrature of |phi - indicator| on a fine grid
    t = np.linspace(-0.5, 1.5, 40001)
    ind = ((t >= 0.0) & (t <= 1.0)).astype(float)
    quad = np.trapezoid(np.abs(b(t) - ind), t)
    assert quad <= eps0


@pytest.mark.parametrize("eps0", [0.1, 0.25])
def test_bump_derivative_bounds_up_to_order_four(eps0):
    b = make_bump(eps0)
    t = np.linspace(-0.1, 1.4, 30001)
    assert np.max(np.abs(b(t))) <= 1.0 + 1e-12
    orders = sorted(b.deriv_constants)
    assert orders[-1] >= 4
    for a in orders:
        sup = np.max(np.abs(b.deriv(t, a)))
        assert sup <= b.deriv_constants[a] * eps0 ** (-a) * (1 + 1e-9)


def test_scaled_weight_values(bump):
    assert scaled_weight(bump, 100, 150) == 0.0
    assert scaled_weight(bump, 100, 50) == pytest.approx(0.01)
    total = sum(scaled_weight(bump, 1000, n) for n in range(0, 2001))
    assert abs(total - 1.0) <= 0.25 + 10.0 / 1000


def test_even_part_halves_and_preserves_mass(bump):
    ev = even_part(bump)
    for t in (0.2, 0.5, 0.9):
        assert ev(t) == pytest.approx(bump(t) / 2.0)
        assert ev(-t) == pytest.approx(ev(t))
    t = np.linspace(-1.5, 1.5, 20001)
    np.testing.assert_allclose(np.trapezoid(ev(t), t), bump.mass, rtol=1e-6)


@pytest.mark.parametrize("lam,k", [(1.5, 1), (1.5, 7), (2.0, 3), (2.0, 20)])
def test_psi_kernel_mean_zero(bump, lam, k):
    ker = make_psi_kernel(bump, lam, k)
    assert abs(ker.mean_defect()) <= 1e-9


def test_psi_kernel_support(bump):
    ker = make_psi_kernel(bump, 2.0, 3)
    n0, vals = ker.at_integers()
    assert n0 >= 0
    assert n0 + len(vals) - 1 <= 10 * 2 ** 3


def test_psi_sum_telescopes_to_Psi(bump):
    # summing the layer kernels must reproduce the two-term closed form
    lam, k = 1.5, 6
    t = np.linspace(-1.0, bump.support[1] * lam ** (k + 1) + 1.0, 4001)
    total = np.zeros_like(t)
    for j in range(1, k + 1):
        total += make_psi_kernel(bump, lam, j)(t)
    closed = bump(t / lam) / lam - bump(t / lam ** (k + 1)) / lam ** (k + 1)
    assert np.max(np.abs(total - closed)) <= 1e-12


def test_make_Psi_matches_layer_sum_and_difference(bump):
    lam = 2.0
    t = np.linspace(-1.0, 80.0, 2001)
    P5 = make_Psi(bump, lam, 5)
    closed = bump(t / lam) / lam - bump(t / lam ** 6) / lam ** 6
    assert np.max(np.abs(P5(t) - closed)) <= 1e-12
    P4 = make_Psi(bump, lam, 4)
    psi5 = make_psi_kernel(bump, lam, 5)
    assert np.max(np.abs((P5(t) - P4(t)) - psi5(t))) <= 1e-12


def test_make_Psi_floor_single_term(bump):
    j0 = psi_floor_index(1)
    single = make_Psi(bump, 1.5, j0, s_floor=1)
    psi = make_psi_kernel(bump, 1.5, j0)
    t = np.linspace(-1.0, 20.0, 1501)
    assert np.max(np.abs(single(t) - psi(t))) <= 1e-12


def test_chi_window_shape():
    chi = make_chi(1)
    assert chi.radius == pytest.approx(2.0 ** -(2.0 ** 0.01), rel=1e-12)
    assert chi.radius == pytest.approx(0.49759519175730593, rel=1e-9)
    for s in (1, 2, 3, 4):
        assert make_chi(s)(0.0) == 1.0
    # the vanishing region is visible once the doubled radius fits the torus
    narrow = make_chi(4, a0=0.125)
    assert 2.0 * narrow.radius + 0.01 < 0.5
    assert narrow(2.0 * narrow.radius + 0.01) == 0.0
    assert narrow(-(2.0 * narrow.radius + 0.01)) == 0.0
    assert narrow(1.0) == 1.0  # periodic in the frequency variable
    mid = narrow(1.5 * narrow.radius)
    assert 0.0 < mid < 1.0


def test_c_phi_functional_range_and_dilation_invariance(bump):
    val = c_phi_functional(bump)
    assert 0.5 <= val <= 1.5
    assert c_phi_functional(_zero_profile()) == 0.0
    # invariant under the mass-preserving dilation phi(t/R)/R
    scaled = bump.dilated(2.0, preserve_mass=True)
    assert c_phi_functional(scaled) == pytest.approx(val, rel=1e-6)


def test_a_bracket_identical_profiles_cancel(bump):
    assert a_bracket(bump, bump, 3) == 0.0


def test_a_bracket_against_zero_meets_first_term_floor(bump):
    # without cancellation every scale contributes about one bump mass
    for K in (2, 4):
        assert a_bracket(bump, _zero_profile(), K) >= (K + 1) * bump.mass * 0.9


def test_a_bracket_monotone_in_K(bump):
    assert a_bracket(bump, _zero_profile(), 3) <= \
        a_bracket(bump, _zero_profile(), 4)


def test_littlewood_paley_pieces_sum_to_profile(bump):
    lp = littlewood_paley_split(bump, 0.25, 8)
    t = lp.grid_start + lp.spacing * np.arange(len(lp.tail.values))
    total = lp.tail.values.copy()
    for piece in lp.pieces:
        assert piece.start == lp.tail.start
        assert piece.spacing == lp.tail.spacing
        total = total + piece.values
    assert np.max(np.abs(total - bump(t))) <= 1e-6


def test_littlewood_paley_l1_decay(bump):
    # smooth profile: piece mass must fall at least like 8^-j
    lp = littlewood_paley_split(bump, 0.25, 8)
    l1 = [lp.piece_l1(j) for j in range(7)]
    for j in range(1, 6):
        assert l1[j + 1] <= 0.125 * l1[j] + 1e-13


def test_littlewood_paley_frequency_concentration(bump):
    lp = littlewood_paley_split(bump, 0.25, 6)
    centers = []
    for j in (2, 3, 4):
        piece = lp.pieces[j]
        spec = np.abs(np.fft.fft(piece.values))
        freqs = np.fft.fftfreq(len(piece.values), d=piece.spacing)
        centers.append(abs(freqs[np.argmax(spec)]))
    # each successive piece lives at roughly double the frequency
    assert centers[1] / centers[0] == pytest.approx(2.0, rel=0.35)
    assert centers[2] / centers[1] == pytest.approx(2.0, rel=0.35)
