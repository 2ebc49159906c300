"""Arc multipliers, maximal/variation operators, and their guard rails."""

from fractions import Fraction

import numpy as np
import pytest

from modvar.bumpkit import make_Psi, make_bump, make_chi, psi_floor_index
from modvar.multipliers import (
    MIN_MODULUS,
    ArcMultiplier,
    arc_indicator_radius,
    build_arc_multiplier,
    kernel_gate,
    lambda_grid_for,
    maximal_arc_ratio,
    seqspace_freqs,
    seqspace_ratio,
    snap_to_grid,
    vr_s_operator,
    vr_sd_operator,
    vrd_operator,
)
from modvar.signalkit import CyclicSignal, Signal
from modvar.util import DomainError, GridTooCoarseError, e

import oracles

BUMP = make_bump(0.25)


def test_maximal_arc_ratio_zero_signal():
    f = CyclicSignal(np.zeros(256, dtype=complex))
    assert maximal_arc_ratio(1, f) == 0.0


def test_maximal_arc_ratio_point_mass_near_one():
    vals = np.zeros(512, dtype=complex)
    vals[0] = 1.0
    ratio = maximal_arc_ratio(1, CyclicSignal(vals))
    assert ratio <= 1.0 + 1e-12
    assert ratio > 0.9


def test_maximal_arc_ratio_level_one_is_plain_window():
    # level 1 has the single arc at frequency 0 with unit weight, so the
    # operator reduces to the chi window filter
    rng = np.random.default_rng(7)
    f = CyclicSignal(rng.normal(size=512) + 1j * rng.normal(size=512))
    chi = make_chi(1)
    fhat = np.fft.fft(f.values)
    g = np.fft.ifft(chi(np.arange(512) / 512) * fhat)
    want = float(np.linalg.norm(np.abs(g)) / f.l2())
    assert maximal_arc_ratio(1, f) == pytest.approx(want, abs=1e-12)


def test_maximal_arc_ratio_tone_outside_all_windows():
    # narrow windows (radius 1/16) around {0, 1/3, 1/2, 2/3}; a tone at
    # 5/6 sits farther than 2 * radius from each, so the output vanishes
    M = 4096
    b = round(5 * M / 6)
    f = CyclicSignal(e(np.arange(M) * b / M))
    assert maximal_arc_ratio(2, f, chi_a0=0.1) < 1e-10


def test_maximal_arc_ratio_rejects_bad_level():
    f = CyclicSignal(np.ones(64, dtype=complex))
    with pytest.raises(DomainError):
        maximal_arc_ratio(0, f)
    with pytest.raises(DomainError):
        maximal_arc_ratio(5, f)


def test_seqspace_freqs_level_two():
    assert seqspace_freqs(2) == (Fraction(0), Fraction(1, 3), Fraction(1, 2),
                                 Fraction(2, 3))


def test_seqspace_ratio_zero_coefficients():
    assert seqspace_ratio(np.zeros(4), 2, (0, 64)) == 0.0


def test_seqspace_ratio_level_one_unit():
    # single frequency 0 with weight S = 1: the map is the constant 1
    assert seqspace_ratio([1.0], 1, (0, 16)) == pytest.approx(1.0, abs=1e-12)


def test_seqspace_ratio_half_frequency_full_weight():
    # B/Q = 1/2 carries |S(1,1;2)| = 1, so a pure coefficient there attains 1
    c = [0.0, 0.0, 1.0, 0.0]
    assert seqspace_ratio(c, 2, (0, 64)) == pytest.approx(1.0, abs=1e-12)


def test_seqspace_ratio_validates_input():
    with pytest.raises(DomainError):
        seqspace_ratio([1.0, 0.0], 1, (0, 16))       # wrong length
    with pytest.raises(DomainError):
        seqspace_ratio([1.0], 1, (0, 1))             # interval too short


def test_snap_accepts_fine_grid():
    b0, off = snap_to_grid(6720, 5, 7, 0.01)
    assert b0 == 4800
    assert off == 0.0


def test_snap_rejects_coarse_grid():
    with pytest.raises(GridTooCoarseError):
        snap_to_grid(64, 1, 13, 0.001)


def test_kernel_gate_open_at_zero_offset():
    assert kernel_gate((0.0,), 5)
    assert kernel_gate((0.0, 0.0), 50)


def test_kernel_gate_closes_on_large_offset():
    assert not kernel_gate((0.25,), 30)


def test_lambda_grid_counts():
    assert len(lambda_grid_for(1, 2)) == 3
    assert len(lambda_grid_for(2, 2)) == 9
    half = arc_indicator_radius(1) / 2
    pts = lambda_grid_for(1, 2)
    assert sorted(p[0] for p in pts) == pytest.approx(
        sorted([(0 - half) % 1, 0.0, half]), abs=1e-18)


def test_build_arc_multiplier_guards():
    with pytest.raises(DomainError):
        build_arc_multiplier(1, 5, (0.0,), BUMP, 1.5, 512)   # below MIN_MODULUS
    with pytest.raises(DomainError):
        build_arc_multiplier(0, 5, (0.0,), BUMP, 1.5, MIN_MODULUS)
    j0 = psi_floor_index(1)
    with pytest.raises(DomainError):
        build_arc_multiplier(1, j0 - 1, (0.0,), BUMP, 1.5, MIN_MODULUS)


def test_arc_multiplier_apply_parseval():
    rng = np.random.default_rng(11)
    j0 = psi_floor_index(1)
    mult = build_arc_multiplier(1, j0 + 2, (0.0,), BUMP, 1.5, 512,
                                strict_modulus=False)
    f = CyclicSignal(rng.normal(size=512) + 1j * rng.normal(size=512))
    g = mult.apply(f)
    assert g.l2() <= mult.sup_abs() * f.l2() * (1 + 1e-12)
    assert len(mult.contributors) == 1
    with pytest.raises(DomainError):
        mult.apply(CyclicSignal(np.ones(256, dtype=complex)))


def test_build_arc_multiplier_far_lambda_is_zero():
    mult = build_arc_multiplier(1, psi_floor_index(1) + 1, (0.5,), BUMP, 1.5,
                                512, strict_modulus=False)
    assert mult.contributors == []
    assert mult.sup_abs() == 0.0
    assert mult.lambda_lipschitz == 0.0


def test_vr_s_operator_trivial_cases():
    rng = np.random.default_rng(3)
    j0 = psi_floor_index(1)
    f = CyclicSignal(rng.normal(size=256) + 0j)
    single = vr_s_operator(1, f, [j0], 2.5, BUMP)
    assert np.max(single.values) == 0.0       # one scale has no variation
    zero = vr_s_operator(1, CyclicSignal(np.zeros(256, dtype=complex)),
                         [j0, j0 + 1], 2.5, BUMP)
    assert np.max(zero.values) == 0.0
    with pytest.raises(DomainError):
        vr_s_operator(1, f, [j0 + 1, j0], 2.5, BUMP)
    with pytest.raises(DomainError):
        vr_s_operator(1, f, [j0 - 1, j0], 2.5, BUMP)


def test_vr_sd_operator_far_grid_vanishes():
    rng = np.random.default_rng(5)
    f = CyclicSignal(rng.normal(size=512) + 0j)
    j0 = psi_floor_index(1)
    out = vr_sd_operator(1, f, [j0, j0 + 1, j0 + 2], [(0.5,)], 2.5, BUMP,
                         strict_modulus=False)
    assert np.max(out.values) == 0.0
    empty = vr_sd_operator(1, f, [j0, j0 + 1], [], 2.5, BUMP,
                           strict_modulus=False)
    assert np.max(empty.values) == 0.0


def test_vr_sd_matches_vr_s_at_arc_center():
    # lambda exactly on the level-1 arc: offsets vanish and the two
    # operators use identical kernels
    rng = np.random.default_rng(13)
    f = CyclicSignal(rng.normal(size=512) + 1j * rng.normal(size=512))
    j0 = psi_floor_index(1)
    J_list = [j0, j0 + 1, j0 + 2]
    a = vr_s_operator(1, f, J_list, 2.5, BUMP)
    b = vr_sd_operator(1, f, J_list, [(0.0,)], 2.5, BUMP,
                       strict_modulus=False)
    assert np.max(np.abs(a.values - b.values)) < 1e-12


def test_vrd_operator_guards_and_single_scale():
    f = Signal(0, np.ones(8, dtype=complex))
    out = vrd_operator(f, BUMP, 1.5, [], [3], 2.5)
    assert np.max(out.values) == 0.0
    with pytest.raises(DomainError):
        vrd_operator(f, BUMP, 1.5, [], [], 2.5)
    with pytest.raises(DomainError):
        vrd_operator(f, BUMP, 1.5, [], [3, 2], 2.5)


def test_vrd_operator_matches_dfs_oracle():
    rng = np.random.default_rng(17)
    f = Signal(0, rng.normal(size=6) + 1j * rng.normal(size=6))
    k_list = [1, 2, 3, 4]
    r = 2.5
    out = vrd_operator(f, BUMP, 1.5, [], k_list, r)
    # rebuild the per-scale convolutions independently and take the exact
    # variation by exhaustive search at a few output positions
    kers = {k: make_Psi(BUMP, 1.5, k).at_integers() for k in k_list}
    for x in [out.support_start, 0, 2, 5, out.support_start + len(out) - 1]:
        seq = []
        for k in k_list:
            n0, vals = kers[k]
            tot = 0.0 + 0.0j
            for i, kv in enumerate(vals):
                n = n0 + i
                if 0 <= x - n < len(f):
                    tot += kv * f.values[x - n]
            seq.append(tot)
        want = oracles.vr_dfs(seq, r)
        got = out.values[x - out.support_start]
        assert got == pytest.approx(want, abs=1e-10)
