import numpy as np
import pytest

from modvar.util import (e, frac_mod1_exact, stream, torus_dist,
                         torus_signed, write_csv)

import oracles


def test_stream_is_deterministic_and_split_by_draw():
    a = stream(7, 0).standard_normal(8)
    b = stream(7, 0).standard_normal(8)
    c = stream(7, 1).standard_normal(8)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c)


def test_unit_phase_quarter_turn():
    assert e(0.25) == pytest.approx(1j, abs=1e-15)
    assert e(0.0) == 1.0
    np.testing.assert_allclose(np.abs(e(np.linspace(0, 1, 17))), 1.0,
                               atol=1e-15)


def test_torus_distance_and_signed_representative():
    assert torus_dist(0.9, 0.1) == pytest.approx(0.2)
    assert torus_signed(0.75) == pytest.approx(-0.25)
    assert torus_signed(0.25) == pytest.approx(0.25)
    assert torus_dist(1.0) == 0.0


@pytest.mark.parametrize("coeff,n", [
    (0.3333333333333333, 10 ** 6),
    (1.4142135623730951, 12345),
    (-0.7071067811865476, 999983),
])
def test_exact_monomial_phase_matches_fraction_arithmetic(coeff, n):
    got = frac_mod1_exact(coeff, n)
    want = oracles.phase_fraction((0.0, coeff), n)
    assert torus_dist(got, want) < 1e-12


def test_csv_bytes_are_reproducible(tmp_path):
    rows = [(1, 0.5, "x"), (2, 1.0 / 3.0, "y")]
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(p1, ("i", "v", "tag"), rows)
    write_csv(p2, ("i", "v", "tag"), rows)
    assert p1.read_bytes() == p2.read_bytes()
    assert p1.read_bytes().startswith(b"i,v,tag")
