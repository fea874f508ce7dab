import mpmath as mp
import pytest

from legendre_betti.algebra import LAM
from legendre_betti.torsion import (
    aberth_roots,
    exact_distinct_root_count,
    flint_roots,
    torsion_count,
    torsion_grid_check,
    torsion_parameters,
)


def test_aberth_matches_flint():
    p = LAM ** 5 - 3 * LAM ** 2 + 7
    ours = [complex(r) for r in aberth_roots(p)]
    ref = flint_roots(p)
    assert len(ours) == len(ref) == 5
    assert all(min(abs(a - b) for b in ref) < 1e-14 for a in ours)


def test_aberth_handles_zero_roots():
    roots = aberth_roots(LAM * (LAM - 3) * (LAM + 2))
    assert sum(1 for r in roots if r == 0) == 1
    assert sorted(round(float(mp.re(r))) for r in roots) == [-2, 0, 3]


def test_full_plane_count():
    assert exact_distinct_root_count(20) == 100
    assert exact_distinct_root_count(7) == 12


def test_root_set_cross_check():
    rs = torsion_parameters(8)
    assert rs.cross_check < 1e-20
    assert rs.distinct() == 16


def test_three_torsion_on_grid():
    worst, _ = torsion_grid_check(3)
    assert worst < 1e-8


def test_disk_count_uses_supplied_mass():
    tc = torsion_count(20, disk=(0j, 1.0), region_mass=0.0298055)
    assert tc.count == 11
    assert tc.relative_gap < 0.08


def test_small_n_rejected():
    with pytest.raises(ValueError):
        torsion_count(1)
