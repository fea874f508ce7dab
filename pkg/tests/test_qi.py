from fractions import Fraction

import pytest

from legendre_betti.qi import MANIN_BOUND, genus_of, quasi_integrality_report
from legendre_betti.sections import SIGMA, LegendreSection


def test_pole_depths_bounded():
    rep = quasi_integrality_report(range(1, 13))
    assert rep.max_M <= MANIN_BOUND
    assert rep.genus == 0


def test_fourth_multiple_depth():
    row = quasi_integrality_report([4]).rows[0]
    assert row.M == 2
    assert "l" in row.table


def test_budget_digit_count():
    rep = quasi_integrality_report([1])
    assert rep.rho_log2 == 2560000
    assert rep.rho_digits == 770637


def test_zimmer_slacks():
    rep = quasi_integrality_report(range(1, 5), zimmer_max=4)
    assert all(r.zimmer_slack >= 0 for r in rep.rows)


def test_genus_of_hyperelliptic_layer():
    sec = LegendreSection.from_config({"x": "l^2 + 2"})
    assert genus_of(sec) == 2  # six branch points
    assert genus_of(SIGMA) == 0


def test_eps_range():
    with pytest.raises(ValueError):
        quasi_integrality_report([1], eps=Fraction(1, 8))
