from fractions import Fraction

import pytest

from legendre_betti.algebra import LAM, RatFunc, parse_ratfunc
from legendre_betti.sections import (
    SIGMA,
    TAU,
    LegendreSection,
    abscissa_fraction,
    canonical_height_estimate,
    degree_profile,
    expected_degrees,
    scalar_mul,
    zimmer_check,
)


def test_doubling_formula():
    assert abscissa_fraction(2).ratfunc() == RatFunc(-(LAM - 4) ** 2, 8 * (LAM - 2))


def test_group_law_agrees_with_division_recursion():
    for n in range(1, 7):
        abscissa_fraction(n, verify=True)
    abscissa_fraction(5, TAU, verify=True)


@pytest.mark.parametrize("n", range(1, 13))
def test_degree_laws(n):
    assert degree_profile(n) == expected_degrees(n)


def test_denominator_shape():
    af = abscissa_fraction(4)
    assert af.structural_ok
    assert af.b_n == 32
    assert af.B == af.b_n * (LAM - 2) * af.C ** 2


def test_integer_coefficients():
    af = abscissa_fraction(5)
    assert all(c.denominator == 1 for c in af.A.coefficients + af.B.coefficients)


def test_canonical_height_tends_to_half():
    est = canonical_height_estimate(12)
    assert est.extrapolated == Fraction(1, 2)
    assert dict(est.estimates)[12] == Fraction(1, 2)


def test_zimmer_slack_nonnegative():
    curve = SIGMA.curve()
    P = SIGMA.point()
    for n in (1, 2, 3):
        assert zimmer_check(scalar_mul(curve, n, P), Fraction(n * n, 2), curve) >= 0


def test_section_from_config():
    sec = LegendreSection.from_config({"x": "3", "mu_sq": "18-6*l"})
    assert sec.xi == parse_ratfunc("3")
    assert abscissa_fraction(2, sec).ratfunc() == abscissa_fraction(2, TAU).ratfunc()


def test_bad_mu_sq_rejected():
    with pytest.raises(ValueError):
        LegendreSection.from_config({"x": "2", "mu_sq": "l"})


def test_zero_multiple_rejected():
    with pytest.raises(ValueError):
        abscissa_fraction(0)
