from fractions import Fraction

import pytest

from legendre_betti.algebra import ExactPoly, RatFunc
from legendre_betti.laurent import (
    OMEGA,
    LaurentSeries,
    MinPoly,
    PrecisionExhausted,
    QOmega,
    UnsupportedBranch,
    laurent_expand,
    parse_seed,
    quartic_branch,
    residual_valuation,
)


def test_quartic_root_coefficients():
    a = quartic_branch("alpha", 20)
    want = {1: -1, 4: 1, 7: -4, 10: 22, 13: -140, 16: 969, 19: -7084}
    assert a.coefficients == {k: Fraction(v) for k, v in want.items()}


def test_conjugate_branches():
    a1 = quartic_branch("alpha1", 3)
    assert [a1.coeff(e) for e in range(3)] == [1, Fraction(1, 3), Fraction(-2, 9)]
    a2 = quartic_branch("alpha2", 2)
    assert a2.coeff(0) == OMEGA
    assert a2.coeff(1) == QOmega(Fraction(1, 3))


def test_cubic_example():
    s = laurent_expand("X^3 - X - 1/t", "-1/t", 10)
    assert s.coefficients == {1: -1, 3: -1, 5: -3, 7: -12, 9: -55}
    s = laurent_expand("X^3 - t*X - 1", "-1/t", 10)
    assert s.coefficients == {1: -1, 4: -1, 7: -3}


def test_rational_root_is_exact():
    s = laurent_expand("X - t", "t", 5)
    assert s.is_exact
    assert s == LaurentSeries.from_poly_t(ExactPoly.gen())


def test_residual_certifies_precision():
    P = MinPoly.parse("X^4 - X - 1/t")
    s = quartic_branch("alpha", 40)
    assert residual_valuation(P, s) >= 40


def test_coefficient_beyond_precision_raises():
    s = quartic_branch("alpha", 10)
    with pytest.raises(PrecisionExhausted):
        s.coeff(10)


def test_multiple_root_seed_rejected():
    with pytest.raises(UnsupportedBranch):
        laurent_expand("(X - 1)^2 - 1/t", "1", 5)


def test_series_arithmetic():
    x = LaurentSeries.from_ratfunc(RatFunc(ExactPoly([1]), ExactPoly([1, 1])), 12)
    y = x.inverse()
    assert (x * y - LaurentSeries.monomial(Fraction(1), 0)).is_zero()
    assert parse_seed("w^2") == LaurentSeries.monomial(OMEGA * OMEGA, 0)


def test_omega_arithmetic():
    assert OMEGA ** 3 == QOmega(Fraction(1))
    assert OMEGA * OMEGA + OMEGA + 1 == QOmega(Fraction(0))
