from fractions import Fraction

import pytest

from legendre_betti.algebra import LAM, ExactPoly, RatFunc, ord_poly, parse_ratfunc, squarefree_decompose


def test_parse_and_render_round_trip():
    r = parse_ratfunc("(l-4)^2/(8*(l-2))")
    assert r == RatFunc((LAM - 4) ** 2, 8 * (LAM - 2))
    assert parse_ratfunc(r.to_str()) == r


def test_numeric_division_stays_rational():
    assert parse_ratfunc("1/3*l") == RatFunc(ExactPoly([0, Fraction(1, 3)]))


def test_factor_and_squarefree():
    p = 32 * (LAM - 2) * LAM ** 2 * (3 * LAM ** 2 - 16 * LAM + 16) ** 2
    content, factors = p.factor()
    assert content == 32
    assert sorted((f.degree(), e) for f, e in factors) == [(1, 1), (1, 2), (1, 2), (1, 2)]
    assert {e for _, e in squarefree_decompose(p)} == {1, 2}


def test_ord_poly():
    p = (LAM - 2) ** 3 * (LAM + 1)
    assert ord_poly(p, LAM - 2) == 3
    assert ord_poly(p, LAM - 5) == 0


def test_ratfunc_arithmetic_normalizes():
    a = RatFunc(LAM ** 2 - 1, LAM - 1)
    assert a == RatFunc(LAM + 1)
    assert (a / a) == RatFunc(1)
    with pytest.raises(ZeroDivisionError):
        a / RatFunc(0)


def test_integer_rendering():
    assert (2 * LAM ** 2 - 3).to_str() == "2*l^2 - 3"
