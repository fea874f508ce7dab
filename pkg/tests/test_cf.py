import random

import pytest

from legendre_betti.algebra import ExactPoly, RatFunc
from legendre_betti.cf import (
    PrecisionExhausted,
    best_approximation_check,
    cf_expand,
    liouville_check,
    quartic_series,
    roth_bound_holds,
    roth_example_check,
    zero_gap_stats,
)
from legendre_betti.laurent import quartic_branch

t = ExactPoly.gen()


def test_convergent_identity():
    exp = cf_expand(quartic_series(80), 30)
    cs = exp.convergents
    for a, b in zip(cs, cs[1:]):
        assert a.ord == a.deg_q + b.deg_q


def test_first_convergent():
    c = cf_expand(quartic_series(22), 3).convergents[1]
    assert (c.p, c.q, c.ord) == (ExactPoly([-1]), t, 4)


def test_rational_input_terminates():
    exp = cf_expand(RatFunc(t ** 2 + 1, t ** 3 - 2), 10)
    assert exp.terminated
    assert exp.convergents[-1].ord is None


def test_precision_margin_enforced():
    with pytest.raises(PrecisionExhausted):
        cf_expand(quartic_series(10), 40)


def test_roth_bound_to_degree_60():
    rep = roth_example_check(60)
    assert rep.tight
    assert rep.first == (1, 4)


def test_roth_bound_exact_arithmetic():
    assert roth_bound_holds(2 * 32 + 3 * 16, 32, 0)
    assert not roth_bound_holds(2 * 32 + 3 * 16 + 1, 32, 0)
    with pytest.raises(ValueError):
        roth_bound_holds(5, 0)


def test_liouville_norm_bound():
    r = liouville_check(ExactPoly([-1]), t)
    assert r.conditions_hold and r.lhs_ord == 4 <= r.rhs_bound
    assert sum(r.conjugate_ords) + r.lhs_ord == r.norm_ord


def test_zero_gaps():
    g = zero_gap_stats(quartic_branch("alpha", 60), 60)
    assert max(n for _, n in g.gaps) == 2


def test_best_approximation_exhaustive_small():
    res = best_approximation_check(quartic_series(80), max_deg=5, random_trials=20, random_deg=20,
                                   rng=random.Random(1))
    assert res["violations"] == 0
