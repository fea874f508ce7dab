import random

import pytest

from legendre_betti.algebra import LAM, RatFunc
from legendre_betti.fields import QuadField
from legendre_betti.sections import SIGMA, TAU, scalar_mul
from legendre_betti.xi import (
    beta_consistency,
    multiplicity_report,
    pole_multiplicity_scan,
    random_exact_point,
    sharpness_family,
    two_section_beta,
    xi_apply,
    xi_oddness_check,
    xi_value,
)


def test_xi_of_sigma_and_tau():
    for sec, c in ((SIGMA, 2), (TAU, 3)):
        P = sec.point()
        want = P.x.field(0, RatFunc(2) / (c - LAM) ** 2)
        assert (xi_value(P.x, P.y) - want).is_zero()


@pytest.mark.parametrize("n", range(2, 7))
def test_xi_is_additive(n):
    P = SIGMA.point()
    Q = scalar_mul(SIGMA.curve(), n, P)
    assert (xi_value(Q.x, Q.y) - n * xi_value(P.x, P.y)).is_zero()


def test_oddness_on_random_points():
    rng = random.Random(3)
    for _ in range(5):
        P = random_exact_point(rng)
        assert xi_oddness_check(P.x, P.y)


def test_two_torsion_rejected():
    K = QuadField(None)
    with pytest.raises(ValueError):
        xi_apply(K(RatFunc(0)), K(RatFunc(0)))


def test_multiplicities_bounded():
    for rep in pole_multiplicity_scan(12):
        assert rep.max_w_away_from_2 <= 4
        assert rep.w_at_2 <= 2
        assert not rep.flagged
    assert multiplicity_report(2).w_at_2 == 1


def test_sharpness_family_small_d():
    rep = sharpness_family(3)
    assert rep.ok
    assert rep.leading_coefficient == 4 * 2 ** 4
    assert rep.leading_degree == 24


def test_sharpness_rejects_d_one():
    with pytest.raises(ValueError):
        sharpness_family(1)


def test_two_section_height():
    assert two_section_beta(1, 1).h_beta == 12
    assert beta_consistency(2, -1)
    with pytest.raises(ValueError):
        two_section_beta(0, 0)
