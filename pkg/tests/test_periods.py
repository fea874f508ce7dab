import mpmath as mp
import pytest

from legendre_betti.periods import (
    SingularFiberError,
    agm_hyp_discrepancy,
    betti_density,
    density_closed_form,
    density_fd,
    distance_to_grid,
    periods,
    picard_fuchs_residual,
    section_betti,
)
from legendre_betti.sections import SIGMA, TAU


@pytest.mark.parametrize("lam", [mp.mpf(1) / 2, mp.mpc(0.3, 0.4), mp.mpc(-2, 1), mp.mpc(4, -3)])
def test_legendre_and_picard_fuchs(lam):
    fr = periods(lam)
    assert fr.legendre_residual() < 1e-10
    assert max(picard_fuchs_residual(fr)) < 1e-8
    assert agm_hyp_discrepancy(lam) < 1e-9


def test_square_period_ratio_at_half():
    assert abs(periods(mp.mpf(1) / 2).tau - 1j) < 1e-9


def test_upper_half_plane():
    for lam in (mp.mpc(0.2, 0.1), mp.mpc(3, -2), mp.mpc(-5, 0.5)):
        assert mp.im(periods(lam).tau) > 0


@pytest.mark.parametrize("lam", [0, 1])
def test_singular_fibres(lam):
    with pytest.raises(SingularFiberError):
        periods(lam)


def test_density_two_routes():
    for z in (0.3 + 0.2j, -1 + 2j, 2.5 - 0.7j):
        a = density_closed_form(z, SIGMA)
        b = density_fd(z, SIGMA)
        assert abs(a - b) <= 1e-6 * b


def test_density_sample_and_unknown_method():
    s = betti_density(0.4 + 0.4j, TAU)
    assert s.density > 0
    with pytest.raises(ValueError):
        betti_density(0.4 + 0.4j, TAU, method="nope")


def test_betti_coordinates_in_unit_square():
    b = section_betti(mp.mpc(0.3, 0.6), SIGMA)
    assert 0 <= b.beta1 < 1 and 0 <= b.beta2 < 1


def test_distance_to_grid():
    assert distance_to_grid((1 / 3, 2 / 3), 3) < 1e-15
    assert distance_to_grid((0.1, 0.0), 2) > 0.05
