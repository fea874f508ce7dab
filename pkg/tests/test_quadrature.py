import pytest

from legendre_betti.quadrature import height_integral
from legendre_betti.sections import SIGMA


def test_plane_integral_equals_half_height():
    r = height_integral(SIGMA, eps=1e-3, tol=1e-2)
    assert abs(r.value - 0.25) <= 0.01
    assert r.error_estimate >= abs(r.value - 0.25)


def test_thread_count_does_not_change_value():
    a = height_integral(SIGMA, eps=1e-2, tol=1e-3, region="disk")
    b = height_integral(SIGMA, eps=1e-2, tol=1e-3, region="disk", threads=3)
    assert a.value == b.value


def test_disk_mass_is_small_and_positive():
    r = height_integral(SIGMA, eps=1e-3, tol=2e-4, region="disk")
    assert 0.0297 < r.value < 0.0299


def test_bad_exclusion_radius():
    with pytest.raises(ValueError):
        height_integral(SIGMA, eps=0.5)
