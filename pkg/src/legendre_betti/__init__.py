"""Sections of the Legendre curve y² = x(x−1)(x−λ): exact multiples, the Ξ operator,
Betti coordinates and density, and approximation checks over Q(t)."""

from .sections import SIGMA, TAU, LegendreSection, abscissa_fraction
from .xi import xi_value
from .periods import periods, betti_density
from .quadrature import height_integral
from .laurent import laurent_expand
from .cf import cf_expand

__version__ = "0.1.0"

__all__ = [
    "SIGMA",
    "TAU",
    "LegendreSection",
    "abscissa_fraction",
    "xi_value",
    "periods",
    "betti_density",
    "height_integral",
    "laurent_expand",
    "cf_expand",
]
