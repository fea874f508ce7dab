"""Pole depths of x(nσ) on the base curve and the effective quasi-integrality budget."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import mpmath as mp

from .fields import height, ord_at, poles
from .sections import (
    SIGMA,
    CurveFF,
    LegendreSection,
    StructuralError,
    _table,
    curve_height,
    scalar_mul,
    zimmer_check,
)

MANIN_BOUND = 4


def genus_of(section: LegendreSection) -> int:
    """Genus of the double cover μ² = f(λ) by Riemann–Hurwitz: r/2 − 1 for r branch points."""
    F = section.field()
    if F.modulus is None:
        return 0
    r = sum(v.degree for v in F.ramified_places())
    return r // 2 - 1


@dataclass
class QIRow:
    n: int
    M: int
    place: str
    h: int
    table: dict[str, int]
    zimmer_slack: Optional[Fraction] = None

    def to_json(self) -> dict:
        out = {"n": self.n, "M_n": self.M, "deepest_place": self.place, "h_x": self.h,
               "pole_orders": self.table}
        if self.zimmer_slack is not None:
            out["zimmer_slack"] = str(self.zimmer_slack)
        return out


@dataclass
class QIReport:
    eps: Fraction
    rows: list[QIRow]
    genus: int
    h_E: int
    rho_log2: Fraction
    rho_digits: int
    logC_digits: int
    notes: list[str] = field(default_factory=list)

    @property
    def max_M(self) -> int:
        return max(r.M for r in self.rows)

    def to_json(self) -> dict:
        return {
            "eps": str(self.eps),
            "rows": [r.to_json() for r in self.rows],
            "max_M_n": self.max_M,
            "manin_bound": MANIN_BOUND,
            "genus": self.genus,
            "h_E": self.h_E,
            "rho": f"2^({self.rho_log2})",
            "rho_decimal_digits": self.rho_digits,
            "log_C": f"2^({self.rho_log2}) * ({self.genus} + {self.h_E})",
            "log_C_decimal_digits": self.logC_digits,
            "notes": self.notes,
        }


def _decimal_digits(log2_value: Fraction, factor: int = 1) -> int:
    """Digits of 2^log2_value·factor, from a 60-digit logarithm (never materialized)."""
    with mp.workdps(60):
        x = mp.mpf(log2_value.numerator) / log2_value.denominator * mp.log10(2)
        if factor > 1:
            x += mp.log10(factor)
        return int(mp.floor(x)) + 1


def quasi_integrality_report(n_values: Sequence[int], eps: Fraction = Fraction(1, 16),
                             section: LegendreSection = SIGMA, zimmer_max: int = 0) -> QIReport:
    """M_n = max_v (−v(x(nσ))) over the places of the field of σ, with h(x(nσ)).

    Asserts M_n ≤ 4.  The budget log C = ρ(g + h(E)), ρ = 2^{10000/ε²}, is
    reported through its exponent and digit count; it dwarfs every M_n, so
    M_n ≤ ε·h + log C holds without computation.  For n ≤ zimmer_max the
    Zimmer slack of nσ is included (ĥ(nσ) = n²/2 in the Q(λ) normalization).
    """
    eps = Fraction(eps)
    if not (0 < eps <= Fraction(1, 16)):
        raise ValueError("eps must lie in (0, 1/16]")
    F = section.field()
    curve = CurveFF.legendre(F)
    hE, _ = curve_height(curve)
    g = genus_of(section)
    rows = []
    P = section.point()
    for n in n_values:
        if n < 1:
            raise ValueError("n must be positive")
        xr = _table(section).abscissa(section.xi, n)
        if xr is None:
            raise StructuralError(f"{n}σ is the identity")
        x = F(xr)
        table: dict[str, int] = {}
        for pl in poles(x):
            v = ord_at(x, pl)
            if v < 0:
                table[pl.key()] = -v
        M = max(table.values(), default=0)
        deepest = max(table, key=table.get) if table else ""
        if M > MANIN_BOUND:
            raise StructuralError(f"pole of order {M} > {MANIN_BOUND} in x({n}σ) at {deepest}")
        slack = None
        if n <= zimmer_max:
            Q = scalar_mul(curve, n, P)
            slack = zimmer_check(Q, Fraction(n * n, 2), curve)
            if slack < 0:
                raise StructuralError(f"negative Zimmer slack at n = {n}")
        rows.append(QIRow(n, M, deepest, height(x), table, slack))
    rho_log2 = Fraction(10000) / (eps * eps)
    rho_digits = _decimal_digits(rho_log2)
    logC_digits = _decimal_digits(rho_log2, max(1, g + hE))
    notes = [
        f"M_n <= {MANIN_BOUND} for every n in the range",
        "log C has more than 10^5 digits; M_n <= eps*h + log C holds trivially",
    ]
    return QIReport(eps, rows, g, hE, rho_log2, rho_digits, logC_digits, notes)
