"""The Gauss–Manin operator Ξ on sections of the Legendre curve.

Ξ(x, y) = 4λ(1−λ)(D(Dx/y) + Dx/(2(x−λ)y)) + 4(1−2λ)Dx/y + 2x(x−1)/((x−λ)y)
with D = d/dλ.  Ξ is additive on the group of sections and vanishes
exactly on torsion sections.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .algebra import LAM, ExactPoly, RatFunc
from .fields import BiquadField, Place, QuadField, height, ord_at, order_table
from .sections import (
    SIGMA,
    LegendreSection,
    SectionPoint,
    StructuralError,
    UPoly,
    abscissa_fraction,
)


class TorsionSectionError(ValueError):
    """Ξ vanishes identically: the section is torsion."""


@dataclass
class XiResult:
    value: object
    height: int
    per_place_orders: dict[str, int]

    def to_json(self) -> dict:
        return {"value": repr(self.value), "height": self.height,
                "per_place_orders": self.per_place_orders}


def xi_value(x, y):
    """Exact Ξ(x, y) in the field of (x, y)."""
    if y.is_zero():
        raise ValueError("Ξ singular at 2-torsion (y = 0)")
    lam = x.field.lam()
    xl = x - lam
    if xl.is_zero():
        raise ZeroDivisionError("x = λ identically makes Ξ undefined")
    dx = x.D()
    dxy = dx / y
    return (4 * lam * (1 - lam) * (dxy.D() + dx / (2 * xl * y))
            + 4 * (1 - 2 * lam) * dxy + 2 * x * (x - 1) / (xl * y))


def xi_apply(x, y, check_curve: bool = True) -> XiResult:
    if check_curve:
        lam = x.field.lam()
        if not (y * y - x * (x - 1) * (x - lam)).is_zero():
            raise ValueError("(x, y) is not on the Legendre curve")
    v = xi_value(x, y)
    if v.is_zero():
        return XiResult(v, 0, {})
    return XiResult(v, height(v), order_table(v))


def xi_oddness_check(x, y) -> bool:
    return (xi_value(x, -y) + xi_value(x, y)).is_zero()


def upsilon_form() -> tuple[UPoly, UPoly, UPoly, UPoly]:
    """(f0, f, f1, f2) in Z[λ][x] with Ξ = (f0·D²x + f·(Dx)² + f1·Dx + f2)/y³.

    Obtained by clearing y³ in Ξ using y² = F(x) and
    Dy = (F_x·Dx + F_λ)/(2y).
    """
    K = QuadField(None)
    zero = K(0)
    lam = K.lam()
    X = UPoly([zero, zero + 1], zero)
    F = X * (X - 1) * (X - lam)
    Fx = UPoly([(k + 1) * c for k, c in enumerate(F.c[1:])], zero)
    Flam = -(X * (X - 1))
    k = 4 * lam * (1 - lam)
    f0 = F * k
    f = Fx * (-k * Fraction(1, 2))
    f1 = Flam * (-k * Fraction(1, 2)) + X * (X - 1) * (k * Fraction(1, 2)) + F * (4 * (1 - 2 * lam))
    f2 = X * X * (X - 1) * (X - 1) * 2
    degs = (f0.degree(), f.degree(), f1.degree(), f2.degree())
    if degs != (3, 2, 3, 4):
        raise StructuralError(f"Υ degrees {degs} differ from (3, 2, 3, 4)")
    return f0, f, f1, f2


def upsilon_value(x, y=None):
    """Υ(x) = f0·D²x + f·(Dx)² + f1·Dx + f2 evaluated at a field element x."""
    f0, f, f1, f2 = upsilon_form()
    dx = x.D()
    ddx = dx.D()

    def ev(p):
        acc = x.field(0)
        for c in reversed(p.c):
            acc = acc * x + x.field(c.a)
        return acc

    return ev(f0) * ddx + ev(f) * dx * dx + ev(f1) * dx + ev(f2)


def _point_of(section) -> SectionPoint:
    if isinstance(section, LegendreSection):
        return section.point()
    return section


def multiplicity_bound(section, b: Place) -> int:
    """2 + max(0, ord_b Ξ(σ)), bounding the torsion multiplicity of σ at b."""
    P = _point_of(section)
    v = xi_value(P.x, P.y)
    if v.is_zero():
        raise TorsionSectionError("Ξ(σ) = 0: section is torsion")
    return 2 + max(0, ord_at(v, b))


@dataclass
class MultiplicityReport:
    n: int
    table: dict[str, int]
    max_w_away_from_2: int
    w_at_2: int
    flagged: list[str]

    def to_json(self) -> dict:
        return {"n": self.n, "table": self.table, "max_w_away_from_2": self.max_w_away_from_2,
                "w_at_2": self.w_at_2, "flagged": self.flagged}


def multiplicity_report(n: int, section: LegendreSection = SIGMA) -> MultiplicityReport:
    from .algebra import squarefree_decompose, ord_poly
    B = abscissa_fraction(n, section).B
    table: dict[str, int] = {}
    w2 = 0
    max_w = 0
    flagged = []
    if B.degree() > 0:
        w2 = ord_poly(B, LAM - 2)
        rest = B.exquo((LAM - 2) ** w2) if w2 else B
        for p, e in squarefree_decompose(rest):
            if p.degree() < 1:
                continue
            table[p.to_str()] = e
            max_w = max(max_w, e)
            if e == 4:
                flagged.append(p.to_str())
        if w2:
            table[(LAM - 2).to_str()] = w2
    return MultiplicityReport(n, table, max_w, w2, flagged)


def pole_multiplicity_scan(n_max: int, section: LegendreSection = SIGMA) -> list[MultiplicityReport]:
    out = []
    for n in range(1, n_max + 1):
        rep = multiplicity_report(n, section)
        if rep.max_w_away_from_2 > 4 or rep.w_at_2 > 2:
            raise StructuralError(f"pole multiplicity bound violated at n = {n}")
        out.append(rep)
    return out


def xi_height_ratio(x, y) -> tuple[int, int, int]:
    res = xi_apply(x, y)
    hx = height(x)
    return res.height, 4 * hx, res.height - 4 * hx


# ----------------------------------------------------------------------------
# sharpness family ξ = λ^d + 6λ + 70

def eisenstein(p: ExactPoly, prime: int) -> bool:
    cs = p.primitive().integer_coefficients()
    if cs[-1] % prime == 0:
        return False
    if any(c % prime for c in cs[:-1]):
        return False
    return cs[0] % (prime * prime) != 0


@dataclass
class SharpnessReport:
    d: int
    leading_coefficient: Fraction
    expected_leading: int
    leading_degree: int
    eisenstein: dict[str, bool]
    coprime: dict[str, bool]
    h_xi: int
    four_h_x: int

    @property
    def ok(self) -> bool:
        return (self.leading_coefficient == self.expected_leading
                and self.leading_degree == 8 * self.d
                and all(self.eisenstein.values()))

    def to_json(self) -> dict:
        return {"d": self.d, "leading_coefficient": str(self.leading_coefficient),
                "expected_leading": self.expected_leading, "leading_degree": self.leading_degree,
                "eisenstein": self.eisenstein, "coprime": self.coprime,
                "h_xi": self.h_xi, "four_h_x": self.four_h_x, "ok": self.ok}


def sharpness_family(d: int, check_coprime: Optional[bool] = None) -> SharpnessReport:
    """Ξ(ξ_d, η_d)² = P_d / (F1³ F2³ F3³) with F1 = ξ, F2 = ξ − 1, F3 = ξ − λ."""
    if d < 2:
        raise ValueError("d must be at least 2")
    xi = LAM ** d + 6 * LAM + 70
    F1, F2, F3 = xi, xi - 1, xi - LAM
    K = QuadField(None)
    xe = K(RatFunc(xi))
    ups = upsilon_value(xe)
    Pd = ups.a.num * (1 / ups.a.den.coeff(0))
    Pd = Pd * Pd
    eis = {
        "l^d + 6*l + 70 @ 2": eisenstein(F1, 2),
        "l^d + 6*l + 69 @ 3": eisenstein(F2, 3),
        "l^d + 5*l + 70 @ 5": eisenstein(F3, 5),
    }
    if check_coprime is None:
        check_coprime = d >= 9
    coprime = {}
    if check_coprime:
        for name, F in (("l^d + 6*l + 70", F1), ("l^d + 6*l + 69", F2), ("l^d + 5*l + 70", F3)):
            coprime[name] = Pd.gcd(F).degree() == 0
    # heights over Q(λ)(η), η² = F1·F2·F3: Ξ has characteristic polynomial X² − Ξ²
    h_xi = RatFunc(Pd, F1 ** 3 * F2 ** 3 * F3 ** 3).height()
    hx = 2 * d
    return SharpnessReport(d, Pd.leading_coefficient(), 4 * (d - 1) ** 4, Pd.degree(), eis, coprime,
                           h_xi, 4 * hx)


# ----------------------------------------------------------------------------
# two sections: β = Ξ(nσ + mτ)

@dataclass
class TwoBetaResult:
    n: int
    m: int
    beta: object
    h_beta: int
    max_zero_order: int
    abscissa_order_bound: int

    def to_json(self) -> dict:
        return {"n": self.n, "m": self.m, "h_beta": self.h_beta, "max_zero_order": self.max_zero_order,
                "abscissa_order_bound": self.abscissa_order_bound}


def _biquad_field() -> BiquadField:
    return BiquadField(4 - 2 * LAM, 18 - 6 * LAM)


def two_section_beta(n: int, m: int) -> TwoBetaResult:
    if n == 0 and m == 0:
        raise ValueError("n = m = 0 gives the zero section")
    B = _biquad_field()
    lam = B.lam()
    beta = 2 * n * B.mu() / (2 - lam) ** 2 + 2 * m * B.nu() / (3 - lam) ** 2
    h = height(beta)
    # zeros of β are poles of 1/β; the deepest zero is bounded by h
    inv = beta.inverse()
    from .fields import poles, conjugate_valuations
    deepest = 0
    for pl in poles(inv):
        e = B.ramification(pl)
        for v in conjugate_valuations(inv, pl):
            deepest = max(deepest, int(-v * e))
    return TwoBetaResult(n, m, beta, h, deepest, 2 + h)


def beta_consistency(n: int, m: int) -> bool:
    """β agrees with nΞ(σ) + mΞ(τ) computed from the coordinates."""
    B = _biquad_field()
    mu, nu = B.mu(), B.nu()
    xs = xi_value(B(2), mu)
    xt = xi_value(B(3), nu)
    return (two_section_beta(n, m).beta - (n * xs + m * xt)).is_zero()


def random_exact_point(rng: random.Random, max_deg: int = 2) -> SectionPoint:
    """A point (ξ, s·μ) with random ξ in Q[λ] on the Legendre curve over its own μ-layer."""
    while True:
        coeffs = [rng.randint(-5, 5) for _ in range(rng.randint(0, max_deg) + 1)]
        xi = RatFunc(ExactPoly(coeffs))
        g = xi * (xi - 1) * (xi - RatFunc.gen())
        if g.is_zero():
            continue
        try:
            sec = LegendreSection.from_abscissa(xi)
        except ValueError:
            continue
        if sec.modulus.degree() < 1:
            continue
        return sec.point()
