"""Weierstrass curves over function fields and multiples of a section.

The default section is σ = (2, μ) on y² = x(x−1)(x−λ) with μ² = 4 − 2λ.
Abscissae x(nσ) = Aₙ/Bₙ come from the ψ-recursion evaluated at ξ; the
chord–tangent law gives an independent route used as a cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .algebra import LAM, ExactPoly, RatFunc, parse_ratfunc, squarefree_decompose
from .fields import (
    Place,
    QuadField,
    height,
    ord_at,
    poles,
)


class StructuralError(ArithmeticError):
    """An identity that must hold exactly for the section family failed."""


# ----------------------------------------------------------------------------
# points and curves

@dataclass(frozen=True)
class SectionPoint:
    x: Optional[object] = None
    y: Optional[object] = None

    @classmethod
    def identity(cls) -> "SectionPoint":
        return cls(None, None)

    @property
    def is_identity(self) -> bool:
        return self.x is None

    def __neg__(self):
        return self if self.is_identity else SectionPoint(self.x, -self.y)


O = SectionPoint.identity()


class CurveFF:
    """y² = x³ + a x² + b x + c with coefficients in a function field."""

    def __init__(self, a, b, c, field=None):
        self.field = field if field is not None else a.field
        self.a = self._el(a)
        self.b = self._el(b)
        self.c = self._el(c)
        disc = self.discriminant
        if disc.is_zero():
            raise ValueError("singular curve: discriminant vanishes")

    def _el(self, v):
        return v if hasattr(v, "field") and v.field == self.field else self.field(v)

    @classmethod
    def legendre(cls, field=None) -> "CurveFF":
        field = field if field is not None else QuadField(None)
        lam = field.lam()
        return cls(-(lam + 1), lam, field(0), field)

    @property
    def discriminant(self):
        a, b, c = self.a, self.b, self.c
        return -4 * a ** 3 * c + a * a * b * b + 18 * a * b * c - 4 * b ** 3 - 27 * c * c

    def rhs(self, x):
        return ((x + self.a) * x + self.b) * x + self.c

    def contains(self, P: SectionPoint) -> bool:
        if P.is_identity:
            return True
        return (P.y * P.y - self.rhs(P.x)).is_zero()

    def point(self, x, y) -> SectionPoint:
        P = SectionPoint(self._el(x), self._el(y))
        if not self.contains(P):
            raise ValueError("point is not on the curve")
        return P

    def add(self, P: SectionPoint, Q: SectionPoint) -> SectionPoint:
        if P.is_identity:
            return Q
        if Q.is_identity:
            return P
        if (P.x - Q.x).is_zero():
            if (P.y + Q.y).is_zero():
                return O
            # doubling
            slope = (3 * P.x * P.x + 2 * self.a * P.x + self.b) / (2 * P.y)
        else:
            slope = (Q.y - P.y) / (Q.x - P.x)
        x3 = slope * slope - self.a - P.x - Q.x
        y3 = slope * (P.x - x3) - P.y
        return SectionPoint(x3, y3)

    def neg(self, P: SectionPoint) -> SectionPoint:
        return -P

    def scalar_mul(self, n: int, P: SectionPoint) -> SectionPoint:
        if n < 0:
            return -self.scalar_mul(-n, P)
        acc, base = O, P
        while n:
            if n & 1:
                acc = self.add(acc, base)
            base = self.add(base, base)
            n >>= 1
        return acc


def add(curve: CurveFF, P: SectionPoint, Q: SectionPoint) -> SectionPoint:
    return curve.add(P, Q)


def scalar_mul(curve: CurveFF, n: int, P: SectionPoint) -> SectionPoint:
    return curve.scalar_mul(n, P)


# ----------------------------------------------------------------------------
# sections with abscissa in Q(λ)

@dataclass(frozen=True)
class LegendreSection:
    """A point (ξ, s·μ) on the Legendre curve with ξ, s in Q(λ) and μ² = f."""

    xi: RatFunc
    s: RatFunc
    modulus: ExactPoly

    @classmethod
    def from_abscissa(cls, xi: RatFunc) -> "LegendreSection":
        g = xi * (xi - 1) * (xi - RatFunc.gen())
        if g.is_zero():
            raise ValueError("2-torsion abscissa has no μ-layer")
        # g = (num·den)/den², then split num·den = c·s²·f with f squarefree
        sq, f = _split_square(g.num * g.den)
        c = f.content() * (1 if f.leading_coefficient() > 0 else -1)
        f = f.primitive()
        root = _rational_sqrt(c)
        if root is None:
            f = f * c
            root = Fraction(1)
        return cls(xi, RatFunc(sq * root, g.den), f)

    @classmethod
    def from_config(cls, cfg: dict) -> "LegendreSection":
        xi = parse_ratfunc(str(cfg.get("x", "2")))
        sec = cls.from_abscissa(xi)
        if "mu_sq" in cfg:
            f = parse_ratfunc(str(cfg["mu_sq"]))
            if not f.is_polynomial():
                raise ValueError("mu_sq must be a polynomial")
            ratio = RatFunc(sec.modulus) / f
            s2 = sec.s * sec.s * ratio
            s = _ratfunc_sqrt(s2)
            if s is None:
                raise ValueError("x(x-1)(x-l)/mu_sq is not a square in Q(l)")
            sec = cls(xi, s, f.num * (1 / f.den.coeff(0)))
        return sec

    @property
    def eta_sq(self) -> RatFunc:
        return self.s * self.s * RatFunc(self.modulus)

    def field(self) -> QuadField:
        return QuadField(self.modulus)

    def point(self) -> SectionPoint:
        K = self.field()
        return SectionPoint(K(self.xi), K(0, self.s))

    def curve(self) -> CurveFF:
        return CurveFF.legendre(self.field())


def _rational_sqrt(q: Fraction) -> Optional[Fraction]:
    from math import isqrt
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    a, b = isqrt(n), isqrt(d)
    return Fraction(a, b) if a * a == n and b * b == d else None


def _split_square(p: ExactPoly) -> tuple[ExactPoly, ExactPoly]:
    """p = s²·f with s primitive and f squarefree carrying the rational constant."""
    s, f = ExactPoly([1]), ExactPoly([1])
    for q, e in squarefree_decompose(p):
        s = s * q ** (e // 2)
        if e % 2:
            f = f * q
    c = p.leading_coefficient() / (s * s * f).leading_coefficient()
    return s, f * c


def _ratfunc_sqrt(r: RatFunc) -> Optional[RatFunc]:
    if r.is_zero():
        return r
    out = []
    for p in (r.num, r.den):
        s, f = _split_square(p)
        if f.degree() > 0:
            return None
        c = _rational_sqrt(f.coeff(0))
        if c is None:
            return None
        out.append(s * c)
    return RatFunc(out[0], out[1])


SIGMA = LegendreSection(RatFunc(2), RatFunc(1), 4 - 2 * LAM)
TAU = LegendreSection(RatFunc(3), RatFunc(1), 18 - 6 * LAM)


# ----------------------------------------------------------------------------
# ψ-recursion at x = ξ

class _PsiTable:
    """ψₙ(ξ) with ψₙ = Pₙ (n odd) or y·Pₙ (n even), y² = g = η²."""

    def __init__(self, sec: LegendreSection):
        x = sec.xi
        lam = RatFunc.gen()
        a, b, c = -(lam + 1), lam, RatFunc(0)
        b2, b4, b6, b8 = 4 * a, 2 * b, 4 * c, 4 * a * c - b * b
        self.g = sec.eta_sq
        self.P = {
            0: RatFunc(0),
            1: RatFunc(1),
            2: RatFunc(2),
            3: 3 * x ** 4 + b2 * x ** 3 + 3 * b4 * x ** 2 + 3 * b6 * x + b8,
            4: 2 * (2 * x ** 6 + b2 * x ** 5 + 5 * b4 * x ** 4 + 10 * b6 * x ** 3 + 10 * b8 * x ** 2
                    + (b2 * b8 - b4 * b6) * x + (b4 * b8 - b6 * b6)),
        }

    def __getitem__(self, n: int) -> RatFunc:
        P = self.P
        if n in P:
            return P[n]
        # iterative fill so deep n never recurses far
        need = [n]
        order = []
        while need:
            k = need.pop()
            if k in P or k in order:
                continue
            order.append(k)
            m = k // 2
            deps = [m - 2, m - 1, m, m + 1, m + 2]
            need.extend(d for d in deps if d not in P)
        for k in sorted(order):
            if k in P:
                continue
            m = k // 2
            if k % 2:
                A = P[m + 2] * P[m] ** 3
                B = P[m - 1] * P[m + 1] ** 3
                gg = self.g * self.g
                if m % 2 == 0:
                    A = A * gg
                else:
                    B = B * gg
                P[k] = A - B
            else:
                A = P[m + 2] * P[m - 1] ** 2
                B = P[m - 2] * P[m + 1] ** 2
                P[k] = P[m] * (A - B) * Fraction(1, 2)
        return P[n]

    def abscissa(self, xi: RatFunc, n: int) -> Optional[RatFunc]:
        if n == 1:
            return xi
        pn = self[n]
        if pn.is_zero():
            return None
        prod = self[n - 1] * self[n + 1]
        if n % 2:
            return xi - self.g * prod / (pn * pn)
        return xi - prod / (self.g * pn * pn)


_TABLES: dict = {}


def _table(sec: LegendreSection) -> _PsiTable:
    key = (sec.xi, sec.s, sec.modulus)
    if key not in _TABLES:
        _TABLES[key] = _PsiTable(sec)
    return _TABLES[key]


@dataclass
class AbscissaFraction:
    n: int
    A: ExactPoly
    B: ExactPoly
    b_n: Optional[Fraction] = None
    C: Optional[ExactPoly] = None
    structural_ok: Optional[bool] = None

    @property
    def deg_A(self) -> int:
        return self.A.degree()

    @property
    def deg_B(self) -> int:
        return self.B.degree()

    def ratfunc(self) -> RatFunc:
        return RatFunc(self.A, self.B)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "A": self.A.to_str(),
            "B": self.B.to_str(),
            "b_n": None if self.b_n is None else str(self.b_n),
            "C": None if self.C is None else self.C.to_str(),
            "deg_A": self.deg_A,
            "deg_B": self.deg_B,
            "structural_ok": self.structural_ok,
        }


def _integer_pair(r: RatFunc) -> tuple[ExactPoly, ExactPoly]:
    """Jointly primitive integer (A, B) with A/B = r and B of positive leading coefficient."""
    L = Fraction(r.num.content().denominator * r.den.content().denominator)
    A, B = r.num * L, r.den * L
    from math import gcd
    g = 0
    for c in A.coefficients + B.coefficients:
        g = gcd(g, int(c))
    A, B = A * Fraction(1, g), B * Fraction(1, g)
    if B.leading_coefficient() < 0:
        A, B = -A, -B
    return A, B


def decompose_denominator(n: int, B: ExactPoly) -> tuple[Fraction, ExactPoly]:
    """B = b·C² (odd n) or b·(λ−2)·C² (even n); raises StructuralError otherwise."""
    R = B
    if n % 2 == 0:
        q, r = divmod(R, LAM - 2)
        if not r.is_zero():
            raise StructuralError(f"B_{n} is not divisible by (l - 2)")
        R = q
    C = ExactPoly([1])
    for p, e in squarefree_decompose(R):
        if e % 2:
            raise StructuralError(f"B_{n} has a factor of odd multiplicity {e} off l = 2")
        C = C * p ** (e // 2)
    C = C.primitive()
    quo, rem = divmod(R, C * C)
    if not rem.is_zero() or quo.degree() != 0:
        raise StructuralError(f"B_{n} / C_{n}^2 is not constant")
    return quo.coeff(0), C


def abscissa_fraction(n: int, section: LegendreSection = SIGMA, verify: bool = False) -> AbscissaFraction:
    """x(nσ) = Aₙ/Bₙ with the denominator decomposition for the default section."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    x = _table(section).abscissa(section.xi, n)
    if x is None:
        raise ValueError(f"{n}·P is the identity")
    if verify:
        curve = section.curve()
        Q = curve.scalar_mul(n, section.point())
        if Q.is_identity or not (Q.x.a == x and Q.x.b.is_zero()):
            raise StructuralError(f"ψ-recursion and group law disagree at n = {n}")
    A, B = _integer_pair(x)
    out = AbscissaFraction(n, A, B)
    if section == SIGMA:
        try:
            out.b_n, out.C = decompose_denominator(n, B)
            out.structural_ok = True
        except StructuralError:
            out.structural_ok = False
    return out


def abscissa_multiples(n_max: int, section: LegendreSection = SIGMA) -> list[AbscissaFraction]:
    return [abscissa_fraction(n, section) for n in range(1, n_max + 1)]


def degree_profile(n: int, section: LegendreSection = SIGMA) -> tuple[int, int]:
    af = abscissa_fraction(n, section)
    return af.deg_A, af.deg_B


def expected_degrees(n: int) -> tuple[int, int]:
    if n % 2:
        return (n * n - 1) // 2, (n * n - 1) // 2
    return n * n // 2, (n * n - 2) // 2


# ----------------------------------------------------------------------------
# heights

def _coerce_field(curve: CurveFF, P: SectionPoint):
    return curve.field


def _local_factor(field, place: Place) -> Fraction:
    """Number of complex points above `place` divided by ramification, per unit valuation."""
    e = field.ramification(place)
    return Fraction(field.degree, e) * place.degree


def curve_height(curve: CurveFF) -> tuple[int, dict[str, int]]:
    """h(E) = Σ_v max{0, −6v(a), −3v(b), −2v(c)} with the per-place table."""
    field = curve.field
    places: dict[str, Place] = {}
    for coef in (curve.a, curve.b, curve.c):
        if not coef.is_zero():
            for pl in poles(coef):
                places[pl.key()] = pl
    total = Fraction(0)
    table: dict[str, int] = {}
    for key, pl in places.items():
        vals = [0]
        for coef, w in ((curve.a, 6), (curve.b, 3), (curve.c, 2)):
            if not coef.is_zero():
                vals.append(-w * ord_at(coef, pl))
        m = max(vals)
        if m > 0:
            contrib = m * _local_factor(field, pl)
            table[key] = int(contrib)
            total += contrib
    return int(total), table


def naive_height_point(P: SectionPoint, curve: Optional[CurveFF] = None) -> int:
    """h(P) = Σ_v max{0, −v(ξ), −v(η)}; also checks h(P) ≤ (3/2)h(ξ) + (1/4)h(E)."""
    if P.is_identity:
        raise ValueError("height of the identity section is not defined here")
    field = P.x.field
    places: dict[str, Place] = {}
    for coord in (P.x, P.y):
        if not coord.is_zero():
            for pl in poles(coord):
                places[pl.key()] = pl
    total = Fraction(0)
    for pl in places.values():
        vals = [0]
        for coord in (P.x, P.y):
            if not coord.is_zero():
                vals.append(-ord_at(coord, pl))
        total += max(vals) * _local_factor(field, pl)
    h = int(total)
    curve = curve if curve is not None else CurveFF.legendre(field)
    hE, _ = curve_height(curve)
    if Fraction(h) > Fraction(3, 2) * height(P.x) + Fraction(hE, 4):
        raise StructuralError("naive height exceeds (3/2)h(x) + h(E)/4")
    return h


@dataclass
class HeightEstimate:
    estimates: list[tuple[int, Fraction]]
    extrapolated: Fraction

    def to_json(self) -> dict:
        return {
            "estimates": [[n, str(v), float(v)] for n, v in self.estimates],
            "extrapolated": str(self.extrapolated),
            "extrapolated_float": float(self.extrapolated),
        }


def canonical_height_estimate(n_max: int, section: LegendreSection | SectionPoint = SIGMA,
                              curve: Optional[CurveFF] = None) -> HeightEstimate:
    """ĥ_est(n) = max(deg Aₙ, deg Bₙ)/n² (normalized over Q(λ)) and a two-step extrapolation.

    Assuming n²·ĥ_est(n) = ĥ·n² + c(n mod 2), the difference quotient over
    n and n−2 removes the bounded term exactly.
    """
    if n_max < 4:
        raise ValueError("n_max must be at least 4")
    D: dict[int, int] = {}
    if isinstance(section, LegendreSection):
        for n in range(1, n_max + 1):
            x = _table(section).abscissa(section.xi, n)
            D[n] = 0 if x is None else x.height()
    else:
        curve = curve if curve is not None else CurveFF.legendre(section.x.field)
        Q = O
        deg = section.x.field.degree
        for n in range(1, n_max + 1):
            Q = curve.add(Q, section)
            D[n] = 0 if Q.is_identity else height(Q.x) // deg
    ests = [(n, Fraction(D[n], n * n)) for n in range(1, n_max + 1)]
    n = n_max
    extrap = Fraction(D[n] - D[n - 2], n * n - (n - 2) ** 2)
    return HeightEstimate(ests, extrap)


def zimmer_check(P: SectionPoint, hhat: Fraction, curve: Optional[CurveFF] = None) -> Fraction:
    """(1/2)h(E) − |h(P) − (3/2)ĥ(P)| over the field of P.

    ``hhat`` is given in the Q(λ) normalization and scaled by the degree of
    the field of P over Q(λ), the same scaling all heights undergo.
    """
    if P.is_identity:
        raise ValueError("Zimmer check needs a non-identity point")
    field = P.x.field
    curve = curve if curve is not None else CurveFF.legendre(field)
    hE, _ = curve_height(curve)
    hP = naive_height_point(P, curve)
    hh = Fraction(hhat) * field.degree
    return Fraction(hE, 2) - abs(hP - Fraction(3, 2) * hh)


def near_origin_shift_check(P: SectionPoint, Q0: SectionPoint, place: Place,
                            curve: Optional[CurveFF] = None) -> tuple[int, int]:
    """(max{0, v(x(P+Q0) − x(Q0))}, −v(ξ) − 2h(E)); raises if lhs < rhs."""
    if P.is_identity or Q0.is_identity:
        raise ValueError("P and Q0 must be non-identity points")
    if not Q0.y.is_zero():
        raise ValueError("Q0 must have order 2")
    if (P.x - Q0.x).is_zero() and (P.y - Q0.y).is_zero():
        raise ValueError("P must differ from Q0")
    field = P.x.field
    curve = curve if curve is not None else CurveFF.legendre(field)
    hE, _ = curve_height(curve)
    S = curve.add(P, Q0)
    diff = S.x - Q0.x
    lhs = 0 if diff.is_zero() else max(0, ord_at(diff, place))
    rhs = -ord_at(P.x, place) - 2 * hE
    if lhs < rhs:
        raise StructuralError(f"near-origin inequality violated at {place.key()}")
    return lhs, rhs


# ----------------------------------------------------------------------------
# multiplication-by-m on abscissae

class UPoly:
    """Dense polynomial in x over a coefficient field (ascending coefficients)."""

    __slots__ = ("c", "zero")

    def __init__(self, coeffs: Sequence, zero):
        c = list(coeffs)
        while c and c[-1].is_zero():
            c.pop()
        self.c = c
        self.zero = zero

    def degree(self) -> int:
        return len(self.c) - 1

    def lc(self):
        return self.c[-1] if self.c else self.zero

    def _z(self, other):
        return other if isinstance(other, UPoly) else UPoly([other if hasattr(other, "is_zero") else self.zero + other], self.zero)

    def __add__(self, other):
        o = self._z(other)
        n = max(len(self.c), len(o.c))
        out = [self.zero] * n
        for i, v in enumerate(self.c):
            out[i] = out[i] + v
        for i, v in enumerate(o.c):
            out[i] = out[i] + v
        return UPoly(out, self.zero)

    __radd__ = __add__

    def __neg__(self):
        return UPoly([-v for v in self.c], self.zero)

    def __sub__(self, other):
        return self + (-self._z(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._z(other)
        if not self.c or not o.c:
            return UPoly([], self.zero)
        out = [self.zero] * (len(self.c) + len(o.c) - 1)
        for i, u in enumerate(self.c):
            if u.is_zero():
                continue
            for j, v in enumerate(o.c):
                out[i + j] = out[i + j] + u * v
        return UPoly(out, self.zero)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = UPoly([self.zero + 1], self.zero)
        for _ in range(n):
            out = out * self
        return out

    def __call__(self, x):
        acc = self.zero * 0
        for v in reversed(self.c):
            acc = acc * x + v
        return acc


def mult_by_m_abscissa(curve: CurveFF, m: int) -> tuple[UPoly, UPoly]:
    """φ_m = num/den with x(mP) = φ_m(x(P)); degree and leading-term facts are asserted."""
    if m < 2:
        raise ValueError("m must be at least 2")
    zero = curve.field(0)
    X = UPoly([zero, zero + 1], zero)
    F = curve.rhs(X)
    a, b, c = curve.a, curve.b, curve.c
    b2, b4, b6, b8 = 4 * a, 2 * b, 4 * c, 4 * a * c - b * b
    P = {
        0: UPoly([], zero),
        1: UPoly([zero + 1], zero),
        2: UPoly([zero + 2], zero),
        3: 3 * X ** 4 + b2 * X ** 3 + 3 * b4 * X ** 2 + 3 * b6 * X + b8,
        4: 2 * (2 * X ** 6 + b2 * X ** 5 + 5 * b4 * X ** 4 + 10 * b6 * X ** 3 + 10 * b8 * X ** 2
                + (b2 * b8 - b4 * b6) * X + (b4 * b8 - b6 * b6)),
    }
    FF = F * F
    for k in range(5, m + 2):
        h = k // 2
        if k % 2:
            A = P[h + 2] * P[h] ** 3
            B = P[h - 1] * P[h + 1] ** 3
            if h % 2 == 0:
                A = A * FF
            else:
                B = B * FF
            P[k] = A - B
        else:
            A = P[h + 2] * P[h - 1] ** 2
            B = P[h - 2] * P[h + 1] ** 2
            P[k] = P[h] * (A - B) * curve.field(Fraction(1, 2))
    if m % 2:
        num = X * P[m] ** 2 - F * P[m - 1] * P[m + 1]
        den = P[m] ** 2
    else:
        num = X * F * P[m] ** 2 - P[m - 1] * P[m + 1]
        den = F * P[m] ** 2
    if num.degree() != m * m or not (num.lc() - 1).is_zero():
        raise StructuralError("numerator of φ_m is not monic of degree m²")
    if den.degree() != m * m - 1 or not (den.lc() - m * m).is_zero():
        raise StructuralError("denominator of φ_m lacks degree m²−1 and leading coefficient m²")
    return num, den
