"""Function fields Q(λ), Q(λ)(μ) and a biquadratic layer Q(λ)(μ, ν).

Valuations and heights are computed from the characteristic polynomial of
an element over Q(λ): the Newton polygon at a place gives the valuations of
all conjugates, which is enough for heights and for ord at places where the
conjugates agree (always the case at ramified places).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .algebra import ExactPoly, RatFunc, ord_poly, squarefree_decompose


@dataclass(frozen=True)
class Place:
    """A place of Q(λ): an irreducible primitive polynomial, or infinity."""

    poly: Optional[ExactPoly] = None

    @classmethod
    def at(cls, p) -> "Place":
        if not isinstance(p, ExactPoly):
            p = ExactPoly([-Fraction(p), 1])
        p = p.primitive()
        if p.degree() < 1:
            raise ValueError("a finite place needs a nonconstant polynomial")
        return cls(p)

    @classmethod
    def infinity(cls) -> "Place":
        return cls(None)

    @property
    def is_infinite(self) -> bool:
        return self.poly is None

    @property
    def degree(self) -> int:
        """Number of complex points the place stands for."""
        return 1 if self.poly is None else self.poly.degree()

    def key(self) -> str:
        return "inf" if self.poly is None else self.poly.to_str()

    def __repr__(self):
        return f"Place({self.key()})"

    def __hash__(self):
        return hash(self.key())

    def __eq__(self, other):
        return isinstance(other, Place) and self.key() == other.key()


def ord_base(r: RatFunc, place: Place) -> int:
    """Valuation of a nonzero element of Q(λ)."""
    if r.is_zero():
        raise ValueError("valuation of zero undefined")
    if place.is_infinite:
        return r.den.degree() - r.num.degree()
    return ord_poly(r.num, place.poly) - ord_poly(r.den, place.poly)


def _as_rat(x) -> RatFunc:
    return x if isinstance(x, RatFunc) else RatFunc._lift(x)


# ----------------------------------------------------------------------------
# fields

class QuadField:
    """Q(λ)(μ) with μ² = f(λ); ``modulus=None`` gives Q(λ) itself."""

    def __init__(self, modulus: Optional[ExactPoly] = None, name: str = "mu"):
        if modulus is not None:
            if modulus.degree() < 1:
                raise ValueError("extension modulus must be nonconstant")
            if any(e > 1 for _, e in squarefree_decompose(modulus)):
                raise ValueError("extension modulus must be squarefree")
        self.modulus = modulus
        self.name = name

    @property
    def degree(self) -> int:
        return 1 if self.modulus is None else 2

    def __eq__(self, other):
        return isinstance(other, QuadField) and self.modulus == other.modulus

    def __hash__(self):
        return hash(self.modulus)

    def __repr__(self):
        if self.modulus is None:
            return "Q(l)"
        return f"Q(l)({self.name}), {self.name}^2 = {self.modulus}"

    def ramification(self, place: Place) -> int:
        if self.modulus is None:
            return 1
        if place.is_infinite:
            return 2 if self.modulus.degree() % 2 else 1
        return 2 if (self.modulus % place.poly).is_zero() else 1

    def ramified_places(self) -> list[Place]:
        if self.modulus is None:
            return []
        _, fac = self.modulus.factor()
        out = [Place(p) for p, _ in fac]
        if self.modulus.degree() % 2:
            out.append(Place.infinity())
        return out

    def __call__(self, a, b=0) -> "FFElement":
        return FFElement(self, _as_rat(a), _as_rat(b))

    def lam(self) -> "FFElement":
        return self(RatFunc.gen())

    def gen(self) -> "FFElement":
        if self.modulus is None:
            raise ValueError("trivial extension has no generator")
        return self(0, 1)

    def to_json(self):
        return None if self.modulus is None else self.modulus.to_json()


class FFElement:
    """a + b·μ in Q(λ)(μ); b = 0 in the trivial extension."""

    __slots__ = ("field", "a", "b")

    def __init__(self, field: QuadField, a: RatFunc, b: RatFunc | None = None):
        self.field = field
        self.a = a
        self.b = b if b is not None else RatFunc(0)
        if field.modulus is None and not self.b.is_zero():
            raise ValueError("nonzero μ-part in the trivial extension")

    def _coerce(self, other):
        if isinstance(other, FFElement):
            if other.field != self.field:
                if other.field.modulus is None and other.b.is_zero():
                    return FFElement(self.field, other.a)
                if self.field.modulus is None and self.b.is_zero():
                    return None
                raise ValueError("elements of different fields")
            return other
        if isinstance(other, (int, Fraction, ExactPoly, RatFunc)):
            return FFElement(self.field, _as_rat(other))
        return None

    def is_zero(self) -> bool:
        return self.a.is_zero() and self.b.is_zero()

    def __bool__(self):
        return not self.is_zero()

    def in_base(self) -> bool:
        return self.b.is_zero()

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, FFElement):
                return other.__radd__(self)
            return NotImplemented
        return FFElement(self.field, self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return FFElement(self.field, -self.a, -self.b)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, FFElement):
                return (-other).__radd__(self)
            return NotImplemented
        return FFElement(self.field, self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, FFElement):
                return other.__rmul__(self)
            return NotImplemented
        if self.b.is_zero() or o.b.is_zero():
            return FFElement(self.field, self.a * o.a, self.a * o.b + self.b * o.a)
        f = RatFunc(self.field.modulus)
        return FFElement(self.field, self.a * o.a + self.b * o.b * f, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def conj(self) -> "FFElement":
        return FFElement(self.field, self.a, -self.b)

    def norm(self) -> RatFunc:
        if self.b.is_zero():
            return self.a ** self.field.degree
        return self.a * self.a - self.b * self.b * RatFunc(self.field.modulus)

    def trace(self) -> RatFunc:
        return self.a * self.field.degree

    def inverse(self) -> "FFElement":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        if self.b.is_zero():
            return FFElement(self.field, self.a.inverse())
        n = self.norm().inverse()
        return FFElement(self.field, self.a * n, -self.b * n)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, FFElement):
                return other.__rtruediv__(self)
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is None else o * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = FFElement(self.field, RatFunc(1))
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        o = self._coerce(other) if not isinstance(other, FFElement) or other.field == self.field else None
        if o is None:
            if isinstance(other, FFElement):
                return (self - other).is_zero()
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.a, self.b))

    def D(self) -> "FFElement":
        """d/dλ with Dμ = f'/(2μ), i.e. D(bμ) = (b' + b f'/(2f)) μ."""
        if self.b.is_zero():
            return FFElement(self.field, self.a.derivative())
        f = RatFunc(self.field.modulus)
        fp = RatFunc(self.field.modulus.derivative())
        return FFElement(self.field, self.a.derivative(), self.b.derivative() + self.b * fp / (f * 2))

    derivative = D

    def charpoly(self) -> list[RatFunc]:
        """Characteristic polynomial over Q(λ), ascending, monic."""
        if self.field.degree == 1:
            return [-self.a, RatFunc(1)]
        return [self.norm(), -self.trace(), RatFunc(1)]

    def constant_value(self) -> Fraction:
        if not self.b.is_zero() or not self.a.is_constant():
            raise ValueError("not a constant")
        return self.a.constant_value()

    def __repr__(self):
        if self.b.is_zero():
            return f"FFElement({self.a})"
        return f"FFElement({self.a} + ({self.b})*{self.field.name})"

    def to_json(self) -> dict:
        return {"a": self.a.to_json(), "b": self.b.to_json(), "modulus": self.field.to_json()}

    @classmethod
    def from_json(cls, data) -> "FFElement":
        mod = data.get("modulus")
        field = QuadField(ExactPoly.from_json(mod) if mod else None)
        return cls(field, RatFunc.from_json(data["a"]), RatFunc.from_json(data["b"]))


class BiquadField:
    """Q(λ)(μ, ν) with μ² = f, ν² = g; elements u + w·ν with u, w in Q(λ)(μ)."""

    def __init__(self, f: ExactPoly, g: ExactPoly):
        self.inner = QuadField(f, "mu")
        QuadField(g, "nu")  # validates g
        if f.primitive() == g.primitive():
            from math import isqrt
            r = f.leading_coefficient() / g.leading_coefficient()
            n, d = r.numerator, r.denominator
            if n > 0 and isqrt(n) ** 2 == n and isqrt(d) ** 2 == d:
                raise ValueError("moduli must generate a degree-4 extension")
        self.f = f
        self.g = g

    degree = 4

    def __eq__(self, other):
        return isinstance(other, BiquadField) and self.f == other.f and self.g == other.g

    def __hash__(self):
        return hash((self.f, self.g))

    def ramification(self, place: Place) -> int:
        if place.is_infinite:
            return 2 if (self.f.degree() % 2 or self.g.degree() % 2) else 1
        hit = (self.f % place.poly).is_zero() or (self.g % place.poly).is_zero()
        return 2 if hit else 1

    def __call__(self, u, w=0) -> "BiquadElement":
        return BiquadElement(self, self._inner(u), self._inner(w))

    def _inner(self, x) -> FFElement:
        if isinstance(x, FFElement):
            return x if x.field == self.inner else FFElement(self.inner, x.a, x.b)
        return FFElement(self.inner, _as_rat(x))

    def lam(self) -> "BiquadElement":
        return self(RatFunc.gen())

    def mu(self) -> "BiquadElement":
        return self(self.inner.gen())

    def nu(self) -> "BiquadElement":
        return self(0, 1)


class BiquadElement:
    __slots__ = ("field", "u", "w")

    def __init__(self, field: BiquadField, u: FFElement, w: FFElement):
        self.field = field
        self.u = u
        self.w = w

    def _coerce(self, other):
        if isinstance(other, BiquadElement):
            return other
        if isinstance(other, (int, Fraction, ExactPoly, RatFunc, FFElement)):
            return self.field(other)
        return None

    def is_zero(self) -> bool:
        return self.u.is_zero() and self.w.is_zero()

    def __bool__(self):
        return not self.is_zero()

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is None else BiquadElement(self.field, self.u + o.u, self.w + o.w)

    __radd__ = __add__

    def __neg__(self):
        return BiquadElement(self.field, -self.u, -self.w)

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is None else self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        g = RatFunc(self.field.g)
        return BiquadElement(self.field, self.u * o.u + self.w * o.w * g, self.u * o.w + self.w * o.u)

    __rmul__ = __mul__

    def rel_norm(self) -> FFElement:
        return self.u * self.u - self.w * self.w * RatFunc(self.field.g)

    def inverse(self) -> "BiquadElement":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        n = self.rel_norm().inverse()
        return BiquadElement(self.field, self.u * n, -self.w * n)

    def __truediv__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is None else self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is None else o * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = self.field(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is None else (self - o).is_zero()

    def __hash__(self):
        return hash((self.u, self.w))

    def D(self) -> "BiquadElement":
        g = RatFunc(self.field.g)
        gp = RatFunc(self.field.g.derivative())
        return BiquadElement(self.field, self.u.D(), self.w.D() + self.w * (gp / (g * 2)))

    derivative = D

    def charpoly(self) -> list[RatFunc]:
        # over Q(λ)(μ): X² − 2u X + N(u + wν); then multiply by the μ-conjugate
        c = [self.rel_norm(), -(self.u * 2), self.field.inner(1)]
        cc = [x.conj() for x in c]
        prod = [self.field.inner(0)] * 5
        for i, x in enumerate(c):
            for j, y in enumerate(cc):
                prod[i + j] = prod[i + j] + x * y
        for x in prod:
            if not x.in_base():
                raise ArithmeticError("characteristic polynomial left the base field")
        return [x.a for x in prod]

    def __repr__(self):
        return f"BiquadElement({self.u!r} + ({self.w!r})*nu)"


# ----------------------------------------------------------------------------
# valuations and heights

def _elem_charpoly(x) -> tuple[list[RatFunc], int]:
    if isinstance(x, RatFunc):
        return [-x, RatFunc(1)], 1
    if isinstance(x, (int, Fraction, ExactPoly)):
        return [-_as_rat(x), RatFunc(1)], 1
    cp = x.charpoly()
    return cp, len(cp) - 1


def _field_of(x):
    if isinstance(x, (FFElement, BiquadElement)):
        return x.field
    return QuadField(None)


def conjugate_valuations(x, place: Place) -> list[Fraction]:
    """Valuations (in the Q(λ) normalization) of all conjugates of x at place."""
    cp, n = _elem_charpoly(x)
    pts = []
    for k, c in enumerate(cp):
        if not c.is_zero():
            pts.append((k, ord_base(c, place)))
    if pts[0][0] != 0:
        raise ValueError("valuation of zero undefined")
    # lower convex hull from (0, v0) to (n, 0)
    hull: list[tuple[int, int]] = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (p[0] - x1) >= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    vals: list[Fraction] = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        vals.extend([Fraction(y1 - y2, x2 - x1)] * (x2 - x1))
    return vals


def ord_at(x, place: Place) -> int:
    """v(x) for a place of the field x lives in, value group Z.

    At a ramified place the local parameter is μ and v(λ − λ0) = 2.  If
    the place splits and x has different valuations at the places above
    it, the answer depends on the branch and an error is raised.
    """
    if isinstance(x, (FFElement, BiquadElement)) and x.is_zero():
        raise ValueError("valuation of zero undefined")
    vals = conjugate_valuations(x, place)
    if len(set(vals)) != 1:
        raise ValueError(f"valuation at {place.key()} depends on the branch above it")
    e = _field_of(x).ramification(place)
    v = vals[0] * e
    if v.denominator != 1:
        raise ArithmeticError("non-integral valuation; ramification data inconsistent")
    return int(v)


def pole_sum(x, place: Place) -> int:
    """Σ over places P above `place` (complex points counted) of max(0, −v_P(x))."""
    vals = conjugate_valuations(x, place)
    s = sum((-v for v in vals if v < 0), Fraction(0)) * place.degree
    if s.denominator != 1:
        raise ArithmeticError("fractional pole count")
    return int(s)


def _support(x) -> list[Place]:
    cp, _ = _elem_charpoly(x)
    polys = []
    for c in cp:
        if not c.is_zero():
            polys.append(c.den)
    polys.append(cp[0].num)
    seen: dict[str, Place] = {}
    for p in polys:
        if p.degree() < 1:
            continue
        _, fac = p.factor()
        for q, _ in fac:
            pl = Place(q)
            seen[pl.key()] = pl
    out = sorted(seen.values(), key=lambda p: (p.poly.degree(), p.poly.coefficients))
    out.append(Place.infinity())
    return out


def support(x) -> list[Place]:
    """Places where x has a zero or a pole (plus infinity, always listed)."""
    return _support(x)


def poles(x) -> list[Place]:
    cp, _ = _elem_charpoly(x)
    polys = [c.den for c in cp if not c.is_zero()]
    seen: dict[str, Place] = {}
    for p in polys:
        if p.degree() < 1:
            continue
        for q, _ in p.factor()[1]:
            pl = Place(q)
            seen[pl.key()] = pl
    out = sorted(seen.values(), key=lambda p: (p.poly.degree(), p.poly.coefficients))
    out.append(Place.infinity())
    return out


def height(x) -> int:
    """Number of poles (with multiplicity, over C) of x on the curve of its field."""
    if isinstance(x, (FFElement, BiquadElement)) and x.is_zero():
        return 0
    cp, _ = _elem_charpoly(x)
    den = ExactPoly([1])
    for c in cp:
        if not c.is_zero():
            den = den * c.den.exquo(den.gcd(c.den))
    h = den.degree()
    for c in cp:
        if not c.is_zero():
            h = max(h, (c.num * den.exquo(c.den)).degree())
    return h


def order_table(x) -> dict[str, int]:
    """{place key: v(x)} over the support of x; branch-dependent places omitted."""
    out = {}
    for pl in _support(x):
        try:
            v = ord_at(x, pl)
        except ValueError:
            continue
        if v != 0:
            out[pl.key()] = v
    return out


def product_formula_sum(x) -> int:
    """Σ_v deg(v)·v(x) over all places; zero for every nonzero x."""
    total = Fraction(0)
    for pl in _support(x):
        vals = conjugate_valuations(x, pl)
        total += sum(vals, Fraction(0)) * pl.degree
    return int(total)
