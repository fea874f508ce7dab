"""Truncated Laurent series in u = 1/t over Q or Q(ω), ω² + ω + 1 = 0.

A series is u^offset·(A(u) + ω·B(u)) with A, B in Q[u] (FLINT polynomials),
known exactly for exponents below ``precision``; ``precision=None`` marks an
exact (finite) series.  Every operation propagates precision so no result
claims a coefficient its inputs do not determine.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import flint

from .algebra import ExactPoly, RatFunc, parse_expr


class PrecisionExhausted(ArithmeticError):
    """A coefficient at or beyond the trusted precision was requested."""


class UnsupportedBranch(ValueError):
    """Newton seed is not a simple root of the leading-order equation."""


# ----------------------------------------------------------------------------
# Q(ω)

@dataclass(frozen=True)
class QOmega:
    """a + bω with ω² = −ω − 1."""

    a: Fraction
    b: Fraction = Fraction(0)

    @staticmethod
    def lift(x) -> "QOmega":
        if isinstance(x, QOmega):
            return x
        return QOmega(Fraction(x), Fraction(0))

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_rational(self) -> bool:
        return self.b == 0

    def __add__(self, o):
        o = QOmega.lift(o)
        return QOmega(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return QOmega(-self.a, -self.b)

    def __sub__(self, o):
        return self + (-QOmega.lift(o))

    def __rsub__(self, o):
        return QOmega.lift(o) - self

    def __mul__(self, o):
        o = QOmega.lift(o)
        bb = self.b * o.b
        return QOmega(self.a * o.a - bb, self.a * o.b + self.b * o.a - bb)

    __rmul__ = __mul__

    def conj(self) -> "QOmega":
        return QOmega(self.a - self.b, -self.b)

    def norm(self) -> Fraction:
        return self.a * self.a - self.a * self.b + self.b * self.b

    def inverse(self) -> "QOmega":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in Q(ω)")
        c = self.conj()
        return QOmega(c.a / n, c.b / n)

    def __truediv__(self, o):
        return self * QOmega.lift(o).inverse()

    def __rtruediv__(self, o):
        return QOmega.lift(o) * self.inverse()

    def __pow__(self, n: int):
        out = QOmega(Fraction(1))
        base = self if n >= 0 else self.inverse()
        for _ in range(abs(n)):
            out = out * base
        return out

    def __eq__(self, o):
        if isinstance(o, (int, Fraction)):
            o = QOmega.lift(o)
        return isinstance(o, QOmega) and self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        if self.a == 0:
            return f"{self.b}*w"
        return f"{self.a}{'+' if self.b > 0 else '-'}{abs(self.b)}*w"

    __repr__ = __str__


OMEGA = QOmega(Fraction(0), Fraction(1))


def _fmpq(c: Fraction) -> flint.fmpq:
    return flint.fmpq(c.numerator, c.denominator)


def _frac(c) -> Fraction:
    return Fraction(int(c.p), int(c.q))


def _low(p: flint.fmpq_poly) -> Optional[int]:
    """Index of the lowest nonzero coefficient, or None for the zero polynomial."""
    if p.is_zero():
        return None
    for i, c in enumerate(p.coeffs()):
        if c != 0:
            return i
    return None


_ZERO = flint.fmpq_poly([])


def _cut(p: flint.fmpq_poly, n) -> flint.fmpq_poly:
    if n == math.inf:
        return p
    return p.truncate(n) if n > 0 else _ZERO


# ----------------------------------------------------------------------------
# series

class LaurentSeries:
    __slots__ = ("offset", "re", "om", "_prec")

    def __init__(self, offset: int, re: flint.fmpq_poly, om: Optional[flint.fmpq_poly] = None,
                 precision: Optional[int] = None):
        prec = math.inf if precision is None else int(precision)
        re = _cut(re, prec - offset)
        om = None if om is None else _cut(om, prec - offset)
        if om is not None and om.is_zero():
            om = None
        lows = [k for k in (_low(re), None if om is None else _low(om)) if k is not None]
        if lows:
            k = min(lows)
            if k:
                re = re.right_shift(k)
                om = None if om is None else om.right_shift(k)
                offset += k
        else:
            offset = 0 if prec == math.inf else int(prec)
            re, om = _ZERO, None
        self.offset = offset
        self.re = re
        self.om = om
        self._prec = prec

    # construction ---------------------------------------------------------
    @classmethod
    def monomial(cls, c, e: int) -> "LaurentSeries":
        """c·u^e, exact."""
        c = QOmega.lift(c)
        return cls(e, flint.fmpq_poly([_fmpq(c.a)]), flint.fmpq_poly([_fmpq(c.b)]) if c.b else None)

    @classmethod
    def from_dict(cls, coeffs: dict, precision: Optional[int] = None) -> "LaurentSeries":
        if not coeffs:
            return cls(0, _ZERO, None, precision)
        lo = min(coeffs)
        hi = max(coeffs)
        vals = [QOmega.lift(coeffs.get(e, 0)) for e in range(lo, hi + 1)]
        re = flint.fmpq_poly([_fmpq(v.a) for v in vals])
        om = flint.fmpq_poly([_fmpq(v.b) for v in vals]) if any(v.b for v in vals) else None
        return cls(lo, re, om, precision)

    @classmethod
    def zero(cls, precision: Optional[int] = None) -> "LaurentSeries":
        return cls(0, _ZERO, None, precision)

    @classmethod
    def from_poly_t(cls, p: ExactPoly) -> "LaurentSeries":
        """A polynomial in t as an exact series in u = 1/t."""
        if p.is_zero():
            return cls.zero()
        d = p.degree()
        # t^k = u^{-k}: reverse the coefficient list
        return cls(-d, flint.fmpq_poly(list(reversed(p.flint.coeffs()))))

    @classmethod
    def from_ratfunc(cls, f: RatFunc, precision: int) -> "LaurentSeries":
        num = cls.from_poly_t(f.num)
        den = cls.from_poly_t(f.den)
        if den.is_exact and den.re.length() == 1:
            return (num * den.inverse()).truncate(precision)
        return (num * den.inverse(precision - num.valuation)).truncate(precision)

    # basic queries ---------------------------------------------------------
    @property
    def precision(self) -> Optional[int]:
        return None if self._prec == math.inf else int(self._prec)

    @property
    def is_exact(self) -> bool:
        return self._prec == math.inf

    @property
    def has_omega(self) -> bool:
        return self.om is not None

    def is_zero(self) -> bool:
        """True when every trusted coefficient vanishes."""
        return self.re.is_zero() and self.om is None

    @property
    def valuation(self):
        """Lowest exponent with a nonzero coefficient (the precision if none is trusted)."""
        return self._prec if self.is_zero() else self.offset

    @property
    def leading_exponent(self):
        return self.valuation

    def leading_coefficient(self):
        if self.is_zero():
            raise PrecisionExhausted("no trusted nonzero coefficient")
        return self.coeff(self.offset)

    def coeff(self, e: int):
        """Coefficient of u^e: a Fraction, or a QOmega when ω occurs."""
        if e >= self._prec:
            raise PrecisionExhausted(f"coefficient u^{e} requested beyond precision {self.precision}")
        k = e - self.offset
        a = _frac(self.re[k]) if 0 <= k < self.re.length() else Fraction(0)
        if self.om is None:
            return a
        b = _frac(self.om[k]) if 0 <= k < self.om.length() else Fraction(0)
        return QOmega(a, b)

    @property
    def coefficients(self) -> dict:
        """Nonzero trusted coefficients keyed by exponent of 1/t."""
        out = {}
        n = max(self.re.length(), 0 if self.om is None else self.om.length())
        for k in range(n):
            c = self.coeff(self.offset + k)
            if c != 0:
                out[self.offset + k] = c
        return out

    def truncate(self, precision) -> "LaurentSeries":
        prec = min(self._prec, precision)
        return LaurentSeries(self.offset, self.re, self.om, None if prec == math.inf else prec)

    def with_precision(self, precision: int) -> "LaurentSeries":
        """The same finite sum declared known only below ``precision``.

        Valid for exact series: a finite sum is known everywhere, so
        declaring a precision only bounds later work.
        """
        if not self.is_exact and precision > self._prec:
            raise PrecisionExhausted("cannot raise the precision of an inexact series")
        return LaurentSeries(self.offset, self.re, self.om, precision)

    def exact_part(self) -> "LaurentSeries":
        """The finite sum of trusted terms as an exact series."""
        return LaurentSeries(self.offset, self.re, self.om, None)

    # arithmetic ------------------------------------------------------------
    @staticmethod
    def _lift(x) -> "LaurentSeries":
        if isinstance(x, LaurentSeries):
            return x
        return LaurentSeries.monomial(x, 0)

    def _parts(self, offset: int):
        sh = self.offset - offset
        re = self.re.left_shift(sh)
        om = None if self.om is None else self.om.left_shift(sh)
        return re, om

    def __add__(self, other):
        o = LaurentSeries._lift(other)
        off = min(self.offset, o.offset)
        prec = min(self._prec, o._prec)
        a1, b1 = self._parts(off)
        a2, b2 = o._parts(off)
        om = b1 if b2 is None else (b2 if b1 is None else b1 + b2)
        return LaurentSeries(off, a1 + a2, om, None if prec == math.inf else prec)

    __radd__ = __add__

    def __neg__(self):
        return LaurentSeries(self.offset, -self.re, None if self.om is None else -self.om,
                             self.precision)

    def __sub__(self, other):
        return self + (-LaurentSeries._lift(other))

    def __rsub__(self, other):
        return LaurentSeries._lift(other) - self

    def __mul__(self, other):
        o = LaurentSeries._lift(other)
        prec = min(self._prec + o.valuation, o._prec + self.valuation)
        if prec == math.inf or isinstance(prec, float) and math.isnan(prec):
            prec = math.inf
        off = self.offset + o.offset
        n = prec - off
        if n != math.inf and n <= 0:
            return LaurentSeries.zero(int(prec))

        def mul(p, q):
            return p * q if n == math.inf else p.mul_low(q, int(n))

        re = mul(self.re, o.re)
        om = None
        if self.om is not None and o.om is not None:
            bb = mul(self.om, o.om)
            re = re - bb
            om = mul(self.re, o.om) + mul(self.om, o.re) - bb
        elif self.om is not None:
            om = mul(self.om, o.re)
        elif o.om is not None:
            om = mul(self.re, o.om)
        return LaurentSeries(off, re, om, None if prec == math.inf else int(prec))

    __rmul__ = __mul__

    def conj(self) -> "LaurentSeries":
        """ω ↦ ω² applied coefficientwise."""
        if self.om is None:
            return self
        return LaurentSeries(self.offset, self.re - self.om, -self.om, self.precision)

    def inverse(self, precision: Optional[int] = None) -> "LaurentSeries":
        """1/x; an exact non-monomial input needs an explicit output precision."""
        if self.is_zero():
            raise PrecisionExhausted("inverse of a series with no trusted nonzero term")
        if self.om is not None:
            norm = self * self.conj()
            if norm.om is not None:
                raise ArithmeticError("norm left Q")
            return self.conj() * norm.inverse(precision)
        v = self.offset
        if self.is_exact:
            if self.re.length() == 1:
                return LaurentSeries(-v, flint.fmpq_poly([1 / self.re[0]]))
            if precision is None:
                raise ValueError("inverse of an exact non-monomial series needs a precision")
            rel = precision + v
        else:
            rel = int(self._prec) - v
            if precision is not None:
                rel = min(rel, precision + v)
        if rel <= 0:
            return LaurentSeries.zero(rel - v)
        A = self.re
        y = flint.fmpq_poly([1 / A[0]])
        k = 1
        while k < rel:
            k = min(2 * k, rel)
            e = flint.fmpq_poly([2]) - A.mul_low(y, k)
            y = y.mul_low(e, k)
        return LaurentSeries(-v, y, None, rel - v)

    def __truediv__(self, other):
        o = LaurentSeries._lift(other)
        return self * o.inverse()

    def __rtruediv__(self, other):
        return LaurentSeries._lift(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = LaurentSeries.monomial(1, 0)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def __eq__(self, other):
        o = LaurentSeries._lift(other)
        d = self - o
        return d.is_zero() and self._prec == o._prec

    def __hash__(self):
        return hash((self.offset, str(self.re), str(self.om), self._prec))

    # display ---------------------------------------------------------------
    def to_str(self, var: str = "t", max_terms: int = 8) -> str:
        terms = []
        for e, c in list(self.coefficients.items())[:max_terms]:
            cs = str(c)
            mono = "" if e == 0 else (f"{var}^{-e}" if e < 0 else f"/{var}^{e}" if e > 1 else f"/{var}")
            if e == 0:
                terms.append(f"({cs})")
            elif e < 0:
                terms.append(f"({cs})*{mono}")
            else:
                terms.append(f"({cs}){mono}")
        body = " + ".join(terms) if terms else "0"
        if not self.is_exact:
            body += f" + O(1/{var}^{self.precision})"
        return body

    def __repr__(self):
        return f"LaurentSeries({self.to_str()})"

    def to_json(self) -> dict:
        return {
            "precision": self.precision,
            "leading_exponent": None if self.is_zero() else self.offset,
            "coefficients": {str(e): str(c) for e, c in self.coefficients.items()},
        }


# ----------------------------------------------------------------------------
# polynomials P(t, X)

class BiPoly:
    """Finite sum of c·t^i·X^j with c in Q(ω) and i of either sign (parsing helper)."""

    def __init__(self, terms: Optional[dict] = None):
        self.terms = {k: v for k, v in (terms or {}).items() if not v.is_zero()}

    @staticmethod
    def lift(x) -> "BiPoly":
        if isinstance(x, BiPoly):
            return x
        return BiPoly({(0, 0): QOmega.lift(x)})

    def __add__(self, o):
        o = BiPoly.lift(o)
        out = dict(self.terms)
        for k, v in o.terms.items():
            out[k] = out.get(k, QOmega(Fraction(0))) + v
        return BiPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return BiPoly({k: -v for k, v in self.terms.items()})

    def __sub__(self, o):
        return self + (-BiPoly.lift(o))

    def __rsub__(self, o):
        return BiPoly.lift(o) - self

    def __mul__(self, o):
        o = BiPoly.lift(o)
        out: dict = {}
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in o.terms.items():
                k = (i1 + i2, j1 + j2)
                out[k] = out.get(k, QOmega(Fraction(0))) + c1 * c2
        return BiPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return BiPoly.lift(1) / (self ** (-n))
        out = BiPoly.lift(1)
        for _ in range(n):
            out = out * self
        return out

    def _monomial_inverse(self) -> "BiPoly":
        if len(self.terms) != 1:
            raise ValueError("only division by a monomial c·t^k is supported")
        (i, j), c = next(iter(self.terms.items()))
        if j != 0:
            raise ValueError("division by X is not supported")
        return BiPoly({(-i, 0): c.inverse()})

    def __truediv__(self, o):
        return self * BiPoly.lift(o)._monomial_inverse()

    def __rtruediv__(self, o):
        return BiPoly.lift(o) * self._monomial_inverse()

    def degree_x(self) -> int:
        return max((j for _, j in self.terms), default=0)

    def x_coefficients(self) -> list[LaurentSeries]:
        """Coefficients of X^0..X^d as exact series in u = 1/t."""
        d = self.degree_x()
        out = []
        for j in range(d + 1):
            out.append(LaurentSeries.from_dict({-i: c for (i, jj), c in self.terms.items() if jj == j}))
        return out

    def as_series(self) -> LaurentSeries:
        if self.degree_x() > 0:
            raise ValueError("expression involves X")
        return self.x_coefficients()[0]


_T = BiPoly({(1, 0): QOmega(Fraction(1))})
_X = BiPoly({(0, 1): QOmega(Fraction(1))})
_W = BiPoly({(0, 0): OMEGA})


def parse_bipoly(text: str) -> BiPoly:
    """Parse an expression in t, X and w (= ω); '^' denotes powers."""
    v = parse_expr(text, {"t": _T, "X": _X, "x": _X, "w": _W})
    return BiPoly.lift(v)


def parse_seed(text: str) -> LaurentSeries:
    return parse_bipoly(text).as_series()


class MinPoly:
    """P(t, X) = Σ c_j X^j with exact Laurent coefficients c_j in u = 1/t."""

    def __init__(self, coeffs: list[LaurentSeries], text: str = ""):
        while coeffs and coeffs[-1].is_zero():
            coeffs = coeffs[:-1]
        if len(coeffs) < 2:
            raise ValueError("minimal polynomial must have positive degree in X")
        self.c = coeffs
        self.text = text

    @classmethod
    def parse(cls, text: str) -> "MinPoly":
        return cls(parse_bipoly(text).x_coefficients(), text)

    @property
    def degree(self) -> int:
        return len(self.c) - 1

    def __call__(self, X: LaurentSeries) -> LaurentSeries:
        acc = self.c[-1]
        for c in reversed(self.c[:-1]):
            acc = acc * X + c
        return acc

    def derivative(self) -> "MinPoly":
        if self.degree == 1:
            return _ConstPoly(self.c[1])
        return MinPoly([c * j for j, c in enumerate(self.c)][1:], self.text + "'")


class _ConstPoly:
    def __init__(self, c: LaurentSeries):
        self.c = [c]

    def __call__(self, X: LaurentSeries) -> LaurentSeries:
        return self.c[0]


# ----------------------------------------------------------------------------
# Newton iteration

@dataclass
class NewtonTrace:
    steps: list[tuple[int, int]]  # (working precision, certified precision)
    delta: int


def _leading_order(P: MinPoly, seed: LaurentSeries) -> tuple[int, int]:
    """Check the seed against the Newton polygon; return (m, v0)."""
    if seed.is_zero():
        raise UnsupportedBranch("zero seed")
    v0 = seed.offset
    c0 = seed.leading_coefficient()
    vals = [(c.valuation + j * v0, j) for j, c in enumerate(P.c) if not c.is_zero()]
    m = min(v for v, _ in vals)
    edge = {j: P.c[j].leading_coefficient() for v, j in vals if v == m}
    if len(edge) < 2:
        raise UnsupportedBranch(f"valuation {v0} is not a slope of the Newton polygon")
    E = sum((QOmega.lift(a) * QOmega.lift(c0) ** j for j, a in edge.items()), QOmega(Fraction(0)))
    if not E.is_zero():
        raise UnsupportedBranch("seed does not solve the leading-order equation")
    dE = sum((QOmega.lift(a) * j * QOmega.lift(c0) ** (j - 1) for j, a in edge.items() if j),
             QOmega(Fraction(0)))
    if dE.is_zero():
        raise UnsupportedBranch("seed is a multiple root of the leading-order equation")
    return m, v0


def _certify(P: MinPoly, X: LaurentSeries, work: int, delta: int) -> tuple[int, bool]:
    """Hensel bound: the root agrees with X below v(P(X)) − δ."""
    R = P(X.with_precision(work))
    if R.is_zero() and P(X.exact_part()).is_zero():
        return work, True
    return int(R.valuation) - delta, False


def laurent_expand(P: Union[MinPoly, str], seed: Union[LaurentSeries, str], precision: int,
                   trace: Optional[list] = None) -> LaurentSeries:
    """The root of P(t, X) = 0 in Q((1/t)) (or Q(ω)((1/t))) with leading term ``seed``.

    Returns the series known for exponents below ``precision``.  Newton
    steps run at working precision 8, 16, 32, ... coefficients past the
    leading exponent; trust comes from the residual, not from the step count.
    """
    if isinstance(P, str):
        P = MinPoly.parse(P)
    if isinstance(seed, str):
        seed = parse_seed(seed)
    if precision <= 0:
        raise ValueError("precision must be positive")
    m, v0 = _leading_order(P, seed)
    delta = m - v0
    dP = P.derivative()
    if precision <= v0:
        return LaurentSeries.zero(precision)
    X = LaurentSeries.monomial(seed.leading_coefficient(), v0)
    cert = v0 + 1
    rel = 8
    for _ in range(64):
        work = min(precision, v0 + rel) + delta + 1
        Xw = X.with_precision(work)
        step = P(Xw) * dP(Xw).inverse()
        X = (Xw - step).truncate(work).exact_part()
        new_cert, exact = _certify(P, X, work + 2 * abs(delta) + 2, delta)
        if trace is not None:
            trace.append((work, new_cert))
        if exact:
            return X
        if new_cert <= cert and new_cert < precision:
            raise ArithmeticError("Newton iteration failed to gain precision")
        cert = new_cert
        if cert >= precision:
            return X.truncate(precision)
        rel = max(8, 2 * (cert - v0))
    raise ArithmeticError("Newton iteration did not reach the requested precision")


# ----------------------------------------------------------------------------
# the quartic α⁴ − α = 1/t and its conjugates

QUARTIC = "X^4 - X - 1/t"
QUARTIC_SEEDS = {"alpha": "-1/t", "alpha1": "1", "alpha2": "w", "alpha3": "w^2"}


def quartic_branch(name: str = "alpha", precision: int = 64) -> LaurentSeries:
    return laurent_expand(MinPoly.parse(QUARTIC), parse_seed(QUARTIC_SEEDS[name]), precision)


def residual_valuation(P: MinPoly, X: LaurentSeries):
    """v(P(t, X)) computed with precision tracking (the precision if all trusted terms vanish)."""
    return P(X).valuation
