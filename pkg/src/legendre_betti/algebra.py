"""Exact univariate polynomials and rational functions over Q.

``ExactPoly`` is a thin immutable wrapper around FLINT's ``fmpq_poly``;
``RatFunc`` keeps numerator and denominator coprime with a primitive
integer denominator of positive leading coefficient.
"""
from __future__ import annotations

import ast
from fractions import Fraction
from typing import Iterable, Sequence

import flint

Number = (int, Fraction)


def _to_fmpq(c) -> flint.fmpq:
    if isinstance(c, flint.fmpq):
        return c
    if isinstance(c, str):
        c = Fraction(c)
    if isinstance(c, Fraction):
        return flint.fmpq(c.numerator, c.denominator)
    if isinstance(c, (int, flint.fmpz)):
        return flint.fmpq(int(c))
    raise TypeError(f"not an exact rational: {c!r}")


def _frac(c: flint.fmpq) -> Fraction:
    return Fraction(int(c.p), int(c.q))


class ExactPoly:
    """Polynomial in one variable with exact rational coefficients."""

    __slots__ = ("_p",)

    def __init__(self, coeffs: Iterable = ()):
        if isinstance(coeffs, flint.fmpq_poly):
            self._p = coeffs
        elif isinstance(coeffs, flint.fmpz_poly):
            self._p = flint.fmpq_poly(coeffs)
        elif isinstance(coeffs, ExactPoly):
            self._p = coeffs._p
        else:
            self._p = flint.fmpq_poly([_to_fmpq(c) for c in coeffs])

    # construction helpers
    @classmethod
    def gen(cls) -> "ExactPoly":
        return cls([0, 1])

    @classmethod
    def const(cls, c) -> "ExactPoly":
        return cls([c])

    @property
    def flint(self) -> flint.fmpq_poly:
        return self._p

    @property
    def coefficients(self) -> tuple[Fraction, ...]:
        return tuple(_frac(c) for c in self._p.coeffs())

    def degree(self) -> int:
        return self._p.degree()

    def is_zero(self) -> bool:
        return self._p.is_zero()

    def is_constant(self) -> bool:
        return self._p.degree() <= 0

    def leading_coefficient(self) -> Fraction:
        if self.is_zero():
            return Fraction(0)
        return _frac(self._p.coeffs()[-1])

    def coeff(self, k: int) -> Fraction:
        cs = self._p.coeffs()
        return _frac(cs[k]) if 0 <= k < len(cs) else Fraction(0)

    # arithmetic
    @staticmethod
    def _lift(other):
        if isinstance(other, ExactPoly):
            return other._p
        if isinstance(other, (int, Fraction, flint.fmpq, flint.fmpz)):
            return flint.fmpq_poly([_to_fmpq(other)])
        return None

    def __add__(self, other):
        o = self._lift(other)
        return NotImplemented if o is None else ExactPoly(self._p + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        return NotImplemented if o is None else ExactPoly(self._p - o)

    def __rsub__(self, other):
        o = self._lift(other)
        return NotImplemented if o is None else ExactPoly(o - self._p)

    def __mul__(self, other):
        o = self._lift(other)
        return NotImplemented if o is None else ExactPoly(self._p * o)

    __rmul__ = __mul__

    def __neg__(self):
        return ExactPoly(-self._p)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        return ExactPoly(self._p ** n)

    def __eq__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self._p == o

    def __hash__(self):
        return hash(tuple(self.coefficients))

    def __bool__(self):
        return not self._p.is_zero()

    def __divmod__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        if o.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        q, r = divmod(self._p, o)
        return ExactPoly(q), ExactPoly(r)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def exquo(self, other: "ExactPoly") -> "ExactPoly":
        q, r = divmod(self, other)
        if not r.is_zero():
            raise ArithmeticError("inexact polynomial division")
        return q

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return ExactPoly(self._p * _to_fmpq(Fraction(1) / Fraction(other)))
        return RatFunc(self, other)

    def __rtruediv__(self, other):
        o = self._lift(other)
        return NotImplemented if o is None else RatFunc(ExactPoly(o), self)

    def __call__(self, x):
        """Evaluate; exact for rationals, Horner in the argument's type otherwise."""
        if isinstance(x, (int, Fraction)):
            return _frac(self._p(_to_fmpq(x)))
        acc = 0
        for c in reversed(self.coefficients):
            acc = acc * x + (c if isinstance(x, (ExactPoly, RatFunc)) else _coerce_like(c, x))
        return acc

    def compose(self, other: "ExactPoly") -> "ExactPoly":
        acc = ExactPoly()
        for c in reversed(self.coefficients):
            acc = acc * other + c
        return acc

    def derivative(self) -> "ExactPoly":
        return ExactPoly(self._p.derivative())

    def gcd(self, other: "ExactPoly") -> "ExactPoly":
        return ExactPoly(self._p.gcd(other._p))

    def content(self) -> Fraction:
        """Positive rational c with self/c a primitive integer polynomial."""
        if self.is_zero():
            return Fraction(0)
        num = self._p.numer()
        den = int(self._p.denom())
        return Fraction(int(num.content()), den)

    def primitive(self) -> "ExactPoly":
        """Primitive integer polynomial with positive leading coefficient."""
        if self.is_zero():
            return self
        p = self * (1 / self.content())
        return -p if p.leading_coefficient() < 0 else p

    def monic(self) -> "ExactPoly":
        return self * (1 / self.leading_coefficient())

    def integer_coefficients(self) -> list[int]:
        cs = self.coefficients
        if any(c.denominator != 1 for c in cs):
            raise ValueError("polynomial has non-integer coefficients")
        return [int(c) for c in cs]

    def to_fmpz(self) -> flint.fmpz_poly:
        return flint.fmpz_poly(self.primitive().integer_coefficients())

    def factor(self) -> tuple[Fraction, list[tuple["ExactPoly", int]]]:
        """Irreducible factorization over Q: (unit, [(primitive factor, mult)])."""
        if self.is_zero():
            raise ValueError("cannot factor the zero polynomial")
        c, fac = self._p.factor()
        out = []
        unit = _frac(c)
        for p, e in fac:
            pp = ExactPoly(p)
            prim = pp.primitive()
            unit *= (pp.leading_coefficient() / prim.leading_coefficient()) ** e
            out.append((prim, int(e)))
        out.sort(key=lambda t: (t[0].degree(), t[0].coefficients))
        return unit, out

    def __repr__(self):
        return f"ExactPoly({self.to_str()!r})"

    def to_str(self, var: str = "l") -> str:
        cs = self.coefficients
        if not cs:
            return "0"
        terms = []
        for k in range(len(cs) - 1, -1, -1):
            c = cs[k]
            if c == 0:
                continue
            mag = abs(c)
            if k == 0:
                body = str(mag)
            else:
                mono = var if k == 1 else f"{var}^{k}"
                body = mono if mag == 1 else f"{mag}*{mono}"
            terms.append(("-" if c < 0 else "+", body))
        s = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        for sign, body in terms[1:]:
            s += f" {sign} {body}"
        return s

    __str__ = to_str

    def to_json(self) -> list[str]:
        return [f"{c.numerator}/{c.denominator}" for c in self.coefficients]

    @classmethod
    def from_json(cls, data: Sequence[str]) -> "ExactPoly":
        return cls([Fraction(s) for s in data])


def _coerce_like(c: Fraction, x):
    if isinstance(x, (float, complex)):
        return float(c)
    try:
        import mpmath
        if isinstance(x, (mpmath.mpf, mpmath.mpc)):
            return mpmath.mpf(c.numerator) / c.denominator
    except ImportError:  # pragma: no cover
        pass
    return float(c)


def squarefree_decompose(p: ExactPoly) -> list[tuple[ExactPoly, int]]:
    """Yun-type decomposition into pairwise coprime squarefree primitive factors."""
    if p.is_zero():
        raise ValueError("squarefree decomposition of the zero polynomial")
    _, fac = p.flint.factor_squarefree()
    out = [(ExactPoly(f).primitive(), int(e)) for f, e in fac]
    out.sort(key=lambda t: t[1])
    return out


class RatFunc:
    """Quotient of ExactPolys in lowest terms, normalized denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, _normalized: bool = False):
        if not isinstance(num, ExactPoly):
            num = ExactPoly([num]) if isinstance(num, (int, Fraction, str)) else ExactPoly(num)
        if den is None:
            den = ExactPoly([1])
        elif not isinstance(den, ExactPoly):
            den = ExactPoly([den]) if isinstance(den, (int, Fraction, str)) else ExactPoly(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if not _normalized:
            num, den = _normalize(num, den)
        self.num = num
        self.den = den

    @classmethod
    def gen(cls) -> "RatFunc":
        return cls(ExactPoly.gen())

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.degree() == 0

    def is_constant(self) -> bool:
        return self.num.degree() <= 0 and self.den.degree() == 0

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("not a constant")
        return self.num.coeff(0) / self.den.coeff(0)

    @staticmethod
    def _lift(other):
        if isinstance(other, RatFunc):
            return other
        if isinstance(other, ExactPoly):
            return RatFunc(other, None, _normalized=True)
        if isinstance(other, (int, Fraction)):
            return RatFunc(ExactPoly([other]), None, _normalized=True)
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        if self.den == o.den:
            return RatFunc(self.num + o.num, self.den)
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den, _normalized=True)

    def __sub__(self, other):
        o = self._lift(other)
        return NotImplemented if o is None else self + (-o)

    def __rsub__(self, other):
        o = self._lift(other)
        return NotImplemented if o is None else o + (-self)

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        if self.den.degree() == 0 and o.den.degree() == 0:
            return RatFunc(self.num * o.num * (1 / (self.den.coeff(0) * o.den.coeff(0))), None, _normalized=True)
        # cross-cancel first to keep sizes down
        g1 = self.num.gcd(o.den)
        g2 = o.num.gcd(self.den)
        n = self.num.exquo(g1) * o.num.exquo(g2)
        d = self.den.exquo(g2) * o.den.exquo(g1)
        return RatFunc(n, d)

    __rmul__ = __mul__

    def inverse(self) -> "RatFunc":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero rational function")
        return RatFunc(self.den, self.num)

    def __truediv__(self, other):
        o = self._lift(other)
        return NotImplemented if o is None else self * o.inverse()

    def __rtruediv__(self, other):
        o = self._lift(other)
        return NotImplemented if o is None else o * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        return RatFunc(self.num ** n, self.den ** n, _normalized=True)

    def __eq__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __bool__(self):
        return not self.is_zero()

    def derivative(self) -> "RatFunc":
        n, d = self.num, self.den
        return RatFunc(n.derivative() * d - n * d.derivative(), d * d)

    def __call__(self, x):
        if isinstance(x, (int, Fraction)):
            dv = self.den(x)
            if dv == 0:
                raise ZeroDivisionError("evaluation at a pole")
            return self.num(x) / dv
        return self.num(x) / self.den(x)

    def compose(self, g: "RatFunc") -> "RatFunc":
        """self(g) for a rational function g."""
        g = RatFunc._lift(g)
        d = max(self.num.degree(), self.den.degree(), 0)

        def hom(p: ExactPoly) -> ExactPoly:
            acc = ExactPoly()
            for k, c in enumerate(p.coefficients):
                acc = acc + c * g.num ** k * g.den ** (d - k)
            return acc

        return RatFunc(hom(self.num), hom(self.den))

    def height(self) -> int:
        if self.is_zero():
            return 0
        return max(self.num.degree(), self.den.degree())

    def __repr__(self):
        return f"RatFunc({self.to_str()!r})"

    def to_str(self, var: str = "l") -> str:
        if self.den == 1:
            return self.num.to_str(var)
        return f"({self.num.to_str(var)})/({self.den.to_str(var)})"

    __str__ = to_str

    def to_json(self) -> dict:
        return {"num": self.num.to_json(), "den": self.den.to_json()}

    @classmethod
    def from_json(cls, data) -> "RatFunc":
        if isinstance(data, list):
            return cls(ExactPoly.from_json(data))
        return cls(ExactPoly.from_json(data["num"]), ExactPoly.from_json(data["den"]))


def _normalize(num: ExactPoly, den: ExactPoly) -> tuple[ExactPoly, ExactPoly]:
    if num.is_zero():
        return num, ExactPoly([1])
    if den.degree() > 0:
        g = num.gcd(den)
        if g.degree() > 0:
            num = num.exquo(g)
            den = den.exquo(g)
    prim = den.primitive()
    scale = prim.leading_coefficient() / den.leading_coefficient()
    return num * scale, prim


def ord_poly(p: ExactPoly, place: ExactPoly) -> int:
    """Multiplicity of the irreducible ``place`` in p."""
    if p.is_zero():
        raise ValueError("valuation of zero undefined")
    k = 0
    while True:
        q, r = divmod(p, place)
        if not r.is_zero():
            return k
        p = q
        k += 1


class _Parser(ast.NodeVisitor):
    def __init__(self, variables: dict):
        self.variables = variables

    def visit_Expression(self, node):
        return self.visit(node.body)

    def visit_BinOp(self, node):
        a, b = self.visit(node.left), self.visit(node.right)
        op = type(node.op)
        if op is ast.Add:
            return a + b
        if op is ast.Sub:
            return a - b
        if op is ast.Mult:
            return a * b
        if op is ast.Div:
            if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
                return Fraction(a) / Fraction(b)
            known = (int, Fraction, ExactPoly, RatFunc)
            if isinstance(a, known) and isinstance(b, known):
                return RatFunc._lift(a) / RatFunc._lift(b)
            return a / b
        if op in (ast.Pow, ast.BitXor):
            if not isinstance(b, int):
                raise ValueError("exponent must be an integer literal")
            return a ** b
        raise ValueError(f"unsupported operator {op.__name__}")

    def visit_UnaryOp(self, node):
        v = self.visit(node.operand)
        if isinstance(node.op, ast.USub):
            return -v
        if isinstance(node.op, ast.UAdd):
            return v
        raise ValueError("unsupported unary operator")

    def visit_Constant(self, node):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise ValueError(f"unsupported constant {node.value!r}")
        if isinstance(node.value, float):
            return Fraction(str(node.value))
        return node.value

    def visit_Name(self, node):
        if node.id not in self.variables:
            raise ValueError(f"unknown symbol {node.id!r}")
        return self.variables[node.id]

    def generic_visit(self, node):
        raise ValueError(f"unsupported syntax {type(node).__name__}")


def parse_expr(text: str, variables: dict):
    """Evaluate a restricted arithmetic expression ('^' allowed for powers)."""
    tree = ast.parse(text.replace("^", "**"), mode="eval")
    return _Parser(variables).visit(tree)


def parse_ratfunc(text: str, var: str = "l") -> RatFunc:
    val = parse_expr(text, {var: ExactPoly.gen(), "lam": ExactPoly.gen()})
    return RatFunc._lift(val) if not isinstance(val, RatFunc) else val


LAM = ExactPoly.gen()
