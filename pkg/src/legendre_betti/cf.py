"""Continued fractions of Laurent series in 1/t and the quartic approximation checks.

Orders are valuations at t = ∞ with v(1/t) = 1, so |x| = e^{−v(x)} and a
polynomial q has |q| = e^{deg q}.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Optional, Union

import flint

from .algebra import ExactPoly, RatFunc
from .laurent import (
    QUARTIC,
    QUARTIC_SEEDS,
    LaurentSeries,
    MinPoly,
    PrecisionExhausted,
    laurent_expand,
    parse_seed,
)

CF_MARGIN = 16


@dataclass
class Convergent:
    p: ExactPoly
    q: ExactPoly
    partial_quotient: ExactPoly
    ord: Optional[int]  # None when p/q equals the expanded function exactly

    @property
    def deg_q(self) -> int:
        return self.q.degree()

    def to_json(self) -> dict:
        return {"p": self.p.to_str("t"), "q": self.q.to_str("t"),
                "partial_quotient": self.partial_quotient.to_str("t"),
                "deg_q": self.deg_q, "ord": self.ord}


@dataclass
class CFExpansion:
    convergents: list[Convergent]
    precision: Optional[int]
    terminated: bool  # the expansion ended: the input is the last convergent

    def to_json(self) -> dict:
        return {"precision": self.precision, "terminated": self.terminated,
                "convergents": [c.to_json() for c in self.convergents]}


def _as_fraction(series: LaurentSeries) -> tuple[flint.fmpq_poly, flint.fmpq_poly, int]:
    """Trusted part of a rational series as num/t^N over Q[t], plus N."""
    if series.has_omega:
        raise ValueError("continued fractions need rational coefficients")
    N = series.precision
    if N is None:
        N = series.offset + series.re.length()
    # Σ c_e u^e for e < N  =  (Σ c_e t^{N−e}) / t^N
    coeffs = [0] * (N - series.offset + 1)
    for k, c in enumerate(series.re.coeffs()):
        coeffs[N - (series.offset + k)] = c
    num = flint.fmpq_poly(coeffs) if coeffs else flint.fmpq_poly([])
    den = flint.fmpq_poly([0] * N + [1]) if N >= 0 else flint.fmpq_poly([1])
    if N < 0:
        num = num * flint.fmpq_poly([0] * (-N) + [1])
    return num, den, N


def _ord_diff(num, den, p, q) -> Optional[int]:
    """v(num/den − p/q) at infinity, None if the difference vanishes."""
    d = num * q - p * den
    if d.is_zero():
        return None
    return den.degree() + q.degree() - d.degree()


def cf_expand(x: Union[LaurentSeries, RatFunc], max_deg_q: int) -> CFExpansion:
    """Convergents p_k/q_k with deg q_k ≤ max_deg_q.

    Euclid's algorithm runs on the trusted part of the series written as
    num/t^N.  Convergents of that fraction agree with those of the series
    while ord_k < N, which the precision requirement N ≥ 2·max_deg_q + 16
    guarantees except after an exceptionally long partial quotient; then
    the expansion stops with PrecisionExhausted instead of truncating.
    """
    if max_deg_q < 0:
        raise ValueError("max_deg_q must be nonnegative")
    if isinstance(x, RatFunc):
        num, den, N, exact = x.num.flint, x.den.flint, None, True
    else:
        need = 2 * max_deg_q + CF_MARGIN
        if not x.is_exact and x.precision < need:
            raise PrecisionExhausted(f"continued fraction to degree {max_deg_q} needs precision {need}, "
                                     f"series has {x.precision}; expand deeper")
        num, den, N = _as_fraction(x)
        exact = x.is_exact
        if exact:
            N = None
    # (p_{k-2}, q_{k-2}) = (0, 1), (p_{k-1}, q_{k-1}) = (1, 0) to start
    pp, qp = flint.fmpq_poly([]), flint.fmpq_poly([1])
    pc, qc = flint.fmpq_poly([1]), flint.fmpq_poly([])
    a, b = num, den
    seq: list[tuple] = []
    terminated = False
    while True:
        if b.is_zero():
            terminated = True
            break
        quo, rem = divmod(a, b)
        pp, qp, pc, qc = pc, qc, quo * pc + pp, quo * qc + qp
        seq.append((pc, qc, quo))
        if qc.degree() > max_deg_q:
            break
        a, b = b, rem
    convs: list[Convergent] = []
    for k, (p, q, quo) in enumerate(seq):
        if q.degree() > max_deg_q:
            break
        o = _ord_diff(num, den, p, q)
        if o is None:
            if not exact:
                raise PrecisionExhausted("series vanishes to its precision against a convergent; expand deeper")
        elif N is not None and o >= N:
            raise PrecisionExhausted(f"convergent of degree {q.degree()} approximates beyond precision {N}; "
                                     "expand deeper")
        if k + 1 < len(seq):
            if o != q.degree() + seq[k + 1][1].degree():
                raise ArithmeticError("continued-fraction identity ord_k = deg q_k + deg q_{k+1} failed")
        elif o is not None:
            raise ArithmeticError("expansion ended before an inexact convergent")
        lc = q.leading_coefficient()
        convs.append(Convergent(ExactPoly(p / lc), ExactPoly(q / lc), ExactPoly(quo), o))
    return CFExpansion(convs, N, terminated)


# ----------------------------------------------------------------------------
# approximation checks for α⁴ − α = 1/t

class ApproximationViolation(AssertionError):
    """An inequality that must hold for the quartic failed."""


ROTH_CONSTANT = 10 ** 9


def roth_bound_holds(ord_: int, deg_q: int, constant: int = ROTH_CONSTANT) -> bool:
    """ord ≤ constant + 2·deg q + 3·(deg q)^{4/5}, decided in exact integer arithmetic."""
    if deg_q < 1:
        raise ValueError("deg q = 0 is the Liouville case")
    excess = ord_ - constant - 2 * deg_q
    if excess <= 0:
        return True
    # excess ≤ 3 d^{4/5}  ⇔  excess^5 ≤ 243 d^4
    return excess ** 5 <= 243 * deg_q ** 4


@dataclass
class RothReport:
    max_deg_q: int
    precision: int
    rows: list[tuple[int, int]]  # (deg q, ord)
    max_exponent: float
    tight: bool  # every row also satisfies the bound with constant 0
    first: tuple[int, int]

    def to_json(self) -> dict:
        return {
            "max_deg_q": self.max_deg_q,
            "precision": self.precision,
            "convergents_checked": len(self.rows),
            "first_convergent": {"deg_q": self.first[0], "ord": self.first[1]},
            "max_ord_over_deg_q": self.max_exponent,
            "last_ord_over_deg_q": self.rows[-1][1] / self.rows[-1][0] if self.rows else None,
            "holds_without_constant": self.tight,
            "rows": [{"deg_q": d, "ord": o, "envelope": 2 + 3 * d ** -0.2} for d, o in self.rows],
        }


def quartic_series(precision: int) -> LaurentSeries:
    return laurent_expand(MinPoly.parse(QUARTIC), parse_seed(QUARTIC_SEEDS["alpha"]), precision)


def roth_example_check(max_deg_q: int, series: Optional[LaurentSeries] = None) -> RothReport:
    """Every convergent with 1 ≤ deg q ≤ max_deg_q obeys the explicit lower bound for |α − p/q|.

    Best approximation makes the convergents the only candidates that
    matter: any p/q in the same denominator-degree bracket has ord at most
    that of the convergent.
    """
    if max_deg_q < 1:
        raise ValueError("max_deg_q must be at least 1")
    prec = 2 * max_deg_q + CF_MARGIN
    series = series if series is not None else quartic_series(prec)
    exp = cf_expand(series, max_deg_q)
    rows = []
    for c in exp.convergents:
        if c.deg_q == 0:
            continue
        if c.ord is None or not roth_bound_holds(c.ord, c.deg_q):
            raise ApproximationViolation(f"bound fails at deg q = {c.deg_q}")
        rows.append((c.deg_q, c.ord))
    tight = all(roth_bound_holds(o, d, 0) for d, o in rows)
    return RothReport(max_deg_q, prec, rows, max(o / d for d, o in rows), tight, rows[0])


@dataclass
class LiouvilleResult:
    lhs_ord: int
    rhs_bound: int
    norm_ord: int
    conjugate_ords: list[int]
    conditions_hold: bool

    def to_json(self) -> dict:
        return {"lhs_ord": self.lhs_ord, "rhs_bound": self.rhs_bound, "norm_ord": self.norm_ord,
                "conjugate_ords": self.conjugate_ords, "conditions_hold": self.conditions_hold}


def _branches(precision: int) -> list[LaurentSeries]:
    P = MinPoly.parse(QUARTIC)
    return [laurent_expand(P, parse_seed(QUARTIC_SEEDS[k]), precision)
            for k in ("alpha", "alpha1", "alpha2", "alpha3")]


def liouville_check(p: ExactPoly, q: ExactPoly) -> LiouvilleResult:
    """Exact norm bound for f = p/q against all four roots of X⁴ − X − 1/t.

    The order of tp⁴ − tpq³ − q⁴ over tq⁴ at infinity equals the sum of the
    orders of α − f over the four conjugates; when the three other
    conjugates stay at distance 1 this gives ord(α − f) ≤ 1 + 4·deg q.
    """
    if q.is_zero():
        raise ValueError("q must be nonzero")
    t = ExactPoly.gen()
    num = t * p ** 4 - t * p * q ** 3 - q ** 4
    if num.is_zero():
        raise ArithmeticError("tp⁴ − tpq³ − q⁴ vanished: α would be rational")
    den = t * q ** 4
    norm_ord = den.degree() - num.degree()
    f = RatFunc(p, q)
    prec = 16 + 4 * q.degree() + 2 * max(p.degree(), 0)
    for _ in range(8):
        try:
            fs = LaurentSeries.from_ratfunc(f, prec) if not f.is_zero() else LaurentSeries.zero()
            ords = []
            for br in _branches(prec):
                d = br - fs
                if d.is_zero():
                    raise PrecisionExhausted("difference vanishes to precision")
                ords.append(int(d.valuation))
            break
        except PrecisionExhausted:
            prec *= 2
    else:
        raise PrecisionExhausted("could not resolve ord(α − p/q)")
    if sum(ords) != norm_ord:
        raise ArithmeticError("conjugate orders do not add up to the norm order")
    conds = all(o == 0 for o in ords[1:])
    rhs = 1 + 4 * q.degree()
    if conds and ords[0] > rhs:
        raise ApproximationViolation(f"ord(α − p/q) = {ords[0]} exceeds 1 + 4·deg q = {rhs}")
    return LiouvilleResult(ords[0], rhs, norm_ord, ords[1:], conds)


@dataclass
class GapStats:
    depth: int
    gaps: list[tuple[int, int]]  # (exponent d of a nonzero term, zeros following it)
    envelope_ratio: float

    def to_json(self) -> dict:
        return {"depth": self.depth, "envelope_ratio": self.envelope_ratio,
                "max_gap": max((g for _, g in self.gaps), default=0),
                "gaps": [[d, g] for d, g in self.gaps]}


def zero_gap_stats(series: LaurentSeries, D: int) -> GapStats:
    """Runs of zero coefficients after each nonzero term c/t^d, d < D.

    The run after the last nonzero term below D is cut off by the depth and
    is left out.  envelope_ratio = max run/d^{4/5} over d ≥ 1.
    """
    if not series.is_exact and series.precision < D:
        raise PrecisionExhausted(f"zero-gap statistics to depth {D} need precision {D}")
    nz = sorted(e for e in series.coefficients if e < D)
    gaps = [(d, nxt - d - 1) for d, nxt in zip(nz, nz[1:])]
    ratio = max((g / d ** 0.8 for d, g in gaps if d >= 1), default=0.0)
    return GapStats(D, gaps, ratio)


def best_approximation_check(series: LaurentSeries, max_deg: int = 8, coeffs=(-1, 0, 1),
                             random_trials: int = 0, random_deg: int = 30,
                             rng: Optional[random.Random] = None) -> dict:
    """ord(α − p/q) ≤ ord_k for every p/q with deg q_k ≤ deg q < deg q_{k+1}.

    Exhaustive over monic-up-to-sign q with coefficients from ``coeffs`` and
    deg q ≤ max_deg, taking the optimal p (polynomial part of qα), plus
    optional random q up to ``random_deg``.  Returns counts; raises on a
    violation.
    """
    top = max(max_deg, random_deg if random_trials else 0)
    conv = cf_expand(series, top).convergents
    num, den, N = _as_fraction(series)

    def bracket_ord(d: int) -> int:
        best = None
        for c in conv:
            if c.deg_q <= d:
                best = c
        return best.ord

    def check(q: flint.fmpq_poly) -> bool:
        p = (q * num) // den
        o = _ord_diff(num, den, p, q)
        if o is None or o >= N:
            raise PrecisionExhausted("candidate approximates beyond precision")
        if o > bracket_ord(q.degree()):
            raise ApproximationViolation(f"p/q beats the convergent bracket at deg q = {q.degree()}")
        return o == bracket_ord(q.degree())

    checked = equal = 0
    for d in range(0, max_deg + 1):
        for lower in itertools.product(coeffs, repeat=d):
            q = flint.fmpq_poly(list(lower) + [1])
            checked += 1
            equal += check(q)
    rng = rng or random.Random(0)
    for _ in range(random_trials):
        d = rng.randint(1, random_deg)
        q = flint.fmpq_poly([rng.randint(-3, 3) for _ in range(d)] + [1])
        checked += 1
        equal += check(q)
    return {"checked": checked, "attaining_bracket": equal, "violations": 0}
