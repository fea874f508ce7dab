"""Wang's inequality over Q(t) and the two-alternative approximation bound.

Places are rational places of Q(t) (irreducible polynomials or infinity);
a place of degree d stands for d places over the algebraic closure, so
counts over S and sums of local orders are weighted by d.
"""
from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import flint

from .algebra import ExactPoly, RatFunc, parse_ratfunc
from .fields import Place, ord_base


class WangViolation(AssertionError):
    """The inequality failed on a valid instance."""


class InstanceError(ValueError):
    """Malformed instance (e.g. an element of A* that is not an S-unit)."""


def _t_poly(text: str) -> ExactPoly:
    r = parse_ratfunc(text, "t")
    if not r.den.is_constant():
        raise InstanceError(f"place polynomial {text!r} is not a polynomial")
    return r.num


def place_from_str(text: str) -> Place:
    text = text.strip()
    if text in ("inf", "oo", "infinity"):
        return Place.infinity()
    p = _t_poly(text)
    _, fac = p.factor()
    if len(fac) != 1 or fac[0][1] != 1:
        raise InstanceError(f"place polynomial {text!r} is not irreducible")
    return Place.at(fac[0][0])


def place_str(v: Place) -> str:
    return "inf" if v.is_infinite else v.poly.to_str("t")


def _zeros_poles(r: RatFunc) -> list[Place]:
    out: dict[str, Place] = {}
    for p in (r.num, r.den):
        if p.degree() >= 1:
            for q, _ in p.factor()[1]:
                pl = Place.at(q)
                out[pl.key()] = pl
    if r.num.degree() != r.den.degree():
        out["inf"] = Place.infinity()
    return list(out.values())


def is_s_unit(a: RatFunc, S: Sequence[Place]) -> bool:
    if a.is_zero():
        return False
    keys = {v.key() for v in S}
    return all(v.key() in keys for v in _zeros_poles(a))


def _ord(r: RatFunc, v: Place) -> Optional[int]:
    """v(r), None for r = 0 (order +∞)."""
    return None if r.is_zero() else ord_base(r, v)


@dataclass
class WangInstance:
    S: list[Place]
    A_star: list[RatFunc]  # the nonzero S-units; 0 is always in A*
    r: int
    f: RatFunc
    choices: dict[str, RatFunc]  # place key -> a*_v, an element of A* (possibly 0)
    genus: int = 0

    @property
    def size_S(self) -> int:
        return sum(v.degree for v in self.S)

    @property
    def chi(self) -> int:
        return 2 * self.genus - 2 + self.size_S

    def elements(self) -> list[RatFunc]:
        return [RatFunc(0)] + list(self.A_star)

    def validate(self) -> None:
        if self.genus != 0:
            raise InstanceError("only the rational function field Q(t) is supported")
        if self.r < 0:
            raise InstanceError("r must be nonnegative")
        if not self.A_star:
            raise InstanceError("A* needs at least one S-unit")
        if self.f.is_zero():
            raise InstanceError("f must be nonzero")
        for a in self.A_star:
            if not is_s_unit(a, self.S):
                raise InstanceError(f"{a.to_str('t')} is not an S-unit")
        keys = {v.key() for v in self.S}
        if len(keys) != len(self.S):
            raise InstanceError("repeated place in S")
        elems = self.elements()
        for v in self.S:
            if v.key() not in self.choices:
                raise InstanceError(f"no choice a*_v for v = {place_str(v)}")
            if self.choices[v.key()] not in elems:
                raise InstanceError(f"choice at {place_str(v)} is not in A*")

    def to_json(self) -> dict:
        return {
            "S": [place_str(v) for v in self.S],
            "A_star": [a.to_str("t") for a in self.A_star],
            "r": self.r,
            "f": self.f.to_str("t"),
            "choices": {place_str(v): self.choices[v.key()].to_str("t") for v in self.S},
            "genus": self.genus,
            "chi": self.chi,
        }

    @classmethod
    def from_json(cls, data: dict) -> "WangInstance":
        try:
            S = [place_from_str(s) for s in data["S"]]
            A = [parse_ratfunc(a, "t") for a in data["A_star"]]
            A = [a for a in A if not a.is_zero()]
            f = parse_ratfunc(data["f"], "t")
            raw = data.get("choices", {})
            choices = {}
            for v in S:
                text = raw.get(place_str(v), "0")
                choices[v.key()] = parse_ratfunc(text, "t")
            inst = cls(S, A, int(data.get("r", 0)), f, choices, int(data.get("genus", 0)))
        except (KeyError, TypeError, SyntaxError) as exc:
            raise InstanceError(f"malformed instance: {exc}") from exc
        inst.validate()
        return inst

    @classmethod
    def load(cls, path: str) -> "WangInstance":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


# ----------------------------------------------------------------------------
# the spaces L(r)

def monomials(A: Sequence[RatFunc], r: int) -> list[RatFunc]:
    """Products of r elements of A (with repetition); [1] for r = 0."""
    if r == 0:
        return [RatFunc(1)]
    out = []
    for combo in itertools.combinations_with_replacement(range(len(A)), r):
        m = RatFunc(1)
        for i in combo:
            m = m * A[i]
        out.append(m)
    return out


def _coefficient_matrix(funcs: Sequence[RatFunc]) -> flint.fmpq_mat:
    """Rows: coefficient vectors of the numerators over a common denominator."""
    den = ExactPoly([1])
    for g in funcs:
        den = den * g.den.exquo(den.gcd(g.den))
    nums = [g.num * den.exquo(g.den) for g in funcs]
    width = max((p.degree() for p in nums), default=0) + 1
    width = max(width, 1)
    rows = []
    for p in nums:
        c = [flint.fmpq(x.numerator, x.denominator) for x in p.coefficients]
        rows.append(c + [flint.fmpq(0)] * (width - len(c)))
    return flint.fmpq_mat(len(rows), width, [x for row in rows for x in row])


def rank(funcs: Sequence[RatFunc]) -> int:
    """Dimension over Q (equivalently over its closure) of the span."""
    if not funcs:
        return 0
    return _coefficient_matrix(funcs).rank()


def _independent(funcs: Sequence[RatFunc]) -> list[RatFunc]:
    """A basis extracted greedily from a spanning list."""
    basis: list[RatFunc] = []
    for g in funcs:
        if rank(basis + [g]) > len(basis):
            basis.append(g)
    return basis


def _kernel_vector(funcs: Sequence[RatFunc]) -> Optional[list[Fraction]]:
    """Nonzero c with Σ c_i g_i = 0, or None."""
    M = _coefficient_matrix(funcs).transpose()
    R, rk = M.rref()
    ncols = M.ncols()
    if rk == ncols:
        return None
    pivots = []
    row = 0
    for col in range(ncols):
        if row < rk and R[row, col] != 0:
            pivots.append(col)
            row += 1
    free = next(c for c in range(ncols) if c not in pivots)
    vec = [Fraction(0)] * ncols
    vec[free] = Fraction(1)
    for i, pc in enumerate(pivots):
        x = -R[i, free]
        vec[pc] = Fraction(int(x.p), int(x.q))
    return vec


@dataclass
class WangResult:
    lhs: int
    rhs: Fraction
    hypothesis_held: bool
    n: int
    m: int
    chi: int
    h_f: int
    witness: Optional[str] = None
    s_terms: dict = field(default_factory=dict)
    outside_terms: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "lhs": self.lhs, "rhs": str(self.rhs), "rhs_float": float(self.rhs),
            "hypothesis_held": self.hypothesis_held, "n": self.n, "m": self.m,
            "chi": self.chi, "h_f": self.h_f, "witness": self.witness,
            "s_terms": self.s_terms, "outside_terms": self.outside_terms,
        }


def wang_lemma_check(inst: WangInstance) -> WangResult:
    """Test fL(r) ∩ L(r+1) = {0}; when it holds, verify the inequality

    Σ_{v∈S} max{0, v(f − a*_v)} + Σ_{v∉S} max_{a*} max{0, v(f − a*) − (m+n−1)}
        ≤ ((m+n)/n)·h(f) + ((m+n)(m+n−1)/(2n))·χ,   n = l(r), m = l(r+1).

    When the intersection is nonzero, returns hypothesis_held = False with a
    witness g ∈ L(r) such that f·g ∈ L(r+1).
    """
    inst.validate()
    A = inst.A_star
    Lr = _independent(monomials(A, inst.r))
    Lr1 = _independent(monomials(A, inst.r + 1))
    n, m = len(Lr), len(Lr1)
    hf = inst.f.height()
    chi = inst.chi
    rhs = Fraction(m + n, n) * hf + Fraction((m + n) * (m + n - 1), 2 * n) * chi
    fL = [inst.f * b for b in Lr]
    kv = _kernel_vector(fL + Lr1)
    if kv is not None:
        g = RatFunc(0)
        for c, b in zip(kv[:n], Lr):
            g = g + RatFunc(c) * b
        return WangResult(0, rhs, False, n, m, chi, hf, witness=g.to_str("t"))
    s_terms = {}
    lhs = 0
    for v in inst.S:
        o = _ord(inst.f - inst.choices[v.key()], v)
        if o is None:
            raise ArithmeticError("f equals a*_v although the hypothesis held")
        term = max(0, o) * v.degree
        s_terms[place_str(v)] = term
        lhs += term
    skeys = {v.key() for v in inst.S}
    cand: dict[str, Place] = {}
    for a in inst.elements():
        d = inst.f - a
        if d.is_zero():
            raise ArithmeticError("f lies in A* although the hypothesis held")
        for v in _zeros_poles(d):
            if v.key() not in skeys:
                cand[v.key()] = v
    outside = {}
    for key, v in cand.items():
        mu = max(max(0, ord_base(inst.f - a, v) - (m + n - 1)) for a in inst.elements())
        if mu:
            outside[place_str(v)] = mu * v.degree
            lhs += mu * v.degree
    res = WangResult(lhs, rhs, True, n, m, chi, hf, None, s_terms, outside)
    if lhs > rhs:
        raise WangViolation(f"lhs {lhs} > rhs {rhs} on instance {inst.to_json()}")
    return res


# ----------------------------------------------------------------------------
# random instances

_PLACE_POOL = ["inf", "t", "t - 1", "t + 1", "t - 2", "t^2 + 1", "t^2 - 2"]


def random_instance(rng: random.Random, max_S: int = 4, max_r: int = 2) -> WangInstance:
    """A valid instance with |S| ≤ max_S (counted over the closure) and r ≤ max_r.

    f is built to stress the left side: either close to an element of A*
    at a place of S, close to one outside S, a plain random function, or a
    member of A* (where the hypothesis must fail).
    """
    while True:
        pool = _PLACE_POOL[:]
        rng.shuffle(pool)
        S: list[Place] = []
        for text in pool:
            v = place_from_str(text)
            if sum(w.degree for w in S) + v.degree <= max_S and rng.random() < 0.6:
                S.append(v)
        if not S:
            continue
        finite = [v for v in S if not v.is_infinite]
        A: list[RatFunc] = []
        for _ in range(rng.randint(1, 3)):
            a = RatFunc(Fraction(rng.choice([1, -1, 2, 3, Fraction(1, 2)])))
            for v in finite:
                e = rng.randint(-2, 2)
                a = a * RatFunc(v.poly) ** e if e >= 0 else a / RatFunc(v.poly) ** (-e)
            if not is_s_unit(a, S):
                continue
            if all(a != b for b in A):
                A.append(a)
        if not A:
            continue
        r = rng.randint(0, max_r)
        elems = [RatFunc(0)] + A
        mode = rng.random()
        t = RatFunc(ExactPoly.gen())
        noise = RatFunc(ExactPoly([rng.randint(-3, 3) or 1 for _ in range(rng.randint(1, 3))]),
                        ExactPoly([rng.randint(-2, 2) or 1 for _ in range(rng.randint(1, 2))]))
        if mode < 0.35:
            v = rng.choice(S)
            base = rng.choice(elems)
            k = rng.randint(1, 5)
            bump = (RatFunc(v.poly) ** k) if not v.is_infinite else (RatFunc(1) / t ** k)
            f = base + bump * (RatFunc(rng.choice([1, -1, 2])) + bump * noise)
        elif mode < 0.6:
            c = Fraction(rng.randint(3, 9))
            base = rng.choice(elems)
            k = rng.randint(1, 6)
            f = base + RatFunc(ExactPoly([-c, 1])) ** k * noise
        elif mode < 0.9:
            f = noise
        else:
            f = rng.choice(A)
        if f.is_zero():
            continue
        choices = {}
        for v in S:
            # prefer the element f is closest to at v
            best = max(elems, key=lambda a: _ord(f - a, v) if not (f - a).is_zero() else 10 ** 6)
            choices[v.key()] = best if rng.random() < 0.7 else rng.choice(elems)
        inst = WangInstance(S, A, r, f, choices)
        inst.validate()
        return inst


def wang_random_suite(trials: int = 50, seed: int = 0, max_S: int = 4, max_r: int = 2,
                      valid_only: bool = False) -> dict:
    """Random instances checked against the lemma.

    With ``valid_only`` the suite keeps drawing until ``trials`` instances
    satisfy the independence hypothesis; the others are counted but not kept.
    """
    rng = random.Random(seed)
    held = failed = 0
    worst = None
    rows = []
    while (held if valid_only else held + failed) < trials:
        inst = random_instance(rng, max_S, max_r)
        res = wang_lemma_check(inst)
        if res.hypothesis_held:
            held += 1
            slack = res.rhs - res.lhs
            if worst is None or slack < worst:
                worst = slack
        else:
            failed += 1
            if valid_only:
                continue
        rows.append({"instance": inst.to_json(), "result": res.to_json()})
    return {"trials": trials, "seed": seed, "hypothesis_held": held, "hypothesis_failed": failed,
            "violations": 0, "min_slack": None if worst is None else str(worst), "rows": rows}


# ----------------------------------------------------------------------------
# two alternatives

@dataclass
class RothPropResult:
    first_holds: bool
    second_holds: bool
    h_f: int
    l: int
    sum_h: int
    first_rhs: float
    second_lhs: int
    second_rhs: Fraction
    f_in_A: bool

    def which(self) -> str:
        if self.first_holds and self.second_holds:
            return "both"
        return "first" if self.first_holds else "second"

    def to_json(self) -> dict:
        return {"which": self.which(), "first_holds": self.first_holds, "second_holds": self.second_holds,
                "h_f": self.h_f, "l": self.l, "sum_h_a": self.sum_h, "first_rhs": self.first_rhs,
                "second_lhs": self.second_lhs, "second_rhs": str(self.second_rhs),
                "second_rhs_float": float(self.second_rhs), "f_in_A": self.f_in_A}


def roth_prop_check(f: RatFunc, A: Sequence[RatFunc], S: Sequence[Place], eps: Fraction,
                    choices: dict[str, RatFunc]) -> RothPropResult:
    """Evaluate both alternatives for f against A = {0} ∪ {a_1..a_l}; at least one must hold:

    h(f) ≤ (6l/ε)·log(1/ε)·Σh(a), or f ∉ A and
    Σ_{v∈S} max{0, v(f − a_v)} ≤ (2+ε)h(f) + 3(1/ε)^l (χ + 2Σh(a)).
    """
    eps = Fraction(eps)
    if not (0 < eps <= Fraction(1, 16)):
        raise ValueError("eps must lie in (0, 1/16]")
    if f.is_zero():
        raise ValueError("f must be nonzero")
    nz = [a for a in A if not a.is_zero()]
    if not nz:
        raise ValueError("A needs a nonzero element")
    l = len(nz)
    sum_h = sum(a.height() for a in nz)
    hf = f.height()
    first_rhs = 6 * l / float(eps) * math.log(1 / float(eps)) * sum_h
    first = hf <= first_rhs
    elems = [RatFunc(0)] + nz
    f_in_A = any(f == a for a in elems)
    chi = -2 + sum(v.degree for v in S)
    lhs = 0
    second = not f_in_A
    if second:
        for v in S:
            a = choices.get(v.key(), RatFunc(0))
            if all(a != b for b in elems):
                raise ValueError(f"choice at {place_str(v)} is not in A")
            lhs += max(0, ord_base(f - a, v)) * v.degree
    rhs = (2 + eps) * hf + 3 * (1 / eps) ** l * (chi + 2 * sum_h)
    second = second and lhs <= rhs
    if not (first or second):
        raise WangViolation("neither alternative holds")
    return RothPropResult(first, second, hf, l, sum_h, first_rhs, lhs, rhs, f_in_A)
