"""Torsion parameters of a section: roots of Bₙ, their Betti coordinates and counts."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import flint
import gmpy2
import mpmath as mp
import numpy as np

from .algebra import ExactPoly, squarefree_decompose
from .kernels import SectionNumeric, betti_w_kernel
from .periods import _betti_raw_mp, density_closed_form
from .sections import SIGMA, LegendreSection, abscissa_fraction


class BoundaryAmbiguity(UserWarning):
    pass


# ----------------------------------------------------------------------------
# Aberth–Ehrlich simultaneous iteration (gmpy2 multiprecision arithmetic)

def _horner(coeffs, z):
    """p(z), p'(z) for descending coefficients."""
    p = coeffs[0]
    dp = 0 * z
    for c in coeffs[1:]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _initial_guesses(cs) -> list:
    """Starting points on circles read off the Newton polygon of log|coefficients|."""
    d = len(cs) - 1
    # ascending powers: a_k = cs[d − k]
    pts = [(k, float(gmpy2.log(abs(cs[d - k])))) for k in range(d + 1) if cs[d - k] != 0]
    hull: list = []
    for pt in pts:  # upper hull
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (pt[1] - y1) - (y2 - y1) * (pt[0] - x1) >= 0:
                hull.pop()
            else:
                break
        hull.append(pt)
    z = [gmpy2.mpc(0)] * hull[0][0]  # exact zero roots
    offset = 0.4
    for (i, yi), (j, yj) in zip(hull[:-1], hull[1:]):
        r = math.exp((yi - yj) / (j - i))
        m = j - i
        z.extend(gmpy2.mpc(r * np.cos(t), r * np.sin(t))
                 for t in (2 * np.pi * k / m + offset + 2 * np.pi * i / d for k in range(m)))
        offset += 0.9
    return z


def _aberth_sweep(cs, z, i):
    pv, dpv = _horner(cs, z[i])
    if pv == 0:
        return
    ratio = pv / dpv
    zi = z[i]
    s = sum(1 / (zi - z[j]) for j in range(len(z)) if j != i)
    z[i] = zi - ratio / (1 - ratio * s)


def inclusion_radii(cs, z) -> list:
    """d·|p(z_i)/Π_{j≠i}(z_i − z_j)| for monic p: disks that together contain all roots."""
    d = len(z)
    out = []
    for i in range(d):
        pv = _horner(cs, z[i])[0]
        prod = gmpy2.mpc(1)
        for j in range(d):
            if j != i:
                prod *= z[i] - z[j]
        out.append(d * abs(pv / prod))
    return out


def _isolated(z, radii) -> bool:
    d = len(z)
    return all(abs(z[i] - z[j]) > radii[i] + radii[j] for i in range(d) for j in range(i))


def _to_mp(v) -> mp.mpc:
    return mp.mpc(mp.mpf(str(v.real)), mp.mpf(str(v.imag)))


def aberth_roots(p: ExactPoly, bits: int = 200, max_iter: int = 300, accuracy: float = 1e-15) -> list[mp.mpc]:
    """All complex roots of a squarefree integer polynomial by Aberth–Ehrlich iteration.

    Iterates until every root carries a Weierstrass inclusion disk of radius
    below ``accuracy`` (relative) and the disks are pairwise disjoint, so each
    disk holds exactly one root; precision doubles when rounding stalls.
    """
    d = p.degree()
    if d < 1:
        return []
    ints = [int(c) for c in reversed(p.primitive().integer_coefficients())]
    if d == 1:
        return [mp.mpc(mp.mpf(-ints[1]) / ints[0])]
    z = None
    while bits <= 8192:
        with gmpy2.context(gmpy2.get_context(), precision=bits):
            lead = gmpy2.mpfr(ints[0])
            cs = [gmpy2.mpc(gmpy2.mpfr(c) / lead) for c in ints]
            z = _initial_guesses(cs) if z is None else [gmpy2.mpc(v) for v in z]
            for it in range(max_iter):
                for i in range(d):
                    _aberth_sweep(cs, z, i)
                if it % 4 == 3:
                    radii = inclusion_radii(cs, z)
                    if all(r <= accuracy * max(1, abs(v)) for r, v in zip(radii, z)) and _isolated(z, radii):
                        return [_to_mp(v) for v in z]
        bits *= 2
    raise ArithmeticError("Aberth iteration did not reach isolated inclusion disks")


def flint_roots(p: ExactPoly, prec: int = 200) -> list[complex]:
    old = flint.ctx.prec
    flint.ctx.prec = prec
    try:
        f = flint.fmpz_poly([int(c) for c in p.primitive().integer_coefficients()])
        return [r for r, _ in f.complex_roots()]
    finally:
        flint.ctx.prec = old


def _match_distance(a: list, b: list) -> float:
    """Max over a of the distance to the nearest point of b (lists of equal size)."""
    bb = np.array([complex(x) for x in b])
    return max(float(np.min(np.abs(bb - complex(x)))) for x in a) if a else 0.0


@dataclass
class RootSet:
    n: int
    roots: list            # mp.mpc, one per distinct root of Bₙ
    multiplicity: list     # exact multiplicity of each root in Bₙ
    cross_check: float     # max distance to the certified flint roots

    def distinct(self) -> int:
        return len(self.roots)


def torsion_parameters(n: int, section: LegendreSection = SIGMA, bits: int = 200,
                       cross_check: bool = True) -> RootSet:
    """Distinct roots of Bₙ: multiplicities from exact squarefree structure, positions from Aberth."""
    B = abscissa_fraction(n, section).B
    roots, mults = [], []
    worst = 0.0
    for f, e in squarefree_decompose(B):
        if f.degree() < 1:
            continue
        rs = aberth_roots(f, bits)
        if cross_check:
            worst = max(worst, _match_distance(rs, [complex(r) for r in flint_roots(f)]))
        roots.extend(rs)
        mults.extend([e] * len(rs))
    return RootSet(n, roots, mults, worst)


# ----------------------------------------------------------------------------
# counting

@dataclass
class TorsionCount:
    n: int
    region: str
    count: int
    count_closed: int
    predicted: Optional[float]
    relative_gap: Optional[float]
    exact_full_count: int
    ambiguous: list = field(default_factory=list)
    cross_check: float = 0.0

    def to_json(self) -> dict:
        return {"n": self.n, "region": self.region, "N_n": self.count, "N_n_closed": self.count_closed,
                "ratio": self.count / self.n ** 2, "predicted": self.predicted,
                "relative_gap": self.relative_gap, "exact_full_count": self.exact_full_count,
                "ambiguous": [[z.real, z.imag] for z in self.ambiguous],
                "root_cross_check": self.cross_check}


def exact_distinct_root_count(n: int, section: LegendreSection = SIGMA) -> int:
    """Number of distinct complex roots of Bₙ from its squarefree decomposition."""
    B = abscissa_fraction(n, section).B
    return sum(f.degree() for f, _ in squarefree_decompose(B) if f.degree() > 0)


def torsion_count(n: int, disk: Optional[tuple[complex, float]] = None, section: LegendreSection = SIGMA,
                  region_mass: Optional[float] = None, boundary_tol: float = 1e-12) -> TorsionCount:
    """N_n = #distinct roots of Bₙ in the region; predicted = n²·(density mass of the region).

    Full plane: prediction n²·ĥ/2 comes from the total mass 1/4 of σ; pass
    ``region_mass`` for a disk (e.g. from ``height_integral(region="disk")``).
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    exact = exact_distinct_root_count(n, section)
    if disk is None:
        mass = 0.25 if region_mass is None else region_mass
        pred = n * n * mass
        return TorsionCount(n, "plane", exact, exact, pred, abs(exact - pred) / pred, exact)
    center, radius = disk
    rs = torsion_parameters(n, section)
    inside, closed, amb = 0, 0, []
    for r in rs.roots:
        dist = abs(complex(r) - complex(center)) - radius
        if dist < -boundary_tol:
            inside += 1
            closed += 1
        elif dist <= boundary_tol:
            closed += 1
            amb.append(complex(r))
    if amb:
        warnings.warn(f"{len(amb)} root(s) within {boundary_tol} of the disk boundary: "
                      f"open count {inside}, closed count {closed}", BoundaryAmbiguity)
    pred = None if region_mass is None else n * n * region_mass
    gap = None if pred is None else abs(inside - pred) / pred
    return TorsionCount(n, f"disk({complex(center)},{radius})", inside, closed, pred, gap, exact, amb,
                        rs.cross_check)


# ----------------------------------------------------------------------------
# Betti coordinates at torsion parameters

def betti_at(lam, section: LegendreSection = SIGMA, dps: int = 40):
    """Unreduced (β1, β2) at λ using principal periods."""
    with mp.workdps(dps):
        return _betti_raw_mp(mp.mpc(lam), section)[2]


def grid_defect(lam, n: int, section: LegendreSection = SIGMA, dps: int = 40) -> float:
    """max_i dist(n·β_i(λ), ℤ)/n: zero exactly when σ(λ) has order dividing n."""
    b = betti_at(lam, section, dps)
    return max(float(abs(n * x - mp.nint(n * x))) / n for x in b)


def torsion_grid_check(n: int, section: LegendreSection = SIGMA, dps: int = 40) -> tuple[float, list]:
    """Largest (1/n)ℤ² defect over roots of Bₙ on smooth fibres, and the skipped singular-fibre roots."""
    worst = 0.0
    skipped = []
    for r in torsion_parameters(n, section).roots:
        if abs(r) < 1e-20 or abs(r - 1) < 1e-20:
            skipped.append(complex(r))
            continue
        worst = max(worst, grid_defect(r, n, section, dps))
    return worst, skipped


# ----------------------------------------------------------------------------
# local multiplicity of the Betti map

@dataclass
class MultiplicityEstimate:
    lam0: complex
    n: int
    order: Optional[float]
    multiplicity: Optional[int]
    ramified: bool
    ratios: list
    w_over_2: Optional[float] = None
    indeterminate: bool = False

    def to_json(self) -> dict:
        return {"lambda0": [self.lam0.real, self.lam0.imag], "n": self.n, "order": self.order,
                "multiplicity": self.multiplicity, "ramified": self.ramified, "ratios": self.ratios,
                "w_over_2": self.w_over_2, "indeterminate": self.indeterminate}


def betti_multiplicity(lam0, n: int, section: LegendreSection = SIGMA, r0: Optional[float] = None,
                       levels: int = 6, dps: int = 50) -> MultiplicityEstimate:
    """Vanishing order of β(λ) − β(λ0) at a torsion parameter λ0.

    The order is read from log2 of displacement ratios at radii r0·2^{−k}.
    At a branch point of the section the local parameter is √(λ − λ0), which
    doubles the order measured in λ.
    """
    with mp.workdps(dps):
        lam0 = mp.mpc(lam0)
        ramified = abs(_eval_poly(section.modulus, lam0)) < mp.mpf(10) ** (-(dps // 2))
        if r0 is None:
            r0 = 1e-3 * min(1.0, float(abs(lam0)), float(abs(1 - lam0)))
        ref = _betti_raw_mp(lam0, section)
        b0 = ref[2]

        def wrapped(v):
            return [x - mp.nint(x) for x in v]

        disp = []
        for k in range(levels):
            r = mp.mpf(r0) / 2 ** k
            best = mp.mpf(0)
            for j in range(6):
                lam = lam0 + r * mp.expj(2 * mp.pi * j / 6 + 0.3)
                b = _betti_raw_mp(lam, section, ref)[2]
                cands = [wrapped([b[0] - b0[0], b[1] - b0[1]])]
                if ramified:
                    # y changes sheet around a branch point: β and −β are both admissible
                    cands.append(wrapped([b[0] + b0[0], b[1] + b0[1]]))
                best = max(best, min(mp.sqrt(c[0] ** 2 + c[1] ** 2) for c in cands))
            disp.append(best)
        ratios = [float(mp.log(disp[k] / disp[k + 1], 2)) for k in range(levels - 1)]
    tail = ratios[-3:]
    order = sum(tail) / len(tail)
    spread = max(tail) - min(tail)
    m_real = 2 * order if ramified else order
    m_int = round(m_real)
    indeterminate = spread > 0.1 or abs(m_real - m_int) > 0.15
    w2 = _w_over_2(lam0, n, section)
    return MultiplicityEstimate(complex(lam0), n, order, None if indeterminate else m_int, ramified,
                                ratios, w2, indeterminate)


def _eval_poly(p: ExactPoly, z):
    acc = mp.mpc(0)
    for c in reversed(p.coefficients):
        acc = acc * z + mp.mpf(c.numerator) / c.denominator
    return acc


def _w_over_2(lam0, n: int, section) -> Optional[float]:
    """wₙ(λ0)/2 from the exact multiplicity of λ0 in Bₙ (w itself at a branch point)."""
    B = abscissa_fraction(n, section).B
    for f, e in squarefree_decompose(B):
        if f.degree() < 1:
            continue
        if abs(_eval_poly(f, mp.mpc(lam0))) < mp.mpf(10) ** (-10) * max(1, abs(_eval_poly(f.derivative(), mp.mpc(lam0)))):
            if abs(_eval_poly(section.modulus, mp.mpc(lam0))) < mp.mpf(10) ** (-10):
                return float(e)
            return e / 2
    return None


def jacobian_rank(lam0, section: LegendreSection = SIGMA, h: float = 1e-6) -> tuple[int, float]:
    """Numerical rank of d(β1, β2)/d(Re λ, Im λ) and its condition number."""
    sn = SectionNumeric.from_section(section)
    lam0 = complex(lam0)
    b1, b2, w, V = betti_w_kernel(np.array([lam0]), np.array([1 - lam0]), sn)
    # dβ1ρ1 + dβ2ρ2 = w dλ solved for the real Jacobian
    from .kernels import period_basis
    r1, r2, _, _ = (v[0] for v in period_basis(np.array([lam0]), np.array([1 - lam0])))
    M = np.array([[r1.real, r2.real], [r1.imag, r2.imag]])
    J = np.zeros((2, 2))
    for col, dl in enumerate((1.0, 1j)):
        rhs = w[0] * dl
        J[:, col] = np.linalg.solve(M, [rhs.real, rhs.imag])
    sv = np.linalg.svd(J, compute_uv=False)
    cond = float(sv[0] / sv[1]) if sv[1] > 0 else math.inf
    rank = int(np.sum(sv > 1e-10 * max(sv[0], 1e-300)))
    return rank, cond


# ----------------------------------------------------------------------------
# points where the Betti map drops rank

@dataclass
class CriticalPoint:
    lam: complex
    density: float
    residual: float
    converged: bool

    def to_json(self) -> dict:
        return {"lambda": [self.lam.real, self.lam.imag], "density": self.density,
                "residual": self.residual, "converged": self.converged}


def _w_scalar(lam: complex, sn: SectionNumeric) -> complex:
    return complex(betti_w_kernel(np.array([lam]), np.array([1 - lam]), sn)[2][0])


def critical_point_search(section: LegendreSection = SIGMA, starts=None, tol: float = 1e-12,
                          max_iter: int = 60) -> list[CriticalPoint]:
    """Newton on the real map λ ↦ (Re w, Im w); zeros of w are where dβ has rank 0."""
    sn = SectionNumeric.from_section(section)
    if starts is None:
        xs = np.linspace(-3, 4, 15)
        ys = np.linspace(-3, 3, 13)
        starts = [complex(x, y) for x in xs for y in ys]
    found: list[CriticalPoint] = []
    for z0 in starts:
        z = complex(z0)
        ok = False
        for _ in range(max_iter):
            if min(abs(z), abs(z - 1)) < 1e-6 or abs(z) > 1e6:
                break
            w = _w_scalar(z, sn)
            if abs(w) < tol:
                ok = True
                break
            h = 1e-7 * max(1.0, abs(z))
            wx = (_w_scalar(z + h, sn) - _w_scalar(z - h, sn)) / (2 * h)
            wy = (_w_scalar(z + 1j * h, sn) - _w_scalar(z - 1j * h, sn)) / (2 * h)
            J = np.array([[wx.real, wy.real], [wx.imag, wy.imag]])
            try:
                step = np.linalg.solve(J, [-w.real, -w.imag])
            except np.linalg.LinAlgError:
                break
            z = z + complex(step[0], step[1])
        if ok and all(abs(z - c.lam) > 1e-6 for c in found):
            found.append(CriticalPoint(z, density_closed_form(z, section), abs(_w_scalar(z, sn)), True))
    return found
