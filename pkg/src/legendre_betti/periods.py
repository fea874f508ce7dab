"""Period frames, elliptic logarithms and Betti coordinates at arbitrary precision.

Periods are those of dx/(2y) on y² = x(x−1)(x−λ):
ρ1 = πF(λ), ρ2 = iπF(1−λ) with F = 2F1(1/2, 1/2; 1; ·) near λ = 1/2,
continued along a tracked path.  Quasi-periods
η = 2λ(1−λ)ρ' + (1−2λ)ρ/3 satisfy ρ2η1 − ρ1η2 = 2πi.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import mpmath as mp
import numpy as np

from . import kernels


class SingularFiberError(ValueError):
    """λ lies on a singular fibre (0, 1 or ∞)."""


class PrecisionError(ArithmeticError):
    """Requested accuracy cannot be reached at the working precision."""


class DegenerateFrameError(ValueError):
    pass


DEFAULT_PREC = 128


def _mpc(v) -> mp.mpc:
    return mp.mpc(v)


# ----------------------------------------------------------------------------
# principal branches, two independent routes

def _agm_ke(m, mc):
    """K, E at parameter m (mc = 1 − m) via right-choice AGM in mpmath arithmetic."""
    a = mp.mpc(1)
    b = mp.sqrt(mp.mpc(mc))
    s = m / 2
    p = mp.mpf(1) / 2
    tol = mp.mpf(2) ** (-(mp.mp.prec // 2) - 8)
    for _ in range(mp.mp.prec + 40):
        c = (a - b) / 2
        an = (a + b) / 2
        bn = mp.sqrt(a * b)
        if abs(an - bn) > abs(an + bn):
            bn = -bn
        p *= 2
        s += p * c * c
        a, b = an, bn
        if abs(c) <= tol * abs(a):
            break
    K = mp.pi / (2 * a)
    return K, K * (1 - s)


def _dF_series_mp(m):
    term = mp.mpc(1)
    acc = mp.mpc(1)
    k = 0
    while True:
        term *= (mp.mpf(3) / 2 + k) ** 2 / ((2 + k) * (k + 1)) * m
        acc += term
        k += 1
        if abs(term) < mp.mp.eps * abs(acc) / 4 or k > 10 * mp.mp.prec:
            break
    return mp.pi / 4 * acc


def _pi_F_agm(m, mc):
    K, E = _agm_ke(m, mc)
    if abs(m) < mp.mpf(1) / 4:
        d = _dF_series_mp(m)
    else:
        d = (E - mc * K) / (m * mc)
    return 2 * K, d


def principal_periods(lam, lam1=None, method: str = "agm"):
    """Principal-branch (ρ1, ρ2, ρ1', ρ2') at λ.

    ``method`` is "agm" (arithmetic–geometric mean) or "hyp" (mpmath hyp2f1).
    """
    lam = _mpc(lam)
    lam1 = 1 - lam if lam1 is None else _mpc(lam1)
    if lam == 0 or lam1 == 0:
        raise SingularFiberError("λ ∈ {0, 1} is a singular fibre")
    if method == "agm":
        r1, d1 = _pi_F_agm(lam, lam1)
        r2, d2 = _pi_F_agm(lam1, lam)
    elif method == "hyp":
        h = mp.mpf(1) / 2
        r1 = mp.pi * mp.hyp2f1(h, h, 1, lam)
        r2 = mp.pi * mp.hyp2f1(h, h, 1, lam1)
        d1 = mp.pi / 4 * mp.hyp2f1(3 * h, 3 * h, 2, lam)
        d2 = mp.pi / 4 * mp.hyp2f1(3 * h, 3 * h, 2, lam1)
    else:
        raise ValueError(f"unknown method {method!r}")
    return r1, 1j * r2, d1, -1j * d2


def second_derivative(lam, rho, drho):
    """ρ'' from the Picard–Fuchs equation 4λ(1−λ)ρ'' + 4(1−2λ)ρ' − ρ = 0."""
    return (rho - 4 * (1 - 2 * lam) * drho) / (4 * lam * (1 - lam))


# ----------------------------------------------------------------------------
# frames

@dataclass
class PeriodFrame:
    lam: mp.mpc
    rho1: mp.mpc
    rho2: mp.mpc
    drho1: mp.mpc
    drho2: mp.mpc
    branch: tuple = ((1, 0), (0, 1))
    path: list = field(default_factory=list)
    prec: int = DEFAULT_PREC

    @property
    def eta1(self) -> mp.mpc:
        return 2 * self.lam * (1 - self.lam) * self.drho1 + (1 - 2 * self.lam) * self.rho1 / 3

    @property
    def eta2(self) -> mp.mpc:
        return 2 * self.lam * (1 - self.lam) * self.drho2 + (1 - 2 * self.lam) * self.rho2 / 3

    @property
    def d(self) -> mp.mpc:
        return self.rho1 * mp.conj(self.rho2) - self.rho2 * mp.conj(self.rho1)

    @property
    def V(self) -> mp.mpf:
        return mp.im(self.rho2 * mp.conj(self.rho1))

    @property
    def tau(self) -> mp.mpc:
        return self.rho2 / self.rho1

    @property
    def branch_id(self) -> str:
        (a, b), (c, e) = self.branch
        return f"[{a},{b};{c},{e}]"

    def legendre_residual(self) -> mp.mpf:
        with mp.workprec(self.prec + 20):
            return abs(self.rho2 * self.eta1 - self.rho1 * self.eta2 - 2j * mp.pi)

    def to_json(self) -> dict:
        c = lambda v: [float(mp.re(v)), float(mp.im(v))]  # noqa: E731
        return {"lambda": c(self.lam), "rho1": c(self.rho1), "rho2": c(self.rho2),
                "eta1": c(self.eta1), "eta2": c(self.eta2), "V": float(self.V),
                "tau": c(self.tau), "branch": self.branch_id,
                "legendre_residual": float(self.legendre_residual())}


def _match(pred, dpred, P, method):
    """Integer (a, b) with pred ≈ a·ρ1 + b·ρ2 for the principal periods P at the new point."""
    r1, r2, d1, d2 = P
    det = r1 * d2 - r2 * d1
    a = (pred * d2 - r2 * dpred) / det
    b = (r1 * dpred - pred * d1) / det
    ai, bi = int(mp.nint(mp.re(a))), int(mp.nint(mp.re(b)))
    err = max(abs(a - ai), abs(b - bi))
    return (ai, bi), err


def _apply(branch, P):
    r1, r2, d1, d2 = P
    (a, b), (c, e) = branch
    return a * r1 + b * r2, c * r1 + e * r2, a * d1 + b * d2, c * d1 + e * d2


TAYLOR_TERMS = 18


def _taylor(lam, rho, drho, h, terms: int = TAYLOR_TERMS):
    """ρ(λ+h), ρ'(λ+h) by Taylor series with derivatives from the Picard–Fuchs recursion

    ρ^(k+2) = ((2k+1)²ρ^(k) − 4(k+1)(1−2λ)ρ^(k+1)) / (4λ(1−λ)).
    """
    q = 4 * lam * (1 - lam)
    r = 1 - 2 * lam
    derivs = [rho, drho]
    for k in range(terms):
        derivs.append(((2 * k + 1) ** 2 * derivs[k] - 4 * (k + 1) * r * derivs[k + 1]) / q)
    val = mp.mpc(0)
    dval = mp.mpc(0)
    hp = mp.mpc(1)
    for k in range(len(derivs) - 1):
        fact = mp.factorial(k)
        val += derivs[k] * hp / fact
        dval += derivs[k + 1] * hp / fact
        hp *= h
    return val, dval


def _step(frame: PeriodFrame, new_lam, method: str) -> PeriodFrame:
    h = new_lam - frame.lam
    out = []
    P = principal_periods(new_lam, method=method)
    for rho, drho in ((frame.rho1, frame.drho1), (frame.rho2, frame.drho2)):
        pred, dpred = _taylor(frame.lam, rho, drho, h)
        coeffs, err = _match(pred, dpred, P, method)
        if err > mp.mpf("0.01"):
            raise PrecisionError(f"path tracking lost the branch at λ = {complex(new_lam)} (gap {float(err):.3g})")
        out.append(coeffs)
    branch = (tuple(out[0]), tuple(out[1]))
    r1, r2, d1, d2 = _apply(branch, P)
    return PeriodFrame(mp.mpc(new_lam), r1, r2, d1, d2, branch, frame.path + [complex(new_lam)], frame.prec)


BASE_POINT = mp.mpf(1) / 2


def _waypoints(lam) -> list:
    """A path from 1/2 to λ that keeps clear of 0 and 1."""
    lam = complex(lam)
    start = 0.5 + 0j
    pts = [start]
    def seg_ok(p, q):
        d = q - p
        for s in (0.0, 1.0):
            t = max(0.0, min(1.0, ((s - p) * d.conjugate()).real / abs(d) ** 2)) if d else 0.0
            if t < 1 - 1e-12 and abs(p + t * d - s) < 0.25 * min(abs(q - s), 1.0):
                return False
        return True
    if seg_ok(start, lam):
        return pts + [lam]
    via = 0.5 + (0.5j if lam.imag >= 0 else -0.5j)
    return pts + [via, lam]


def periods(lam, prec: int = DEFAULT_PREC, method: str = "agm", track: bool = True) -> PeriodFrame:
    """Period frame at λ, continued from λ = 1/2 along a tracked path."""
    with mp.workprec(prec + 20):
        lamc = _mpc(lam)
        if lamc == 0 or lamc == 1:
            raise SingularFiberError("λ ∈ {0, 1} is a singular fibre")
        if not mp.isfinite(mp.re(lamc)) or not mp.isfinite(mp.im(lamc)):
            raise SingularFiberError("λ = ∞ is a singular fibre")
        if not track:
            r1, r2, d1, d2 = principal_periods(lamc, method=method)
            return PeriodFrame(lamc, r1, r2, d1, d2, path=[complex(lamc)], prec=prec)
        frame = PeriodFrame(mp.mpc(BASE_POINT), *principal_periods(BASE_POINT, method=method),
                            path=[0.5 + 0j], prec=prec)
        pts = _waypoints(lamc)
        for target in pts[1:]:
            target = lamc if target == pts[-1] else mp.mpc(target)
            while frame.lam != target:
                dist = min(abs(frame.lam), abs(frame.lam - 1))
                hmax = mp.mpf("0.3") * dist
                delta = target - frame.lam
                if abs(delta) <= hmax:
                    nxt = target
                else:
                    nxt = frame.lam + delta * hmax / abs(delta)
                frame = _step(frame, nxt, method)
        res = frame.legendre_residual()
        if res > mp.mpf(2) ** (-(prec // 2)) * max(1, abs(frame.rho1) * abs(frame.eta2)):
            raise PrecisionError(f"Legendre relation residual {float(res):.3g} too large")
        return frame


def agm_hyp_discrepancy(lam, prec: int = DEFAULT_PREC) -> float:
    """Max relative gap between the AGM and hypergeometric principal periods."""
    with mp.workprec(prec + 20):
        A = principal_periods(lam, method="agm")
        H = principal_periods(lam, method="hyp")
        return float(max(abs(a - h) / abs(h) for a, h in zip(A, H)))


def picard_fuchs_residual(frame: PeriodFrame, h: float = 1e-4) -> tuple[float, float]:
    """Relative PF residual for ρ1 and ρ2 using centred differences of the tracked frame."""
    out = []
    with mp.workprec(DEFAULT_PREC + 40):
        lam = frame.lam
        hh = mp.mpf(h) * min(abs(lam), abs(1 - lam))
        nb = {}
        for k in (-2, -1, 1, 2):
            nb[k] = _step(frame, lam + k * hh, "agm")
        for i in (0, 1):
            get = (lambda f: f.rho1) if i == 0 else (lambda f: f.rho2)
            f0 = get(frame)
            fm2, fm1, fp1, fp2 = (get(nb[k]) for k in (-2, -1, 1, 2))
            d1 = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * hh)
            d2 = (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * hh * hh)
            r = 4 * lam * (1 - lam) * d2 + 4 * (1 - 2 * lam) * d1 - f0
            scale = abs(4 * lam * (1 - lam) * d2) + abs(4 * (1 - 2 * lam) * d1) + abs(f0)
            out.append(float(abs(r) / scale))
    return out[0], out[1]


# ----------------------------------------------------------------------------
# logarithm and Betti coordinates

_ROTATIONS = [0, 1, 2, -1]  # φ = k·π/2


def elliptic_log(frame: PeriodFrame, x, y, dx=None):
    """z = −∫_{x}^{∞} dx/(2y) on the fibre at frame.lam.

    With ``dx`` (= dx/dλ along a section) also returns dz/dλ.
    """
    if x is None:
        raise ValueError("point at infinity has logarithm 0 and no finite coordinates")
    lam = frame.lam
    x = _mpc(x)
    y = _mpc(y)
    if abs(y * y - x * (x - 1) * (x - lam)) > mp.mpf(10) ** (-(mp.mp.dps // 2)) * max(1, abs(x) ** 3):
        raise ValueError("point is not on the fibre")
    a = [x, x - 1, x - lam]
    best_k, best_score = 0, -1
    for k in _ROTATIONS:
        rot = mp.expjpi(-mp.mpf(k) / 2)
        score = min((1 + mp.re(v * rot) / abs(v)) if v != 0 else 2 for v in a)
        if score > best_score + mp.mpf("1e-12"):
            best_k, best_score = k, score
    phi = mp.pi * best_k / 2
    rot = mp.expj(-phi)
    w = [v * rot for v in a]
    q0 = mp.sqrt(w[0]) * mp.sqrt(w[1]) * mp.sqrt(w[2])
    sgn = 1
    if q0 != 0 and y != 0:
        sgn = 1 if mp.re(y / (mp.expj(1.5 * phi) * q0)) >= 0 else -1
    z = -sgn * mp.expj(-phi / 2) * mp.elliprf(*w)
    if dx is None:
        return z
    bterm = 0 if dx == 0 else dx / (2 * y)
    zp = bterm - sgn * mp.expj(-1.5 * phi) * mp.elliprd(*w) / 6
    return z, zp


@dataclass
class BettiCoords:
    beta1: float
    beta2: float
    z: complex
    branch_id: str
    raw: tuple = (0.0, 0.0)

    def to_json(self) -> dict:
        return {"beta1": self.beta1, "beta2": self.beta2, "z": [self.z.real, self.z.imag],
                "branch_id": self.branch_id}


def solve_betti(frame: PeriodFrame, z):
    """Real (β1, β2) with z = β1ρ1 + β2ρ2, unreduced."""
    d = frame.d
    if abs(d) < mp.mp.eps * abs(frame.rho1) * abs(frame.rho2) * 16:
        raise DegenerateFrameError("degenerate period frame (V = 0)")
    z = _mpc(z)
    b1 = mp.re((z * mp.conj(frame.rho2) - mp.conj(z) * frame.rho2) / d)
    b2 = mp.re((mp.conj(z) * frame.rho1 - z * mp.conj(frame.rho1)) / d)
    return b1, b2


def betti_coords(frame: PeriodFrame, z) -> BettiCoords:
    b1, b2 = solve_betti(frame, z)
    f1 = b1 - mp.floor(b1)
    f2 = b2 - mp.floor(b2)
    # values within rounding of 1 wrap to 0
    if 1 - f1 < mp.mpf(10) ** (-(mp.mp.dps - 3)):
        f1 = mp.mpf(0)
    if 1 - f2 < mp.mpf(10) ** (-(mp.mp.dps - 3)):
        f2 = mp.mpf(0)
    return BettiCoords(float(f1), float(f2), complex(z), frame.branch_id, (float(b1), float(b2)))


def distance_to_grid(beta: tuple, n: int) -> float:
    """max_i dist(n·β_i, ℤ)/n."""
    return max(abs(n * b - round(n * b)) / n for b in beta)


# ----------------------------------------------------------------------------
# densities

class ExclusionError(ValueError):
    """λ is inside an exclusion disk; use the tail bound there."""


def _section_point_mp(section, lam):
    """(x0, x0', y0) of a section at λ in mpmath arithmetic (principal √)."""
    xi, s, f = section.xi, section.s, section.modulus
    def ev(p):
        acc = mp.mpc(0)
        for c in reversed(p.coefficients):
            acc = acc * lam + mp.mpf(c.numerator) / c.denominator
        return acc
    N, D = ev(xi.num), ev(xi.den)
    Np, Dp = ev(xi.num.derivative()), ev(xi.den.derivative())
    x0 = N / D
    dx0 = (Np * D - N * Dp) / (D * D)
    y0 = ev(s.num) / ev(s.den) * mp.sqrt(ev(f))
    return x0, dx0, y0


def _check_exclusion(lam, radius):
    lam = complex(lam)
    if abs(lam) < radius or abs(lam - 1) < radius or abs(lam) > 1 / radius:
        raise ExclusionError(f"λ = {lam} is inside the exclusion radius {radius}; use the tail bound")


def density_closed_form(lam, section, exclusion: float = 1e-12) -> float:
    """|z' − β1ρ1' − β2ρ2'|²/|V| via the double-precision kernels."""
    _check_exclusion(lam, exclusion)
    sn = kernels.SectionNumeric.from_section(section)
    lam = complex(lam)
    _, _, dens = kernels.betti_density_kernel(np.array([lam]), np.array([1 - lam]), sn)
    return float(dens[0])


def _betti_raw_mp(lam, section, ref=None):
    """Unreduced β at λ from hypergeometric periods and mpmath Carlson integrals.

    When ``ref`` = (P, y0, β) from a nearby point is given, the periods are
    re-expressed in the reference frame by integer rounding, y0 is kept on the
    same sheet, and β is shifted to the nearest representative.
    """
    P = principal_periods(lam, method="hyp")
    x0, _, y0 = _section_point_mp(section, lam)
    if ref is not None:
        Pref, yref, bref = ref
        # re-express the new principal periods in the continued reference frame
        r1, r2, d1, d2 = P
        branch = []
        for rho, drho in ((Pref[0], Pref[2]), (Pref[1], Pref[3])):
            (a, b), err = _match(rho, drho, P, "hyp")
            branch.append((a, b))
        P = _apply(tuple(branch), P)
        if abs(y0 + yref) < abs(y0 - yref):
            y0 = -y0
    frame = PeriodFrame(mp.mpc(lam), *P)
    z = elliptic_log(frame, x0, y0)
    b1, b2 = solve_betti(frame, z)
    if ref is not None:
        b1 -= mp.nint(b1 - ref[2][0])
        b2 -= mp.nint(b2 - ref[2][1])
    return P, y0, (b1, b2)


def _branch_distance(section, lam: complex) -> float:
    # distance to zeros of the √ modulus and to poles of ξ, where β stops being smooth
    pts = []
    for p in (section.modulus, section.xi.den):
        if p.degree() > 0:
            pts.extend(np.roots([float(c) for c in reversed(p.coefficients)]))
    return min([abs(lam - r) for r in pts] + [1.0])


def density_fd(lam, section, h: Optional[float] = None, dps: int = 40, exclusion: float = 1e-12) -> float:
    """|det ∂(β1, β2)/∂(Re λ, Im λ)| by fourth-order centred differences."""
    _check_exclusion(lam, exclusion)
    with mp.workdps(dps):
        lam = mp.mpc(lam)
        if h is None:
            h = 1e-5 * min(abs(complex(lam)), abs(complex(1 - lam)), _branch_distance(section, complex(lam)))
        hh = mp.mpf(h)
        ref = _betti_raw_mp(lam, section)
        grads = []
        for direction in (1, 1j):
            vals = {}
            for k in (-2, -1, 1, 2):
                vals[k] = _betti_raw_mp(lam + k * hh * direction, section, ref)[2]
            g = [(vals[-2][i] - 8 * vals[-1][i] + 8 * vals[1][i] - vals[2][i]) / (12 * hh) for i in (0, 1)]
            grads.append(g)
        det = grads[0][0] * grads[1][1] - grads[1][0] * grads[0][1]
        return float(abs(det))


@dataclass
class DensitySample:
    lam: complex
    density: float
    method: str

    def to_json(self) -> dict:
        return {"lambda": [self.lam.real, self.lam.imag], "density": self.density, "method": self.method}


def betti_density(lam, section, method: str = "closed-form", exclusion: float = 1e-12) -> DensitySample:
    if method == "closed-form":
        v = density_closed_form(lam, section, exclusion)
    elif method == "finite-difference":
        v = density_fd(lam, section, exclusion=exclusion)
    else:
        raise ValueError(f"unknown density method {method!r}")
    return DensitySample(complex(lam), v, method)


def section_betti(lam, section, prec: int = DEFAULT_PREC) -> BettiCoords:
    """Betti coordinates of a section at λ in the tracked frame."""
    with mp.workprec(prec + 20):
        frame = periods(lam, prec)
        x0, _, y0 = _section_point_mp(section, frame.lam)
        z = elliptic_log(frame, x0, y0)
        return betti_coords(frame, z)
