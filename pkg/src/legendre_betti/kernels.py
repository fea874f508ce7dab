"""Vectorized double-precision kernels for periods, logarithms and the density.

Everything here takes λ together with 1 − λ supplied separately, so charts
centred at λ = 1 keep full relative accuracy in 1 − λ.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import ExactPoly

_EPS = np.finfo(float).eps


def carlson_rf(x, y, z):
    """R_F(x, y, z) by duplication plus the fifth-order series."""
    x, y, z = np.broadcast_arrays(*(np.asarray(v, dtype=complex) for v in (x, y, z)))
    x, y, z = x.copy(), y.copy(), z.copy()
    A0 = (x + y + z) / 3
    Q = (3 * _EPS) ** (-1 / 6) * np.maximum.reduce([np.abs(A0 - x), np.abs(A0 - y), np.abs(A0 - z)])
    A = A0.copy()
    scale = 1.0
    for _ in range(400):
        if np.all(scale * Q <= np.abs(A)):
            break
        sx, sy, sz = np.sqrt(x), np.sqrt(y), np.sqrt(z)
        lam = sx * sy + sy * sz + sz * sx
        x, y, z, A = (x + lam) / 4, (y + lam) / 4, (z + lam) / 4, (A + lam) / 4
        scale /= 4
    X = (A - x) / A
    Y = (A - y) / A
    Z = -(X + Y)
    E2 = X * Y - Z * Z
    E3 = X * Y * Z
    return (1 - E2 / 10 + E3 / 14 + E2 * E2 / 24 - 3 * E2 * E3 / 44) / np.sqrt(A)


def carlson_rd(x, y, z):
    """R_D(x, y, z) by duplication plus the series."""
    x, y, z = np.broadcast_arrays(*(np.asarray(v, dtype=complex) for v in (x, y, z)))
    x, y, z = x.copy(), y.copy(), z.copy()
    A0 = (x + y + 3 * z) / 5
    Q = (_EPS / 4) ** (-1 / 6) * np.maximum.reduce([np.abs(A0 - x), np.abs(A0 - y), np.abs(A0 - z)])
    A = A0.copy()
    scale = 1.0
    acc = np.zeros_like(A)
    for _ in range(400):
        if np.all(scale * Q <= np.abs(A)):
            break
        sx, sy, sz = np.sqrt(x), np.sqrt(y), np.sqrt(z)
        lam = sx * sy + sy * sz + sz * sx
        acc = acc + scale / (sz * (z + lam))
        x, y, z, A = (x + lam) / 4, (y + lam) / 4, (z + lam) / 4, (A + lam) / 4
        scale /= 4
    X = (A - x) / A
    Y = (A - y) / A
    Z = -(X + Y) / 3
    E2 = X * Y - 6 * Z * Z
    E3 = (3 * X * Y - 8 * Z * Z) * Z
    E4 = 3 * (X * Y - Z * Z) * Z * Z
    E5 = X * Y * Z ** 3
    series = (1 - 3 * E2 / 14 + E3 / 6 + 9 * E2 * E2 / 88 - 3 * E4 / 22 - 9 * E2 * E3 / 52 + 3 * E5 / 26)
    return scale * A ** (-1.5) * series + 3 * acc


def complete_ke(m, mc):
    """K(m), E(m) (parameter convention) by the AGM with the right choice of roots.

    ``mc`` must equal 1 − m; it is passed separately for accuracy near m = 1.
    """
    m = np.asarray(m, dtype=complex)
    a = np.ones_like(m)
    b = np.sqrt(np.asarray(mc, dtype=complex) + 0j)
    s = 0.5 * m
    p = 0.5
    for _ in range(60):
        c = (a - b) / 2
        an = (a + b) / 2
        bn = np.sqrt(a * b)
        bn = np.where(np.abs(an - bn) > np.abs(an + bn), -bn, bn)
        p *= 2
        s = s + p * c * c
        a, b = an, bn
        if np.all(np.abs(c) <= 1e-10 * np.abs(a)):
            break
    K = np.pi / (2 * a)
    return K, K * (1 - s)


def _dF_series(m):
    # π·F'(m) = (π/4)·2F1(3/2, 3/2; 2; m)
    term = np.ones_like(m)
    acc = np.ones_like(m)
    for k in range(60):
        term = term * ((1.5 + k) ** 2 / ((2 + k) * (k + 1))) * m
        acc = acc + term
        if np.all(np.abs(term) < 1e-18 * np.abs(acc)):
            break
    return np.pi / 4 * acc


def pi_F_and_derivative(m, mc):
    """(πF(m), πF'(m)) for F = 2F1(1/2, 1/2; 1; ·), principal branch."""
    m = np.asarray(m, dtype=complex)
    mc = np.asarray(mc, dtype=complex)
    K, E = complete_ke(m, mc)
    small = np.abs(m) < 0.25
    with np.errstate(divide="ignore", invalid="ignore"):
        d = (E - mc * K) / (m * mc)
    if np.any(small):
        d = np.where(small, _dF_series(np.where(small, m, 0)), d)
    return 2 * K, d


def period_basis(lam, lam1):
    """Principal (ρ1, ρ2, ρ1', ρ2') with ρ1 = πF(λ), ρ2 = iπF(1 − λ); lam1 = 1 − λ."""
    r1, d1 = pi_F_and_derivative(lam, lam1)
    r2, d2 = pi_F_and_derivative(lam1, lam)
    return r1, 1j * r2, d1, -1j * d2


@dataclass
class SectionNumeric:
    """Float evaluation of a section (ξ, s·√f) and of ξ'."""

    xn: np.ndarray
    xd: np.ndarray
    sn: np.ndarray
    sd: np.ndarray
    f: np.ndarray
    constant_x: bool
    torsion2: bool = False

    @classmethod
    def from_section(cls, sec) -> "SectionNumeric":
        def arr(p: ExactPoly):
            return np.array([float(c) for c in reversed(p.coefficients)] or [0.0])
        return cls(arr(sec.xi.num), arr(sec.xi.den), arr(sec.s.num), arr(sec.s.den), arr(sec.modulus),
                   sec.xi.is_constant())

    @classmethod
    def two_torsion(cls, x0: float) -> "SectionNumeric":
        return cls(np.array([x0]), np.array([1.0]), np.array([0.0]), np.array([1.0]),
                   np.array([1.0]), True, True)

    def evaluate(self, lam):
        N = np.polyval(self.xn, lam)
        Dn = np.polyval(self.xd, lam)
        x0 = N / Dn
        if self.constant_x:
            dx0 = np.zeros_like(x0)
        else:
            Np = np.polyval(np.polyder(self.xn), lam) if len(self.xn) > 1 else 0 * lam
            Dp = np.polyval(np.polyder(self.xd), lam) if len(self.xd) > 1 else 0 * lam
            dx0 = (Np * Dn - N * Dp) / (Dn * Dn)
        y0 = np.polyval(self.sn, lam) / np.polyval(self.sd, lam) * np.sqrt(np.polyval(self.f, lam) + 0j)
        return x0 + 0j, dx0 + 0j, y0


_ROT = np.exp(-1j * np.array([0.0, np.pi / 2, np.pi, -np.pi / 2]))


def log_and_derivative(lam, lam1, x0, dx0, y0):
    """z = −∫_{x0}^{∞} dx/(2y) (along a ray avoiding branch cuts) and dz/dλ."""
    lam = np.asarray(lam, dtype=complex)
    a1 = np.asarray(x0, dtype=complex) + 0 * lam
    a2 = a1 - 1
    lam1 = np.asarray(lam1, dtype=complex)
    # x0 − λ from whichever of λ, 1 − λ is the smaller, to avoid cancellation
    a3 = np.where(np.abs(lam) <= np.abs(lam1), a1 - lam, a2 + lam1)
    best = None
    best_score = None
    for k, r in enumerate(_ROT):
        score = np.full(lam.shape, 2.0)
        for a in (a1, a2, a3):
            w = a * r
            aw = np.abs(w)
            sc = np.where(aw > 0, 1 + w.real / np.where(aw > 0, aw, 1), 2.0)
            score = np.minimum(score, sc)
        if best is None:
            best = np.zeros(lam.shape, dtype=int)
            best_score = score
        else:
            better = score > best_score + 1e-12
            best = np.where(better, k, best)
            best_score = np.where(better, score, best_score)
    rot = _ROT[best]
    phi = -np.angle(rot)
    w1, w2, w3 = a1 * rot, a2 * rot, a3 * rot
    q0 = np.sqrt(w1) * np.sqrt(w2) * np.sqrt(w3)
    e3 = np.exp(1.5j * phi)
    ratio = np.asarray(y0, dtype=complex) / np.where(q0 != 0, e3 * q0, 1)
    sgn = np.where(ratio.real >= 0, 1.0, -1.0)
    z = -sgn * np.exp(-0.5j * phi) * carlson_rf(w1, w2, w3)
    with np.errstate(divide="ignore", invalid="ignore"):
        bterm = np.where(np.asarray(dx0) != 0, np.asarray(dx0) / (2 * np.asarray(y0)), 0)
    zp = bterm - sgn * np.exp(-1.5j * phi) * carlson_rd(w1, w2, w3) / 6
    return z, zp


def betti_w_kernel(lam, lam1, section: SectionNumeric):
    """(β1, β2, w, V) with w = z' − β1ρ1' − β2ρ2', so dβ1ρ1 + dβ2ρ2 = w·dλ."""
    lam = np.asarray(lam, dtype=complex)
    lam1 = np.asarray(lam1, dtype=complex)
    r1, r2, d1, d2 = period_basis(lam, lam1)
    x0, dx0, y0 = section.evaluate(lam)
    z, zp = log_and_derivative(lam, lam1, x0, dx0, y0)
    d = r1 * np.conj(r2) - np.conj(r1) * r2
    b1 = ((z * np.conj(r2) - np.conj(z) * r2) / d).real
    b2 = ((np.conj(z) * r1 - z * np.conj(r1)) / d).real
    V = (r1 * np.conj(r2)).imag
    w = zp - b1 * d1 - b2 * d2
    # w at rounding level of its terms is numerically zero (e.g. torsion sections)
    scale = np.abs(zp) + np.abs(b1 * d1) + np.abs(b2 * d2)
    w = np.where(np.abs(w) <= 512 * _EPS * scale, 0, w)
    return b1, b2, w, V


def betti_density_kernel(lam, lam1, section: SectionNumeric):
    """(β1, β2, density) with density = |z' − β1ρ1' − β2ρ2'|² / |V|."""
    b1, b2, w, V = betti_w_kernel(lam, lam1, section)
    return b1, b2, np.abs(w) ** 2 / np.abs(V)
