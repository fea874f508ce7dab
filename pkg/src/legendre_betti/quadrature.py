"""Adaptive quadrature of the Betti density over the λ-plane.

The plane is covered by log-polar charts λ = c + e^{s+iθ} around each
singular or branch point c (plus a chart for ∞), glued by a smooth partition
of unity.  Each chart is integrated by adaptive tensor Gauss–Legendre cells;
the neighbourhoods of 0, 1 and ∞ that lie beyond the exclusion radius are
integrated separately as one-dimensional radial tails.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .kernels import SectionNumeric, betti_density_kernel

_X7, _W7 = np.polynomial.legendre.leggauss(7)
_X7 = (_X7 + 1) / 2
_W7 = _W7 / 2
TWO_PI = 2 * np.pi
S_FAR = 230.0       # deepest |log r| sampled in the radial tails
R_OUTER = 1e3       # outer radius of the finite charts
R_INNER_INF = 1e-2  # inner radius of the chart at ∞
SMOOTH_CUTOFF = 1e-10


class ToleranceUnreachable(ArithmeticError):
    """The adaptive scheme ran out of cells before meeting the tolerance."""


# ----------------------------------------------------------------------------
# charts

@dataclass
class Chart:
    """Region {λ = c + e^{s+iθ}: θ ∈ [θa, θb], s_lo(θ) ≤ s ≤ s_hi(θ)}."""

    name: str
    center: Optional[complex]  # None for the chart at ∞ (λ = e^{s+iθ})
    theta: tuple[float, float]
    s_lo: Callable
    s_hi: Callable
    n_t: int = 8
    n_theta: int = 16
    kinks: tuple = ()

    def origin(self) -> complex:
        return 0j if self.center is None else self.center


def _const(v: float) -> Callable:
    return lambda th: np.full(np.shape(th), v, dtype=float)


class Integrand:
    """ψ_chart(λ)·density(λ)·r² as a function of (s, θ) on a chart."""

    def __init__(self, section: SectionNumeric, centers: list[complex]):
        self.section = section
        self.centers = centers

    def log_weights(self, lam, own: Optional[complex], s):
        lws = []
        for c in self.centers:
            if own is not None and c == own:
                lws.append(-4 * s)
            else:
                lws.append(-4 * np.log(np.abs(lam - c)))
        absl = np.exp(s) if own is None else np.abs(lam)
        lws.append(4 * np.log(absl / 4))
        return np.array(lws)

    def __call__(self, chart: Chart, s, th):
        rho = np.exp(s + 1j * th)
        if chart.center is None:
            lam = rho
            lam1 = 1 - lam
        else:
            lam = chart.center + rho
            lam1 = -rho if chart.center == 1 else (1 - chart.center) - rho
        lw = self.log_weights(lam, chart.center, s)
        top = lw.max(axis=0)
        denom = np.exp(lw - top).sum(axis=0)
        k = len(self.centers) if chart.center is None else self.centers.index(chart.center)
        psi = np.exp(lw[k] - top) / denom
        _, _, dens = betti_density_kernel(lam, lam1, self.section)
        out = psi * dens * np.exp(2 * s)
        return np.where(np.isfinite(out), out, 0.0)


# ----------------------------------------------------------------------------
# adaptive 2D cells on (θ, t) ∈ [θa, θb] × [0, 1]

def _cell_values(f: Integrand, chart: Chart, cells: np.ndarray) -> np.ndarray:
    """7×7 Gauss–Legendre value of each cell [θ0, θ1, t0, t1]."""
    if len(cells) == 0:
        return np.zeros(0)
    th0, th1, t0, t1 = cells.T
    TH = th0[:, None, None] + (th1 - th0)[:, None, None] * _X7[None, :, None]
    T = t0[:, None, None] + (t1 - t0)[:, None, None] * _X7[None, None, :]
    TH = np.broadcast_to(TH, (len(cells), 7, 7))
    lo = chart.s_lo(TH)
    hi = chart.s_hi(TH)
    S = lo + T * (hi - lo)
    vals = f(chart, S, TH) * (hi - lo)
    Wt = _W7[:, None] * _W7[None, :]
    return (vals * Wt).sum(axis=(1, 2)) * (th1 - th0) * (t1 - t0)


def _children(cells: np.ndarray) -> np.ndarray:
    th0, th1, t0, t1 = cells.T
    thm = (th0 + th1) / 2
    tm = (t0 + t1) / 2
    kids = [np.stack([a, b, c, d], axis=1) for a, b, c, d in (
        (th0, thm, t0, tm), (thm, th1, t0, tm), (th0, thm, tm, t1), (thm, th1, tm, t1))]
    return np.stack(kids, axis=1).reshape(-1, 4)


def _evaluate(f, chart, cells, pool=None, chunk=256):
    """Q and |Q − Σ children| for each cell, plus the children's values."""
    kids = _children(cells)
    allc = np.concatenate([cells, kids])
    if pool is None or len(allc) <= chunk:
        vals = _cell_values(f, chart, allc)
    else:
        parts = [allc[i:i + chunk] for i in range(0, len(allc), chunk)]
        vals = np.concatenate(list(pool.map(lambda c: _cell_values(f, chart, c), parts)))
    Q = vals[:len(cells)]
    kq = vals[len(cells):].reshape(-1, 4)
    return Q, kq.sum(axis=1), np.abs(Q - kq.sum(axis=1)), kids.reshape(-1, 4, 4), kq


@dataclass
class ChartResult:
    name: str
    value: float
    error: float
    cells: int


def integrate_chart(f: Integrand, chart: Chart, tol: float, max_cells: int = 40000,
                    pool=None) -> ChartResult:
    th_edges = [chart.theta[0]]
    for k in sorted(chart.kinks):
        if chart.theta[0] < k < chart.theta[1]:
            th_edges.append(k)
    th_edges.append(chart.theta[1])
    init = []
    for a, b in zip(th_edges[:-1], th_edges[1:]):
        nth = max(2, int(round(chart.n_theta * (b - a) / TWO_PI)))
        for i in range(nth):
            for j in range(chart.n_t):
                init.append((a + (b - a) * i / nth, a + (b - a) * (i + 1) / nth,
                             j / chart.n_t, (j + 1) / chart.n_t))
    cells = np.array(init)
    _, fine, err, kids, _ = _evaluate(f, chart, cells, pool)
    # active leaves: each carries its refined value (sum of children) and an error
    leaves_val = list(fine)
    leaves_err = list(err)
    leaves_cell = list(cells)
    leaves_kids = list(kids)
    total_cells = len(cells)
    while True:
        total_err = math.fsum(leaves_err)
        if total_err <= tol:
            break
        if total_cells > max_cells:
            raise ToleranceUnreachable(
                f"chart {chart.name}: error {total_err:.3g} > tol {tol:.3g} after {total_cells} cells")
        order = np.argsort(leaves_err)[::-1]
        chosen, acc = [], 0.0
        for i in order:
            chosen.append(i)
            acc += leaves_err[i]
            if acc >= 0.5 * total_err:
                break
        chosen_set = set(chosen)
        new_cells = np.concatenate([leaves_kids[i] for i in chosen])
        _, fine, err, kids, _ = _evaluate(f, chart, new_cells, pool)
        keep = [i for i in range(len(leaves_val)) if i not in chosen_set]
        leaves_val = [leaves_val[i] for i in keep] + list(fine)
        leaves_err = [leaves_err[i] for i in keep] + list(err)
        leaves_cell = [leaves_cell[i] for i in keep] + list(new_cells)
        leaves_kids = [leaves_kids[i] for i in keep] + list(kids)
        total_cells += len(new_cells)
    # deterministic compensated reduction in cell order
    order = sorted(range(len(leaves_cell)), key=lambda i: tuple(leaves_cell[i]))
    value = math.fsum(leaves_val[i] for i in order)
    return ChartResult(chart.name, value, math.fsum(leaves_err), total_cells)


# ----------------------------------------------------------------------------
# radial tails at 0, 1 and ∞

def ring_mass(f: Integrand, chart: Chart, s: np.ndarray, theta_range: Callable, n_theta: int = 96):
    """m(s) = ∫ ψ·density·r² dθ over theta_range(s) (composite Gauss–Legendre in θ)."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    xg, wg = np.polynomial.legendre.leggauss(n_theta // 4)
    xg = (xg + 1) / 2
    wg = wg / 2
    out = np.zeros(len(s))
    for k, sv in enumerate(s):
        a, b = theta_range(sv)
        if b <= a:
            continue
        edges = np.linspace(a, b, 5)
        th = np.concatenate([e0 + (e1 - e0) * xg for e0, e1 in zip(edges[:-1], edges[1:])])
        w = np.concatenate([(e1 - e0) * wg for e0, e1 in zip(edges[:-1], edges[1:])])
        out[k] = np.dot(f(chart, np.full(th.shape, sv), th), w)
    return out


@dataclass
class TailResult:
    name: str
    value: float
    error: float
    exponent: float
    remainder: float

    def to_json(self) -> dict:
        return {"name": self.name, "value": self.value, "error": self.error,
                "fitted_exponent": self.exponent, "remainder": self.remainder}


def log_tail(f: Integrand, chart: Chart, s_start: float, direction: int, theta_range: Callable,
             s_far: float = S_FAR, n_gl: int = 24) -> TailResult:
    """∫ m(s) ds from s_start out to ±∞ for a mass decaying like C·|s|^{−p}.

    The range up to |s| = s_far is done in u = 1/|s| by Gauss–Legendre; beyond
    it a power law fitted to m at s_far/2 and s_far supplies the remainder.
    """
    L = abs(s_start)

    def gl(n):
        x, w = np.polynomial.legendre.leggauss(n)
        u0, u1 = 1 / s_far, 1 / L
        u = u0 + (u1 - u0) * (x + 1) / 2
        sv = direction / u
        m = ring_mass(f, chart, sv, theta_range)
        return float(np.dot(m / u ** 2, w) * (u1 - u0) / 2)

    coarse = gl(n_gl // 2)
    fine = gl(n_gl)
    m1, m2 = ring_mass(f, chart, np.array([direction * s_far / 2, direction * s_far]), theta_range)
    if m1 > 0 and m2 > 0:
        p = math.log(m1 / m2) / math.log(2)
    else:
        p = float("nan")
    # ∫_{S}^{∞} C·s^{−p} ds = m(S)·S/(p − 1)
    rem = m2 * s_far / (p - 1) if (m2 > 0 and p > 1) else 0.0
    # remainder uncertainty: exponent within ±1 of the fitted value (bounded below by 1.5)
    p_lo = max(1.5, p - 1) if p == p else 1.5
    rem_hi = m2 * s_far / (p_lo - 1) if m2 > 0 else 0.0
    err = abs(fine - coarse) + abs(rem_hi - rem) + 1e-15
    return TailResult(chart.name, fine + rem, err, p, rem)


def smooth_tail(f: Integrand, chart: Chart, s_cut: float, theta_range: Callable) -> TailResult:
    """Mass inside r < e^{s_cut} around a point where density·r² → 0 at least like r."""
    m = float(ring_mass(f, chart, np.array([s_cut]), theta_range)[0])
    return TailResult(chart.name, m, m, 1.0, m)


# ----------------------------------------------------------------------------
# drivers

@dataclass
class HeightIntegralResult:
    value: float
    error_estimate: float
    cells: int
    excluded_mass_bound: float
    main: float
    main_error: float
    tails: list = field(default_factory=list)
    charts: list = field(default_factory=list)
    eps: float = 1e-3
    region: str = "plane"

    def to_json(self) -> dict:
        return {"value": self.value, "error_estimate": self.error_estimate, "cells": self.cells,
                "excluded_mass_bound": self.excluded_mass_bound, "main": self.main,
                "main_error": self.main_error, "eps": self.eps, "region": self.region,
                "tails": [t.to_json() for t in self.tails],
                "charts": [{"name": c.name, "value": c.value, "error": c.error, "cells": c.cells}
                           for c in self.charts]}


def _centers_for(section) -> list[complex]:
    """0, 1 and the finite points where the section's √ or ξ degenerates."""
    centers: list[complex] = [0j, 1 + 0j]
    extra = []
    for p in (section.modulus, section.xi.den):
        if p.degree() > 0:
            extra.extend(np.roots([float(c) for c in reversed(p.coefficients)]))
    for r in extra:
        r = complex(round(r.real, 12), round(r.imag, 12))
        if all(abs(r - c) > 1e-9 for c in centers):
            centers.append(r)
    return centers


def _plane_charts(centers, eps):
    charts = []
    for c in centers:
        singular = c in (0j, 1 + 0j)
        lo = math.log(eps) if singular else math.log(SMOOTH_CUTOFF)
        hi = math.log(R_OUTER)
        charts.append(Chart(f"c={c:g}", c, (0.0, TWO_PI), _const(lo), _const(hi),
                            n_t=int(math.ceil(hi - lo)), n_theta=16))
    lo, hi = math.log(R_INNER_INF), math.log(1 / eps)
    charts.append(Chart("inf", None, (0.0, TWO_PI), _const(lo), _const(hi),
                        n_t=int(math.ceil(hi - lo)), n_theta=16))
    return charts


def _disk_charts(centers, eps):
    """Charts restricted to |λ| < 1."""
    charts = []
    for c in centers:
        singular = c in (0j, 1 + 0j)
        lo = math.log(eps) if singular else math.log(SMOOTH_CUTOFF)
        ac = abs(c)
        if ac < 1 - 1e-12:
            if c == 0:
                charts.append(Chart("c=0|disk", c, (0.0, TWO_PI), _const(lo), _const(0.0),
                                    n_t=int(math.ceil(-lo)), n_theta=16))
                continue
            def hi_fn(th, c=c):
                b = (np.conj(c) * np.exp(1j * th)).real
                return np.log(-b + np.sqrt(b * b + 1 - abs(c) ** 2))
            charts.append(Chart(f"c={c:g}|disk", c, (0.0, TWO_PI), _const(lo), hi_fn,
                                n_t=int(math.ceil(-lo)), n_theta=16))
        elif abs(ac - 1) <= 1e-12:
            # boundary point: rays enter the disk when cos(θ − arg c) < −e^{lo}/2
            phase = math.atan2(c.imag, c.real)
            th0 = phase + math.acos(-math.exp(lo) / 2)
            th1 = phase + TWO_PI - math.acos(-math.exp(lo) / 2)
            def hi_fn(th, phase=phase, lo=lo):
                return np.log(np.maximum(-2 * np.cos(th - phase), math.exp(lo)))
            charts.append(Chart(f"c={c:g}|disk", c, (th0, th1), _const(lo), hi_fn,
                                n_t=int(math.ceil(math.log(2) - lo)), n_theta=16,
                                kinks=(phase + math.pi,)))
        else:
            # exterior point: each ray meets the disk in [r−, r+] when the discriminant is positive
            phase = math.atan2(c.imag, c.real)
            half = math.asin(1 / ac)
            th0, th1 = phase + math.pi - half, phase + math.pi + half
            def bounds(th, c=c):
                b = (np.conj(c) * np.exp(1j * th)).real
                disc = np.sqrt(np.maximum(b * b - (abs(c) ** 2 - 1), 0))
                return -b - disc, -b + disc
            def lo_fn(th, bounds=bounds):
                r0, r1 = bounds(th)
                return np.log(np.maximum(r0, 1e-300))
            def hi_fn(th, bounds=bounds):
                r0, r1 = bounds(th)
                return np.log(np.maximum(r1, np.maximum(r0, 1e-300)))
            charts.append(Chart(f"c={c:g}|disk", c, (th0, th1), lo_fn, hi_fn, n_t=4, n_theta=16,
                                kinks=(phase + math.pi,)))
    lo = math.log(R_INNER_INF)
    charts.append(Chart("inf|disk", None, (0.0, TWO_PI), _const(lo), _const(0.0),
                        n_t=int(math.ceil(-lo)), n_theta=16))
    return charts


def _full(_s):
    return (0.0, TWO_PI)


def _tail_jobs(f, charts, centers, eps, region):
    jobs = []
    for ch in charts:
        if ch.center is None:
            if region == "plane":
                jobs.append(lambda ch=ch: log_tail(f, ch, math.log(1 / eps), +1, _full))
            continue
        c = ch.center
        singular = c in (0j, 1 + 0j)
        if region == "disk":
            ac = abs(c)
            if ac > 1 + 1e-12:
                continue
            if abs(ac - 1) <= 1e-12:
                phase = math.atan2(c.imag, c.real)
                def rng(s, phase=phase):
                    a = math.acos(max(-1.0, -math.exp(s) / 2))
                    return (phase + a, phase + TWO_PI - a)
            else:
                rng = _full
        else:
            rng = _full
        if singular:
            jobs.append(lambda ch=ch, rng=rng: log_tail(f, ch, math.log(eps), -1, rng))
        else:
            jobs.append(lambda ch=ch, rng=rng: smooth_tail(f, ch, math.log(SMOOTH_CUTOFF), rng))
    return jobs


def height_integral(section, eps: float = 1e-3, tol: float = 2e-4, region: str = "plane",
                    threads: int = 1, max_cells: int = 40000, with_tails: bool = True,
                    numeric: Optional[SectionNumeric] = None) -> HeightIntegralResult:
    """∫ density over the λ-plane (region "plane") or the unit disk (region "disk").

    ``section`` supplies the singular points; ``numeric`` may override its
    numerical evaluation (used for torsion sections with y = 0).
    """
    if not 0 < eps < 0.25:
        raise ValueError("exclusion eps must lie in (0, 1/4)")
    centers = _centers_for(section) if section is not None else [0j, 1 + 0j]
    num = numeric if numeric is not None else SectionNumeric.from_section(section)
    f = Integrand(num, centers)
    charts = _plane_charts(centers, eps) if region == "plane" else _disk_charts(centers, eps)
    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        per = tol / (2 * len(charts))
        results = [integrate_chart(f, ch, per, max_cells, pool) for ch in charts]
        tails = []
        if with_tails:
            jobs = _tail_jobs(f, charts, centers, eps, region)
            if pool is not None:
                tails = list(pool.map(lambda j: j(), jobs))
            else:
                tails = [j() for j in jobs]
    finally:
        if pool is not None:
            pool.shutdown()
    main = math.fsum(r.value for r in results)
    main_err = math.fsum(r.error for r in results)
    tail_val = math.fsum(t.value for t in tails)
    tail_err = math.fsum(t.error for t in tails)
    return HeightIntegralResult(
        value=main + tail_val,
        error_estimate=main_err + tail_err,
        cells=sum(r.cells for r in results),
        excluded_mass_bound=tail_val + tail_err,
        main=main, main_error=main_err, tails=tails, charts=results, eps=eps, region=region)


def convergence_study(section, eps_values=(1e-1, 1e-2, 1e-3), tol: float = 2e-4, threads: int = 1):
    """Main-region integrals (no tails) for decreasing exclusion radii."""
    out = []
    for e in eps_values:
        r = height_integral(section, e, tol, threads=threads, with_tails=False)
        out.append((e, r.main, r.main_error))
    return out
