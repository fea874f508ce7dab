"""The acceptance suite: fifteen checks, each returning a pass/fail row with its evidence."""
from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional

import mpmath as mp

from .algebra import LAM, RatFunc, parse_ratfunc
from .cf import cf_expand, roth_example_check
from .laurent import quartic_branch
from .periods import (
    agm_hyp_discrepancy,
    density_closed_form,
    density_fd,
    periods,
    picard_fuchs_residual,
)
from .qi import quasi_integrality_report
from .quadrature import height_integral
from .sections import (
    SIGMA,
    TAU,
    abscissa_fraction,
    canonical_height_estimate,
    degree_profile,
    expected_degrees,
    scalar_mul,
)
from .torsion import torsion_count, torsion_grid_check
from .wang import wang_random_suite
from .xi import (
    beta_consistency,
    pole_multiplicity_scan,
    sharpness_family,
    two_section_beta,
    xi_oddness_check,
    xi_value,
)

GOLDEN_ABSCISSAE = {
    1: "2",
    2: "-(l-4)^2/(8*(l-2))",
    3: "2*(5*l^2-16*l+16)^2/(l^2+8*l-16)^2",
    4: "-(l^4-80*l^3+352*l^2-512*l+256)^2/(32*(l-2)*l^2*(3*l^2-16*l+16)^2)",
}
# keyed by the exponent of 1/t
ALPHA_HEAD = {1: Fraction(-1), 4: Fraction(1), 7: Fraction(-4), 10: Fraction(22), 13: Fraction(-140)}
ALPHA1_HEAD = {0: Fraction(1), 1: Fraction(1, 3), 2: Fraction(-2, 9)}

CONFIG_DEFAULTS: dict[str, Any] = {
    "n_max": 30,
    "seed": 0,
    "threads": 1,
    "height_tol": 2e-4,
    "torsion_disk": {"12": 0.15, "20": 0.08},
    "xi_linearity_n": 6,
    "multiplicity_n": 20,
    "sharpness_d": [2, 3, 4, 5, 6],
    "coprime_d": 9,
    "two_beta_random": 20,
    "density_points": 200,
    "roth_maxdeg": 200,
    "wang_trials": 50,
    "qi_n": 20,
    "zimmer_n": 10,
    "only": None,
}


class ConfigError(ValueError):
    """The acceptance configuration is malformed."""


def _check_type(key: str, value, default) -> None:
    if default is None:
        if value is not None and not (isinstance(value, list) and all(isinstance(v, str) for v in value)):
            raise ConfigError(f"{key} must be a list of criterion names")
        return
    if isinstance(default, bool) or isinstance(value, bool):
        raise ConfigError(f"{key} has the wrong type")
    if isinstance(default, int) and not isinstance(value, int):
        raise ConfigError(f"{key} must be an integer")
    if isinstance(default, float) and not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number")
    if isinstance(default, list) and not (isinstance(value, list) and all(isinstance(v, int) for v in value)):
        raise ConfigError(f"{key} must be a list of integers")
    if isinstance(default, dict):
        if not isinstance(value, dict):
            raise ConfigError(f"{key} must be an object")
        for k, v in value.items():
            if not str(k).isdigit() or isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{key} maps n to a relative tolerance")


def load_config(source: Optional[str | dict] = None) -> dict:
    """Defaults overlaid with a JSON object (path or dict); unknown keys are rejected."""
    cfg = dict(CONFIG_DEFAULTS)
    if source is None:
        return cfg
    if isinstance(source, str):
        try:
            with open(source) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    else:
        data = source
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    for key, value in data.items():
        if key not in CONFIG_DEFAULTS:
            raise ConfigError(f"unknown config key {key!r}")
        _check_type(key, value, CONFIG_DEFAULTS[key])
        cfg[key] = value
    if cfg["n_max"] < 4:
        raise ConfigError("n_max must be at least 4")
    if cfg["only"] is not None:
        bad = set(cfg["only"]) - set(CRITERIA)
        if bad:
            raise ConfigError(f"unknown criteria {sorted(bad)}")
    return cfg


@dataclass
class CriterionResult:
    key: str
    passed: bool
    details: dict = field(default_factory=dict)
    runtime_seconds: float = 0.0
    error: Optional[str] = None

    def to_json(self) -> dict:
        out = {"criterion": self.key, "passed": self.passed, "details": self.details,
               "runtime_seconds": round(self.runtime_seconds, 3)}
        if self.error:
            out["error"] = self.error
        return out


# ----------------------------------------------------------------------------
# the checks; each returns (passed, details)

def golden_abscissa_table(cfg):
    t0 = time.perf_counter()
    rows = {}
    for n, text in GOLDEN_ABSCISSAE.items():
        rows[str(n)] = abscissa_fraction(n).ratfunc() == parse_ratfunc(text)
    elapsed = time.perf_counter() - t0
    return all(rows.values()) and elapsed < 1.0, {"matches": rows, "seconds": elapsed}


def degree_laws(cfg):
    t0 = time.perf_counter()
    N = min(30, cfg["n_max"])
    bad = [n for n in range(1, N + 1) if degree_profile(n) != expected_degrees(n)]
    elapsed = time.perf_counter() - t0
    return not bad and elapsed < 120, {"n_max": N, "mismatches": bad, "seconds": elapsed}


def canonical_height_limit(cfg):
    N = cfg["n_max"]
    est = canonical_height_estimate(N)
    values = dict(est.estimates)
    at_n = values[N]
    odd = [abs(values[n] - Fraction(1, 2)) for n in range(1, N + 1, 2)]
    trending = all(a >= b for a, b in zip(odd, odd[1:]))
    ok = Fraction(48, 100) <= at_n <= Fraction(52, 100) and trending
    return ok, {"n": N, "estimate": float(at_n), "extrapolated": str(est.extrapolated),
                "monotone_on_odd_n": trending}


def height_integral_identity(cfg):
    t0 = time.perf_counter()
    r = height_integral(SIGMA, eps=1e-3, tol=cfg["height_tol"], threads=cfg["threads"])
    elapsed = time.perf_counter() - t0
    dev = abs(r.value - 0.25)
    ok = dev <= 0.01 and r.error_estimate >= dev and elapsed < 600
    return ok, {"value": r.value, "error_estimate": r.error_estimate, "deviation": dev,
                "cells": r.cells, "seconds": elapsed}


def _plane_count(n: int) -> int:
    return n * n // 4


def torsion_counting(cfg):
    n_plane = min(20, cfg["n_max"])
    plane = torsion_count(n_plane)
    details: dict = {"plane": {"n": n_plane, "N_n": plane.count, "expected": _plane_count(n_plane),
                               "ratio": plane.count / n_plane ** 2}}
    ok = plane.count == _plane_count(n_plane)
    disk_ns = sorted(int(k) for k in cfg["torsion_disk"] if int(k) <= cfg["n_max"])
    if disk_ns:
        mass = height_integral(SIGMA, eps=1e-3, tol=cfg["height_tol"], region="disk",
                               threads=cfg["threads"])
        details["disk_mass"] = mass.value
        details["disk_mass_error"] = mass.error_estimate
        for n in disk_ns:
            limit = cfg["torsion_disk"][str(n)]
            tc = torsion_count(n, disk=(0j, 1.0), region_mass=mass.value)
            within = tc.relative_gap <= limit
            ok = ok and within
            details[f"disk_n{n}"] = {"N_n": tc.count, "N_n_closed": tc.count_closed,
                                     "predicted": tc.predicted, "relative_gap": tc.relative_gap,
                                     "limit": limit, "within": within}
    return ok, details


def xi_golden_values(cfg):
    out = {}
    for name, sec, c in (("sigma", SIGMA, 2), ("tau", TAU, 3)):
        P = sec.point()
        K = P.x.field
        golden = K(0, RatFunc(2) / ((c - LAM) ** 2))
        out[f"{name}_golden"] = (xi_value(P.x, P.y) - golden).is_zero()
        out[f"{name}_odd"] = xi_oddness_check(P.x, P.y)
    P = SIGMA.point()
    curve = SIGMA.curve()
    base = xi_value(P.x, P.y)
    lin = {}
    for n in range(1, min(cfg["xi_linearity_n"], cfg["n_max"]) + 1):
        Q = scalar_mul(curve, n, P)
        lin[str(n)] = (xi_value(Q.x, Q.y) - n * base).is_zero()
    out["linearity"] = lin
    ok = all(v for k, v in out.items() if k != "linearity") and all(lin.values())
    return ok, out


def multiplicity_bounds(cfg):
    N = min(cfg["multiplicity_n"], cfg["n_max"])
    reps = pole_multiplicity_scan(N)
    shape = {n: abscissa_fraction(n).structural_ok for n in range(1, N + 1)}
    flagged = [f for r in reps for f in r.flagged]
    ok = (all(r.max_w_away_from_2 <= 4 and r.w_at_2 <= 2 for r in reps)
          and not flagged and all(shape.values()))
    return ok, {"n_max": N, "max_w_away_from_2": max(r.max_w_away_from_2 for r in reps),
                "max_w_at_2": max(r.w_at_2 for r in reps), "w_equal_4": flagged,
                "denominator_shape_failures": [n for n, v in shape.items() if not v]}


def sharpness(cfg):
    rows = {}
    ok = True
    for d in cfg["sharpness_d"]:
        rep = sharpness_family(d)
        rows[str(d)] = {"leading": str(rep.leading_coefficient), "degree": rep.leading_degree,
                        "eisenstein": all(rep.eisenstein.values()), "ok": rep.ok}
        ok = ok and rep.ok
    d = cfg["coprime_d"]
    rep = sharpness_family(d, check_coprime=True)
    rows[f"coprime_d{d}"] = rep.coprime
    ok = ok and rep.ok and all(rep.coprime.values())
    return ok, rows


def two_section_height(cfg):
    first = two_section_beta(1, 1)
    rng = random.Random(cfg["seed"])
    pairs = []
    while len(pairs) < cfg["two_beta_random"]:
        n, m = rng.randint(-6, 6), rng.randint(-6, 6)
        if (n, m) != (0, 0):
            pairs.append((n, m))
    heights = {f"{n},{m}": two_section_beta(n, m).h_beta for n, m in pairs}
    consistent = beta_consistency(1, 1) and all(beta_consistency(n, m) for n, m in pairs[:3])
    ok = first.h_beta == 12 and max(heights.values()) <= 12 and consistent
    return ok, {"h_beta_1_1": first.h_beta, "random": heights, "matches_coordinates": consistent}


PERIOD_POINTS = [mp.mpf(1) / 2, mp.mpc(0.3, 0.4), mp.mpc(-2, 1), mp.mpc(5, -3), mp.mpc(0.9, -0.05)]


def period_stack(cfg):
    rows = []
    worst_leg = worst_pf = worst_agm = 0.0
    with mp.workprec(148):
        for lam in PERIOD_POINTS:
            fr = periods(lam)
            leg = float(fr.legendre_residual())
            pf = max(picard_fuchs_residual(fr))
            agm = agm_hyp_discrepancy(lam)
            worst_leg, worst_pf, worst_agm = max(worst_leg, leg), max(worst_pf, pf), max(worst_agm, agm)
            rows.append({"lambda": [float(mp.re(lam)), float(mp.im(lam))], "legendre": leg,
                         "picard_fuchs": pf, "agm_vs_hypergeometric": agm})
        tau_err = float(abs(periods(mp.mpf(1) / 2).tau - 1j))
    ok = worst_leg < 1e-10 and worst_pf < 1e-8 and tau_err < 1e-9 and worst_agm < 1e-9
    return ok, {"points": rows, "tau_half_error": tau_err}


def _density_points(rng: random.Random, k: int) -> list[complex]:
    out = []
    while len(out) < k:
        z = complex(rng.uniform(-3, 4), rng.uniform(-3, 3))
        if min(abs(z), abs(z - 1), abs(z - 2)) > 0.05:
            out.append(z)
    return out


def betti_consistency(cfg):
    worst_grid, _ = torsion_grid_check(3)
    rng = random.Random(cfg["seed"])
    worst_rel = 0.0
    pts = _density_points(rng, cfg["density_points"])
    for z in pts:
        a = density_closed_form(z, SIGMA)
        b = density_fd(z, SIGMA)
        worst_rel = max(worst_rel, abs(a - b) / max(abs(b), 1e-300))
    ok = worst_grid < 1e-8 and worst_rel < 1e-6
    return ok, {"grid_defect_B3": worst_grid, "density_points": len(pts), "max_relative_gap": worst_rel}


def roth_example(cfg):
    t0 = time.perf_counter()
    alpha = quartic_branch("alpha", 16)
    head = {e: alpha.coeff(e) for e in range(14)}
    want = {e: ALPHA_HEAD.get(e, Fraction(0)) for e in head}
    coeffs_ok = head == want
    D = cfg["roth_maxdeg"]
    rep = roth_example_check(D)
    exp = cf_expand(quartic_branch("alpha", 2 * D + 16), D)
    cs = exp.convergents
    identity = all(a.ord == a.deg_q + b.deg_q for a, b in zip(cs, cs[1:]) if a.ord is not None)
    elapsed = time.perf_counter() - t0
    ok = coeffs_ok and identity and rep.rows[-1][0] <= D and elapsed < 60
    return ok, {"coefficients_match": coeffs_ok, "convergents": len(rep.rows), "max_deg_q": rep.rows[-1][0],
                "max_ord_over_deg_q": rep.max_exponent, "identity": identity, "seconds": elapsed}


def conjugate_branch(cfg):
    a1 = quartic_branch("alpha1", 8)
    got = {e: a1.coeff(e) for e in ALPHA1_HEAD}
    return got == ALPHA1_HEAD, {"coefficients": {str(e): str(c) for e, c in got.items()}}


def wang_inequality(cfg):
    res = wang_random_suite(cfg["wang_trials"], cfg["seed"], valid_only=True)
    ok = res["hypothesis_held"] == cfg["wang_trials"] and res["violations"] == 0
    return ok, {k: v for k, v in res.items() if k != "rows"}


def quasi_integrality(cfg):
    N = min(cfg["qi_n"], cfg["n_max"])
    rep = quasi_integrality_report(range(1, N + 1), zimmer_max=min(cfg["zimmer_n"], N))
    slacks = [r.zimmer_slack for r in rep.rows if r.zimmer_slack is not None]
    ok = rep.max_M <= 4 and all(s >= 0 for s in slacks)
    return ok, {"n_max": N, "max_M_n": rep.max_M, "min_zimmer_slack": str(min(slacks)),
                "rho_decimal_digits": rep.rho_digits}


CRITERIA: dict[str, Callable] = {
    "golden_abscissa_table": golden_abscissa_table,
    "degree_laws": degree_laws,
    "canonical_height_limit": canonical_height_limit,
    "height_integral_identity": height_integral_identity,
    "torsion_counting": torsion_counting,
    "xi_golden_values": xi_golden_values,
    "multiplicity_bounds": multiplicity_bounds,
    "sharpness_family": sharpness,
    "two_section_height": two_section_height,
    "period_stack": period_stack,
    "betti_consistency": betti_consistency,
    "roth_example": roth_example,
    "conjugate_branch": conjugate_branch,
    "wang_inequality": wang_inequality,
    "quasi_integrality": quasi_integrality,
}


def run_criterion(key: str, cfg: Optional[dict] = None) -> CriterionResult:
    cfg = cfg if cfg is not None else load_config()
    t0 = time.perf_counter()
    try:
        ok, details = CRITERIA[key](cfg)
        return CriterionResult(key, bool(ok), details, time.perf_counter() - t0)
    except AssertionError as exc:
        return CriterionResult(key, False, {}, time.perf_counter() - t0, f"{type(exc).__name__}: {exc}")
    except ArithmeticError as exc:
        return CriterionResult(key, False, {}, time.perf_counter() - t0, f"{type(exc).__name__}: {exc}")


def run_all(cfg: Optional[dict] = None, progress: Optional[Callable[[CriterionResult], None]] = None
            ) -> list[CriterionResult]:
    cfg = cfg if cfg is not None else load_config()
    keys = cfg["only"] or list(CRITERIA)
    out = []
    for key in keys:
        res = run_criterion(key, cfg)
        if progress is not None:
            progress(res)
        out.append(res)
    return out


def matrix(results: list[CriterionResult]) -> dict:
    return {"all_passed": all(r.passed for r in results),
            "matrix": {r.key: r.passed for r in results},
            "results": [r.to_json() for r in results]}


def format_line(res: CriterionResult) -> str:
    status = "PASS" if res.passed else "FAIL"
    note = f" ({res.error})" if res.error else ""
    return f"{status}  {res.key:<26} {res.runtime_seconds:8.2f}s{note}"
