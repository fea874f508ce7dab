"""Command-line front end.

Every invocation produces a RunManifest.  With ``--out DIR`` the result and
the manifest are written to DIR; otherwise the result goes to stdout and the
manifest to stderr.  Exit codes: 0 ok, 1 a checked invariant failed, 2 usage
error, 3 requested precision unreachable.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
import time
from fractions import Fraction
from typing import Any, Optional, Sequence

import mpmath as mp
import numpy as np

from . import acceptance
from .algebra import ExactPoly
from .cf import ApproximationViolation, cf_expand, liouville_check, roth_example_check, zero_gap_stats
from .fields import height
from .kernels import SectionNumeric, betti_density_kernel
from .laurent import QUARTIC, QUARTIC_SEEDS, MinPoly, PrecisionExhausted, UnsupportedBranch, laurent_expand, parse_seed
from .manifest import RunManifest, digest
from .periods import ExclusionError, PrecisionError, betti_density, periods, section_betti
from .qi import quasi_integrality_report
from .quadrature import ToleranceUnreachable, height_integral
from .sections import SIGMA, TAU, LegendreSection, StructuralError, abscissa_fraction, scalar_mul
from .torsion import torsion_count
from .wang import InstanceError, WangInstance, WangViolation, wang_lemma_check, wang_random_suite
from .xi import (
    TorsionSectionError,
    beta_consistency,
    pole_multiplicity_scan,
    sharpness_family,
    two_section_beta,
    xi_apply,
    xi_oddness_check,
    xi_value,
)

EXIT_OK, EXIT_ASSERT, EXIT_USAGE, EXIT_PRECISION = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


# ----------------------------------------------------------------------------
# argument helpers

def _complex_pair(text: str) -> complex:
    try:
        re_, im_ = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected RE,IM, got {text!r}")
    return complex(re_, im_)


def _floats(k: int):
    def parse(text: str) -> tuple[float, ...]:
        try:
            vals = tuple(float(v) for v in text.split(","))
        except ValueError:
            vals = ()
        if len(vals) != k:
            raise argparse.ArgumentTypeError(f"expected {k} comma-separated numbers, got {text!r}")
        return vals
    return parse


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {v}")
    return v


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _section(spec: str) -> LegendreSection:
    """'sigma', 'tau', an inline JSON section config or a path to one."""
    if spec in ("sigma", "tau"):
        return SIGMA if spec == "sigma" else TAU
    try:
        if os.path.exists(spec):
            with open(spec) as fh:
                cfg = json.load(fh)
        else:
            cfg = json.loads(spec)
        if not isinstance(cfg, dict):
            raise ValueError("section config must be an object")
        if cfg.get("model", "legendre") != "legendre":
            raise ValueError("only the legendre model is supported")
        return LegendreSection.from_config(cfg.get("section", cfg))
    except (OSError, ValueError, SyntaxError) as exc:
        raise argparse.ArgumentTypeError(f"bad section {spec!r}: {exc}")


def _global_flags(suppress: bool, with_prec: bool = True) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--threads", type=_positive_int, default=d(1), help="worker threads")
    if with_prec:
        p.add_argument("--prec", dest="prec_bits", type=_positive_int, default=d(128),
                       help="working precision in bits")
    p.add_argument("--json", action="store_true", default=d(False), help="print JSON to stdout")
    p.add_argument("--out", default=d(None), help="directory for result and manifest files")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="legendre-betti", parents=[_global_flags(False)],
                     description="Exact and numerical computations with sections of y^2 = x(x-1)(x-l).")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    g = [_global_flags(True)]
    g_noprec = [_global_flags(True, with_prec=False)]

    p = sub.add_parser("multiples", parents=g, help="x(n*P) as an integer-coefficient fraction")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--section", type=_section, default=SIGMA)
    p.add_argument("--verify", action="store_true", help="cross-check against the group law")

    p = sub.add_parser("xi", parents=g, help="Xi of n*P with its height and order table")
    p.add_argument("--section", type=_section, default=SIGMA)
    p.add_argument("--n", type=_positive_int, default=1)

    p = sub.add_parser("mult-scan", parents=g, help="pole multiplicities of x(n*sigma), n <= nmax")
    p.add_argument("--nmax", type=_positive_int, default=20)

    p = sub.add_parser("sharpness", parents=g, help="the family xi = l^d + 6l + 70")
    p.add_argument("--d", type=int, nargs="+", default=[2, 3, 4, 5, 6])
    p.add_argument("--coprime", action="store_true", help="also run the exact gcd test")

    p = sub.add_parser("two-beta", parents=g, help="height of Xi(n*sigma + m*tau)")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--random", type=int, default=0, help="additional random (n, m) pairs")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("betti-eval", parents=g, help="periods, Betti coordinates and density at one point")
    p.add_argument("--lambda", dest="lam", type=_complex_pair, required=True, metavar="RE,IM")
    p.add_argument("--section", type=_section, default=SIGMA)
    p.add_argument("--method", choices=["closed-form", "finite-difference", "both"], default="closed-form")

    p = sub.add_parser("density-grid", parents=g, help="density on a rectangular grid (CSV)")
    p.add_argument("--window", type=_floats(4), default=(-2.0, 3.0, -2.0, 2.0), metavar="RE0,RE1,IM0,IM1")
    p.add_argument("--step", type=float, default=0.1)
    p.add_argument("--section", type=_section, default=SIGMA)

    p = sub.add_parser("height-integral", parents=g, help="integral of the density")
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--tol", type=float, default=2e-4)
    p.add_argument("--region", choices=["plane", "disk"], default="plane")
    p.add_argument("--max-cells", type=_positive_int, default=40000)
    p.add_argument("--section", type=_section, default=SIGMA)

    p = sub.add_parser("torsion-count", parents=g, help="count torsion parameters of order dividing n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--disk", type=_floats(3), default=None, metavar="CX,CY,R")
    p.add_argument("--mass", type=float, default=None, help="density mass of the disk, if known")

    p = sub.add_parser("roth", help="Laurent expansions and continued fractions over Q(t)")
    rsub = p.add_subparsers(dest="roth_command", required=True, parser_class=_Parser)
    q = rsub.add_parser("expand", parents=g_noprec, help="root of P(t, X) as a series in 1/t")
    q.add_argument("--minpoly", default=QUARTIC)
    q.add_argument("--branch", default="alpha", help="seed series or a named branch of the quartic")
    q.add_argument("--prec", dest="terms", type=int, default=32, help="number of 1/t powers to certify")
    q = rsub.add_parser("cf", parents=g_noprec, help="continued fraction of a rational branch")
    q.add_argument("--maxdeg", type=_positive_int, default=40)
    q.add_argument("--minpoly", default=QUARTIC)
    q.add_argument("--branch", default="alpha")
    q = rsub.add_parser("check", parents=g_noprec, help="lower bound for |alpha - p/q| on convergents")
    q.add_argument("--maxdeg", type=_positive_int, default=200)
    q = rsub.add_parser("gaps", parents=g_noprec, help="runs of zero coefficients of alpha")
    q.add_argument("--depth", type=_positive_int, default=200)

    p = sub.add_parser("wang-check", parents=g, help="the S-unit rank inequality on instances")
    p.add_argument("--instance", default=None, help="JSON instance file")
    p.add_argument("--random", type=int, default=0, help="number of random instances")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("qi-report", parents=g, help="pole depths of x(n*sigma) and the budget log C")
    p.add_argument("--nmax", type=_positive_int, default=20)
    p.add_argument("--eps", type=_fraction, default=Fraction(1, 16))
    p.add_argument("--zimmer-max", type=int, default=0)

    p = sub.add_parser("report-all", parents=g, help="run the acceptance suite")
    p.add_argument("--config", default=None, help="JSON config file")
    return parser


# ----------------------------------------------------------------------------
# commands; each returns (payload, ok)

def _factorization(p: ExactPoly) -> dict:
    c, fs = p.factor()
    return {"content": str(c), "factors": [[f.to_str(), e] for f, e in fs]}


def cmd_multiples(a):
    af = abscissa_fraction(a.n, a.section, verify=a.verify)
    out = af.to_json()
    out["factorization_A"] = _factorization(af.A) if not af.A.is_zero() else None
    out["factorization_B"] = _factorization(af.B)
    ok = af.structural_ok is not False
    return out, ok


def cmd_xi(a):
    P = a.section.point()
    curve = a.section.curve()
    Q = scalar_mul(curve, a.n, P) if a.n > 1 else P
    if Q.is_identity:
        raise TorsionSectionError(f"{a.n}P is the identity")
    res = xi_apply(Q.x, Q.y)
    if res.height == 0:
        raise TorsionSectionError("Xi vanishes: the section is torsion")
    linear = (xi_value(Q.x, Q.y) - a.n * xi_value(P.x, P.y)).is_zero()
    odd = xi_oddness_check(Q.x, Q.y)
    out = res.to_json()
    out.update({"n": a.n, "linear": linear, "odd": odd, "h_x": height(Q.x)})
    return out, linear and odd


def cmd_mult_scan(a):
    reps = pole_multiplicity_scan(a.nmax)
    return {"reports": [r.to_json() for r in reps]}, all(not r.flagged for r in reps)


def cmd_sharpness(a):
    rows = []
    ok = True
    for d in a.d:
        rep = sharpness_family(d, check_coprime=True if a.coprime else None)
        rows.append(rep.to_json())
        ok = ok and rep.ok and all(rep.coprime.values())
    return {"family": rows}, ok


def cmd_two_beta(a):
    pairs = [(a.n, a.m)]
    rng = random.Random(a.seed)
    while len(pairs) < 1 + a.random:
        n, m = rng.randint(-6, 6), rng.randint(-6, 6)
        if (n, m) != (0, 0):
            pairs.append((n, m))
    rows = []
    ok = True
    for n, m in pairs:
        r = two_section_beta(n, m)
        row = r.to_json()
        row["consistent"] = beta_consistency(n, m)
        ok = ok and row["consistent"] and r.max_zero_order <= r.abscissa_order_bound
        rows.append(row)
    return {"pairs": rows}, ok


def cmd_betti_eval(a):
    with mp.workprec(a.prec_bits + 20):
        frame = periods(a.lam, a.prec_bits)
        out = {"frame": frame.to_json(), "betti": section_betti(a.lam, a.section, a.prec_bits).to_json()}
    methods = ["closed-form", "finite-difference"] if a.method == "both" else [a.method]
    out["density"] = {m: betti_density(a.lam, a.section, m).density for m in methods}
    ok = True
    if a.method == "both":
        cf_, fd = out["density"]["closed-form"], out["density"]["finite-difference"]
        out["density_relative_gap"] = abs(cf_ - fd) / max(abs(fd), 1e-300)
        ok = out["density_relative_gap"] < 1e-6
    return out, ok


def cmd_density_grid(a):
    r0, r1, i0, i1 = a.window
    if a.step <= 0 or r1 < r0 or i1 < i0:
        raise UsageError("window must be RE0<=RE1,IM0<=IM1 with a positive step")
    xs = np.arange(r0, r1 + a.step / 2, a.step)
    ys = np.arange(i0, i1 + a.step / 2, a.step)
    if xs.size * ys.size > 4_000_000:
        raise UsageError("grid too large")
    X, Y = np.meshgrid(xs, ys)
    lam = (X + 1j * Y).ravel()
    sn = SectionNumeric.from_section(a.section)
    bad = (np.abs(lam) < 1e-12) | (np.abs(lam - 1) < 1e-12)
    safe = np.where(bad, 0.5, lam)
    with np.errstate(all="ignore"):
        _, _, dens = betti_density_kernel(safe, 1 - safe, sn)
    dens = np.where(bad, np.nan, dens)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["re_lambda", "im_lambda", "density"])
    for z, d in zip(lam, dens):
        w.writerow([f"{z.real:.10g}", f"{z.imag:.10g}", f"{d:.12e}"])
    return buf.getvalue(), True


def cmd_height_integral(a):
    r = height_integral(a.section, a.eps, a.tol, a.region, threads=a.threads, max_cells=a.max_cells)
    return r.to_json(), True


def cmd_torsion_count(a):
    if a.n < 2:
        raise UsageError("--n must be at least 2")
    disk = None
    mass = a.mass
    if a.disk is not None:
        cx, cy, rad = a.disk
        if rad <= 0:
            raise UsageError("disk radius must be positive")
        disk = (complex(cx, cy), rad)
        if mass is None and (cx, cy, rad) == (0.0, 0.0, 1.0):
            mass = height_integral(SIGMA, region="disk", threads=a.threads).value
    tc = torsion_count(a.n, disk, region_mass=mass)
    return tc.to_json(), True


def _series_for(minpoly: str, branch: str, terms: int):
    P = MinPoly.parse(minpoly)
    seed = parse_seed(QUARTIC_SEEDS.get(branch, branch))
    return laurent_expand(P, seed, terms)


def cmd_roth(a):
    if a.roth_command == "expand":
        if a.terms < 1:
            raise UsageError("--prec must be a positive number of terms")
        s = _series_for(a.minpoly, a.branch, a.terms)
        out = s.to_json()
        out["series"] = s.to_str("t")
        return out, True
    if a.roth_command == "cf":
        s = _series_for(a.minpoly, a.branch, 2 * a.maxdeg + 16)
        return cf_expand(s, a.maxdeg).to_json(), True
    if a.roth_command == "check":
        rep = roth_example_check(a.maxdeg)
        t = ExactPoly.gen()
        lv = [liouville_check(ExactPoly([-1]), t).to_json(), liouville_check(ExactPoly([]), ExactPoly([1])).to_json()]
        out = rep.to_json()
        out["liouville"] = lv
        return out, True
    s = _series_for(QUARTIC, "alpha", a.depth)
    return zero_gap_stats(s, a.depth).to_json(), True


def cmd_wang_check(a):
    if a.instance is None and a.random <= 0:
        raise UsageError("give --instance FILE or --random N")
    out: dict[str, Any] = {}
    if a.instance is not None:
        try:
            inst = WangInstance.load(a.instance)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read instance: {exc}")
        out["instance"] = wang_lemma_check(inst).to_json()
    if a.random > 0:
        out["random"] = wang_random_suite(a.random, a.seed)
    return out, True


def cmd_qi_report(a):
    rep = quasi_integrality_report(range(1, a.nmax + 1), a.eps, zimmer_max=a.zimmer_max)
    return rep.to_json(), True


def cmd_report_all(a):
    cfg = acceptance.load_config(a.config)
    if a.threads > 1:
        cfg["threads"] = a.threads
    results = acceptance.run_all(cfg, progress=lambda r: print(acceptance.format_line(r), file=sys.stderr,
                                                                flush=True))
    out = acceptance.matrix(results)
    out["config"] = cfg
    return out, out["all_passed"]


COMMANDS = {
    "multiples": cmd_multiples,
    "xi": cmd_xi,
    "mult-scan": cmd_mult_scan,
    "sharpness": cmd_sharpness,
    "two-beta": cmd_two_beta,
    "betti-eval": cmd_betti_eval,
    "density-grid": cmd_density_grid,
    "height-integral": cmd_height_integral,
    "torsion-count": cmd_torsion_count,
    "roth": cmd_roth,
    "wang-check": cmd_wang_check,
    "qi-report": cmd_qi_report,
    "report-all": cmd_report_all,
}

_ASSERTION = (AssertionError, StructuralError, ApproximationViolation, WangViolation, TorsionSectionError)
_PRECISION = (PrecisionError, PrecisionExhausted, ToleranceUnreachable)
_USAGE = (UsageError, acceptance.ConfigError, InstanceError, UnsupportedBranch, ExclusionError,
          ValueError, SyntaxError, ZeroDivisionError)


def _stable(payload):
    """The payload without wall-clock fields, for digests."""
    if isinstance(payload, dict):
        return {k: _stable(v) for k, v in payload.items() if k not in ("runtime_seconds", "seconds")}
    if isinstance(payload, list):
        return [_stable(v) for v in payload]
    return payload


def _parameters(ns: argparse.Namespace) -> dict:
    out = {}
    for k, v in vars(ns).items():
        if k in ("threads", "prec_bits", "json", "out", "command", "roth_command"):
            continue
        if isinstance(v, LegendreSection):
            v = {"x": v.xi.to_str(), "mu_sq": v.eta_sq.to_str()}
        elif isinstance(v, (Fraction, complex)):
            v = str(v)
        out[k] = v
    return out


def run(argv: Sequence[str]) -> tuple[int, Any, RunManifest, Optional[argparse.Namespace]]:
    """Parse and execute; returns (exit code, payload, manifest, namespace) without printing."""
    argv = list(argv)
    t0 = time.perf_counter()
    try:
        ns = build_parser().parse_args(argv)
    except UsageError as exc:
        payload = {"error": str(exc)}
        manifest = RunManifest(command=argv[0] if argv else "", argv=argv, parameters={}, precision={},
                               threads=1, wall_time=round(time.perf_counter() - t0, 6),
                               outputs_digest=digest(payload), exit_code=EXIT_USAGE)
        return EXIT_USAGE, payload, manifest, None
    command = ns.command + (f" {ns.roth_command}" if ns.command == "roth" else "")
    code = EXIT_OK
    try:
        payload, ok = COMMANDS[ns.command](ns)
        if not ok:
            code = EXIT_ASSERT
    except _ASSERTION as exc:
        payload, code = {"error": f"{type(exc).__name__}: {exc}"}, EXIT_ASSERT
    except _PRECISION as exc:
        payload, code = {"error": f"{type(exc).__name__}: {exc}"}, EXIT_PRECISION
    except _USAGE as exc:
        payload, code = {"error": f"{type(exc).__name__}: {exc}"}, EXIT_USAGE
    manifest = RunManifest(
        command=command, argv=argv, parameters=_parameters(ns),
        precision={"bits": getattr(ns, "prec_bits", None), "terms": getattr(ns, "terms", None)},
        threads=ns.threads, wall_time=round(time.perf_counter() - t0, 6),
        outputs_digest=digest(_stable(payload)), exit_code=code)
    return code, payload, manifest, ns


def _render(payload) -> str:
    if isinstance(payload, str):
        return payload
    return json.dumps(payload, indent=2, default=str) + "\n"


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    code, payload, manifest, ns = run(argv)
    if ns is None:
        print(payload["error"], file=sys.stderr)
        print(json.dumps({"manifest": manifest.to_json()}), file=sys.stderr)
        return code
    text = _render(payload)
    if ns.out:
        os.makedirs(ns.out, exist_ok=True)
        name = "result.csv" if isinstance(payload, str) else "result.json"
        with open(os.path.join(ns.out, name), "w") as fh:
            fh.write(text)
        manifest.write(os.path.join(ns.out, "manifest.json"))
        if ns.json:
            sys.stdout.write(text)
    else:
        sys.stdout.write(text)
        print(json.dumps({"manifest": manifest.to_json()}, default=str), file=sys.stderr)
    if code and isinstance(payload, dict) and "error" in payload:
        print(payload["error"], file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
