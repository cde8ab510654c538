"""Batch driver: every verification as a subcommand with JSON/CSV artifacts.

Artifacts embed the run configuration, precision, package version and wall
time; the numeric payload under "results" is bit-for-bit reproducible for a
fixed configuration (fixed seeds, deterministic reductions, no parallelism).
Exit code 0 means every requested check passed its declared tolerance, 1 a
check failure, 2 a usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import asdict, dataclass

import mpmath

from . import __version__, verify
from .asymptotics import f_k, g_k, gk_integral
from .counting import Constraint, count_constrained, enumerate_oracle
from .identities import check_all, reports_json
from .precision import DEFAULT_DIGITS, working
from .probability import ModelParams, simulation_report
from .series import eval_at, product_form
from .spectral import chain_trace, char_roots, transition_tail_product
from .transfer import (
    convergence_trace,
    gk_eval,
    iterate_product,
    runup_asymptotic,
    runup_vector,
)

SCHEMA_VERSION = 1


@dataclass
class RunConfig:
    precision: int = DEFAULT_DIGITS
    tol: float = 1e-10
    out_dir: str = "out"
    out_format: str = "json"
    seed: int = 20260809

    @staticmethod
    def load(path: str | None) -> "RunConfig":
        """Defaults, overridden by a JSON config file (flag or KSEQ_CONFIG)."""
        cfg = RunConfig()
        path = path or os.environ.get("KSEQ_CONFIG")
        if path:
            try:
                with open(path) as fh:
                    overrides = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                print(f"kseq: bad config {path}: {exc}", file=sys.stderr)
                raise SystemExit(2) from None
            for key, value in overrides.items():
                if not hasattr(cfg, key):
                    print(f"kseq: unknown config key {key!r}", file=sys.stderr)
                    raise SystemExit(2)
                setattr(cfg, key, value)
        return cfg


def _apply_flag_overrides(cfg: RunConfig, args) -> RunConfig:
    mapping = {"precision": "precision", "tol": "tol", "out": "out_dir",
               "format": "out_format", "seed": "seed"}
    for flag, field in mapping.items():
        value = getattr(args, flag, None)
        if value is not None:
            setattr(cfg, field, value)
    return cfg


def write_artifact(cfg: RunConfig, name: str, results, passed: bool, started: float) -> str:
    os.makedirs(cfg.out_dir, exist_ok=True)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "tool": "kseq",
        "version": __version__,
        "config": asdict(cfg),
        "passed": passed,
        "results": results,
        "wall_time_s": round(time.time() - started, 3),
    }
    path = os.path.join(cfg.out_dir, f"{name}.json")
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
    return path


def write_csv(cfg: RunConfig, name: str, header, rows) -> str:
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, f"{name}.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


def _nstr(x, digits=30):
    return mpmath.nstr(x, digits)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_count(cfg: RunConfig, args) -> tuple:
    c = Constraint(args.k, None if args.r in (None, 0) else args.r, args.b)
    table = count_constrained(c, args.nmax)
    results = {
        "constraint": c.label(),
        "counts": [str(v) for v in table.values],
    }
    passed = True
    if args.oracle:
        limit = min(args.nmax, args.oracle_limit)
        mism = [
            n for n in range(limit + 1)
            if enumerate_oracle(c, n) != table[n]
        ]
        results["oracle_checked_to"] = limit
        results["oracle_mismatches"] = mism
        passed = not mism
    if cfg.out_format == "csv":
        write_csv(cfg, "count", ["n", "count"], list(enumerate(str(v) for v in table.values)))
    return results, passed


def _parse_factors(text: str) -> list:
    factors = []
    for chunk in text.split(";"):
        a, b, e = (int(x) for x in chunk.split(","))
        factors.append((a, b, e))
    return factors


def cmd_series(cfg: RunConfig, args) -> tuple:
    factors = _parse_factors(args.factors) if args.factors else []
    series = product_form(factors, args.nmax)
    results = {"factors": factors, "coefficients": [str(c) for c in series.coeffs]}
    if args.s is not None:
        ev = eval_at(series, args.s, cfg.precision, tol=cfg.tol)
        results["value_at_s"] = _nstr(ev.value, cfg.precision)
        results["tail_bound"] = _nstr(ev.tail_bound, 8)
        results["within_tol"] = ev.within_tol
    if cfg.out_format == "csv":
        write_csv(cfg, "series", ["n", "coefficient"],
                  list(enumerate(str(c) for c in series.coeffs)))
    return results, True


def cmd_gk_eval(cfg: RunConfig, args) -> tuple:
    res = gk_eval(args.k, args.s, cfg.tol, cfg.precision)
    results = {
        "k": args.k,
        "s": args.s,
        "log_gk": _nstr(res.value.log(), cfg.precision),
        "n_used": res.n_used,
        "rel_bound": _nstr(res.rel_bound, 6),
    }
    if args.trace:
        rows = convergence_trace(args.k, args.s, min(res.n_used, args.trace), digits=cfg.precision)
        write_csv(cfg, "gk_trace", ["n"] + [f"log_v{a}" for a in range(args.k)],
                  [tuple(_nstr(x, 20) if not isinstance(x, int) else x for x in row) for row in rows])
    return results, True


def cmd_spectrum(cfg: RunConfig, args) -> tuple:
    point = char_roots(args.k, args.z, cfg.precision)
    results = {
        "k": args.k,
        "z": args.z,
        "roots": [[_nstr(r.real, cfg.precision), _nstr(r.imag, cfg.precision)]
                  for r in point.roots],
        "residuals": [_nstr(r, 6) for r in point.residuals()],
    }
    return results, True


def cmd_transition(cfg: RunConfig, args) -> tuple:
    res = transition_tail_product(args.k, args.s, args.N, args.M, cfg.precision,
                                  tail_tol=cfg.tol)
    results = {
        "k": args.k, "s": args.s, "N": args.N, "M": args.M,
        "log_product": _nstr(res.log_product, cfg.precision),
        "tail_estimate": _nstr(res.tail_estimate, 6),
        "prediction": _nstr(res.prediction, cfg.precision),
        "residual": _nstr(res.residual, 8),
        "tail_flagged": res.flagged,
    }
    if args.trace:
        rows = chain_trace(args.k, args.s, args.N, min(args.M, args.N + args.trace), cfg.precision)
        header = ["n"]
        for j in range(args.k):
            header += [f"re_lambda{j+1}", f"im_lambda{j+1}"]
        header.append("T11")
        write_csv(cfg, "spectral_trace", header,
                  [tuple(_nstr(x, 20) if not isinstance(x, int) else x for x in row) for row in rows])
    return results, not res.flagged


def cmd_runup(cfg: RunConfig, args) -> tuple:
    vec = runup_vector(args.k, args.N, s=args.s, mode="numeric", digits=cfg.precision)
    prod = iterate_product(args.k, args.N, s=args.s, digits=cfg.precision)
    rows = []
    worst = mpmath.mpf(0)
    with working(cfg.precision):
        for a in range(args.k):
            lv_o, lv_p = vec.entries[a], prod.entries[a]
            gap = abs(lv_o.log_mag - lv_p.log_mag) if lv_o.sign and lv_p.sign else mpmath.mpf(0)
            worst = max(worst, gap)
            rows.append({
                "a": a,
                "log_oracle": _nstr(lv_o.log_mag, cfg.precision) if lv_o.sign else None,
                "log_product": _nstr(lv_p.log_mag, cfg.precision) if lv_p.sign else None,
            })
        tol = mpmath.mpf(10) ** (-(cfg.precision - 10))
        passed = worst < tol
        results = {"k": args.k, "N": args.N, "s": args.s, "entries": rows,
                   "worst_log_gap": _nstr(worst, 6)}
        if args.asymptotic:
            if args.N % args.k == 0:
                asy = runup_asymptotic(args.k, args.s, args.N, args.a, cfg.precision)
                results["asymptotic_log_main"] = _nstr(asy.value.log(), cfg.precision)
                results["predicted_error_scale"] = _nstr(asy.predicted_error, 6)
                results["in_window"] = asy.in_window
            else:
                results["asymptotic_log_main"] = None
    return results, bool(passed)


def cmd_fgk(cfg: RunConfig, args) -> tuple:
    with working(cfg.precision):
        rows = []
        for i in range(args.points):
            x = args.x_lo * (args.x_hi / args.x_lo) ** (i / max(args.points - 1, 1))
            y = mpmath.exp(-mpmath.mpf(x))
            rows.append({
                "x": x,
                "f_k": _nstr(f_k(y, args.k, cfg.precision), cfg.precision),
                "g_k": _nstr(g_k(x, args.k, cfg.precision), cfg.precision),
            })
        integral = gk_integral(args.k, cfg.tol)
        target = mpmath.pi**2 / (3 * args.k * (args.k + 1))
        results = {
            "k": args.k,
            "grid": rows,
            "gk_integral": _nstr(integral, cfg.precision),
            "integral_target": _nstr(target, cfg.precision),
            "integral_error": _nstr(abs(integral - target), 6),
        }
        passed = bool(abs(integral - target) < cfg.tol)
    return results, passed


def cmd_asymptotics(cfg: RunConfig, args) -> tuple:
    s_grid = tuple(float(x) for x in args.s_grid.split(","))
    reports = [
        verify.eigen_sum_residuals(args.k, s_grid, cfg.precision),
        verify.gk_main_term_check(s_grid, digits=cfg.precision) if args.k == 2 else None,
        verify.three_factor_assembly(args.k, s_grid, cfg.precision),
    ]
    reports = [r for r in reports if r is not None]
    return {"reports": reports}, all(r["passed"] for r in reports)


def cmd_simulate(cfg: RunConfig, args) -> tuple:
    params = ModelParams(args.k, args.s, args.trials, cfg.seed, args.eps)
    record = simulation_report(params, cfg.tol, cfg.precision)
    within = abs(record["estimate"] - record["exact"]) <= 3 * record["stderr"] + record["bias_bound"]
    record["within_3sigma_plus_bias"] = bool(within)
    return record, bool(within)


def cmd_identities(cfg: RunConfig, args) -> tuple:
    reports = check_all(args.nmax)
    if cfg.out_format == "csv":
        write_csv(cfg, "identities", ["name", "passed", "first_discrepancy"],
                  [(r.name, r.passed, r.first_discrepancy) for r in reports])
    results = json.loads(reports_json(reports))
    return {"cases": results, "n_max": args.nmax}, all(r.passed for r in reports)


def cmd_fit_conjecture(cfg: RunConfig, args) -> tuple:
    report = verify.conjecture_fit_check(
        args.k, args.s_lo, args.s_hi, args.points, digits=cfg.precision
    )
    return report, report["passed"]


def cmd_verify_all(cfg: RunConfig, args) -> tuple:
    if args.quick:
        checks = [
            verify.oracle_equivalence(n_limit=16),
            verify.identities_check(n_max=80),
            verify.transfer_matches_dp(N=16),
            verify.runup_matches_product(n_values=(1, 2, 3, 4, 5, 6)),
            verify.gk_integral_check(k_values=(2, 3), tol=1e-8),
            verify.fk_lambda_identity(n_points=8),
            verify.spectral_invariants(points_per_k=6, digits=cfg.precision),
            verify.eigen_sum_residuals(2, (0.2, 0.1, 0.05), cfg.precision),
            verify.monte_carlo_check(trials=10**5, seed=cfg.seed, digits=cfg.precision),
            verify.coefficient_ratio_check((500, 1000), cfg.precision),
        ]
    else:
        checks = [
            verify.oracle_equivalence(),
            verify.identities_check(),
            verify.transfer_matches_dp(),
            verify.runup_matches_product(),
            verify.gk_integral_check(),
            verify.fk_lambda_identity(),
            verify.spectral_invariants(digits=cfg.precision),
            verify.eigen_sum_residuals(2, digits=cfg.precision),
            verify.eigen_sum_residuals(3, digits=cfg.precision),
            verify.gk_main_term_check(digits=cfg.precision),
            verify.three_factor_assembly(2, digits=cfg.precision),
            verify.monte_carlo_check(seed=cfg.seed, digits=cfg.precision),
            verify.coefficient_ratio_check(digits=cfg.precision),
            verify.conjecture_fit_check(digits=cfg.precision),
        ]
    for report in checks:
        status = "PASS" if report["passed"] else "FAIL"
        print(f"{status} {report['name']}")
    return {"checks": checks}, all(c["passed"] for c in checks)


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    # global flags are accepted on either side of the subcommand; SUPPRESS
    # keeps unset subcommand-side copies from clobbering main-side values
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, default=argparse.SUPPRESS,
                        help="decimal digits (default 50)")
    common.add_argument("--tol", type=float, default=argparse.SUPPRESS,
                        help="default tolerance")
    common.add_argument("--out", default=argparse.SUPPRESS,
                        help="artifact directory (default ./out)")
    common.add_argument("--format", choices=["json", "csv"],
                        default=argparse.SUPPRESS, help="artifact format")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="seed for randomized subcommands")
    common.add_argument("--config", default=argparse.SUPPRESS,
                        help="JSON config path (or KSEQ_CONFIG env var)")
    p = argparse.ArgumentParser(
        prog="kseq",
        description="exact and asymptotic toolkit for partitions without k-sequences",
        parents=[common],
    )
    sub = p.add_subparsers(dest="command", required=True)

    def add_parser(name, **kwargs):
        return sub.add_parser(name, parents=[common], **kwargs)

    sp = add_parser("count", help="exact constrained partition counts")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--r", type=int, default=None, help="multiplicity cap (omit for unbounded)")
    sp.add_argument("--b", type=int, default=0, help="minimum part bound B")
    sp.add_argument("--n", "--nmax", dest="nmax", type=int, default=100,
                    help="largest weight tabulated")
    sp.add_argument("--oracle", action="store_true", help="cross-check against enumeration")
    sp.add_argument("--oracle-limit", type=int, default=36)
    sp.set_defaults(fn=cmd_count)

    sp = add_parser("series", help="expand a (1-q^{an+b})^e product")
    sp.add_argument("--factors", help="semicolon-separated a,b,e triples")
    sp.add_argument("--nmax", type=int, default=100)
    sp.add_argument("--s", type=float, help="also evaluate at q=e^{-s}")
    sp.set_defaults(fn=cmd_series)

    sp = add_parser("gk-eval", help="numeric log G_k(e^{-s})")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--trace", type=int, default=0, help="emit a CSV trace up to this n")
    sp.set_defaults(fn=cmd_gk_eval)

    sp = add_parser("spectrum", help="labeled characteristic roots at one z")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--z", type=float, required=True)
    sp.set_defaults(fn=cmd_spectrum)

    sp = add_parser("transition", help="log prod T(n)^{1,1} vs closed form")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--n", "--N", dest="N", type=int, required=True,
                    help="first index of the product")
    sp.add_argument("--m", "--M", dest="M", type=int, required=True,
                    help="last index computed explicitly")
    sp.add_argument("--trace", type=int, default=0)
    sp.set_defaults(fn=cmd_transition)

    sp = add_parser("runup", help="shortening-sum oracle vs matrix product")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--n", "--N", dest="N", type=int, required=True,
                    help="part-size cutoff")
    sp.add_argument("--s", type=float, default=0.3)
    sp.add_argument("--a", type=int, default=0)
    sp.add_argument("--asymptotic", action="store_true")
    sp.set_defaults(fn=cmd_runup)

    sp = add_parser("fgk", help="f_k/g_k grid and the g_k integral")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--points", type=int, default=10)
    sp.add_argument("--x-lo", type=float, default=0.05)
    sp.add_argument("--x-hi", type=float, default=5.0)
    sp.set_defaults(fn=cmd_fgk)

    sp = add_parser("asymptotics", help="theorem residual reports")
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--s-grid", default="0.1,0.05,0.02,0.01")
    sp.set_defaults(fn=cmd_asymptotics)

    sp = add_parser("simulate", help="Monte Carlo estimate of P_s(A_k)")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--trials", type=int, default=10**5)
    sp.add_argument("--eps", type=float, default=1e-4)
    sp.set_defaults(fn=cmd_simulate)

    sp = add_parser("identities", help="coefficient-exact identity suite")
    sp.add_argument("--nmax", type=int, default=300)
    sp.set_defaults(fn=cmd_identities)

    sp = add_parser("fit-conjecture", help="fit the s^{1/k} correction")
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--s-lo", type=float, default=0.01)
    sp.add_argument("--s-hi", type=float, default=0.1)
    sp.add_argument("--points", type=int, default=6)
    sp.set_defaults(fn=cmd_fit_conjecture)

    sp = add_parser("verify-all", help="run the acceptance checks")
    sp.add_argument("--quick", action="store_true", help="reduced grids")
    sp.set_defaults(fn=cmd_verify_all)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = _apply_flag_overrides(RunConfig.load(getattr(args, "config", None)), args)
    started = time.time()
    name = args.command.replace("-", "_")
    results, passed = args.fn(cfg, args)
    path = write_artifact(cfg, name, results, passed, started)
    print(f"{'PASS' if passed else 'FAIL'} {args.command} -> {path}")
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
