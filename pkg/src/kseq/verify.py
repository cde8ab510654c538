"""Composite checks tying the modules together.

Each function returns a JSON-ready dict with a ``passed`` flag and the
numbers behind it; the acceptance test suite and the command line driver both
run these, so a criterion has exactly one implementation.
"""
from __future__ import annotations

import mpmath

from .asymptotics import (
    AsymptoticModel,
    conjecture_fit,
    f_k,
    gk_integral,
    main_term_gk,
    main_term_pk,
)
from .counting import Constraint, count_constrained, enumerate_oracle, gk_coefficients
from .identities import check_all
from .precision import DEFAULT_DIGITS, working
from .probability import ModelParams, exact_prob, simulate
from .spectral import (
    char_roots,
    eigen_cut_for,
    eigen_product_log,
    eigen_sum,
    primary_root,
    spectral_chain,
    transition_matrix,
    transition_tail_product,
)
from .transfer import gk_eval, iterate_product, runup_vector, z_of


def _nstr(x, d=12):
    return mpmath.nstr(mpmath.mpf(x), d)


def oracle_equivalence(
    k_values=(2, 3, 4),
    r_values=(1, 2, None),
    b_values=(0, 1),
    n_limit: int = 36,
) -> dict:
    """DP versus exhaustive enumeration, exact, over the full grid."""
    mismatches = []
    combos = 0
    for k in k_values:
        for r in r_values:
            for b in b_values:
                c = Constraint(k, r, b)
                combos += 1
                table = count_constrained(c, n_limit)
                for n in range(n_limit + 1):
                    expected = enumerate_oracle(c, n)
                    if table[n] != expected:
                        mismatches.append(
                            {"constraint": c.label(), "n": n,
                             "dp": str(table[n]), "oracle": str(expected)}
                        )
    return {
        "name": "oracle_equivalence",
        "passed": not mismatches,
        "combinations": combos,
        "n_limit": n_limit,
        "mismatches": mismatches,
    }


def identities_check(n_max: int = 300) -> dict:
    reports = check_all(n_max)
    return {
        "name": "identity_suite",
        "passed": all(r.passed for r in reports),
        "n_max": n_max,
        "cases": [r.to_json_dict() for r in reports],
    }


def transfer_matches_dp(k_values=(2, 3, 4), N: int = 30) -> dict:
    """Formal-mode product entry 0 equals the DP coefficients, exactly.

    Entry 0 after N+1 steps counts partitions with parts <= N (the N-step
    entry is the paper's G_{k,N}, parts strictly below N), so N+1 steps make
    the coefficients agree with p_k(n) for every n <= N.
    """
    failures = []
    for k in k_values:
        product_entry = iterate_product(k, N + 1, mode="formal", n_max=N).entries[0]
        dp = gk_coefficients(k, N)
        if tuple(product_entry.coeffs) != tuple(dp.values):
            failures.append(k)
    return {
        "name": "transfer_matrix_equals_dp",
        "passed": not failures,
        "k_values": list(k_values),
        "N": N,
        "failures": failures,
    }


def runup_matches_product(
    k_values=(2, 3, 4), n_values=(1, 2, 3, 4, 5, 6, 7, 8), s=0.3,
    digits: int = DEFAULT_DIGITS,
) -> dict:
    """Shortening-sequence enumeration equals the matrix product: exact in
    formal mode, to working precision in numeric mode."""
    worst_log_gap = mpmath.mpf(0)
    formal_failures = []
    with working(digits):
        tol = mpmath.mpf(10) ** (-(digits - 10))
        for k in k_values:
            for N in n_values:
                n_max = N * (N + 1) // 2
                via_runup = runup_vector(k, N, mode="formal", n_max=n_max)
                via_product = iterate_product(k, N, mode="formal", n_max=n_max)
                for a in range(k):
                    if via_runup.entries[a].coeffs != via_product.entries[a].coeffs:
                        formal_failures.append((k, N, a))
                num_runup = runup_vector(k, N, s=s, mode="numeric", digits=digits)
                num_product = iterate_product(k, N, s=s, mode="numeric", digits=digits)
                for a in range(k):
                    lv1, lv2 = num_runup.entries[a], num_product.entries[a]
                    if lv1.sign == lv2.sign == 0:
                        continue
                    gap = abs(lv1.log_mag - lv2.log_mag)
                    worst_log_gap = max(worst_log_gap, gap)
    return {
        "name": "runup_oracle",
        "passed": not formal_failures and worst_log_gap < tol,
        "formal_failures": formal_failures,
        "worst_numeric_log_gap": _nstr(worst_log_gap, 3),
        "tolerance": _nstr(tol, 3),
    }


def gk_integral_check(k_values=(2, 3, 4, 5, 6), tol=1e-8) -> dict:
    """integral of g_k against pi^2/(3k(k+1))."""
    rows = []
    passed = True
    with working(30):
        for k in k_values:
            value = gk_integral(k, mpmath.mpf(tol) / 10)
            target = mpmath.pi**2 / (3 * k * (k + 1))
            err = abs(value - target)
            ok = err < tol
            passed = passed and ok
            rows.append({"k": k, "value": _nstr(value, 20), "error": _nstr(err, 3), "ok": ok})
    return {"name": "gk_integral", "passed": passed, "tol": tol, "rows": rows}


def fk_lambda_identity(
    k_values=(2, 3, 4), s=0.05, n_points: int = 20, threshold=1e-20,
    digits: int = DEFAULT_DIGITS,
) -> dict:
    """|f_k(e^{-ns}) - x_1(n) e^{-ns}| below threshold across the grid."""
    worst = mpmath.mpf(0)
    with working(digits):
        s = mpmath.mpf(s)
        for k in k_values:
            for n in range(1, n_points + 1):
                y = mpmath.exp(-n * s)
                lhs = f_k(y, k, digits)
                lam = primary_root(k, z_of(n, s, digits), digits)
                worst = max(worst, abs(lhs - lam * y))
    return {
        "name": "fk_lambda_identity",
        "passed": bool(worst < mpmath.mpf(threshold)),
        "worst": _nstr(worst, 3),
        "threshold": _nstr(mpmath.mpf(threshold), 3),
    }


def spectral_invariants(
    k_values=(2, 3, 4, 5), points_per_k: int = 50, digits: int = DEFAULT_DIGITS
) -> dict:
    """Root residuals, Vieta sums, eigendecomposition reconstruction, and the
    closed-form transition matrix against direct inversion, on a z-grid."""
    tol_roots = mpmath.mpf(10) ** (-(digits - 8))
    tol = mpmath.mpf(10) ** (-(digits - 10))
    worst = {"residual": mpmath.mpf(0), "vieta_sum": mpmath.mpf(0),
             "vieta_prod": mpmath.mpf(0), "reconstruction": mpmath.mpf(0),
             "transition": mpmath.mpf(0)}
    count = 0
    with working(digits):
        for k in k_values:
            for z in _log_grid(mpmath.mpf("0.001"), mpmath.mpf(1000), points_per_k):
                count += 1
                point = char_roots(k, z, digits)
                worst["residual"] = max(worst["residual"], max(point.residuals()))
                w = 1 / point.z
                vsum = abs(mpmath.fsum(point.roots) - w) / w
                sign = 1 if (k + 1) % 2 == 0 else -1
                vprod = abs(mpmath.fprod(point.roots) - sign * w) / w
                worst["vieta_sum"] = max(worst["vieta_sum"], vsum)
                worst["vieta_prod"] = max(worst["vieta_prod"], vprod)
                recon = point.reconstruct_m()
                err = mpmath.mpf(0)
                for i in range(k):
                    for j in range(k):
                        target = 1 if i == 0 else (point.z if j == i - 1 else 0)
                        err = max(err, abs(recon[i, j] - target))
                scale = max(mpmath.mpf(1), point.z)
                worst["reconstruction"] = max(worst["reconstruction"], err / scale)
        # transition closed form vs direct inversion along short chains
        for k in k_values:
            prev = None
            for n, point in spectral_chain(k, 0.05, 5, 10, digits):
                if prev is not None:
                    t = transition_matrix(prev, point, digits)
                    direct = point.a_inverse() * prev.A
                    scale = max(abs(direct[i, j]) for i in range(k) for j in range(k))
                    err = max(
                        abs(direct[i, j] - t.T[i, j]) for i in range(k) for j in range(k)
                    )
                    worst["transition"] = max(worst["transition"], err / scale)
                prev = point
    passed = (
        worst["residual"] < tol_roots
        and all(worst[key] < tol for key in ("vieta_sum", "vieta_prod", "reconstruction", "transition"))
    )
    return {
        "name": "spectral_invariants",
        "passed": bool(passed),
        "grid_points": count,
        "worst": {key: _nstr(val, 3) for key, val in worst.items()},
        "tol_roots": _nstr(tol_roots, 3),
        "tol": _nstr(tol, 3),
    }


def _log_grid(lo, hi, points):
    ratio = (hi / lo) ** (mpmath.mpf(1) / (points - 1))
    return [lo * ratio**i for i in range(points)]


def eigen_sum_residuals(k: int, s_grid=(0.2, 0.1, 0.05, 0.02, 0.01), digits: int = DEFAULT_DIGITS) -> dict:
    """R(s) = |sum log(x_1 z) - closed form|; R(s)/s^{1/k} must not grow as
    s decreases (log-log slope of R no flatter than 1/k minus slack)."""
    model = AsymptoticModel(k, digits)
    rows = []
    residuals = []
    ratios = []
    with working(digits):
        for s in s_grid:
            s = mpmath.mpf(s)
            cut = eigen_cut_for(k, s, mpmath.mpf("1e-12"), digits)
            total = eigen_product_log(k, s, cut, digits)
            closed = (
                model.gk_rate / s
                + mpmath.mpf(k - 1) / (2 * k) * mpmath.log(s)
                - mpmath.mpf(k - 1) / (2 * k) * mpmath.log(2 * mpmath.pi)
            )
            resid = abs(total.value - closed)
            residuals.append(resid)
            ratios.append(resid / s ** (mpmath.mpf(1) / k))
            rows.append(
                {
                    "s": float(s),
                    "residual": _nstr(resid, 8),
                    "ratio": _nstr(ratios[-1], 8),
                    "tail_bound": _nstr(total.tail_bound, 3),
                }
            )
        slope = _loglog_slope([mpmath.mpf(s) for s in s_grid], residuals)
        bounded = bool(max(ratios) <= 4 * ratios[0] and slope > mpmath.mpf(1) / k - mpmath.mpf("0.35"))
    return {
        "name": f"eigen_sum_closed_form_k{k}",
        "passed": bounded,
        "rows": rows,
        "loglog_slope": _nstr(slope, 6),
        "expected_slope": _nstr(mpmath.mpf(1) / k, 6),
    }


def _loglog_slope(xs, ys):
    lx = [mpmath.log(x) for x in xs]
    ly = [mpmath.log(max(y, mpmath.mpf("1e-80"))) for y in ys]
    n = len(lx)
    mx = mpmath.fsum(lx) / n
    my = mpmath.fsum(ly) / n
    num = mpmath.fsum((a - mx) * (b - my) for a, b in zip(lx, ly))
    den = mpmath.fsum((a - mx) ** 2 for a in lx)
    return num / den


def gk_main_term_check(
    s_grid=(0.1, 0.05, 0.02, 0.01), prob_tolerance=0.10, digits: int = DEFAULT_DIGITS
) -> dict:
    """k=2 main-term trend: |log G_2 - log main term| decreasing on the grid,
    and sqrt(s) e^{pi^2/(18 s)} P_s(A_2) within 10% of sqrt(pi/2) at the
    smallest s."""
    errors = []
    with working(digits):
        for s in s_grid:
            s = mpmath.mpf(s)
            log_gk = gk_eval(2, s, mpmath.mpf("1e-12"), digits).value.log()
            err = abs(log_gk - main_term_gk(2, s, digits).log())
            errors.append(err)
        decreasing = all(b < a for a, b in zip(errors, errors[1:]))
        s_min = mpmath.mpf(min(s_grid))
        prob = exact_prob(2, s_min, mpmath.mpf("1e-10"), digits)
        scaled = mpmath.exp(
            mpmath.log(s_min) / 2 + mpmath.pi**2 / (18 * s_min) + mpmath.log(prob.value)
        )
        target = mpmath.sqrt(mpmath.pi / 2)
        rel = abs(scaled - target) / target
    return {
        "name": "gk_main_term_trend_k2",
        "passed": bool(decreasing and rel < prob_tolerance),
        "log_errors": [_nstr(e, 8) for e in errors],
        "monotone_decreasing": bool(decreasing),
        "scaled_probability": _nstr(scaled, 10),
        "target": _nstr(target, 10),
        "relative_gap": _nstr(rel, 4),
    }


def three_factor_assembly(k: int = 2, s_grid=(0.1, 0.05, 0.02, 0.01), digits: int = DEFAULT_DIGITS) -> dict:
    """Three-factor decomposition at N = floor(s^{-3/(2k+3)}):

        log G_k ?= sum_{n>N} log(x_1 z) + log prod_{n>=N} T^{1,1} + log v_0(N)

    The eigenvalue factor starts at N+1: the factor at n = N is already inside
    v_0(N), and only this indexing makes the residual vanish as s -> 0.
    """
    residuals = []
    rows = []
    with working(digits):
        for s in s_grid:
            s = mpmath.mpf(s)
            N = int(mpmath.floor(s ** (-mpmath.mpf(3) / (2 * k + 3))))
            N = max(N, 2)
            cut = eigen_cut_for(k, s, mpmath.mpf("1e-12"), digits)
            log_gk = gk_eval(k, s, mpmath.mpf("1e-12"), digits).value.log()
            log_v0 = iterate_product(k, N, s=s, digits=digits).entries[0].log()
            eigen = eigen_product_log(k, s, cut, digits, start=N + 1)
            ttail = transition_tail_product(k, s, N, max(cut, N + 8), digits)
            assembled = eigen.value + ttail.log_product + log_v0
            resid = abs(log_gk - assembled)
            residuals.append(resid)
            rows.append({"s": float(s), "N": N, "residual": _nstr(resid, 8)})
        shrinking = all(b < a for a, b in zip(residuals, residuals[1:]))
    return {
        "name": f"three_factor_assembly_k{k}",
        "passed": bool(shrinking),
        "rows": rows,
    }


def monte_carlo_check(
    k: int = 2, s: float = 0.3, trials: int = 10**6, seed: int = 20260809,
    digits: int = DEFAULT_DIGITS,
) -> dict:
    """Estimate within 3 sigma + bias of the exact ratio, and bit-for-bit
    reproducible under the fixed seed."""
    params = ModelParams(k, s, trials, seed)
    first = simulate(params)
    second = simulate(params)
    deterministic = first == second
    exact = exact_prob(k, s, mpmath.mpf("1e-10"), digits)
    gap = abs(first.estimate - float(exact.value))
    budget = 3 * first.stderr + first.bias_bound
    return {
        "name": "monte_carlo",
        "passed": bool(deterministic and gap <= budget),
        "estimate": first.estimate,
        "exact": float(exact.value),
        "gap": gap,
        "budget_3sigma_plus_bias": budget,
        "deterministic": bool(deterministic),
        "truncation_index": first.truncation_index,
    }


def coefficient_ratio_check(n_values=(500, 1000, 2000, 4000), digits: int = DEFAULT_DIGITS) -> dict:
    """p_2(n) over its closed-form main term approaches 1, strictly improving."""
    table = gk_coefficients(2, max(n_values))
    gaps = []
    rows = []
    with working(digits):
        for n in n_values:
            exact_log = mpmath.log(mpmath.mpf(table[n]))
            ratio = mpmath.exp(exact_log - main_term_pk(2, n, digits).log())
            gap = abs(ratio - 1)
            gaps.append(gap)
            rows.append({"n": n, "ratio": _nstr(ratio, 10), "gap": _nstr(gap, 4)})
        improving = all(b < a for a, b in zip(gaps, gaps[1:]))
    return {
        "name": "coefficient_ratio_k2",
        "passed": bool(improving),
        "rows": rows,
    }


def conjecture_fit_check(
    k: int = 2, s_lo: float = 0.01, s_hi: float = 0.1, points: int = 6,
    band=(0.8, 1.2), digits: int = DEFAULT_DIGITS,
) -> dict:
    """Fit of the s^{1/k} correction; for k=2 the coefficient must fall in
    the stated band around sqrt(2/(9 pi))."""
    with working(digits):
        grid = _log_grid(mpmath.mpf(s_lo), mpmath.mpf(s_hi), points)
        samples = []
        for s in grid:
            samples.append((s, gk_eval(k, s, mpmath.mpf("1e-12"), digits).value.log()))
        fit = conjecture_fit(k, samples, two_term=True, digits=digits)
        target = mpmath.sqrt(mpmath.mpf(2) / (9 * mpmath.pi))
        ok = band[0] * target <= fit.c1 <= band[1] * target
    return {
        "name": f"conjecture_fit_k{k}",
        "passed": bool(ok),
        "fitted_c1": _nstr(fit.c1, 10),
        "fitted_c2": _nstr(fit.c2, 10) if fit.c2 is not None else None,
        "target": _nstr(target, 10),
        "residual_norm": _nstr(fit.residual_norm, 4),
        "band": list(band),
    }


def eigen_product_comparison_gap(k: int, s, multiplier: float = 8.0, digits: int = DEFAULT_DIGITS) -> mpmath.mpf:
    """Distance between log[v_0(N) / prod_{n<=N} x_1 z] and its predicted
    ((k-1)/(2k)) log N + log(k^{-3/2} (2 pi)^{(k-1)/(2k)}), N in-window."""
    with working(digits):
        s = mpmath.mpf(s)
        lo = multiplier * s ** (-mpmath.mpf(1) / (k + 1)) * mpmath.log(1 / s) ** (
            mpmath.mpf(k) / (k + 1)
        )
        N = int(mpmath.ceil(lo / k)) * k
        log_v0 = iterate_product(k, N, s=s, digits=digits).entries[0].log()
        eigen = eigen_sum(k, s, 1, N, digits)
        predicted = (
            mpmath.mpf(k - 1) / (2 * k) * mpmath.log(N)
            - mpmath.mpf(3) / 2 * mpmath.log(k)
            + mpmath.mpf(k - 1) / (2 * k) * mpmath.log(2 * mpmath.pi)
        )
        return abs(log_v0 - eigen - predicted)
