"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line with its runtime against the
budget, then asserts. Detail lines that follow are indented and informational.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest
from oracles import manufactured_residual, naive_step
from reference_tables import SPATIAL, TABLE1, TEMPORAL

from fracsubdiff.analysis import (
    UNCONDITIONAL_ORDER,
    amplification_sweep,
    circulant_eigenvalues,
    max_stable_tau,
    order_quadratic,
    spatial_order,
    stability_condition,
    temporal_order,
)
from fracsubdiff.fracweights import combined_weights, weight_table
from fracsubdiff.harness import preset, run_study
from fracsubdiff.operators import (
    A6,
    A8,
    B6,
    B8,
    EIGHTH_ORDER_PAIR,
    SIXTH_ORDER_PAIR,
    combine_differences,
    compact_residual_order,
    fit_order,
    rl_derivative_halfpoint,
)
from fracsubdiff.problem import problem_from_dict
from fracsubdiff.solver import CompactSolver, assemble_lhs, assemble_rhs

F = Fraction
SCHEMES = ("compact6", "compact8")
GRID = [round(0.1 * i, 1) for i in range(1, 10)]


@pytest.fixture
def report(capsys):
    def emit(number: int, title: str, checks: dict, elapsed: float, limit: float | None, details=()):
        if limit is not None:
            checks = {**checks, f"runtime < {limit:g} s": elapsed < limit}
        ok = all(checks.values())
        budget = f"{elapsed:.2f} s" + (f" / {limit:g} s" if limit is not None else "")
        failed = [k for k, v in checks.items() if not v]
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {title} ({budget})")
            for name in failed:
                print(f"    failed: {name}")
            for line in details:
                print(f"    {line}")
        assert ok, f"criterion {number} failed: {failed}"

    return emit


def test_criterion_1_weight_laws(report):
    start = time.perf_counter()
    n = 10_000
    orders = [round(0.05 * i, 2) for i in range(1, 20)]
    checks = {}
    sums = {}
    for order in orders:
        t = weight_table(order, n)
        raw, g = t.raw, t.shifted
        checks[f"raw signs, order {order}"] = bool(np.all(raw[1:] < 0))
        checks[f"raw partial sums < 1, order {order}"] = bool(np.all(-np.cumsum(raw[1:]) < 1.0))
        checks[f"shifted signs, order {order}"] = bool(np.all(g[2:] < 0))
        checks[f"shifted partial sums < g0, order {order}"] = bool(np.all(-np.cumsum(g[1:]) < g[0]))
        s_raw, s_g = float(raw.sum()), float(g.sum())
        sums[order] = (s_raw, s_g)
        checks[f"|sum raw| < 1e-2, order {order}"] = abs(s_raw) < 1e-2
        checks[f"sum shifted in (0, 1e-2), order {order}"] = 0.0 < s_g < 1e-2
    elapsed = time.perf_counter() - start
    details = [
        f"order {o}: sum raw {r:.4g}, sum shifted {s:.4g}, "
        f"closed form {math.exp(math.lgamma(n + 1 - o) - math.lgamma(1 - o) - math.lgamma(n + 1)):.4g}"
        for o, (r, s) in sums.items()
        if not abs(r) < 1e-2
    ]
    if details:
        details.insert(0, "finite-n sums equal Gamma(n+1-order)/(Gamma(1-order) Gamma(n+1)) ~ n^-order, not ~0:")
    report(1, "weight-law invariants, 19 orders x n=1e4", checks, elapsed, 5.0, details)


def test_criterion_2_stencil_identities(report):
    start = time.perf_counter()
    checks = {
        "A rows": A6.exact == (F(-1, 90), F(2, 45), F(14, 15), F(2, 45), F(-1, 90)),
        "B rows": B6.exact == (F(-1, 12), F(4, 3), F(-5, 2), F(4, 3), F(-1, 12)),
        "A8 rows": A8.exact == (F(1, 560), F(-3, 280), F(3, 112), F(27, 28), F(3, 112), F(-3, 280), F(1, 560)),
        "B8 rows": B8.exact == (F(1, 90), F(-3, 20), F(3, 2), F(-49, 18), F(3, 2), F(-3, 20), F(1, 90)),
        "row sums (1,0,1,0)": [sum(s.exact) for s in (A6, B6, A8, B8)] == [1, 0, 1, 0],
        "A = 1 - d4/90": combine_differences({0: F(1), 4: F(-1, 90)}, 2) == A6.exact,
        "B = d2 - d4/12": combine_differences({2: F(1), 4: F(-1, 12)}, 2) == B6.exact,
        "A8 = 1 + d6/560": combine_differences({0: F(1), 6: F(1, 560)}, 3) == A8.exact,
        "B8 = d2 - d4/12 + d6/90": combine_differences({2: F(1), 4: F(-1, 12), 6: F(1, 90)}, 3) == B8.exact,
    }
    report(2, "stencil identities", checks, time.perf_counter() - start, 1.0)


def test_criterion_3_operator_orders(report):
    start = time.perf_counter()
    s6, _ = compact_residual_order(SIXTH_ORDER_PAIR, [1 / 16, 1 / 32, 1 / 64])
    s8, _ = compact_residual_order(EIGHTH_ORDER_PAIR, [1 / 8, 1 / 16, 1 / 32])
    checks = {f"sixth-order slope {s6:.3f} in 6.0 +- 0.3": abs(s6 - 6.0) <= 0.3,
              f"eighth-order slope {s8:.3f} in 8.0 +- 0.5": abs(s8 - 8.0) <= 0.5}
    taus = [1 / 40, 1 / 80, 1 / 160]
    for order in (0.25, 0.5, 0.75):
        errs = []
        for tau in taus:
            N = round(1 / tau)
            u = (np.arange(N + 1) * tau) ** 3
            exact = math.gamma(4) / math.gamma(4 - order)
            errs.append(max(
                abs(rl_derivative_halfpoint(order, u[: k + 2], tau) - exact * ((k + 0.5) * tau) ** (3 - order))
                for k in range(N)
            ))
        slope = fit_order(taus, errs)
        checks[f"RL slope on t^3, order {order}: {slope:.3f} in 2.0 +- 0.15"] = abs(slope - 2.0) <= 0.15
    report(3, "operator orders", checks, time.perf_counter() - start, 10.0)


def _temporal_checks(name, result, checks, details):
    for pair in result.config.pairs:
        orders = result.orders(pair)
        checks[f"{name} {pair} T-orders in [1.85, 2.10]"] = len(orders) == 3 and all(1.85 <= o <= 2.10 for o in orders)
        details.append(f"{name} {pair}: e_inf {['%.4e' % e for e in result.errors(pair)]}, orders {[round(o, 4) for o in orders]}")


def test_criterion_4_temporal_convergence(report):
    start = time.perf_counter()
    checks, details = {}, []
    t1 = run_study(preset("table1"))
    _temporal_checks("table1 h=1/1000", t1, checks, details)
    t3 = run_study(preset("table3"))
    _temporal_checks("table3 h=1/500", t3, checks, details)
    spot = t1.errors((0.25, 0.15))[0]
    reference = TABLE1[(0.25, 0.15)][0][1]
    checks[f"h=1/1000 spot e_inf {spot:.4e} within 5x of {reference:.4e}"] = reference / 5 <= spot <= 5 * reference
    report(4, "temporal convergence", checks, time.perf_counter() - start, 180.0, details)


def _spatial_orders(result, pair):
    rows = [r for r in result.rows if (r.alpha, r.beta) == pair]
    # orders that touch a roundoff-limited row are annotated and left out
    return [cur.order for prev, cur in zip(rows, rows[1:])
            if cur.order is not None and not (prev.roundoff_limited or cur.roundoff_limited)]


def test_criterion_5_spatial_convergence(report):
    start = time.perf_counter()
    checks, details = {}, []
    for name, lo, hi in (("table2", 5.4, 6.3), ("table4", 6.5, 8.3)):
        res = run_study(preset(name))
        flagged = sum(r.roundoff_limited for r in res.rows)
        for pair in res.config.pairs:
            orders = _spatial_orders(res, pair)
            checks[f"{name} {pair} S-orders in [{lo}, {hi}]"] = bool(orders) and all(lo <= o <= hi for o in orders)
            details.append(f"{name} {pair}: e_inf {['%.4e' % e for e in res.errors(pair)]}, "
                           f"orders {[round(o, 3) for o in orders]}, roundoff-flagged rows {flagged}")
    elapsed = time.perf_counter() - start
    for name in ("table2", "table4"):
        res = run_study(preset(name, ghosts="extrapolate"))
        details.append(f"info, extrapolated ghosts, {name}: orders "
                       f"{[[round(o, 2) for o in res.orders(p)] for p in res.config.pairs]}")
    report(5, "spatial convergence (exact ghost values)", checks, elapsed, 120.0, details)


def test_criterion_6_order_arithmetic(report):
    start = time.perf_counter()
    checks, worst = {}, 0.0
    for group, order_fn in ((TEMPORAL, lambda a, b: temporal_order(a[1], b[1])),
                            (SPATIAL, lambda a, b: spatial_order(a[1], 1 / a[0], b[1], 1 / b[0]))):
        for name, table in group.items():
            for pair, rows in table.items():
                for prev, cur in zip(rows, rows[1:]):
                    dev = abs(order_fn(prev, cur) - cur[2])
                    worst = max(worst, dev)
                    checks[f"{name} {pair} 1/{cur[0]}"] = dev <= 2e-4
    report(6, "order arithmetic on reference columns", checks, time.perf_counter() - start, None,
           [f"largest deviation {worst:.2e} over {len(checks)} printed orders"])


def test_criterion_7_stability(report):
    start = time.perf_counter()
    checks = {}
    regimes = [(1 / 4, 1 / 1000), (1 / 32, 1 / 1000), (1 / 200, 1 / 12), (1 / 160, 1 / 20), (1.0, 0.5)]
    worst = 0.0
    for scheme in SCHEMES:
        for a in GRID:
            for b in GRID:
                for tau, h in regimes:
                    w = combined_weights(a, b, 1.0, 1.0, tau, h, 1)
                    r, _, _ = amplification_sweep(scheme, float(w[0]), float(w[1]))
                    worst = max(worst, r)
    checks[f"max |P/Q| = {worst!r} <= 1 + 1e-12"] = worst <= 1 + 1e-12
    for scheme in SCHEMES:
        for M in (12, 100, 1000):
            lam = min(circulant_eigenvalues(scheme, M, g0).min() for g0 in (1e-8, 0.5, 1e3, 1e8))
            checks[f"{scheme} circulant eigenvalues positive at M={M}"] = lam > 0
    gammas = np.linspace(0.001, 0.999, 999)
    checks["unconditional region is order <= 2 - sqrt(2)"] = all(
        (order_quadratic(g) <= 0) == (g <= UNCONDITIONAL_ORDER) for g in gammas
    ) and all(
        stability_condition("compact6", a, b, 1, 1, 0.5, 0.01).unconditional
        == (a <= UNCONDITIONAL_ORDER and b <= UNCONDITIONAL_ORDER)
        for a in GRID for b in GRID
    )
    details = [f"largest |P/Q| over 9x9 pairs x {len(regimes)} (tau, h) x 1001 samples: {worst!r}"]
    zero = {"source": "0", "initial": "0", "boundary_left": "0", "boundary_right": "0"}
    rng = np.random.default_rng(2024)
    M, N = 40, 500
    cases = [("compact6", 0.25, 0.15, 1 / 50), ("compact8", 0.5, 0.3, 1 / 50)]
    for scheme, a, b, _ in list(cases):
        h = 1 / M
        tau = 0.9 * max_stable_tau(scheme, 0.9, 0.8, 1.0, 1.0, h)
        cases.append((scheme, 0.9, 0.8, tau))
    for scheme, a, b, tau in cases:
        spec = problem_from_dict({"alpha": a, "beta": b, "horizon": N * tau, **zero})
        assert stability_condition(scheme, a, b, 1, 1, tau, 1 / M).satisfied
        u0 = rng.uniform(-1, 1, M + 1)
        u0[[0, -1]] = 0.0
        levels = CompactSolver(spec, scheme, M, N, initial_level=u0).run().levels
        growth = float(np.abs(levels).max() / np.abs(u0).max())
        checks[f"{scheme} ({a}, {b}) tau={tau:.3g} bounded over N={N}"] = np.all(np.isfinite(levels)) and growth <= 1.0 + 1e-12
        details.append(f"{scheme} ({a}, {b}) tau={tau:.3g}: max|u|/max|u0| = {growth:.6f}, final {np.abs(levels[-1]).max():.3e}")
    report(7, "stability", checks, time.perf_counter() - start, 30.0, details)


def _oracle_problem():
    return problem_from_dict({
        "alpha": 0.35, "beta": 0.6, "A": 1.3, "B": 0.7,
        "source": "sin(2*x + 1) * exp(t) + x * t", "initial": "cos(x)",
        "boundary_left": "1 + t", "boundary_right": "cos(1) + t**2", "exact": "cos(x) + t * x * x",
    })


def test_criterion_8_oracle_equivalence(report):
    start = time.perf_counter()
    checks = {}
    spec = _oracle_problem()
    worst_rhs = worst_lu = 0.0
    for scheme in SCHEMES:
        for ghosts in ("extrapolate", "exact"):
            for M in (12, 16, 20):
                solver = CompactSolver(spec, scheme, M, 5, ghosts)
                hist = solver.run()
                for k in range(5):
                    _, rhs = naive_step(scheme, spec, hist.levels[: k + 1], hist.tau, k, ghosts)
                    got = assemble_rhs(scheme, hist, solver.weights, spec, k, ghosts)
                    worst_rhs = max(worst_rhs, np.max(np.abs(got - rhs)) / np.max(np.abs(rhs)))
                worst_lu = max(worst_lu, solver.lhs.factor_residual())
        for M, g0 in ((12, 1e-3), (100, 47.4), (1000, 2.0e5)):
            worst_lu = max(worst_lu, assemble_lhs(scheme, M, g0).factor_residual())
    checks[f"RHS vs scalar loops, worst relative {worst_rhs:.2e} <= 1e-13"] = worst_rhs <= 1e-13
    checks[f"LU reconstruction residual {worst_lu:.2e} < 1e-12"] = worst_lu < 1e-12
    rng = np.random.default_rng(8)
    M, N = 20, 12
    worst_lin = 0.0
    base = {"alpha": 0.3, "beta": 0.8, "initial": "0", "boundary_left": "0", "boundary_right": "0"}
    for scheme in SCHEMES:
        d1, d2 = rng.normal(size=(2, M + 1))
        d1[[0, -1]] = d2[[0, -1]] = 0.0
        f1 = problem_from_dict({**base, "source": "sin(3*x) * t"})
        f2 = problem_from_dict({**base, "source": "exp(x) * cos(t)"})
        fc = problem_from_dict({**base, "source": "2 * sin(3*x) * t - 0.5 * exp(x) * cos(t)"})
        u1 = CompactSolver(f1, scheme, M, N, initial_level=d1).run().levels
        u2 = CompactSolver(f2, scheme, M, N, initial_level=d2).run().levels
        uc = CompactSolver(fc, scheme, M, N, initial_level=2 * d1 - 0.5 * d2).run().levels
        expected = 2 * u1 - 0.5 * u2
        worst_lin = max(worst_lin, np.max(np.abs(uc - expected)) / np.max(np.abs(expected)))
    checks[f"superposition, worst relative {worst_lin:.2e} <= 1e-12"] = worst_lin <= 1e-12
    report(8, "oracle equivalence", checks, time.perf_counter() - start, None)


def test_criterion_9_manufactured_solution(report):
    start = time.perf_counter()
    rng = np.random.default_rng(9)
    worst = 0.0
    for pair in ((0.25, 0.15), (0.4, 0.3), (0.2, 0.5)):
        for x, t in rng.uniform(0, 1, size=(20, 2)):
            worst = max(worst, abs(manufactured_residual(x, t, *pair)))
    report(9, "manufactured source consistency", {f"worst residual {worst:.2e} < 1e-8": worst < 1e-8},
           time.perf_counter() - start, None)
