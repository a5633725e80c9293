"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line with the measured quantity
and its tolerance, so ``pytest -v`` output doubles as an acceptance report.
Expected values are hand-derived closed forms or independent evaluators; none
are read back from the code under test.
"""

import io
import json
import math
import time

import numpy as np
import pytest

from vwapopt import (
    MarketParams,
    VolumeModel,
    brute_force,
    build_deterministic_path,
    closed_form_value,
    conditional_expected_revenue,
    make_hat_log_impact,
    make_kneed_impact,
    make_power_impact,
    optimal_vwap,
    realize,
    sample_volume_path,
    schedule,
    simulate,
    solve_nu,
)
from vwapopt.cli import main

S0, MU = 100.0, -0.5


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} [{number}] {title}: {detail}")
        assert ok, detail
    return emit


def test_01_solver_exactness(report):
    t0 = time.perf_counter()
    quad = solve_nu(make_power_impact(0.5, 2.0), MU)
    kneed = solve_nu(make_kneed_impact(1.0), MU)
    elapsed = time.perf_counter() - t0
    err_q, err_k = abs(quad.nu - 1.0), abs(kneed.nu - math.sqrt(2.0))
    worst_res = max(quad.residual, kneed.residual)
    ok = err_q <= 1e-9 and err_k <= 1e-9 and worst_res <= 1e-10 and elapsed < 1.0
    report(1, "solver exactness", ok,
           f"|nu-1|={err_q:.1e}, |nu-sqrt2|={err_k:.1e}, residual={worst_res:.1e}, {elapsed:.3f}s")


def _quadrature_error(n, T=2.0, x=1.0):
    imp = make_power_impact(0.5, 2.0)
    solved = solve_nu(imp, MU)
    path = build_deterministic_path(VolumeModel.constant(1.0, n), T)
    params = MarketParams(S0, MU, 0.0, T, x)
    value = conditional_expected_revenue(realize(optimal_vwap(solved.nu, x), path), path, params, imp)
    J = closed_form_value(S0, solved.h_nu, x)
    return (value - J) / J


def test_02_quadrature_attainment(report):
    t0 = time.perf_counter()
    e_n, e_2n = _quadrature_error(10_000), _quadrature_error(20_000)
    elapsed = time.perf_counter() - t0
    ratio = e_n / e_2n
    ok = abs(e_n) <= 1e-3 and abs(ratio - 2.0) <= 0.6 and elapsed < 1.0
    report(2, "quadrature attainment", ok,
           f"rel err {e_n:.2e} at n=1e4, Richardson ratio {ratio:.4f}, {elapsed:.3f}s")


def test_03_monte_carlo_attainment(report):
    imp = make_power_impact(0.5, 2.0)
    solved = solve_nu(imp, MU)
    params = MarketParams(S0, MU, 0.3, 1.0, 1.0)
    J = closed_form_value(S0, solved.h_nu, params.x)
    t0 = time.perf_counter()
    est = simulate(optimal_vwap(solved.nu, params.x), VolumeModel.constant(1.0, 1000), params, imp,
                   n_paths=100_000, seed=0)
    elapsed = time.perf_counter() - t0
    z = (est.mean - J) / est.stderr
    ok = abs(z) < 4 and elapsed < 120
    report(3, "Monte Carlo attainment", ok,
           f"mean {est.mean:.4f} vs J {J:.4f}, stderr {est.stderr:.4f}, z={z:+.2f}, {elapsed:.1f}s")


def test_04_sigma_invariance(report):
    imp = make_power_impact(0.5, 2.0)
    solved = solve_nu(imp, MU)
    model = VolumeModel.lognormal(1.0, 5.0, 1.0, 0.3, grid_n=500)
    strat = optimal_vwap(solved.nu, 0.6)
    est = {}
    for sigma in (0.0, 0.5):
        params = MarketParams(S0, MU, sigma, 1.0, 0.6)
        est[sigma] = simulate(strat, model, params, imp, n_paths=20_000, seed=11)
    diff = est[0.5].mean - est[0.0].mean
    se = math.hypot(est[0.5].stderr, est[0.0].stderr)
    ok = abs(diff) < 4 * se
    report(4, "sigma invariance", ok,
           f"mean(0.5)-mean(0)={diff:+.4f}, combined stderr {se:.4f}, ratio {diff / se:+.2f}")


def test_05_optimality_dominance(report):
    imp = make_power_impact(0.5, 2.0)
    solved = solve_nu(imp, MU)
    T, x = 1.0, 0.8
    path = build_deterministic_path(VolumeModel.ushape(2.0, -4.0, 4.0, 1000), T)
    params = MarketParams(S0, MU, 0.0, T, x)
    assert x <= solved.nu * path.total_volume
    J = closed_form_value(S0, solved.h_nu, x)
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst = -np.inf
    for _ in range(100):
        k = int(rng.integers(1, 21))
        knots = np.sort(rng.uniform(0, T, k - 1))
        times = np.concatenate(([0.0], knots))
        widths = np.diff(np.concatenate((times, [T])))
        rates = rng.exponential(1.0, k)
        # scale to sell between 20% and 100% of the budget
        rates *= rng.uniform(0.2, 1.0) * x / float(np.dot(rates, widths))
        sched = realize(schedule(times, rates, x), path)
        worst = max(worst, conditional_expected_revenue(sched, path, params, imp) / J)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1 + 1e-3 and elapsed < 10
    report(5, "optimality dominance", ok, f"best random/J = {worst:.6f} over 100 schedules, {elapsed:.2f}s")


def test_06_brute_force_oracle(report):
    imp = make_power_impact(0.5, 2.0)
    path = build_deterministic_path(VolumeModel.constant(1.0, 1000), 1.0)
    grid = np.linspace(0.0, 2.0, 21)
    t0 = time.perf_counter()
    partial = brute_force(MarketParams(S0, MU, 0.0, 1.0, 0.6), imp, path, 5, grid)
    full = brute_force(MarketParams(S0, MU, 0.0, 1.0, 1.0), imp, path, 5, grid)
    elapsed = time.perf_counter() - t0
    rel = abs(partial.gap) / partial.closed_form
    ok = (partial.best_rates == [1.0, 1.0, 1.0, 0.0, 0.0] and rel <= 0.02
          and full.best_rates == [1.0] * 5 and elapsed < 30)
    report(6, "brute-force oracle", ok,
           f"x=0.6: {partial.best_rates} gap {rel:.2e}; x=1: {full.best_rates}; {elapsed:.1f}s")


def test_07_endogenous(report):
    imp = make_hat_log_impact(1.0)
    solved = solve_nu(imp, MU)
    ident = abs(solved.nu - solved.nu_hat / (1 - solved.nu_hat))
    params = MarketParams(S0, MU, 0.3, 1.0, 1.0)
    J = closed_form_value(S0, solved.h_nu, params.x)
    t0 = time.perf_counter()
    est = simulate(optimal_vwap(solved.nu, params.x), VolumeModel.constant(1.0, 1000), params, imp,
                   n_paths=100_000, seed=0)
    elapsed = time.perf_counter() - t0
    z = (est.mean - J) / est.stderr
    ok = solved.residual <= 1e-10 and ident <= 1e-12 and abs(z) < 4 and elapsed < 120
    report(7, "endogenous volume", ok,
           f"residual {solved.residual:.1e}, identity err {ident:.1e}, "
           f"mean {est.mean:.4f} vs J {J:.4f} (z={z:+.2f}), {elapsed:.1f}s")


def test_08_budget_conservation(report):
    nu = solve_nu(make_power_impact(0.5, 2.0), MU).nu
    T = 1.0
    paths = [build_deterministic_path(VolumeModel.constant(1.0, 1000), T),
             build_deterministic_path(VolumeModel.ushape(2.0, -4.0, 4.0, 1000), T)]
    logn = VolumeModel.lognormal(1.0, 5.0, 1.0, 0.3, grid_n=1000)
    paths += [sample_volume_path(logn, T, seed=3, path_index=k) for k in range(100)]
    x = 0.9 * nu * min(p.total_volume for p in paths)
    worst = max(abs(realize(optimal_vwap(nu, x), p).total_sold - x) / x for p in paths)
    ok = worst <= 1e-9
    report(8, "budget conservation", ok, f"max |sold-x|/x = {worst:.1e} over {len(paths)} paths")


def _cli_report(tmp_path, name, cfg_path):
    out = tmp_path / name
    code = main(["simulate", "--config", str(cfg_path), "--out", str(out)],
                stdout=io.StringIO(), stderr=io.StringIO())
    assert code == 0
    return (out / "report.json").read_bytes()


def test_09_reproducibility(tmp_path, report):
    cfg = {
        "market": {"s0": S0, "mu": MU, "sigma": 0.3, "T": 1, "x": 0.6},
        "impact": {"family": "power", "c": 0.5, "p": 2},
        "volume": {"kind": "lognormal", "v0": 1, "kappa": 5, "theta": 1, "eta": 0.3, "grid_n": 500},
        "run": {"seed": 42, "n_paths": 2000},
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    a, b = _cli_report(tmp_path, "a", cfg_path), _cli_report(tmp_path, "b", cfg_path)
    ok = a == b
    report(9, "reproducibility", ok, f"report.json {len(a)} bytes, identical={a == b}")


def test_10_indicator_diagnostic(report):
    imp = make_power_impact(0.5, 2.0)
    solved = solve_nu(imp, MU)
    T, x = 1.0, 1.5
    # U-shaped volume in [1, 2]: the literal rule switches on only while v <= x/nu
    path = build_deterministic_path(VolumeModel.ushape(2.0, -4.0, 4.0, 10_000), T)
    params = MarketParams(S0, MU, 0.0, T, x)
    J = closed_form_value(S0, solved.h_nu, x)
    clock = realize(optimal_vwap(solved.nu, x), path)
    literal = realize(optimal_vwap(solved.nu, x), path, literal_indicator=True)
    differ = not np.array_equal(clock.rates, literal.rates)
    shortfall = (J - conditional_expected_revenue(literal, path, params, imp)) / J
    ok = differ and (literal.budget_violated or shortfall > 1e-3)
    report(10, "indicator diagnostic", ok,
           f"literal sold {literal.total_sold:.4f} of x={x}, shortfall vs J {shortfall:.2%}, "
           f"budget violated={literal.budget_violated}")
