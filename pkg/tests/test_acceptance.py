"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import math
import time
import warnings

import numpy as np
import pytest

from privexp.errors import GenericityViolation
from privexp.evaluator import Evaluator, eval_profile
from privexp.histories import History
from privexp.model import (
    ModelParams,
    after_failure,
    after_failures,
    before_failure,
    disclosure_cutoff,
    dominance_cutoff,
    encouragement_cutoff,
    experiment_counts,
    myopic_cutoff,
    planner_cutoff,
    stopping_cutoff,
)
from privexp.payoffs import (
    deviation_preferences,
    extra_rounds_payoffs,
    preference_gaps,
    scenario_value,
    stopping_payoffs,
)
from privexp.profiles import (
    make_appendixB_SE,
    make_example_622,
    make_mixed_example,
    make_public_markov,
    make_remark6,
    make_sigma_n,
    make_threshold_phat,
    markov_policy,
)
from privexp.reproduce import prop2_pf, prop2_ratio, root_x0, run_target
from privexp.simulate import SimConfig, simulate
from privexp.verify import nash_check_sigma_n, one_shot_deviation_check

from conftest import DEFAULT, MIXED, P622, REMARK6, random_points, record_criterion


def report(number, title, ok, details):
    record_criterion(number, title, ok, details)
    assert ok, f"criterion {number} ({title}): {details}"


@pytest.fixture(autouse=True)
def _no_genericity_noise():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GenericityViolation)
        yield


# 1 ------------------------------------------------------------------------------------

def test_criterion_01_cutoff_orderings():
    start = time.perf_counter()
    counts = dict.fromkeys(["tilde<hat<star", "fail2(hat)<social<hat", "indexed increasing",
                            "fail(p*_n+1)<p*_n", "p*_200 near p_myop"], 0)
    worst_limit = 0.0
    points = random_points(10_000, seed=101)
    for params in points:
        tilde, hat, star = dominance_cutoff(params), encouragement_cutoff(params), stopping_cutoff(params)
        social = planner_cutoff(params)
        counts["tilde<hat<star"] += not tilde < hat < star
        counts["fail2(hat)<social<hat"] += not after_failures(hat, 2, params) < social < hat
        hats = [encouragement_cutoff(params, n) for n in range(52)]
        stars = [disclosure_cutoff(params, n) for n in range(52)]
        resolvable = [n for n in range(51) if (1 - params.success_rate) ** n > 1e-10]
        strict = all(hats[n] < hats[n + 1] and stars[n] < stars[n + 1] for n in resolvable)
        weak = all(a <= b for a, b in zip(hats, hats[1:])) and all(a <= b for a, b in zip(stars, stars[1:]))
        counts["indexed increasing"] += not (strict and weak)
        counts["fail(p*_n+1)<p*_n"] += not all(after_failure(stars[n + 1], params) < stars[n] for n in range(51))
        gap = abs(disclosure_cutoff(params, 200) - myopic_cutoff(params))
        worst_limit = max(worst_limit, gap)
        counts["p*_200 near p_myop"] += gap >= 1e-4
    elapsed = time.perf_counter() - start
    ok = not any(counts.values()) and elapsed < 10
    report(1, "cutoff ordering suite", ok,
           f"violations {counts} on {len(points)} points; worst |p*_200 - p_myop| = {worst_limit:.3g}; "
           f"{elapsed:.1f}s")


# 2 ------------------------------------------------------------------------------------

def value_iteration_switch(params, step=1e-5, tol=1e-14, max_iter=50_000):
    """Lowest grid belief at which experimenting is strictly better, by value iteration."""
    lam, d, m, c, g = params.success_rate, params.discount, params.prize, params.cost, params.gain
    grid = np.linspace(0.0, 1.0, int(round(1 / step)) + 1)
    down = grid * (1 - lam) / (1 - grid * lam)
    flow = (1 - d) * (grid * lam * m - c) + d * grid * lam * g
    value = np.zeros_like(grid)
    for _ in range(max_iter):
        cont = flow + d * (1 - grid * lam) * np.interp(down, grid, value)
        new = np.maximum(cont, 0.0)
        change = np.max(np.abs(new - value))
        value = new
        if change < tol:
            break
    return grid[np.argmax(cont > 0)], step


def test_criterion_02_one_player_oracle():
    start = time.perf_counter()
    worst = 0.0
    misses = 0
    points = random_points(100, seed=202, delta=(0.01, 0.95))
    for params in points:
        switch, step = value_iteration_switch(params)
        err = abs(switch - stopping_cutoff(params))
        worst = max(worst, err / step)
        misses += err > step
    elapsed = time.perf_counter() - start
    report(2, "one-player value iteration", misses == 0 and elapsed < 60,
           f"{100 - misses}/100 within one grid cell (worst {worst:.2f} cells); {elapsed:.1f}s")


# 3 ------------------------------------------------------------------------------------

def test_criterion_03_extra_rounds_nash():
    total = agree = 0
    cp_ok = True
    for lam in (0.05, 0.1, 0.2, 0.35, 0.5):
        for delta in (0.5, 0.8, 0.9, 0.97, 0.995):
            base = ModelParams(lam, delta, 1.0, 3.0 / lam, 0.5)
            p_star = stopping_cutoff(base)
            for frac in (0.1, 0.4, 0.7, 0.95):
                params = base.with_prior(p_star + frac * (1 - p_star))
                for n in range(5):
                    result = nash_check_sigma_n(params, n)
                    total += 1
                    agree += result["closed_form"] == result["brute_force"]
                    first, second = extra_rounds_payoffs(params, n)
                    cp_ok &= second >= first
    rng = np.random.default_rng(303)
    for params in random_points(1000, seed=304):
        p_star = stopping_cutoff(params)
        params = params.with_prior(p_star + rng.uniform(0.0, 0.99) * (1 - p_star))
        first, second = extra_rounds_payoffs(params, int(rng.integers(0, 40)))
        cp_ok &= second >= first
    report(3, "extra-rounds Nash condition", agree == total == 500 and cp_ok,
           f"closed form vs brute force {agree}/{total}; CP2 >= CP1 everywhere: {cp_ok}")


# 4 ------------------------------------------------------------------------------------

def test_criterion_04_asymptotics():
    ks = (10, 20, 50, 100, 200, 500, 1000)
    slowest = 0.0
    rows = []
    for k in ks:
        start = time.perf_counter()
        rows.append(prop2_ratio(ks=(k,)).rows[0])
        slowest = max(slowest, time.perf_counter() - start)
    x0 = root_x0()
    limit = 2 * x0 / math.log(2)
    pf = prop2_pf(ks=ks)
    ratio, pf_ratio = rows[-1]["ratio"], pf.summary["last_ratio"]
    ok = (abs(ratio - 2.299) < 0.05 and abs(pf_ratio - 1 / math.e) < 0.02
          and abs(x0 + math.exp(-2 * x0) - 1) < 1e-10 and f"{x0:.4f}" == "0.7968" and slowest < 30)
    report(4, "extra-rounds asymptotics", ok,
           f"N_e/N** at k={ks[-1]}: {ratio:.4f} (limit {limit:.4f}); p_f/p* {pf_ratio:.4f} vs 1/e; "
           f"x0={x0:.10f}; slowest point {slowest:.1f}s")


# 5 ------------------------------------------------------------------------------------

def test_criterion_05_threshold_iff():
    outcome = run_target("thm5-grid")
    s = outcome.summary
    report(5, "threshold profile condition is iff", outcome.ok,
           f"stated condition agrees {s['agree_stated']}/{s['points']}, refined {s['agree_refined']}/{s['points']}; "
           f"failing points name (RR)^(n-1)R: {s['failing_points_name_node']}")


# 6 ------------------------------------------------------------------------------------

def test_criterion_06_experiment_bounds():
    outcome = run_target("thm6-bounds")
    s = outcome.summary
    regime = [r for r in outcome.rows if r.get("kind") == "regime"]
    report(6, "experiment bounds", outcome.ok,
           f"catalog within [N**-2, 2N**]: {s['catalog_bounds']}; regime ratios "
           + ", ".join(f"n={r['n']}: {r['ratio']:.3f} ({r['verified']} at {r['node']})" for r in regime))


# 7 ------------------------------------------------------------------------------------

def test_criterion_07_leader_follower():
    low, high = disclosure_cutoff(P622, 1), before_failure(encouragement_cutoff(P622), P622)
    results = []
    for p0 in np.linspace(low, high, 9):
        params = P622.with_prior(float(p0))
        counts, _ = experiment_counts(params)
        prof = make_example_622(params)
        verdict = one_shot_deviation_check(prof, 2 * (counts["N_hat"] + 3)).verdict
        dist = eval_profile(prof).experiments_given_bad
        results.append(verdict == "PASS" and list(dist) == [2] and counts["N_star"] == 1)
    report(7, "leader-follower example", all(results),
           f"{sum(results)}/{len(results)} priors in [{low:.6f}, {high:.6f}] pass with N_e = 2, N* = 1")


# 8 ------------------------------------------------------------------------------------

def test_criterion_08_mixed_example():
    outcome = run_target("mixed-example")
    s = outcome.summary
    report(8, "mixed example", outcome.ok,
           f"alpha={s['alpha']:.10f} beta={s['beta']:.10f} residual={s['indifference_residual']:.1e}; "
           f"|p2(RSR) - p*_2|={abs(s['belief_RSR'] - s['p_star_2']):.1e}; "
           f"support exact {s['exact_support']} MC {s['mc_support']}")


# 9 ------------------------------------------------------------------------------------

def test_criterion_09_public_benchmark():
    bad = []
    worst = 0.0
    for i, params in enumerate(random_points(100, seed=909, lam=(0.05, 0.95))):
        p_star = stopping_cutoff(params)
        prof = make_public_markov(params)
        interior = [abs(r["residual"]) for r in prof.ladder if 0 < r["f"] < 1]
        worst = max([worst, *interior])
        zero_iff = all((markov_policy(params, float(p)) == 0) == (p <= p_star)
                       for p in np.linspace(0.01, 0.99, 25))
        counts, _ = experiment_counts(params)
        dist = eval_profile(prof).experiments_given_bad
        ok = zero_iff and max(interior, default=0.0) < 1e-10 and list(dist) == [counts["N_star"]]
        if not ok:
            bad.append(i)
    report(9, "public benchmark", not bad,
           f"{100 - len(bad)}/100 points: f=0 iff p<=p*, N_e = N*; worst interior residual {worst:.1e}")


# 10 -----------------------------------------------------------------------------------

CATALOG_CASES = [
    ("sigma_n", lambda: make_sigma_n(DEFAULT, 1)),
    ("threshold_phat", lambda: make_threshold_phat(DEFAULT)),
    ("example_622", lambda: make_example_622(P622)),
    ("remark6", lambda: make_remark6(REMARK6)),
    ("mixed_example", lambda: make_mixed_example(MIXED)),
    ("public_markov", lambda: make_public_markov(DEFAULT)),
    ("appendixB_SE", lambda: make_appendixB_SE(DEFAULT)),
]


def test_criterion_10_cross_oracle():
    mc_misses = []
    for name, make in CATALOG_CASES:
        prof = make()
        exact = eval_profile(prof)
        res = simulate(SimConfig(prof, runs=100_000, seed=1010))
        z = max(abs(est - val) / se for est, se, val in zip(res.mean, res.stderr, (exact.gamma1, exact.gamma2)))
        if not z < 4:
            mc_misses.append(f"{name} z={z:.2f}")

    rng = np.random.default_rng(1011)
    worst = 0.0
    for params in random_points(1000, seed=1012, lam=(0.05, 0.95), delta=(0.05, 0.95)):
        p, q, k = float(rng.uniform(0.01, 0.99)), float(rng.uniform(0, 1)), int(rng.integers(0, 6))
        closed = stopping_payoffs(p, q, k, params)
        direct = {
            "stop": scenario_value("", params, p, q),
            "lead": scenario_value("RR" * k + "RS", params, p, q),
            "match_general": scenario_value("RR" * k, params, p, q),
            "match": scenario_value("RR" * k, params, p, 0.0),
        }
        worst = max(worst, *(abs(direct[key] - closed[key]) for key in direct))
        u, j = int(rng.integers(0, 5)), int(rng.integers(1, 6))
        gaps, prefs = preference_gaps(p, u, j, params), deviation_preferences(p, u, j, params)
        worst = max(worst, *(abs(gaps[key] - prefs[key]) for key in gaps))
        p_star = stopping_cutoff(params)
        high = params.with_prior(p_star + float(rng.uniform(0.0, 0.99)) * (1 - p_star))
        n = int(rng.integers(0, 4))
        prof = make_sigma_n(high, n)
        top = after_failures(high.prior, prof.n_star, high)
        lag = 1 - (1 - high.success_rate) ** prof.n_star
        node = Evaluator(prof).node_value(History.of("RR" * prof.n_star), top, lag)
        worst = max(worst, abs(node - extra_rounds_payoffs(high, n)[0]))
    ok = not mc_misses and worst < 1e-10
    report(10, "cross-oracle", ok,
           f"Monte Carlo within 4 SE for {len(CATALOG_CASES) - len(mc_misses)}/{len(CATALOG_CASES)} profiles "
           f"{mc_misses or ''}; closed forms vs evaluator worst gap {worst:.1e} on 1000 points")
