"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line in the summary."""

import json
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from helpers import random_cut_factor, random_flow_factor, random_path_factor, random_paths
from liftedpaths.cut_factors import cut_min_marginal, optimize_cut
from liftedpaths.decomposition import initialize, lower_bound
from liftedpaths.flow_factors import all_lifted_min_marginals, optimize
from liftedpaths.instance import Instance, compute_strong_edges, generate_instance, random_instance
from liftedpaths.intervals import IntervalPlan, max_edge_frames, solve_intervals
from liftedpaths.message_passing import SolverConfig, iterate, run
from liftedpaths.oracle import (
    enumerate_cut_factor, enumerate_flow_factor, enumerate_min, enumerate_path_factor, exact_ldp,
)
from liftedpaths.path_factors import optimize_path, path_min_marginal
from liftedpaths.primal import local_search
from liftedpaths.separation import (
    extract_separation_costs, install_candidates, select_candidates, separate_cuts, separate_paths,
)
from liftedpaths.solution import adjust_lifted, check_solution


@pytest.fixture
def record(request):
    lines = request.config.stash[ACCEPTANCE]

    def add(number: int, title: str, ok: bool, detail: str) -> None:
        lines.append(f"criterion {number} ({title}): {'PASS' if ok else 'FAIL'}, {detail}")

    return add


def mm_error(entries_fn, factor, key, value):
    entries = entries_fn(factor)
    return abs(value - (enumerate_min(entries, key, 1) - enumerate_min(entries, key, 0)))


def test_criterion_1_factor_optimizers_exact(record):
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        inst, f = random_flow_factor(rng, max_far=8)
        worst = max(worst, abs(optimize(f).opt - enumerate_min(enumerate_flow_factor(f, inst))))
    for _ in range(200):
        f = random_path_factor(rng, max_edges=6)
        worst = max(worst, abs(optimize_path(f) - enumerate_min(enumerate_path_factor(f))))
    for _ in range(200):
        f = random_cut_factor(rng, max_edges=6)
        worst = max(worst, abs(optimize_cut(f) - enumerate_min(enumerate_cut_factor(f))))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 10
    record(1, "factor optimizers exact", ok, f"max error {worst:.1e}, {elapsed:.2f} s")
    assert ok


def test_criterion_2_min_marginals_exact(record):
    rng = np.random.default_rng(202)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        inst, f = random_flow_factor(rng, max_far=8)
        work = f.copy()
        for e, g in all_lifted_min_marginals(f).items():
            entries = enumerate_flow_factor(work, inst)
            key = ("lifted", e)
            worst = max(worst, abs(g - (enumerate_min(entries, key, 1) - enumerate_min(entries, key, 0))))
            work.lifted_theta[e] -= g
    for _ in range(100):
        f = random_path_factor(rng)
        for k in f.keys():
            worst = max(worst, mm_error(enumerate_path_factor, f, k, path_min_marginal(f, k)))
        f = random_cut_factor(rng)
        for k in f.keys():
            worst = max(worst, mm_error(enumerate_cut_factor, f, k, cut_min_marginal(f, k)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 10
    record(2, "min-marginals exact", ok, f"max error {worst:.1e}, {elapsed:.2f} s")
    assert ok


@pytest.fixture(scope="module")
def fifty_runs():
    """Solver and exact optimum on 50 random instances with at most 12 nodes and 5 frames."""
    rng = np.random.default_rng(0)
    runs = []
    solve_time = 0.0
    for _ in range(50):
        inst = random_instance(rng, int(rng.integers(4, 13)), int(rng.integers(2, 6)), p_lifted=0.4)
        start = time.perf_counter()
        report = run(inst, SolverConfig(max_iter=51))
        solve_time += time.perf_counter() - start
        runs.append((inst, report, exact_ldp(inst).objective))
    return runs, solve_time


def test_criterion_3_dual_monotone(record, fifty_runs):
    runs, _ = fifty_runs
    worst = 0.0
    for _, report, _ in runs:
        trace = report.lb_trace
        worst = max([worst] + [a - b for a, b in zip(trace, trace[1:])])
    ok = worst <= 1e-9
    record(3, "dual monotonicity", ok, f"largest decrease {worst:.1e} over 50 runs")
    assert ok


def test_criterion_4_weak_duality_and_gap(record, fifty_runs):
    runs, solve_time = fifty_runs
    duality_ok = True
    close = 0
    for _, report, opt in runs:
        for _, lb, objective in report.primal_rounds:
            if lb > opt + 1e-6 or objective < opt - 1e-6:
                duality_ok = False
        for rec in report.history:
            if rec.best_primal < opt - 1e-6:
                duality_ok = False
        final = report.solution.objective
        tol = 1e-6 if opt == 0 else 0.02 * abs(opt)
        close += abs(final - opt) <= tol
    ok = duality_ok and close >= 45 and solve_time < 60
    record(4, "weak duality + oracle gap", ok,
           f"weak duality {'holds' if duality_ok else 'violated'}, {close}/50 within 2%, {solve_time:.1f} s")
    assert ok


def test_criterion_5_pure_flow_exact(record):
    rng = np.random.default_rng(505)
    worst = 0.0
    for _ in range(20):
        inst = random_instance(rng, int(rng.integers(4, 13)), int(rng.integers(2, 6)), p_lifted=0.0, st_scale=0.3)
        report = run(inst, SolverConfig(max_iter=51))
        _, lb, objective = report.primal_rounds[0]
        worst = max(worst, objective - lb)
    ok = worst <= 1e-9
    record(5, "pure-flow exactness", ok, f"largest gap at first primal round {worst:.1e}")
    assert ok


def seeded_separation_instance(rng, kind: str) -> Instance:
    """A chain admitting a violated path factor (kind 'path') or cut factor (kind 'cut')."""
    if kind == "path":
        k = int(rng.integers(3, 6))
        base = [(i, i + 1, -float(rng.uniform(0.5, 2))) for i in range(k - 1)]
        lifted = [(0, k - 1, float(rng.uniform(0.2, 3)))]
    else:
        k = int(rng.integers(4, 7))
        mid = int(rng.integers(1, k - 2))
        base = [(i, i + 1, float(rng.uniform(0.3, 2)) if i == mid else float(rng.uniform(-0.2, 0.2)))
                for i in range(k - 1)]
        lifted = [(0, k - 1, -float(rng.uniform(0.5, 3)))]
    return Instance.build(list(range(1, k + 1)), [0.0] * k, base, lifted)


def test_criterion_6_separation_improvement(record):
    rng = np.random.default_rng(606)
    shortfall = 0.0
    found = 0
    for i in range(20):
        inst = seeded_separation_instance(rng, "path" if i % 2 == 0 else "cut")
        dec = initialize(inst)
        for _ in range(int(rng.integers(0, 3))):
            iterate(dec)
        before = lower_bound(dec).lower_bound
        costs = extract_separation_costs(dec)
        paths = separate_paths(costs, inst, 1e-4, 5, compute_strong_edges(inst).members)
        cuts = separate_cuts(costs, inst, 1e-4, 5)
        top = select_candidates(dec, paths, cuts, 1)
        if not top:
            shortfall = float("inf")
            continue
        found += 1
        install_candidates(dec, costs, top)
        gain = lower_bound(dec).lower_bound - before
        shortfall = max(shortfall, top[0].priority - gain)
    ok = found == 20 and shortfall <= 1e-9
    record(6, "guaranteed separation improvement", ok,
           f"{found}/20 candidates found, largest shortfall {shortfall:.1e}")
    assert ok


def test_criterion_7_local_search_contract(record):
    rng = np.random.default_rng(707)
    worse = invalid = 0
    for _ in range(100):
        inst = random_instance(rng, int(rng.integers(4, 13)), int(rng.integers(2, 6)), p_lifted=0.5, st_scale=0.3)
        sol = adjust_lifted(inst, random_paths(inst, rng))
        out = local_search(inst, sol)
        worse += out.objective > sol.objective
        invalid += bool(check_solution(inst, out))
    ok = worse == 0 and invalid == 0
    record(7, "local-search contract", ok, f"{worse} worsened, {invalid} invalid of 100")
    assert ok


def test_criterion_8_interval_consistency(record):
    far = invalid = mismatched = 0
    for seed in range(10):
        inst, _ = generate_instance(12, 3, 2, 0.3, seed)
        t_max = max_edge_frames(inst)
        direct = run(inst).solution
        windowed = solve_intervals(inst, IntervalPlan(3 * t_max, t_max))
        invalid += bool(check_solution(inst, windowed))
        far += abs(windowed.objective - direct.objective) > 0.05 * abs(direct.objective)
        span = max(inst.frame_of) - min(inst.frame_of) + 1
        mismatched += solve_intervals(inst, IntervalPlan(max(span, 3 * t_max), t_max)) != direct
    ok = far == 0 and invalid == 0 and mismatched == 0
    record(8, "interval-mode consistency", ok,
           f"{invalid} invalid, {far} beyond 5%, {mismatched} full-span mismatches of 10")
    assert ok


def test_criterion_9_determinism(record):
    rng = np.random.default_rng(909)
    differing = 0
    for _ in range(5):
        inst = random_instance(rng, 12, 5, p_lifted=0.5)
        a = json.dumps(run(inst).to_dict()).encode()
        b = json.dumps(run(inst).to_dict()).encode()
        differing += a != b
    inst, _ = generate_instance(12, 3, 2, 0.3, 1)
    differing += solve_intervals(inst) != solve_intervals(inst)
    ok = differing == 0
    record(9, "determinism", ok, f"{differing} differing reports of 6")
    assert ok
