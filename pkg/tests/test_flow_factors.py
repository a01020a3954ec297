import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import random_flow_factor
from liftedpaths.decomposition import initialize
from liftedpaths.flow_factors import (
    all_base_min_marginals, all_lifted_min_marginals, constrained_opt, extract_optimal_path,
    labeling_of_path, make_flow_factor, min_marginal_naive, optimize,
)
from liftedpaths.instance import Instance, S, T
from liftedpaths.oracle import enumerate_flow_factor, enumerate_min


def fan_instance(costs):
    """Node 0 with base edges to nodes 1..k of the given costs."""
    k = len(costs)
    base = [(0, i + 1, c) for i, c in enumerate(costs)]
    return Instance.build([1] + [2] * k, [0.0] * (k + 1), base)


def test_t2_outflow_of_a(t2):
    f = initialize(t2).outflow[0]
    ab, at = t2.base_index[(0, 1)], t2.base_index[(0, T)]
    assert f.node_theta == 0.0 and f.base_theta[ab] == -0.5 and f.base_theta[at] == 0.0
    assert f.lifted_theta == {0: -0.5}
    res = optimize(f)
    assert res.opt == pytest.approx(-1.0)
    assert res.alpha[ab] == pytest.approx(-1.0)
    assert res.alpha[at] == 0.0
    assert res.next_hop[1] == 2
    assert extract_optimal_path(res) == [1, 2, T]


def test_t2_lifted_min_marginal(t2):
    f = initialize(t2).outflow[0]
    assert all_lifted_min_marginals(f) == pytest.approx({0: -0.5})
    assert min_marginal_naive(f, ("lifted", 0)) == pytest.approx(-0.5)


def test_nonnegative_factor_is_inactive(t2):
    f = make_flow_factor(t2, 0, "out")
    for e in f.base_theta:
        f.base_theta[e] = 1.0
    res = optimize(f)
    assert res.opt == 0.0
    assert extract_optimal_path(res) == []


def test_single_terminal_edge():
    inst = Instance.build([1], [0.0], [(0, T, -1.0)])
    f = make_flow_factor(inst, 0, "out")
    f.base_theta[inst.base_index[(0, T)]] = -1.0
    res = optimize(f)
    assert res.opt == -1.0
    assert extract_optimal_path(res) == [T]


def test_base_min_marginals_use_second_best_reference():
    inst = fan_instance([-1.0, -2.0])
    f = make_flow_factor(inst, 0, "out")
    for e, (_, h, c) in enumerate(inst.base_edges):
        if e in f.base_theta:
            f.base_theta[e] = c
    g = all_base_min_marginals(f)
    e1, e2, et = inst.base_index[(0, 1)], inst.base_index[(0, 2)], inst.base_index[(0, T)]
    assert g == pytest.approx({e1: 0.0, e2: -1.0, et: 1.0})


def test_base_min_marginals_without_competitor():
    inst = fan_instance([-3.0])
    f = make_flow_factor(inst, 0, "out")
    e = inst.base_index[(0, 1)]
    f.base_theta[e] = -3.0
    assert all_base_min_marginals(f) == pytest.approx({e: -3.0, inst.base_index[(0, T)]: 0.0})


def test_base_min_marginals_all_positive():
    inst = fan_instance([2.0, 3.0])
    f = make_flow_factor(inst, 0, "out")
    for e in f.base_theta:
        f.base_theta[e] = inst.base_edges[e][2] + 1.0
    res = optimize(f)
    assert all_base_min_marginals(f) == pytest.approx(res.alpha)


def test_no_lifted_edges_gives_empty_map():
    inst = fan_instance([-1.0])
    assert all_lifted_min_marginals(make_flow_factor(inst, 0, "out")) == {}


def test_zero_factor_min_marginals_vanish(t2):
    f = make_flow_factor(t2, 0, "out")
    for k in f.keys():
        assert min_marginal_naive(f, k) == 0.0


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 100_000))
def test_optimize_matches_enumeration(seed):
    inst, f = random_flow_factor(np.random.default_rng(seed))
    entries = enumerate_flow_factor(f, inst)
    res = optimize(f)
    assert res.opt == pytest.approx(enumerate_min(entries), abs=1e-9)
    # the extracted path attains the optimum
    assert f.evaluate(labeling_of_path(f, extract_optimal_path(res))) == pytest.approx(res.opt, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 100_000))
def test_constrained_optimum_matches_enumeration(seed):
    inst, f = random_flow_factor(np.random.default_rng(seed))
    entries = enumerate_flow_factor(f, inst)
    for key in f.keys():
        for value in (0, 1):
            assert constrained_opt(f, key, value) == pytest.approx(enumerate_min(entries, key, value), abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 100_000))
def test_lifted_min_marginals_are_sequential_exact(seed):
    _, f = random_flow_factor(np.random.default_rng(seed))
    gamma = all_lifted_min_marginals(f)
    assert set(gamma) == set(f.lifted_theta)
    work = f.copy()
    for e, g in gamma.items():
        assert g == pytest.approx(min_marginal_naive(work, ("lifted", e)), abs=1e-9)
        work.lifted_theta[e] -= g


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 100_000))
def test_pruning_keeps_optimum_and_alpha(seed):
    rng = np.random.default_rng(seed)
    inst, f = random_flow_factor(rng)
    g = make_flow_factor(inst, f.center, f.direction, prune=False)
    g.node_theta, g.base_theta, g.lifted_theta = f.node_theta, dict(f.base_theta), dict(f.lifted_theta)
    a, b = optimize(f), optimize(g)
    assert a.opt == pytest.approx(b.opt, abs=1e-12)
    assert a.alpha == pytest.approx(b.alpha, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000))
def test_base_min_marginal_subtraction_levels_all_edges(seed):
    """After subtracting, every base edge has the same constrained optimum, min(second best, 0)."""
    _, f = random_flow_factor(np.random.default_rng(seed))
    alpha = sorted(optimize(f).alpha.values())
    ref = min(alpha[1], 0.0) if len(alpha) > 1 else 0.0
    work = f.copy()
    for e, g in all_base_min_marginals(f).items():
        work.base_theta[e] -= g
    after = optimize(work)
    assert all(a == pytest.approx(ref, abs=1e-9) for a in after.alpha.values())
    assert after.opt == pytest.approx(ref, abs=1e-9)


def test_structure_sides(t2):
    out = make_flow_factor(t2, 1, "out")
    inn = make_flow_factor(t2, 1, "in")
    for e in out.base_theta:
        assert t2.base_edges[e][0] == 1
    for e in inn.base_theta:
        assert t2.base_edges[e][1] == 1
    assert inn.end == S and out.end == T
