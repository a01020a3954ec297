import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import random_paths
from liftedpaths.decomposition import initialize
from liftedpaths.instance import Instance, S, T, random_instance
from liftedpaths.message_passing import iterate
from liftedpaths.oracle import enumerate_disjoint_paths
from liftedpaths.primal import (
    _Costs, compute_primal, init_mcf, local_search, mcf_cost, original_network, refine, solve_mcf,
)
from liftedpaths.solution import adjust_lifted, check_solution, empty_solution


def test_t2_dual_arc_cost(t2):
    net = init_mcf(initialize(t2))
    assert net.cost[t2.base_index[(0, 1)]] == pytest.approx(-1.5)


def test_zero_instance_dual_costs():
    inst = Instance.build([1, 2], [0.0, 0.0], [(0, 1, 0.0)], [])
    assert all(c == 0.0 for c in init_mcf(initialize(inst)).cost.values())


def test_pure_flow_dual_costs_are_additive():
    inst = Instance.build([1, 2], [0.4, -0.2], [(0, 1, 1.5), (S, 0, 0.1), (1, T, 0.3)], [])
    net = init_mcf(initialize(inst))
    assert net.cost[inst.base_index[(0, 1)]] == pytest.approx(1.5 + 0.2 - 0.1)
    assert net.cost[inst.base_index[(S, 0)]] == pytest.approx(0.1 + 0.2)
    assert net.cost[inst.base_index[(1, T)]] == pytest.approx(0.3 - 0.1)


def test_t1_flow(t1):
    assert solve_mcf(original_network(t1)) == [[0, 1]]


def test_nonnegative_network_has_no_flow(t2):
    net = original_network(t2)
    net.cost = {e: abs(c) + 0.1 for e, c in net.cost.items()}
    assert solve_mcf(net) == []


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000))
def test_flow_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, 8, 4, st_scale=0.5)
    dec = initialize(inst)
    iterate(dec)
    net = init_mcf(dec)
    paths = solve_mcf(net)
    expected, _ = enumerate_disjoint_paths(inst, lambda a, b: net.cost[inst.base_index[(a, b)]])
    assert mcf_cost(net, paths) == pytest.approx(expected, abs=1e-9)


def test_adjust_lifted_t2(t2):
    sol = adjust_lifted(t2, [[0, 1, 2]])
    assert sol.y_lifted == {0}
    assert sol.objective == pytest.approx(-1.5)


def test_empty_solution(t2):
    sol = empty_solution(t2)
    assert sol.paths == () and sol.objective == 0.0 and not sol.y and not sol.z


def test_single_node_paths_have_no_lifted(t2):
    assert adjust_lifted(t2, [[0], [2]]).y_lifted == frozenset()


def test_split_removes_expensive_lifted_edge():
    inst = Instance.build([1, 2, 3], [0.0] * 3, [(0, 1, -1.0), (1, 2, -2.0)], [(0, 2, 5.0)])
    costs = _Costs(inst)
    assert [costs.split([0, 1, 2], j) for j in range(2)] == pytest.approx([-4.0, -3.0])
    sol = local_search(inst, adjust_lifted(inst, [[0, 1, 2]]))
    assert sol.paths == ((0,), (1, 2))
    assert sol.objective == pytest.approx(-2.0)


def test_locally_optimal_solution_is_unchanged(t2):
    sol = adjust_lifted(t2, [[0, 1, 2]])
    assert local_search(t2, sol) == sol


def test_merge_over_cheap_bridge():
    inst = Instance.build([1, 2], [0.0, 0.0], [(0, 1, -1.0)], [])
    sol = local_search(inst, adjust_lifted(inst, [[0], [1]]))
    assert sol.paths == ((0, 1),)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000))
def test_local_search_never_worsens(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, 10, 5, p_lifted=0.5, st_scale=0.3)
    sol = adjust_lifted(inst, random_paths(inst, rng))
    out = local_search(inst, sol)
    assert out.objective <= sol.objective + 1e-12
    assert check_solution(inst, out) == []


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_refine_never_worsens(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, 10, 5, p_lifted=0.5, st_scale=0.3)
    sol = adjust_lifted(inst, random_paths(inst, rng))
    out = refine(inst, sol)
    assert out.objective <= sol.objective + 1e-12
    assert check_solution(inst, out) == []


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 100_000))
def test_compute_primal_is_valid(seed):
    inst = random_instance(np.random.default_rng(seed), 9, 4, p_lifted=0.5)
    dec = initialize(inst)
    iterate(dec)
    sol = compute_primal(dec)
    assert check_solution(inst, sol) == []
