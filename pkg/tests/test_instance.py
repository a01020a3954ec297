import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from liftedpaths.instance import (
    Instance, InstanceError, S, T, compute_reachability, compute_strong_edges, dump_instance,
    generate_instance, load_instance, random_instance,
)
from liftedpaths.oracle import exact_ldp


def test_t1_loads(t1):
    assert t1.num_nodes == 2
    assert len(t1.base_edges) == 5
    assert t1.lifted_edges == ()


def test_t2_loads(t2):
    assert t2.num_nodes == 3
    assert len(t2.base_edges) == 8
    assert len(t2.lifted_edges) == 1


def test_missing_terminal_edges_are_zero(t1):
    for v in range(t1.num_nodes):
        assert t1.base_cost(S, v) == 0.0
        assert t1.base_cost(v, T) == 0.0


def test_backward_edge_rejected():
    with pytest.raises(InstanceError, match="backward edge") as info:
        load_instance("nodes 2\nnode 0 2 0\nnode 1 1 0\nbase 0 1 1\n")
    assert info.value.line == 4


def test_duplicate_edge_rejected():
    with pytest.raises(InstanceError, match="duplicate edge"):
        load_instance("nodes 2\nnode 0 1 0\nnode 1 2 0\nbase 0 1 1\nbase 0 1 2\n")


def test_lifted_edge_needs_base_path():
    with pytest.raises(InstanceError):
        load_instance("nodes 2\nnode 0 1 0\nnode 1 2 0\nlifted 0 1 1\n")


def test_parse_error_reports_line():
    with pytest.raises(InstanceError) as info:
        load_instance("nodes 1\nnode 0 1 zero\n")
    assert info.value.line == 2


def test_scientific_notation_and_comments():
    inst = load_instance("# header\nnodes 1\nnode 0 1 -1.5e-1  # trailing\nbase S 0 2E0\n")
    assert inst.node_cost[0] == -0.15
    assert inst.base_cost(S, 0) == 2.0


def test_reachability_t2(t2):
    r = compute_reachability(t2, max_frame_gap=5)
    assert (0, 1) in r and (1, 2) in r and (0, 2) in r
    assert (2, 0) not in r
    assert (0, 2) not in compute_reachability(t2, max_frame_gap=1)


def test_strong_edges_t2(t2):
    strong = compute_strong_edges(t2)
    assert strong.members == {t2.base_index[(0, 1)], t2.base_index[(1, 2)]}


def test_shortcut_is_not_strong(t2):
    base = [e for e in t2.base_edges] + [(0, 2, 0.0)]
    inst = Instance.build(list(t2.frame_of), list(t2.node_cost), base, list(t2.lifted_edges))
    strong = compute_strong_edges(inst).members
    assert inst.base_index[(0, 2)] not in strong
    assert inst.base_index[(0, 1)] in strong


def test_generated_instance_planted_optimum():
    inst, truth = generate_instance(3, 3, 2, 0.1, 7)
    assert sorted(truth) == [[0, 5, 6], [2, 3, 7]]
    assert sorted(map(list, exact_ldp(inst).paths)) == [[0, 5, 6], [2, 3, 7]]


def test_generator_is_deterministic():
    a, _ = generate_instance(5, 3, 2, 0.3, 11)
    b, _ = generate_instance(5, 3, 2, 0.3, 11)
    assert dump_instance(a) == dump_instance(b)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_dump_load_roundtrip(seed):
    inst = random_instance(np.random.default_rng(seed), 7, 4, st_scale=0.5)
    assert load_instance(dump_instance(inst)) == inst


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_reachability_is_transitive(seed):
    inst = random_instance(np.random.default_rng(seed), 8, 4)
    r = compute_reachability(inst, max_frame_gap=10)
    pairs = r.pairs()
    for a, b in pairs:
        for c, d in pairs:
            if b == c:
                assert (a, d) in r
    for v in range(inst.num_nodes):
        assert (v, v) in r


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_instance_invariants(seed):
    inst = random_instance(np.random.default_rng(seed), 9, 4)
    for t, h, _ in inst.base_edges:
        if t != S and h != T:
            assert inst.frame_of[t] < inst.frame_of[h]
    for t, h, _ in inst.lifted_edges:
        assert inst.reaches(t, h)
    for v in range(inst.num_nodes):
        assert inst.has_base(S, v) and inst.has_base(v, T)
    assert len({(t, h) for t, h, _ in inst.base_edges}) == len(inst.base_edges)


def test_subinstance_maps_ids(t2):
    sub, keep = t2.subinstance([1, 2])
    assert keep == [1, 2]
    assert sub.num_nodes == 2
    assert sub.base_cost(0, 1) == 0.5
    assert sub.lifted_edges == ()
