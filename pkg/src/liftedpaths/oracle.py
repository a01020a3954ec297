"""Exhaustive solvers used as independent references on tiny inputs."""

from __future__ import annotations

from itertools import product

from .cut_factors import CutFactor
from .flow_factors import FlowFactor, FlowLabeling
from .instance import Instance, S, T
from .path_factors import PathFactor
from .solution import Solution, adjust_lifted

MAX_LDP_NODES = 14
MAX_FLOW_NODES = 10
MAX_BINARY_VARS = 16


class OracleTooLarge(ValueError):
    pass


def exact_ldp(inst: Instance) -> Solution:
    """Global optimum over all sets of node-disjoint S-T paths."""
    if inst.num_nodes > MAX_LDP_NODES:
        raise OracleTooLarge(f"exact_ldp handles at most {MAX_LDP_NODES} nodes, got {inst.num_nodes}")
    order = inst.order
    lifted = {(t, h): c for t, h, c in inst.lifted_edges}
    best_value = [0.0]
    best_paths: list[list[list[int]]] = [[]]
    paths: list[list[int]] = []

    def closing_cost() -> float:
        return sum(inst.base_cost(p[-1], T) for p in paths)

    def visit(i: int, partial: float) -> None:
        if i == len(order):
            total = partial + closing_cost()
            if total < best_value[0] - 1e-12:
                best_value[0] = total
                best_paths[0] = [list(p) for p in paths]
            return
        u = order[i]
        # u unused
        visit(i + 1, partial)
        # u starts a new path
        paths.append([u])
        visit(i + 1, partial + inst.base_cost(S, u) + inst.node_cost[u])
        paths.pop()
        # u extends an open path
        for p in paths:
            if inst.has_base(p[-1], u):
                gain = inst.base_cost(p[-1], u) + inst.node_cost[u]
                gain += sum(lifted.get((x, u), 0.0) for x in p)
                p.append(u)
                visit(i + 1, partial + gain)
                p.pop()

    visit(0, 0.0)
    return adjust_lifted(inst, best_paths[0])


def _far_paths(inst: Instance, start: int, direction: str):
    """All node sequences leaving ``start`` away from it and stopping anywhere."""
    step = inst.succ if direction == "out" else inst.pred
    out = []

    def grow(path):
        out.append(list(path))
        for w in step[path[-1]]:
            path.append(w)
            grow(path)
            path.pop()

    for w in step[start]:
        grow([w])
    return out


def enumerate_flow_factor(factor: FlowFactor, inst: Instance) -> list[tuple[FlowLabeling, float]]:
    """All feasible labelings of a flow factor with their values (full graph, no pruning)."""
    v = factor.center
    far = inst.descendants[v] if factor.direction == "out" else inst.ancestors[v]
    if bin(far).count("1") > MAX_FLOW_NODES:
        raise OracleTooLarge(f"flow factor reaches more than {MAX_FLOW_NODES} nodes")
    labelings = [FlowLabeling(False)]
    end = factor.end
    end_edge = next(e for e, u in factor.base_nbr.items() if u == end)
    labelings.append(FlowLabeling(True, end_edge, frozenset()))
    edge_to = {u: e for e, u in factor.base_nbr.items()}
    for path in _far_paths(inst, v, factor.direction):
        lifted = frozenset(factor.lifted_at[u] for u in path if u in factor.lifted_at)
        labelings.append(FlowLabeling(True, edge_to[path[0]], lifted))
    return [(lab, factor.evaluate(lab)) for lab in labelings]


def _enumerate_binary(factor, keys) -> list[tuple[frozenset, float]]:
    if len(keys) > MAX_BINARY_VARS:
        raise OracleTooLarge(f"more than {MAX_BINARY_VARS} binary variables")
    out = []
    for bits in product((0, 1), repeat=len(keys)):
        active = frozenset(k for k, b in zip(keys, bits) if b)
        if factor.is_feasible(active):
            out.append((active, factor.evaluate(active)))
    return out


def enumerate_path_factor(factor: PathFactor) -> list[tuple[frozenset, float]]:
    return _enumerate_binary(factor, factor.keys())


def enumerate_cut_factor(factor: CutFactor) -> list[tuple[frozenset, float]]:
    return _enumerate_binary(factor, factor.keys())


def enumerate_min(entries, key=None, value: int | None = None) -> float:
    """Minimum value over enumerated labelings, optionally with one variable fixed."""
    vals = []
    for lab, val in entries:
        if key is not None:
            on = lab.value_of(key) if isinstance(lab, FlowLabeling) else int(key in lab)
            if on != value:
                continue
        vals.append(val)
    return min(vals)


def enumerate_disjoint_paths(inst: Instance, arc_cost) -> tuple[float, list[list[int]]]:
    """Cheapest node-disjoint path set under additive costs ``arc_cost(a, b)`` over S/T/inner arcs."""
    if inst.num_nodes > MAX_LDP_NODES:
        raise OracleTooLarge(f"at most {MAX_LDP_NODES} nodes")
    order = inst.order
    best = [0.0, []]
    paths: list[list[int]] = []

    def visit(i, partial):
        if i == len(order):
            total = partial + sum(arc_cost(p[-1], T) for p in paths)
            if total < best[0] - 1e-12:
                best[0], best[1] = total, [list(p) for p in paths]
            return
        u = order[i]
        visit(i + 1, partial)
        paths.append([u])
        visit(i + 1, partial + arc_cost(S, u))
        paths.pop()
        for p in paths:
            if inst.has_base(p[-1], u):
                c = arc_cost(p[-1], u)
                p.append(u)
                visit(i + 1, partial + c)
                p.pop()

    visit(0, 0.0)
    return best[0], best[1]
