"""Primal rounding: min-cost flow on dual-informed costs followed by split/merge local search."""

from __future__ import annotations

from dataclasses import dataclass

from .decomposition import Decomposition
from .flow_factors import optimize
from .instance import Instance, S, T
from .mcf import MinCostFlow
from .solution import Solution, adjust_lifted

IMPROVE = 1e-12  # a move must lower the objective by more than this


@dataclass
class McfNetwork:
    """Node-split network; ``cost`` maps each base edge id to its arc cost."""

    inst: Instance
    cost: dict[int, float]


def init_mcf(dec: Decomposition) -> McfNetwork:
    """Arc costs from the constrained optima of the flow factors at both arc ends."""
    inst = dec.inst
    alpha_out = [optimize(f).alpha for f in dec.outflow]
    alpha_in = [optimize(f).alpha for f in dec.inflow]
    cost = {}
    for e, (t, h, _) in enumerate(inst.base_edges):
        if t == S:
            cost[e] = alpha_in[h][e]
        elif h == T:
            cost[e] = alpha_out[t][e]
        else:
            cost[e] = alpha_out[t][e] + alpha_in[h][e]
    return McfNetwork(inst, cost)


def original_network(inst: Instance) -> McfNetwork:
    """Network whose path costs equal the objective when lifted costs are ignored."""
    cost = {}
    for e, (t, h, c) in enumerate(inst.base_edges):
        cost[e] = c + (inst.node_cost[h] if h != T else 0.0)
    return McfNetwork(inst, cost)


def solve_mcf(net: McfNetwork) -> list[list[int]]:
    """Cheapest set of node-disjoint S-T paths (flow value free)."""
    inst = net.inst
    n = inst.num_nodes
    src, snk = 2 * n, 2 * n + 1
    mcf = MinCostFlow(2 * n + 2)
    for v in range(n):
        mcf.add_arc(2 * v, 2 * v + 1, 1, 0.0)
    arcs = {}
    for e, (t, h, _) in enumerate(inst.base_edges):
        a = src if t == S else 2 * t + 1
        b = snk if h == T else 2 * h
        arcs[e] = mcf.add_arc(a, b, 1, net.cost[e])
    mcf.run(src, snk)
    nxt = {}
    starts = []
    for e, arc in arcs.items():
        if mcf.flow(arc) > 0:
            t, h, _ = inst.base_edges[e]
            if t == S:
                starts.append(h)
            else:
                nxt[t] = h
    paths = []
    for v in sorted(starts, key=lambda u: (inst.frame_of[u], u)):
        path = [v]
        while nxt[path[-1]] != T:
            path.append(nxt[path[-1]])
        paths.append(path)
    return paths


def mcf_cost(net: McfNetwork, paths) -> float:
    total = 0.0
    for p in paths:
        chain = [S, *p, T]
        total += sum(net.cost[net.inst.base_index[(a, b)]] for a, b in zip(chain, chain[1:]))
    return total


# --- local search ---------------------------------------------------------


class _Costs:
    def __init__(self, inst: Instance):
        self.inst = inst
        self.lifted = {(t, h): c for t, h, c in inst.lifted_edges}

    def base(self, a: int, b: int) -> float | None:
        e = self.inst.base_index.get((a, b))
        return None if e is None else self.inst.base_edges[e][2]

    def split(self, path, j: int) -> float:
        """Objective change when cutting ``path`` between positions j and j+1."""
        head, tail = path[: j + 1], path[j + 1 :]
        crossing = sum(self.lifted.get((a, b), 0.0) for a in head for b in tail)
        return (
            -crossing
            - self.base(path[j], path[j + 1])
            + self.base(S, path[j + 1])
            + self.base(path[j], T)
        )

    def lifted_between(self, p1, p2) -> tuple[float, float]:
        pos = neg = 0.0
        for a in p1:
            for b in p2:
                c = self.lifted.get((a, b))
                if c is None:
                    continue
                if c >= 0:
                    pos += c
                else:
                    neg += c
        return pos, neg

    def merge(self, p1, p2, tau: float | None = None) -> float | None:
        """Objective change of appending p2 to p1; None if not allowed."""
        bridge = self.base(p1[-1], p2[0])
        if bridge is None:
            return None
        pos, neg = self.lifted_between(p1, p2)
        if tau is not None and pos > tau * abs(neg):
            return None
        return bridge + pos + neg - self.base(p1[-1], T) - self.base(S, p2[0])


def _split_recursive(costs: _Costs, path: list[int]) -> list[list[int]]:
    if len(path) < 2:
        return [path]
    deltas = [costs.split(path, j) for j in range(len(path) - 1)]
    j = min(range(len(deltas)), key=lambda i: (deltas[i], i))
    if deltas[j] >= -IMPROVE:
        return [path]
    return _split_recursive(costs, path[: j + 1]) + _split_recursive(costs, path[j + 1 :])


def _cut_ends(costs: _Costs, p1, p2, budget: int):
    """Best way to drop up to ``budget`` end nodes so that p1's rest can be joined to p2's rest.

    Returns (delta, i1, i2) for the best strictly improving choice, or None.
    """
    best = None
    for i1 in range(0, min(budget, len(p1) - 1) + 1):
        for i2 in range(0, min(budget - i1, len(p2) - 1) + 1):
            if i1 == 0 and i2 == 0:
                continue
            a, b = p1[: len(p1) - i1], p2[i2:]
            m = costs.merge(a, b)
            if m is None:
                continue
            delta = m
            if i1:
                delta += costs.split(p1, len(p1) - i1 - 1)
            if i2:
                delta += costs.split(p2, i2 - 1)
            if delta < -IMPROVE and (best is None or delta < best[0]):
                best = (delta, i1, i2)
    return best


def _shorten_for_merge(costs: _Costs, paths: list[list[int]], budget: int) -> list[list[int]]:
    if budget <= 0:
        return paths
    partner: dict[int, tuple[float, int]] = {}
    for i, p1 in enumerate(paths):
        best_edge = best_free = None
        for j, p2 in enumerate(paths):
            if i == j:
                continue
            m = costs.merge(p1, p2)
            if m is not None:
                if best_edge is None or m < best_edge[0]:
                    best_edge = (m, j)
            else:
                pos, neg = costs.lifted_between(p1, p2)
                if best_free is None or pos + neg < best_free[0]:
                    best_free = (pos + neg, j)
        if best_free is not None and best_free[0] < 0 and (best_edge is None or best_free[0] < best_edge[0]):
            choice = best_free
        else:
            choice = best_edge
        if choice is None:
            continue
        c, j = choice
        if j not in partner or partner[j][0] > c:
            partner[j] = (c, i)
    # paths touched by an earlier cut in this round are left alone
    touched: set[int] = set()
    replaced: dict[int, list[list[int]]] = {}
    for j in sorted(partner):
        i = partner[j][1]
        if i in touched or j in touched or costs.base(paths[i][-1], paths[j][0]) is not None:
            continue
        found = _cut_ends(costs, paths[i], paths[j], budget)
        if found is None:
            continue
        _, i1, i2 = found
        p1, p2 = paths[i], paths[j]
        replaced[i] = [p1[: len(p1) - i1] + p2[i2:]] + ([p1[len(p1) - i1 :]] if i1 else [])
        replaced[j] = [p2[:i2]] if i2 else []
        touched.update((i, j))
    out = []
    for k, p in enumerate(paths):
        out += replaced.get(k, [p])
    return out


def local_search(inst: Instance, sol: Solution, tau: float = 0.5, cut_ends_budget: int = 5) -> Solution:
    """Improve a solution by splitting paths, trimming path ends and merging paths.

    Every applied move strictly lowers the objective under the original costs.
    """
    costs = _Costs(inst)
    paths: list[list[int]] = []
    for p in sol.paths:
        paths += _split_recursive(costs, list(p))
    paths = _shorten_for_merge(costs, paths, cut_ends_budget)
    while True:
        best = None
        for i, p1 in enumerate(paths):
            for j, p2 in enumerate(paths):
                if i == j:
                    continue
                m = costs.merge(p1, p2, tau)
                if m is not None and (best is None or m < best[0]):
                    best = (m, i, j)
        if best is None or best[0] >= -IMPROVE:
            break
        _, i, j = best
        merged = paths[i] + paths[j]
        paths = [p for k, p in enumerate(paths) if k not in (i, j)] + [merged]
    result = adjust_lifted(inst, paths)
    if result.objective > sol.objective:
        # rounding noise in the move deltas; keep the input
        return sol
    return result


class _PathCost:
    """Objective contribution of single paths under the original costs, memoized."""

    def __init__(self, inst: Instance):
        self.inst = inst
        self.lifted = {(t, h): c for t, h, c in inst.lifted_edges}
        self.memo: dict[tuple[int, ...], float] = {}

    def __call__(self, path: tuple[int, ...]) -> float | None:
        if not path:
            return 0.0
        if path in self.memo:
            return self.memo[path]
        inst = self.inst
        chain = (S, *path, T)
        total = 0.0
        for a, b in zip(chain, chain[1:]):
            e = inst.base_index.get((a, b))
            if e is None:
                self.memo[path] = None
                return None
            total += inst.base_edges[e][2]
        total += sum(inst.node_cost[v] for v in path)
        for i, a in enumerate(path):
            for b in path[i + 1 :]:
                total += self.lifted.get((a, b), 0.0)
        self.memo[path] = total
        return total


def _moves(inst: Instance, paths: list[tuple[int, ...]], unused: list[int]):
    """Neighbouring path sets as (indices of replaced paths, replacement paths).

    Only moves whose new paths use existing base edges are generated.
    """

    def linked(p, i, q, j):
        # can p[:i] be followed by q[j:]?
        return i == 0 or j == len(q) or (p[i - 1], q[j]) in inst.base_index

    k = len(paths)
    for a in range(k):
        pa = paths[a]
        for i in range(1, len(pa)):
            yield (a,), (pa[:i], pa[i:])  # split
        for i in range(len(pa)):
            if linked(pa, i, pa, i + 1):
                yield (a,), (pa[:i] + pa[i + 1 :],)  # drop a node
        for b in range(a + 1, k):
            pb = paths[b]
            for i in range(len(pa) + 1):
                for j in range(len(pb) + 1):
                    if (i, j) in ((0, 0), (len(pa), len(pb))):
                        continue
                    if linked(pa, i, pb, j) and linked(pb, j, pa, i):
                        yield (a, b), (pa[:i] + pb[j:], pb[:j] + pa[i:])  # exchange tails
    for u in unused:
        yield (), ((u,),)
    # insert a free node, or relocate a node from another path
    movable = [(u, None, None) for u in unused]
    for b in range(k):
        pb = paths[b]
        for j in range(len(pb)):
            if linked(pb, j, pb, j + 1):
                movable.append((pb[j], b, pb[:j] + pb[j + 1 :]))
    for u, b, rest in movable:
        single = (u,)
        for a in range(k):
            if a == b:
                continue
            pa = paths[a]
            for i in range(len(pa) + 1):
                if linked(pa, i, single, 0) and linked(single, 1, pa, i):
                    new = pa[:i] + single + pa[i:]
                    yield ((a,), (new,)) if b is None else ((a, b), (new, rest))


def refine(inst: Instance, sol: Solution, max_rounds: int = 50) -> Solution:
    """Best-improvement search over node moves and tail exchanges.

    Each round applies the single move that lowers the objective most; the
    search stops when no move improves or after ``max_rounds`` rounds.
    """
    cost = _PathCost(inst)
    paths = [tuple(p) for p in sol.paths]
    for _ in range(max_rounds):
        used = {v for p in paths for v in p}
        unused = [v for v in range(inst.num_nodes) if v not in used]
        best = None
        for old, new in _moves(inst, paths, unused):
            new_costs = [cost(p) for p in new]
            if any(c is None for c in new_costs):
                continue
            delta = sum(new_costs) - sum(cost(paths[i]) for i in old)
            if delta < -IMPROVE and (best is None or delta < best[0]):
                best = (delta, old, new)
        if best is None:
            break
        _, old, new = best
        paths = [p for i, p in enumerate(paths) if i not in old] + [p for p in new if p]
    result = adjust_lifted(inst, paths)
    return result if result.objective <= sol.objective else sol


def candidate_networks(dec: Decomposition, tie_break: float = 1e-3) -> list[McfNetwork]:
    """Dual-informed arc costs, the same with original costs as tie-breaker, and original costs."""
    net = init_mcf(dec)
    plain = original_network(dec.inst)
    nudged = McfNetwork(dec.inst, {e: c + tie_break * plain.cost[e] for e, c in net.cost.items()})
    return [net, nudged, plain]


def compute_primal(
    dec: Decomposition, tau: float = 0.5, cut_ends_budget: int = 5, refine_rounds: int = 50
) -> Solution:
    """Round every candidate network and keep the best locally improved solution."""
    best = None
    for net in candidate_networks(dec):
        sol = adjust_lifted(dec.inst, solve_mcf(net))
        sol = local_search(dec.inst, sol, tau, cut_ends_budget)
        if refine_rounds > 0:
            sol = refine(dec.inst, sol, refine_rounds)
        if best is None or sol.objective < best.objective:
            best = sol
    return best
