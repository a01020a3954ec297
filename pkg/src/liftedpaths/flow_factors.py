"""Inflow and outflow factors of a node.

An outflow factor of ``v`` holds costs for the node ``v``, the base edges
leaving ``v`` and the lifted edges leaving ``v``.  A feasible labeling is
either all zeros or a path ``v -> w1 -> ... -> wk -> T`` in the base graph:
the node and the first base edge are active, and the lifted edge ``v u`` is
active iff ``u`` lies on the path.  The inflow factor is the mirror image
with paths running backwards to ``S``.

Variables are addressed with the global keys ``("node", v)``,
``("base", edge_id)`` and ``("lifted", edge_id)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .instance import Instance, S, T

Key = tuple[str, int]


@dataclass
class FlowFactor:
    center: int
    direction: str  # "out" or "in"
    node_theta: float
    base_theta: dict[int, float]
    lifted_theta: dict[int, float]
    # structure, fixed at construction
    base_nbr: dict[int, int] = field(repr=False)  # base edge -> node at its other end (or S/T)
    lifted_at: dict[int, int] = field(repr=False)  # node -> lifted edge from/to the center
    edge_to: dict[int, int] = field(repr=False)  # node -> base edge between center and node
    dfs_order: tuple[int, ...] = field(repr=False)  # relevant nodes, nearest to the center first
    steps: dict[int, tuple[int, ...]] = field(repr=False)  # moves away from the center
    back: dict[int, tuple[int, ...]] = field(repr=False)  # moves towards the center
    far_mask: dict[int, int] = field(repr=False)  # bitmask of nodes reachable moving away

    @property
    def end(self) -> int:
        return T if self.direction == "out" else S

    def keys(self) -> list[Key]:
        return (
            [("node", self.center)]
            + [("base", e) for e in self.base_theta]
            + [("lifted", e) for e in self.lifted_theta]
        )

    def get(self, key: Key) -> float:
        kind, idx = key
        if kind == "node":
            assert idx == self.center
            return self.node_theta
        if kind == "base":
            return self.base_theta[idx]
        return self.lifted_theta[idx]

    def add(self, key: Key, delta: float) -> None:
        kind, idx = key
        if kind == "node":
            assert idx == self.center
            self.node_theta += delta
        elif kind == "base":
            self.base_theta[idx] += delta
        else:
            self.lifted_theta[idx] += delta

    def lifted_of(self, u: int) -> float:
        e = self.lifted_at.get(u)
        return 0.0 if e is None else self.lifted_theta[e]

    def copy(self) -> "FlowFactor":
        return FlowFactor(
            self.center, self.direction, self.node_theta, dict(self.base_theta),
            dict(self.lifted_theta), self.base_nbr, self.lifted_at, self.edge_to,
            self.dfs_order, self.steps, self.back, self.far_mask,
        )

    def evaluate(self, labeling: "FlowLabeling") -> float:
        if not labeling.active:
            return 0.0
        value = self.node_theta + self.base_theta[labeling.base_edge]
        return value + sum(self.lifted_theta[e] for e in labeling.lifted)


@dataclass(frozen=True)
class FlowLabeling:
    """Active flag, the single active base edge and the active lifted edges."""

    active: bool
    base_edge: int | None = None
    lifted: frozenset[int] = frozenset()

    def value_of(self, key: Key) -> int:
        kind, idx = key
        if kind == "node":
            return int(self.active)
        if kind == "base":
            return int(self.base_edge == idx)
        return int(idx in self.lifted)


@dataclass
class FactorOptResult:
    opt: float
    lifted_cost: dict[int, float]
    alpha: dict[int, float]  # base edge -> optimum with that edge forced active
    next_hop: dict[int, int]  # node -> following node, or the end sentinel
    alpha_target: dict[int, int] = field(repr=False)
    end: int = T


def make_flow_factor(inst: Instance, v: int, direction: str, prune: bool = True) -> FlowFactor:
    """Build a zero-cost flow factor for node ``v``.

    With ``prune`` only nodes that lie on some path from the center to one of
    its lifted neighbours are searched; the others contribute nothing beyond
    the base edge leading to them, so the optimum is unchanged.
    """
    if direction == "out":
        base_ids, lifted_ids = inst.out_base[v], inst.out_lifted[v]
        far, near_of, far_of = inst.descendants, inst.pred, inst.succ
        other = lambda e: inst.base_edges[e][1]
        lifted_other = lambda e: inst.lifted_edges[e][1]
        order_key = lambda u: (inst.frame_of[u], u)
    elif direction == "in":
        base_ids, lifted_ids = inst.in_base[v], inst.in_lifted[v]
        far, near_of, far_of = inst.ancestors, inst.succ, inst.pred
        other = lambda e: inst.base_edges[e][0]
        lifted_other = lambda e: inst.lifted_edges[e][0]
        order_key = lambda u: (-inst.frame_of[u], -u)
    else:
        raise ValueError(f"unknown direction {direction!r}")

    lifted_at = {lifted_other(e): e for e in lifted_ids}
    reach = far[v]
    if prune:
        # far-side nodes that can still reach a lifted neighbour
        toward = inst.ancestors if direction == "out" else inst.descendants
        keep = 0
        for u in lifted_at:
            keep |= toward[u] | (1 << u)
        reach &= keep
    nodes = [u for u in range(inst.num_nodes) if reach >> u & 1]
    nodes.sort(key=order_key)
    inside = set(nodes)
    base_nbr = {e: other(e) for e in base_ids}
    return FlowFactor(
        center=v,
        direction=direction,
        node_theta=0.0,
        base_theta={e: 0.0 for e in base_ids},
        lifted_theta={e: 0.0 for e in lifted_ids},
        base_nbr=base_nbr,
        lifted_at=lifted_at,
        edge_to={u: e for e, u in base_nbr.items() if u not in (S, T)},
        dfs_order=tuple(nodes),
        steps={u: tuple(w for w in far_of[u] if w in inside) for u in nodes},
        back={u: tuple(w for w in near_of[u] if w in inside) for u in nodes},
        far_mask={u: far[u] for u in nodes},
    )


def _lifted_costs(factor: FlowFactor, skip: int | None = None, reuse: dict[int, float] | None = None):
    """Best continuation cost from every relevant node to the end sentinel.

    ``lifted_cost[u]`` is the lifted cost of ``u`` plus the cheapest way to
    continue (0 = leave to the end sentinel).  With ``skip`` the node is
    forbidden; values of nodes that cannot reach it are taken from ``reuse``.
    """
    lc: dict[int, float] = {}
    nxt: dict[int, int] = {}
    end = factor.end
    for u in reversed(factor.dfs_order):
        if u == skip:
            continue
        if reuse is not None and not (factor.far_mask[u] >> skip & 1):
            lc[u] = reuse[u]
            continue
        best, hop = 0.0, end
        for w in factor.steps[u]:
            c = lc.get(w)
            if c is not None and c < best:
                best, hop = c, w
        lc[u] = factor.lifted_of(u) + best
        nxt[u] = hop
    return lc, nxt


def _alpha(factor: FlowFactor, lc: dict[int, float], skip: int | None = None) -> dict[int, float]:
    alpha = {}
    for e, u in factor.base_nbr.items():
        if u == skip:
            continue
        alpha[e] = factor.node_theta + factor.base_theta[e] + lc.get(u, 0.0)
    return alpha


def optimize(factor: FlowFactor) -> FactorOptResult:
    lc, nxt = _lifted_costs(factor)
    alpha = _alpha(factor, lc)
    opt = min([0.0, *alpha.values()])
    return FactorOptResult(opt, lc, alpha, nxt, dict(factor.base_nbr), factor.end)


def factor_opt(factor: FlowFactor) -> float:
    return optimize(factor).opt


def _best_edge(alpha: dict[int, float]) -> int | None:
    if not alpha:
        return None
    return min(alpha, key=lambda e: (alpha[e], e))


def extract_optimal_path(result: FactorOptResult) -> list[int]:
    """Nodes of the optimal path walking away from the center, ending with the sentinel.

    Empty when the all-zero labeling is optimal.
    """
    e = _best_edge(result.alpha)
    if e is None or result.alpha[e] >= 0.0:
        return []
    u = result.alpha_target[e]
    path = []
    while u != result.end:
        path.append(u)
        u = result.next_hop.get(u, result.end)
    path.append(result.end)
    return path


def all_base_min_marginals(factor: FlowFactor) -> dict[int, float]:
    alpha = optimize(factor).alpha
    ranked = sorted(alpha, key=lambda e: (alpha[e], e))
    ref = min(alpha[ranked[1]], 0.0) if len(ranked) > 1 else 0.0
    return {e: alpha[e] - ref for e in alpha}


def all_lifted_min_marginals(factor: FlowFactor) -> dict[int, float]:
    """Sequential exact min-marginals of all lifted edges.

    Each returned value is the min-marginal of its edge in the factor after
    all previously returned values (in dict order) have been subtracted.  The
    factor itself is left untouched.
    """
    if not factor.lifted_theta:
        return {}
    work = factor.copy()
    result = optimize(work)
    opt = result.opt
    on_path = [u for u in extract_optimal_path(result) if u not in (S, T)]
    gamma: dict[int, float] = {}

    # lifted neighbours on the optimal path: compare against the best path avoiding them
    lc = result.lifted_cost
    for u in on_path:
        e = work.lifted_at.get(u)
        if e is None:
            continue
        lc_skip, _ = _lifted_costs(work, skip=u, reuse=lc)
        without = min([0.0, *_alpha(work, lc_skip, skip=u).values()])
        g = opt - without
        work.lifted_theta[e] -= g
        gamma[e] = g
        opt = without
        lc, _ = _lifted_costs(work)

    # remaining lifted neighbours: best path through u = best prefix to u + best continuation
    lc, _ = _lifted_costs(work)
    opt = min([0.0, *_alpha(work, lc).values()])
    through: dict[int, float] = {}
    node_theta = work.node_theta
    for u in work.dfs_order:
        cands = [through[w] for w in work.back[u]]
        e = work.edge_to.get(u)
        if e is not None:
            cands.append(node_theta + work.base_theta[e])
        prefix = min(cands)
        le = work.lifted_at.get(u)
        if le is not None and le not in gamma:
            g = prefix + lc[u] - opt
            work.lifted_theta[le] -= g
            gamma[le] = g
        through[u] = prefix + work.lifted_of(u)

    return gamma


def constrained_opt(factor: FlowFactor, key: Key, value: int) -> float:
    """Optimum with one variable fixed, via a finite cost surcharge."""
    big = 1.0 + abs(factor.node_theta)
    big += sum(abs(x) for x in factor.base_theta.values())
    big += sum(abs(x) for x in factor.lifted_theta.values())
    work = factor.copy()
    if value:
        work.add(key, -big)
        return optimize(work).opt + big
    work.add(key, big)
    return optimize(work).opt


def min_marginal_naive(factor: FlowFactor, key: Key) -> float:
    return constrained_opt(factor, key, 1) - constrained_opt(factor, key, 0)


def labeling_of_path(factor: FlowFactor, path: list[int]) -> FlowLabeling:
    """Labeling induced by a path (as returned by :func:`extract_optimal_path`)."""
    if not path:
        return FlowLabeling(False)
    first = path[0]
    if first == factor.end:
        edge = next(e for e, u in factor.base_nbr.items() if u == factor.end)
    else:
        edge = factor.edge_to[first]
    lifted = frozenset(factor.lifted_at[u] for u in path if u in factor.lifted_at)
    return FlowLabeling(True, edge, lifted)
