"""Successive-shortest-path min-cost flow with a free flow value."""

from __future__ import annotations

import heapq
import math

INF = math.inf


class MinCostFlow:
    """Residual network; ``run`` augments along shortest paths while they are negative."""

    def __init__(self, num_nodes: int):
        self.n = num_nodes
        self.adj: list[list[int]] = [[] for _ in range(num_nodes)]
        self.to: list[int] = []
        self.cap: list[int] = []
        self.cost: list[float] = []

    def add_arc(self, u: int, v: int, cap: int, cost: float) -> int:
        """Add arc u->v; returns its id (the reverse arc is ``id ^ 1``)."""
        arc = len(self.to)
        self.to += [v, u]
        self.cap += [cap, 0]
        self.cost += [cost, -cost]
        self.adj[u].append(arc)
        self.adj[v].append(arc + 1)
        return arc

    def flow(self, arc: int) -> int:
        return self.cap[arc ^ 1]

    def _initial_potentials(self, s: int) -> list[float]:
        # label-correcting pass; arc costs may be negative but the initial residual graph is acyclic
        dist = [INF] * self.n
        dist[s] = 0.0
        queue = [s]
        queued = [False] * self.n
        queued[s] = True
        head = 0
        while head < len(queue):
            u = queue[head]
            head += 1
            queued[u] = False
            for a in self.adj[u]:
                if self.cap[a] > 0:
                    v = self.to[a]
                    nd = dist[u] + self.cost[a]
                    if nd < dist[v]:
                        dist[v] = nd
                        if not queued[v]:
                            queued[v] = True
                            queue.append(v)
        return dist

    def run(self, s: int, t: int, max_flow: int | None = None, eps: float = 1e-12) -> tuple[int, float]:
        """Send flow from s to t while the cheapest augmenting path has cost < -eps.

        Returns (flow value, total cost).
        """
        pot = self._initial_potentials(s)
        total_flow, total_cost = 0, 0.0
        while max_flow is None or total_flow < max_flow:
            if pot[t] == INF:
                break
            dist = [INF] * self.n
            parent = [-1] * self.n
            dist[s] = 0.0
            heap = [(0.0, s)]
            while heap:
                d, u = heapq.heappop(heap)
                if d > dist[u]:
                    continue
                pu = pot[u]
                for a in self.adj[u]:
                    if self.cap[a] <= 0:
                        continue
                    v = self.to[a]
                    if pot[v] == INF:
                        continue
                    nd = d + max(0.0, self.cost[a] + pu - pot[v])
                    if nd < dist[v]:
                        dist[v] = nd
                        parent[v] = a
                        heapq.heappush(heap, (nd, v))
            if dist[t] == INF:
                break
            # exact cost of the path from the arc costs, not the potentials
            path_cost = 0.0
            bottleneck = max_flow - total_flow if max_flow is not None else None
            v = t
            while v != s:
                a = parent[v]
                path_cost += self.cost[a]
                bottleneck = self.cap[a] if bottleneck is None else min(bottleneck, self.cap[a])
                v = self.to[a ^ 1]
            if path_cost >= -eps:
                break
            v = t
            while v != s:
                a = parent[v]
                self.cap[a] -= bottleneck
                self.cap[a ^ 1] += bottleneck
                v = self.to[a ^ 1]
            total_flow += bottleneck
            total_cost += bottleneck * path_cost
            for u in range(self.n):
                if dist[u] < INF:
                    pot[u] += dist[u]
                else:
                    pot[u] = INF
        return total_flow, total_cost


def solve_partial_matching(costs: dict[tuple[int, int], float]) -> tuple[set[tuple[int, int]], float]:
    """Minimum-cost matching where every node may stay unmatched.

    ``costs`` maps (left, right) pairs to the cost of matching them; pairs
    absent from the map cannot be matched.
    """
    left = sorted({a for a, _ in costs})
    right = sorted({b for _, b in costs})
    li = {a: i for i, a in enumerate(left)}
    ri = {b: len(left) + i for i, b in enumerate(right)}
    s = len(left) + len(right)
    t = s + 1
    net = MinCostFlow(t + 1)
    for a in left:
        net.add_arc(s, li[a], 1, 0.0)
    for b in right:
        net.add_arc(ri[b], t, 1, 0.0)
    arcs = {pair: net.add_arc(li[pair[0]], ri[pair[1]], 1, c) for pair, c in sorted(costs.items())}
    net.run(s, t)
    matching = {pair for pair, a in arcs.items() if net.flow(a) > 0}
    return matching, sum(costs[p] for p in matching)
