"""Primal solutions: node-disjoint paths with derived edge and node indicators."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .instance import Instance, S, T


@dataclass(frozen=True)
class Solution:
    paths: tuple[tuple[int, ...], ...]
    y: frozenset[int]  # active base edges, including S- and T-edges
    y_lifted: frozenset[int]
    z: frozenset[int]
    objective: float

    def format(self) -> str:
        lines = [f"objective {self.objective!r}"]
        lines += [" ".join(map(str, p)) for p in self.paths]
        return "\n".join(lines) + "\n"


def adjust_lifted(inst: Instance, paths) -> Solution:
    """Complete a set of disjoint paths into a full labeling scored with the original costs.

    A lifted edge is active iff both endpoints lie on the same path with the
    tail first.  Paths are stored sorted by their first node.
    """
    paths = [tuple(p) for p in paths if len(p) > 0]
    paths.sort(key=lambda p: (inst.frame_of[p[0]], p[0]))
    y, y_lifted, z = set(), set(), set()
    for p in paths:
        chain = [S, *p, T]
        for a, b in zip(chain, chain[1:]):
            e = inst.base_index.get((a, b))
            if e is None:
                raise ValueError(f"path {list(p)} uses missing base edge {a}->{b}")
            y.add(e)
        z.update(p)
        pos = {v: i for i, v in enumerate(p)}
        for u in p:
            for e in inst.out_lifted[u]:
                w = inst.lifted_edges[e][1]
                if w in pos and pos[w] > pos[u]:
                    y_lifted.add(e)
    if len(z) != sum(len(p) for p in paths):
        raise ValueError("paths are not node-disjoint")
    objective = math.fsum(
        [inst.base_edges[e][2] for e in sorted(y)]
        + [inst.lifted_edges[e][2] for e in sorted(y_lifted)]
        + [inst.node_cost[v] for v in sorted(z)]
    )
    return Solution(tuple(paths), frozenset(y), frozenset(y_lifted), frozenset(z), objective)


def empty_solution(inst: Instance) -> Solution:
    return adjust_lifted(inst, [])


def check_solution(inst: Instance, sol: Solution, tol: float = 1e-9) -> list[str]:
    """List of violated invariants (empty when the solution is valid)."""
    problems = []
    seen: set[int] = set()
    for p in sol.paths:
        for v in p:
            if v in seen:
                problems.append(f"node {v} used twice")
            seen.add(v)
    try:
        ref = adjust_lifted(inst, sol.paths)
    except ValueError as exc:
        return problems + [str(exc)]
    if ref.y != sol.y:
        problems.append("base indicators differ from the path arcs")
    if ref.y_lifted != sol.y_lifted:
        problems.append("lifted indicators inconsistent with the paths")
    if ref.z != sol.z:
        problems.append("node indicators differ from the path nodes")
    if abs(ref.objective - sol.objective) > tol:
        problems.append(f"stored objective {sol.objective} != recomputed {ref.objective}")
    return problems
