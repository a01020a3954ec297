"""Cut factors: a lifted edge ``uv`` together with a set of base edges cutting ``u`` from ``v``.

Feasible labelings activate the lifted edge only if some cut edge is active,
use every cut-edge endpoint at most once, and activate the lifted edge
whenever the base edge ``uv`` itself belongs to the cut and is active.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .instance import Instance
from .mcf import solve_partial_matching

Key = tuple[str, int]


@dataclass
class CutFactor:
    lifted: int  # lifted edge id of uv
    endpoints: tuple[int, int]
    cut_edges: tuple[int, ...]  # base edge ids
    edge_ends: dict[int, tuple[int, int]] = field(repr=False)
    uv_base: int | None = None  # id of base edge uv if it is a cut edge
    theta: dict[Key, float] = field(default_factory=dict)

    def __post_init__(self):
        for k in self.keys():
            self.theta.setdefault(k, 0.0)

    @property
    def contains_uv_base(self) -> bool:
        return self.uv_base is not None

    def keys(self) -> list[Key]:
        return [("base", e) for e in self.cut_edges] + [("lifted", self.lifted)]

    def get(self, key: Key) -> float:
        return self.theta[key]

    def add(self, key: Key, delta: float) -> None:
        self.theta[key] += delta

    def copy(self) -> "CutFactor":
        return CutFactor(self.lifted, self.endpoints, self.cut_edges, self.edge_ends, self.uv_base, dict(self.theta))

    def canonical_key(self) -> tuple:
        return ("cut", self.lifted, tuple(sorted(self.cut_edges)))

    def evaluate(self, active: frozenset[Key]) -> float:
        return sum(self.theta[k] for k in self.keys() if k in active)

    def is_feasible(self, active: frozenset[Key]) -> bool:
        used = [e for e in self.cut_edges if ("base", e) in active]
        lifted_on = ("lifted", self.lifted) in active
        if lifted_on and not used:
            return False
        tails = Counter(self.edge_ends[e][0] for e in used)
        heads = Counter(self.edge_ends[e][1] for e in used)
        if any(c > 1 for c in tails.values()) or any(c > 1 for c in heads.values()):
            return False
        return not (self.uv_base in used and not lifted_on)


def make_cut_factor(inst: Instance, lifted: int, cut_edges) -> CutFactor:
    u, v, _ = inst.lifted_edges[lifted]
    cut_edges = tuple(sorted(cut_edges))
    ends = {e: inst.base_edges[e][:2] for e in cut_edges}
    tails = {a for a, _ in ends.values()}
    heads = {b for _, b in ends.values()}
    if tails & heads:
        raise ValueError("cut edges must go from one side to the other")
    uv = inst.base_index.get((u, v))
    return CutFactor(lifted, (u, v), cut_edges, ends, uv if uv in ends else None)


def optimize_cut(factor: CutFactor) -> float:
    lifted = factor.theta[("lifted", factor.lifted)]
    psi = {}
    for e in factor.cut_edges:
        cost = factor.theta[("base", e)]
        if e == factor.uv_base and lifted > 0:
            cost += lifted
        psi[factor.edge_ends[e]] = cost
    matching, opt = solve_partial_matching(psi)
    if lifted >= 0:
        return opt
    if matching:
        return opt + lifted
    alpha = min(factor.theta[("base", e)] for e in factor.cut_edges)
    if -lifted > alpha:
        return lifted + alpha
    return opt


def constrained_cut_opt(factor: CutFactor, key: Key, value: int) -> float:
    big = 1.0 + sum(abs(x) for x in factor.theta.values())
    work = factor.copy()
    if value:
        work.theta[key] -= big
        return optimize_cut(work) + big
    work.theta[key] += big
    return optimize_cut(work)


def cut_min_marginal(factor: CutFactor, key: Key) -> float:
    return constrained_cut_opt(factor, key, 1) - constrained_cut_opt(factor, key, 0)
