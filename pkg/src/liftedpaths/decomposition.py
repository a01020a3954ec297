"""Lagrange decomposition: factor set, cost shares and the dual lower bound.

Factors are addressed by labels ``("in", v)``, ``("out", v)``, ``("path", i)``
and ``("cut", i)``.  Every original variable (``("node", v)``,
``("base", e)``, ``("lifted", e)``) has its cost split over the factors
containing it; the shares always sum to the original cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .cut_factors import CutFactor, optimize_cut
from .flow_factors import FlowFactor, factor_opt, make_flow_factor
from .instance import Instance, S, T
from .path_factors import PathFactor, optimize_path

Key = tuple[str, int]
Label = tuple[str, int]


@dataclass
class DualReport:
    lower_bound: float
    per_factor: dict[Label, float]


@dataclass
class Decomposition:
    inst: Instance
    inflow: list[FlowFactor]
    outflow: list[FlowFactor]
    paths: list[PathFactor] = field(default_factory=list)
    cuts: list[CutFactor] = field(default_factory=list)
    # variable -> labels of path and cut factors containing it, in creation order
    attached: dict[Key, list[Label]] = field(default_factory=dict)
    registry: set = field(default_factory=set)
    created: list[Label] = field(default_factory=list)  # path and cut labels in creation order

    def factor(self, label: Label):
        kind, i = label
        if kind == "in":
            return self.inflow[i]
        if kind == "out":
            return self.outflow[i]
        if kind == "path":
            return self.paths[i]
        return self.cuts[i]

    def flow_sites(self, key: Key) -> list[Label]:
        """Flow factors holding a share of ``key``."""
        kind, i = key
        if kind == "node":
            return [("in", i), ("out", i)]
        t, h, _ = (self.inst.base_edges if kind == "base" else self.inst.lifted_edges)[i]
        sites = []
        if t != S:
            sites.append(("out", t))
        if h != T:
            sites.append(("in", h))
        return sites

    def sites(self, key: Key) -> list[Label]:
        return self.flow_sites(key) + self.attached.get(key, [])

    def labels(self) -> list[Label]:
        order = self.inst.order
        out = []
        for v in order:
            out += [("in", v), ("out", v)]
        out += [("path", i) for i in range(len(self.paths))]
        out += [("cut", i) for i in range(len(self.cuts))]
        return out

    def add_factor(self, factor) -> Label | None:
        """Register a new path or cut factor; returns None for duplicates."""
        key = factor.canonical_key()
        if key in self.registry:
            return None
        self.registry.add(key)
        if isinstance(factor, PathFactor):
            self.paths.append(factor)
            label = ("path", len(self.paths) - 1)
        else:
            self.cuts.append(factor)
            label = ("cut", len(self.cuts) - 1)
        self.created.append(label)
        for k in factor.keys():
            self.attached.setdefault(k, []).append(label)
        return label

    def original_cost(self, key: Key) -> float:
        kind, i = key
        if kind == "node":
            return self.inst.node_cost[i]
        if kind == "base":
            return self.inst.base_edges[i][2]
        return self.inst.lifted_edges[i][2]

    def all_keys(self) -> list[Key]:
        inst = self.inst
        return (
            [("node", v) for v in range(inst.num_nodes)]
            + [("base", e) for e in range(len(inst.base_edges))]
            + [("lifted", e) for e in range(len(inst.lifted_edges))]
        )

    @property
    def num_factors(self) -> int:
        return 2 * self.inst.num_nodes + len(self.paths) + len(self.cuts)


def initialize(inst: Instance, prune: bool = True) -> Decomposition:
    """Flow factors for all nodes with costs split evenly between in- and outflow.

    S-edges are held entirely by the inflow factor of their head and T-edges
    by the outflow factor of their tail.
    """
    inflow = [make_flow_factor(inst, v, "in", prune) for v in range(inst.num_nodes)]
    outflow = [make_flow_factor(inst, v, "out", prune) for v in range(inst.num_nodes)]
    for v in range(inst.num_nodes):
        inflow[v].node_theta = 0.5 * inst.node_cost[v]
        outflow[v].node_theta = 0.5 * inst.node_cost[v]
    for e, (t, h, c) in enumerate(inst.base_edges):
        if t == S:
            inflow[h].base_theta[e] = c
        elif h == T:
            outflow[t].base_theta[e] = c
        else:
            outflow[t].base_theta[e] = 0.5 * c
            inflow[h].base_theta[e] = 0.5 * c
    for e, (t, h, c) in enumerate(inst.lifted_edges):
        outflow[t].lifted_theta[e] = 0.5 * c
        inflow[h].lifted_theta[e] = 0.5 * c
    return Decomposition(inst, inflow, outflow)


def factor_value(dec: Decomposition, label: Label) -> float:
    f = dec.factor(label)
    if label[0] in ("in", "out"):
        return factor_opt(f)
    if label[0] == "path":
        return optimize_path(f)
    return optimize_cut(f)


def lower_bound(dec: Decomposition) -> DualReport:
    per = {label: factor_value(dec, label) for label in dec.labels()}
    return DualReport(math.fsum(per.values()), per)


def apply_message(dec: Decomposition, key: Key, source: Label, target: Label, amount: float) -> None:
    """Move ``amount`` of the cost of ``key`` from one factor to another."""
    sites = dec.sites(key)
    assert source in sites and target in sites, f"{source} and {target} do not share {key}"
    if amount == 0.0:
        return
    dec.factor(source).add(key, -amount)
    dec.factor(target).add(key, amount)


def share_sums(dec: Decomposition) -> dict[Key, float]:
    return {k: math.fsum(dec.factor(s).get(k) for s in dec.sites(k)) for k in dec.all_keys()}


def conservation_error(dec: Decomposition) -> float:
    """Largest deviation between summed shares and original costs."""
    sums = share_sums(dec)
    return max((abs(sums[k] - dec.original_cost(k)) for k in sums), default=0.0)
