"""Dual block coordinate ascent with periodic separation and primal rounding."""

from __future__ import annotations

import sys
import time
from dataclasses import asdict, dataclass, field

from .cut_factors import cut_min_marginal
from .decomposition import Decomposition, initialize, lower_bound
from .flow_factors import (
    all_base_min_marginals,
    all_lifted_min_marginals,
    min_marginal_naive,
    optimize,
)
from .instance import Instance, S, T, compute_strong_edges
from .path_factors import path_min_marginal
from .mcf import MinCostFlow
from .primal import compute_primal, init_mcf
from .separation import separation_round
from .solution import Solution, empty_solution


@dataclass(frozen=True)
class SolverConfig:
    max_iter: int = 51
    sep_interval: int = 20
    primal_interval: int = 5
    sep_epsilon: float = 1e-4
    max_new_factor_ratio: float = 0.5
    damping: float = 1.0
    gap_tolerance: float = 1e-9
    tau: float = 0.5
    cut_ends_budget: int = 5
    refine_rounds: int = 50
    prune: bool = True
    flow_block: bool = True
    verbose: bool = False

    def validate(self) -> None:
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.sep_interval < 1 or self.primal_interval < 1:
            raise ValueError("sep_interval and primal_interval must be >= 1")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")
        if self.sep_epsilon < 0 or self.max_new_factor_ratio < 0:
            raise ValueError("sep_epsilon and max_new_factor_ratio must be >= 0")
        if self.tau < 0 or self.cut_ends_budget < 0 or self.refine_rounds < 0:
            raise ValueError("tau, cut_ends_budget and refine_rounds must be >= 0")


@dataclass
class IterationRecord:
    iteration: int
    lower_bound: float
    best_primal: float
    num_factors: int
    elapsed: float


@dataclass
class SolverReport:
    history: list[IterationRecord] = field(default_factory=list)
    solution: Solution | None = None
    lower_bound: float = float("-inf")
    gap: float = float("inf")
    # lower bounds after every single evaluation, including those right after separation
    lb_trace: list[float] = field(default_factory=list)
    primal_rounds: list[tuple[int, float, float]] = field(default_factory=list)  # (iter, lb, round objective)
    decomposition: Decomposition | None = field(default=None, repr=False)

    def to_dict(self, timing: bool = False) -> dict:
        hist = []
        for rec in self.history:
            d = asdict(rec)
            if not timing:
                d.pop("elapsed")
            hist.append(d)
        return {
            "history": hist,
            "lower_bound": self.lower_bound,
            "best_primal": self.solution.objective if self.solution else None,
            "gap": self.gap,
            "paths": [list(p) for p in self.solution.paths] if self.solution else [],
        }


def _send(dec: Decomposition, source, messages, scale: float) -> None:
    src = dec.factor(source)
    for key, target, amount in messages:
        delta = scale * amount
        if delta == 0.0:
            continue
        src.add(key, -delta)
        dec.factor(target).add(key, delta)


def flow_factor_pass(dec: Decomposition, node: int, direction: str, damping: float = 1.0) -> None:
    """Send min-marginals of one flow factor to the opposite flow factor and attached factors.

    One block goes to the opposite flow factors (lifted edges, then inner base
    edges, then the node); every attached path or cut factor receives a block
    for the variables it shares.  Each block is computed from the current
    costs and scaled by ``damping / (1 + number of attached factors)``.
    """
    label = (direction, node)
    f = dec.factor(label)
    opposite = "in" if direction == "out" else "out"
    attached: list = []
    for k in f.keys():
        for lab in dec.attached.get(k, []):
            if lab not in attached:
                attached.append(lab)
    attached.sort(key=dec.created.index)
    scale = damping / (1 + len(attached))

    messages = []
    work = f.copy()
    for e, g in all_lifted_min_marginals(work).items():
        work.lifted_theta[e] -= g
        messages.append((("lifted", e), (opposite, work_other_lifted(dec, e, direction)), g))
    for e, g in all_base_min_marginals(work).items():
        other = f.base_nbr[e]
        if other in (S, T):
            continue
        work.base_theta[e] -= g
        messages.append((("base", e), (opposite, other), g))
    g = min_marginal_naive(work, ("node", node))
    messages.append((("node", node), (opposite, node), g))

    for lab in attached:
        shared = dec.factor(lab).keys()
        part = f.copy()
        for k in f.keys():
            if k in shared:
                m = min_marginal_naive(part, k)
                part.add(k, -m)
                messages.append((k, lab, m))
    _send(dec, label, messages, scale)


def work_other_lifted(dec: Decomposition, e: int, direction: str) -> int:
    t, h, _ = dec.inst.lifted_edges[e]
    return h if direction == "out" else t


def _small_factor_pass(dec: Decomposition, label, min_marginal, damping: float) -> None:
    factor = dec.factor(label)
    keys = factor.keys()
    weight = damping / (2 * len(keys))
    marginals = [(k, min_marginal(factor, k)) for k in keys]
    for k, m in marginals:
        for site in dec.flow_sites(k):
            delta = weight * m
            factor.add(k, -delta)
            dec.factor(site).add(k, delta)


def path_factor_pass(dec: Decomposition, index: int, damping: float = 1.0) -> None:
    """Independent min-marginals of a path factor, each split over its two flow factors."""
    _small_factor_pass(dec, ("path", index), path_min_marginal, damping)


def cut_factor_pass(dec: Decomposition, index: int, damping: float = 1.0) -> None:
    _small_factor_pass(dec, ("cut", index), cut_min_marginal, damping)


def _flow_potentials(dec: Decomposition, cost: dict[int, float]) -> tuple[list[float], list[float]]:
    """Optimal node-split flow on ``cost`` and potentials proving its optimality.

    Returns potentials of the in- and out-copies of every node, normalized so
    that the merged source/sink has potential 0.
    """
    inst = dec.inst
    n = inst.num_nodes
    src, snk = 2 * n, 2 * n + 1
    net = MinCostFlow(2 * n + 2)
    for v in range(n):
        net.add_arc(2 * v, 2 * v + 1, 1, 0.0)
    for e, (t, h, _) in enumerate(inst.base_edges):
        a = src if t == S else 2 * t + 1
        b = snk if h == T else 2 * h
        net.add_arc(a, b, 1, cost[e])
    net.run(src, snk)
    # Bellman-Ford on the residual graph with source and sink merged, from a virtual root
    root = src
    arcs = []
    for a in range(len(net.to)):
        if net.cap[a] > 0:
            u, v = net.to[a ^ 1], net.to[a]
            arcs.append((root if u == snk else u, root if v == snk else v, net.cost[a]))
    pot = [0.0] * (2 * n + 1)
    for _ in range(2 * n + 2):
        changed = False
        for u, v, c in arcs:
            if pot[u] + c < pot[v] - 1e-13:
                pot[v] = pot[u] + c
                changed = True
        if not changed:
            break
    base = pot[root]
    return [pot[2 * v] - base for v in range(n)], [pot[2 * v + 1] - base for v in range(n)]


def tighten_flow_block(dec: Decomposition) -> None:
    """Optimally redistribute node and base-edge costs between in- and outflow factors.

    Lifted, path and cut costs stay fixed.  The best redistribution is read
    off the potentials of a min-cost flow whose arc costs are the constrained
    flow-factor optima; afterwards the flow factors together bound the
    objective by exactly that flow's cost.
    """
    inst = dec.inst
    net = init_mcf(dec)
    p_in, p_out = _flow_potentials(dec, net.cost)
    slack = [p_in[v] - p_out[v] for v in range(inst.num_nodes)]
    lifted_in = [optimize(f).lifted_cost for f in dec.inflow]
    node_total = [dec.inflow[v].node_theta + dec.outflow[v].node_theta for v in range(inst.num_nodes)]
    new_in_node = [0.0] * inst.num_nodes
    for e, (t, h, _) in enumerate(inst.base_edges):
        if t == S:
            target = net.cost[e] - p_in[h] + 0.5 * slack[h]
            new_in_node[h] = target - dec.inflow[h].base_theta[e]
    for v in range(inst.num_nodes):
        dec.inflow[v].node_theta = new_in_node[v]
        dec.outflow[v].node_theta = node_total[v] - new_in_node[v]
    for e, (t, h, _) in enumerate(inst.base_edges):
        if t == S or h == T:
            continue
        target = 0.5 * (net.cost[e] + p_out[t] - p_in[h]) + 0.5 * slack[h]
        total = dec.inflow[h].base_theta[e] + dec.outflow[t].base_theta[e]
        share = target - new_in_node[h] - lifted_in[h].get(t, 0.0)
        dec.inflow[h].base_theta[e] = share
        dec.outflow[t].base_theta[e] = total - share


def pass_schedule(dec: Decomposition) -> list:
    forward = []
    for v in dec.inst.order:
        forward += [("in", v), ("out", v)]
    forward += [("path", i) for i in range(len(dec.paths))]
    forward += [("cut", i) for i in range(len(dec.cuts))]
    return forward


def run_pass(dec: Decomposition, label, damping: float) -> None:
    kind, i = label
    if kind in ("in", "out"):
        flow_factor_pass(dec, i, kind, damping)
    elif kind == "path":
        path_factor_pass(dec, i, damping)
    else:
        cut_factor_pass(dec, i, damping)


def iterate(dec: Decomposition, damping: float = 1.0, flow_block: bool = True) -> None:
    """One forward and one backward sweep over all current factors.

    With ``flow_block`` the sweep ends with :func:`tighten_flow_block`.
    """
    schedule = pass_schedule(dec)
    for label in schedule:
        run_pass(dec, label, damping)
    for label in reversed(schedule):
        run_pass(dec, label, damping)
    if flow_block:
        tighten_flow_block(dec)


def run(inst: Instance, cfg: SolverConfig | None = None, dec: Decomposition | None = None) -> SolverReport:
    cfg = cfg or SolverConfig()
    cfg.validate()
    start = time.perf_counter()
    dec = dec or initialize(inst, prune=cfg.prune)
    strong = compute_strong_edges(inst).members
    report = SolverReport()
    best = empty_solution(inst)
    lb = lower_bound(dec).lower_bound
    report.lb_trace.append(lb)
    limit = int(cfg.max_new_factor_ratio * 2 * inst.num_nodes)
    for it in range(1, cfg.max_iter + 1):
        iterate(dec, cfg.damping, cfg.flow_block)
        lb = lower_bound(dec).lower_bound
        report.lb_trace.append(lb)
        if it % cfg.sep_interval == 0 and limit > 0:
            if separation_round(dec, cfg.sep_epsilon, limit, strong):
                lb = lower_bound(dec).lower_bound
                report.lb_trace.append(lb)
        if it % cfg.primal_interval == 0 or it == cfg.max_iter:
            sol = compute_primal(dec, cfg.tau, cfg.cut_ends_budget, cfg.refine_rounds)
            report.primal_rounds.append((it, lb, sol.objective))
            if sol.objective < best.objective:
                best = sol
        gap = best.objective - lb
        report.history.append(IterationRecord(it, lb, best.objective, dec.num_factors, time.perf_counter() - start))
        if cfg.verbose:
            print(
                f"iter={it} lb={lb:.9g} ub={best.objective:.9g} gap={gap:.3g} factors={dec.num_factors}",
                file=sys.stderr,
            )
        if gap <= cfg.gap_tolerance:
            break
    report.solution = best
    report.lower_bound = report.history[-1].lower_bound
    report.gap = best.objective - report.lower_bound
    report.decomposition = dec
    return report
