"""Windowed solving of long sequences.

Phase 1 solves disjoint frame windows independently and freezes the
trajectory pieces found in the centre of every window.  Phase 2 solves the
stretches between consecutive frozen zones; frozen pieces enter these
problems as single anchor nodes whose lifted costs are the summed lifted
costs of their members.  No edge spans a frozen zone, so the stretches are
independent and the anchors capture every interaction exactly.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .instance import Instance, S, T
from .message_passing import SolverConfig, run
from .solution import Solution, adjust_lifted


class PlanError(ValueError):
    """Interval parameters that cannot be used with the instance."""


def max_edge_frames(inst: Instance) -> int:
    """Largest frame distance spanned by an inner base edge or a lifted edge."""
    gaps = [inst.frame_of[h] - inst.frame_of[t] for t, h, _ in inst.base_edges if t != S and h != T]
    gaps += [inst.frame_of[h] - inst.frame_of[t] for t, h, _ in inst.lifted_edges]
    return max(gaps, default=1)


@dataclass(frozen=True)
class IntervalPlan:
    interval_length: int
    max_edge_length: int

    def validate(self) -> None:
        if self.max_edge_length < 1:
            raise PlanError("max_edge_length must be >= 1")
        if self.interval_length < 3 * self.max_edge_length:
            raise PlanError(
                f"interval_length {self.interval_length} must be at least 3 * max_edge_length "
                f"= {3 * self.max_edge_length}"
            )

    @classmethod
    def default(cls, inst: Instance) -> "IntervalPlan":
        t_max = max_edge_frames(inst)
        return cls(3 * t_max, t_max)

    def windows(self, first: int, last: int) -> list[tuple[int, int]]:
        """Phase-1 windows as inclusive frame ranges covering ``first..last``."""
        out = []
        lo = first
        while lo <= last:
            out.append((lo, min(lo + self.interval_length - 1, last)))
            lo += self.interval_length
        return out

    def freeze_zones(self, first: int, last: int) -> list[tuple[int, int]]:
        """Centre of every window, ``max_edge_length`` frames away from both window ends.

        Zones that fall outside the sequence are omitted.
        """
        out = []
        for lo, _ in self.windows(first, last):
            a = lo + self.max_edge_length
            b = min(lo + self.interval_length - self.max_edge_length - 1, last)
            if a <= b:
                out.append((a, b))
        return out


def _solve_nodes(inst: Instance, nodes: list[int], cfg: SolverConfig) -> list[list[int]]:
    sub, keep = inst.subinstance(nodes)
    sol = run(sub, cfg).solution
    return [[keep[v] for v in p] for p in sol.paths]


def _solve_window(args) -> list[list[int]]:
    return _solve_nodes(*args)


def _anchored_problem(inst: Instance, stretch: list[int], left: list[tuple], right: list[tuple]):
    """Stretch nodes plus anchors for frozen pieces ending before and starting after it.

    Returns the problem and a map from its nodes to ``("node", v)``,
    ``("left", k)`` or ``("right", k)``.  Anchor costs are shifted so that an
    unused anchor stands for a piece that simply ends (or starts) there.
    """
    ident = [("node", v) for v in stretch] + [("left", k) for k in range(len(left))]
    ident += [("right", k) for k in range(len(right))]
    frames, members = [], []
    for kind, k in ident:
        if kind == "node":
            frames.append(inst.frame_of[k])
            members.append((k,))
        elif kind == "left":
            frames.append(inst.frame_of[left[k][-1]])
            members.append(left[k])
        else:
            frames.append(inst.frame_of[right[k][0]])
            members.append(right[k])
    # local ids in frame order
    order = sorted(range(len(ident)), key=lambda i: (frames[i], i))
    ident = [ident[i] for i in order]
    frames = [frames[i] for i in order]
    members = [members[i] for i in order]
    node_cost = [inst.node_cost[m[0]] if kind == "node" else 0.0 for (kind, _), m in zip(ident, members)]

    def exit_node(i):  # original node whose outgoing base edges the local node uses
        return None if ident[i][0] == "right" else members[i][-1]

    def entry_node(i):
        return None if ident[i][0] == "left" else members[i][0]

    def shift_out(i):
        return inst.base_cost(members[i][-1], T) if ident[i][0] == "left" else 0.0

    def shift_in(i):
        return inst.base_cost(S, members[i][0]) if ident[i][0] == "right" else 0.0

    base = []
    for i in range(len(ident)):
        if ident[i][0] == "node":
            v = members[i][0]
            base += [(S, i, inst.base_cost(S, v)), (i, T, inst.base_cost(v, T))]
        else:
            base += [(S, i, 0.0), (i, T, 0.0)]
    lifted = []
    for i in range(len(ident)):
        for j in range(len(ident)):
            if frames[i] >= frames[j]:
                continue
            a, b = exit_node(i), entry_node(j)
            if a is not None and b is not None and inst.has_base(a, b):
                base.append((i, j, inst.base_cost(a, b) - shift_out(i) - shift_in(j)))
            pair = [
                inst.lifted_edges[inst.lifted_index[(x, y)]][2]
                for x in members[i] for y in members[j] if (x, y) in inst.lifted_index
            ]
            if pair:
                lifted.append((i, j, sum(pair)))
    probe = Instance.build(frames, node_cost, base, [])
    lifted = [(t, h, c) for t, h, c in lifted if probe.reaches(t, h)]
    return Instance.build(frames, node_cost, base, lifted), ident


def solve_intervals(inst: Instance, plan: IntervalPlan | None = None,
                    cfg: SolverConfig | None = None, workers: int = 1) -> Solution:
    """Solve ``inst`` window by window; a single window is a direct solve."""
    cfg = cfg or SolverConfig()
    plan = plan or IntervalPlan.default(inst)
    plan.validate()
    if max_edge_frames(inst) > plan.max_edge_length:
        raise PlanError(
            f"instance has edges spanning {max_edge_frames(inst)} frames, "
            f"more than max_edge_length {plan.max_edge_length}"
        )
    if inst.num_nodes == 0:
        return adjust_lifted(inst, [])
    first, last = min(inst.frame_of), max(inst.frame_of)
    windows = plan.windows(first, last)
    if len(windows) == 1:
        return run(inst, cfg).solution

    # phase 1
    jobs = [
        (inst, [v for v in range(inst.num_nodes) if lo <= inst.frame_of[v] <= hi], cfg)
        for lo, hi in windows
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            window_paths = list(pool.map(_solve_window, jobs))
    else:
        window_paths = [_solve_window(job) for job in jobs]

    zones = plan.freeze_zones(first, last)
    pieces: list[list[tuple[int, ...]]] = []  # frozen pieces per zone
    frozen: set[int] = set()
    for a, b in zones:
        zone_pieces = []
        for paths in window_paths:
            for p in paths:
                piece = tuple(v for v in p if a <= inst.frame_of[v] <= b)
                if piece:
                    zone_pieces.append(piece)
        pieces.append(zone_pieces)
        frozen.update(v for v in range(inst.num_nodes) if a <= inst.frame_of[v] <= b)

    # phase 2: stretches before, between and after the zones
    nxt: dict[int, int] = {}
    active: set[int] = set()
    for zone_pieces in pieces:
        for piece in zone_pieces:
            nxt.update(zip(piece, piece[1:]))
            active.update(piece)
    bounds = [first - 1] + [x for z in zones for x in z] + [last + 1]
    for s in range(len(zones) + 1):
        lo, hi = bounds[2 * s] + 1, bounds[2 * s + 1] - 1
        stretch = [v for v in range(inst.num_nodes) if lo <= inst.frame_of[v] <= hi and v not in frozen]
        left = pieces[s - 1] if s > 0 else []
        right = pieces[s] if s < len(zones) else []
        if not stretch and not (left and right):
            continue
        problem, ident = _anchored_problem(inst, stretch, left, right)
        for p in run(problem, cfg).solution.paths:
            chain = []
            for i in p:
                kind, k = ident[i]
                if kind == "node":
                    chain.append(k)
                elif kind == "left":
                    chain.append(left[k][-1])
                else:
                    chain.append(right[k][0])
            nxt.update(zip(chain, chain[1:]))
            active.update(chain)
    return adjust_lifted(inst, _chains(inst, active, nxt))


def _chains(inst: Instance, active: set[int], nxt: dict[int, int]) -> list[list[int]]:
    has_pred = set(nxt.values())
    paths = []
    for v in sorted(active, key=lambda u: (inst.frame_of[u], u)):
        if v in has_pred:
            continue
        path = [v]
        while path[-1] in nxt:
            path.append(nxt[path[-1]])
        paths.append(path)
    return paths
