"""Problem instances: flow network, lifted graph, costs and graph queries.

Inner nodes are dense integers ``0..num_nodes-1``.  The source and sink are the
sentinels :data:`S` and :data:`T`, which never appear as lifted-edge endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

S = -1
T = -2


class InstanceError(ValueError):
    """Malformed instance text or an instance that violates an invariant."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _fmt_endpoint(x: int) -> str:
    if x == S:
        return "S"
    if x == T:
        return "T"
    return str(x)


@dataclass(frozen=True)
class Instance:
    frame_of: tuple[int, ...]
    node_cost: tuple[float, ...]
    base_edges: tuple[tuple[int, int, float], ...]
    lifted_edges: tuple[tuple[int, int, float], ...]

    @classmethod
    def build(
        cls,
        frame_of: Sequence[int],
        node_cost: Sequence[float],
        base_edges: Iterable[tuple[int, int, float]],
        lifted_edges: Iterable[tuple[int, int, float]] = (),
    ) -> "Instance":
        """Validate and normalize raw parts into a canonical instance.

        S/T edges given more than once are summed, missing ones are added
        with cost 0.  Inner duplicates, backward edges and lifted edges
        without a base path are rejected.
        """
        n = len(frame_of)
        if len(node_cost) != n:
            raise InstanceError("node_cost and frame_of differ in length")
        for v, f in enumerate(frame_of):
            if int(f) != f or f < 1:
                raise InstanceError(f"node {v}: frame must be a positive integer, got {f}")
        frames = tuple(int(f) for f in frame_of)

        def check_node(x: int, what: str) -> None:
            if not 0 <= x < n:
                raise InstanceError(f"{what}: unknown node {x}")

        inner: dict[tuple[int, int], float] = {}
        s_cost = [0.0] * n
        t_cost = [0.0] * n
        for tail, head, cost in base_edges:
            cost = float(cost)
            edge = f"base edge {_fmt_endpoint(tail)}->{_fmt_endpoint(head)}"
            if not math.isfinite(cost):
                raise InstanceError(f"{edge}: non-finite cost")
            if tail == T or head == S or (tail == S and head == T):
                raise InstanceError(f"{edge}: invalid sentinel direction")
            if tail == S:
                check_node(head, edge)
                s_cost[head] += cost
            elif head == T:
                check_node(tail, edge)
                t_cost[tail] += cost
            else:
                check_node(tail, edge)
                check_node(head, edge)
                if tail == head:
                    raise InstanceError(f"{edge}: self-loop")
                if frames[head] <= frames[tail]:
                    raise InstanceError(f"{edge}: backward edge")
                if (tail, head) in inner:
                    raise InstanceError(f"{edge}: duplicate edge")
                inner[(tail, head)] = cost

        base = [(S, v, s_cost[v]) for v in range(n)]
        base += [(t, h, c) for (t, h), c in sorted(inner.items())]
        base += [(v, T, t_cost[v]) for v in range(n)]
        base.sort(key=lambda e: (e[0] if e[0] != S else -1, e[1] if e[1] != T else n))

        lifted: dict[tuple[int, int], float] = {}
        for tail, head, cost in lifted_edges:
            cost = float(cost)
            edge = f"lifted edge {_fmt_endpoint(tail)}->{_fmt_endpoint(head)}"
            if tail in (S, T) or head in (S, T):
                raise InstanceError(f"{edge}: lifted edges cannot touch S or T")
            if not math.isfinite(cost):
                raise InstanceError(f"{edge}: non-finite cost")
            check_node(tail, edge)
            check_node(head, edge)
            if tail == head:
                raise InstanceError(f"{edge}: self-loop")
            if (tail, head) in lifted:
                raise InstanceError(f"{edge}: duplicate edge")
            lifted[(tail, head)] = cost

        inst = cls(
            frame_of=frames,
            node_cost=tuple(float(c) for c in node_cost),
            base_edges=tuple(base),
            lifted_edges=tuple((t, h, c) for (t, h), c in sorted(lifted.items())),
        )
        for tail, head, _ in inst.lifted_edges:
            if not inst.reaches(tail, head):
                raise InstanceError(
                    f"lifted edge {tail}->{head}: head not reachable from tail in the base graph"
                )
        return inst

    @property
    def num_nodes(self) -> int:
        return len(self.frame_of)

    # --- adjacency ------------------------------------------------------

    @cached_property
    def base_index(self) -> dict[tuple[int, int], int]:
        return {(t, h): e for e, (t, h, _) in enumerate(self.base_edges)}

    @cached_property
    def lifted_index(self) -> dict[tuple[int, int], int]:
        return {(t, h): e for e, (t, h, _) in enumerate(self.lifted_edges)}

    @cached_property
    def out_base(self) -> tuple[tuple[int, ...], ...]:
        """Base edge ids leaving each inner node (including its T-edge)."""
        out: list[list[int]] = [[] for _ in range(self.num_nodes)]
        for e, (t, _, _) in enumerate(self.base_edges):
            if t != S:
                out[t].append(e)
        return tuple(tuple(x) for x in out)

    @cached_property
    def in_base(self) -> tuple[tuple[int, ...], ...]:
        """Base edge ids entering each inner node (including its S-edge)."""
        inc: list[list[int]] = [[] for _ in range(self.num_nodes)]
        for e, (_, h, _) in enumerate(self.base_edges):
            if h != T:
                inc[h].append(e)
        return tuple(tuple(x) for x in inc)

    @cached_property
    def out_lifted(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.num_nodes)]
        for e, (t, _, _) in enumerate(self.lifted_edges):
            out[t].append(e)
        return tuple(tuple(x) for x in out)

    @cached_property
    def in_lifted(self) -> tuple[tuple[int, ...], ...]:
        inc: list[list[int]] = [[] for _ in range(self.num_nodes)]
        for e, (_, h, _) in enumerate(self.lifted_edges):
            inc[h].append(e)
        return tuple(tuple(x) for x in inc)

    @cached_property
    def succ(self) -> tuple[tuple[int, ...], ...]:
        """Inner successors of each inner node, ascending id."""
        out: list[list[int]] = [[] for _ in range(self.num_nodes)]
        for t, h, _ in self.base_edges:
            if t != S and h != T:
                out[t].append(h)
        return tuple(tuple(sorted(x)) for x in out)

    @cached_property
    def pred(self) -> tuple[tuple[int, ...], ...]:
        inc: list[list[int]] = [[] for _ in range(self.num_nodes)]
        for t, h, _ in self.base_edges:
            if t != S and h != T:
                inc[h].append(t)
        return tuple(tuple(sorted(x)) for x in inc)

    @cached_property
    def order(self) -> tuple[int, ...]:
        """Topological order: ascending (frame, id)."""
        return tuple(sorted(range(self.num_nodes), key=lambda v: (self.frame_of[v], v)))

    @cached_property
    def descendants(self) -> tuple[int, ...]:
        """Bitmask of strict inner descendants per node."""
        desc = [0] * self.num_nodes
        for v in reversed(self.order):
            m = 0
            for w in self.succ[v]:
                m |= desc[w] | (1 << w)
            desc[v] = m
        return tuple(desc)

    @cached_property
    def ancestors(self) -> tuple[int, ...]:
        """Bitmask of strict inner ancestors per node."""
        anc = [0] * self.num_nodes
        for v in self.order:
            m = 0
            for w in self.pred[v]:
                m |= anc[w] | (1 << w)
            anc[v] = m
        return tuple(anc)

    def reaches(self, v: int, w: int) -> bool:
        if v == S or w == T:
            return True
        if v == T or w == S:
            return False
        return v == w or bool(self.descendants[v] >> w & 1)

    def base_cost(self, tail: int, head: int) -> float:
        return self.base_edges[self.base_index[(tail, head)]][2]

    def has_base(self, tail: int, head: int) -> bool:
        return (tail, head) in self.base_index

    def reversed(self) -> "Instance":
        """Edge-reversed instance with frames mirrored (S and T swap roles)."""
        top = max(self.frame_of, default=0) + 1
        swap = {S: T, T: S}
        base = [(swap.get(h, h), swap.get(t, t), c) for t, h, c in self.base_edges]
        lifted = [(h, t, c) for t, h, c in self.lifted_edges]
        return Instance.build([top - f for f in self.frame_of], self.node_cost, base, lifted)

    def subinstance(self, nodes: Sequence[int]) -> tuple["Instance", list[int]]:
        """Induced instance on ``nodes``; returns it with the local->global id map."""
        keep = sorted(nodes, key=lambda v: (self.frame_of[v], v))
        local = {v: i for i, v in enumerate(keep)}
        base = []
        for t, h, c in self.base_edges:
            tt = S if t == S else local.get(t)
            hh = T if h == T else local.get(h)
            if tt is not None and hh is not None:
                base.append((tt, hh, c))
        lifted = [
            (local[t], local[h], c)
            for t, h, c in self.lifted_edges
            if t in local and h in local
        ]
        sub = Instance.build(
            [self.frame_of[v] for v in keep], [self.node_cost[v] for v in keep], base, []
        )
        # lifted edges whose base connection left the node set are dropped
        lifted = [(t, h, c) for t, h, c in lifted if sub.reaches(t, h)]
        return Instance.build(sub.frame_of, sub.node_cost, base, lifted), keep


@dataclass(frozen=True)
class Reachability:
    """Pairs (v, w) such that w is reachable from v within a frame gap."""

    masks: tuple[int, ...]
    max_frame_gap: int = field(default=0)

    def __contains__(self, pair: tuple[int, int]) -> bool:
        v, w = pair
        if v == S:
            return w != S
        if w == T:
            return v != T
        if v == T or w == S:
            return False
        return bool(self.masks[v] >> w & 1)

    def pairs(self) -> set[tuple[int, int]]:
        out = set()
        for v, m in enumerate(self.masks):
            w = 0
            while m:
                if m & 1:
                    out.add((v, w))
                m >>= 1
                w += 1
        return out


@dataclass(frozen=True)
class StrongBaseEdges:
    members: frozenset[int]

    def __contains__(self, edge_id: int) -> bool:
        return edge_id in self.members

    def __len__(self) -> int:
        return len(self.members)


def compute_reachability(inst: Instance, max_frame_gap: int) -> Reachability:
    if max_frame_gap < 1:
        raise ValueError("max_frame_gap must be >= 1")
    by_frame: dict[int, int] = {}
    for v, f in enumerate(inst.frame_of):
        by_frame[f] = by_frame.get(f, 0) | (1 << v)
    masks = []
    for v in range(inst.num_nodes):
        f0 = inst.frame_of[v]
        window = 0
        for f in range(f0, f0 + max_frame_gap + 1):
            window |= by_frame.get(f, 0)
        masks.append((inst.descendants[v] | (1 << v)) & window)
    return Reachability(tuple(masks), max_frame_gap)


def compute_strong_edges(inst: Instance) -> StrongBaseEdges:
    """Inner base edges vw for which vw itself is the only v-w path."""
    strong = set()
    for e, (v, w, _) in enumerate(inst.base_edges):
        if v == S or w == T:
            continue
        if all(x == w or not (inst.descendants[x] >> w & 1) for x in inst.succ[v]):
            strong.add(e)
    return StrongBaseEdges(frozenset(strong))


# --- text format --------------------------------------------------------


def _parse_endpoint(tok: str, allowed: str, line: int) -> int:
    if tok == "S" and "S" in allowed:
        return S
    if tok == "T" and "T" in allowed:
        return T
    try:
        return int(tok)
    except ValueError:
        raise InstanceError(f"bad node id {tok!r}", line) from None


def _parse_float(tok: str, line: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise InstanceError(f"bad number {tok!r}", line) from None


def load_instance(text: str | bytes) -> Instance:
    """Parse the line format (``nodes``/``node``/``base``/``lifted``, ``#`` comments)."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InstanceError(f"not UTF-8: {exc}") from None
    n = None
    frames: dict[int, int] = {}
    costs: dict[int, float] = {}
    base: list[tuple[int, int, float]] = []
    lifted: list[tuple[int, int, float]] = []
    where: dict[tuple[str, int, int], int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        kind, args = tokens[0], tokens[1:]
        if kind == "nodes":
            if len(args) != 1 or n is not None:
                raise InstanceError("expected a single 'nodes <n>' line", lineno)
            try:
                n = int(args[0])
            except ValueError:
                raise InstanceError(f"bad node count {args[0]!r}", lineno) from None
            if n < 0:
                raise InstanceError("negative node count", lineno)
        elif kind == "node":
            if len(args) != 3:
                raise InstanceError("expected 'node <id> <frame> <cost>'", lineno)
            v = _parse_endpoint(args[0], "", lineno)
            if n is None or not 0 <= v < n:
                raise InstanceError(f"node id {v} outside 0..n-1", lineno)
            if v in frames:
                raise InstanceError(f"node {v} declared twice", lineno)
            try:
                frames[v] = int(args[1])
            except ValueError:
                raise InstanceError(f"bad frame {args[1]!r}", lineno) from None
            costs[v] = _parse_float(args[2], lineno)
        elif kind in ("base", "lifted"):
            if len(args) != 3:
                raise InstanceError(f"expected '{kind} <tail> <head> <cost>'", lineno)
            allowed = ("S", "T") if kind == "base" else ("", "")
            t = _parse_endpoint(args[0], allowed[0], lineno)
            h = _parse_endpoint(args[1], allowed[1], lineno)
            c = _parse_float(args[2], lineno)
            (base if kind == "base" else lifted).append((t, h, c))
            where.setdefault((kind, t, h), lineno)
        else:
            raise InstanceError(f"unknown record {kind!r}", lineno)
    if n is None:
        raise InstanceError("missing 'nodes <n>' line")
    missing = [v for v in range(n) if v not in frames]
    if missing:
        raise InstanceError(f"nodes without a 'node' line: {missing[:5]}")
    try:
        return Instance.build([frames[v] for v in range(n)], [costs[v] for v in range(n)], base, lifted)
    except InstanceError as exc:
        # attach the first line mentioning the offending edge when possible
        for (kind, t, h), lineno in where.items():
            if f"{kind} edge {_fmt_endpoint(t)}->{_fmt_endpoint(h)}:" in str(exc):
                raise InstanceError(str(exc), lineno) from None
        raise


def dump_instance(inst: Instance) -> str:
    lines = [f"nodes {inst.num_nodes}"]
    for v in range(inst.num_nodes):
        lines.append(f"node {v} {inst.frame_of[v]} {inst.node_cost[v]!r}")
    for t, h, c in inst.base_edges:
        lines.append(f"base {_fmt_endpoint(t)} {_fmt_endpoint(h)} {c!r}")
    for t, h, c in inst.lifted_edges:
        lines.append(f"lifted {t} {h} {c!r}")
    return "\n".join(lines) + "\n"


def read_instance(path: str | Path) -> Instance:
    return load_instance(Path(path).read_bytes())


def write_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(dump_instance(inst), encoding="utf-8")


# --- generators ---------------------------------------------------------


def generate_instance(
    frames: int,
    detections_per_frame: int,
    trajectories: int,
    noise: float,
    rng_seed: int,
    *,
    max_gap: int = 2,
    lifted_gap: int = 3,
) -> tuple[Instance, list[list[int]]]:
    """Tracking-like instance with planted trajectories.

    Node ``f * detections_per_frame + k`` is detection ``k`` of frame ``f + 1``.
    Pairs on the same planted trajectory cost about -1, all other pairs about
    +1; ``noise`` scales an additive standard normal perturbation.  Base edges
    span up to ``max_gap`` frames, lifted edges 2..``lifted_gap`` frames.
    Returns the instance and the planted trajectories (node lists).
    """
    if trajectories > detections_per_frame:
        raise ValueError("trajectories must not exceed detections_per_frame")
    rng = np.random.default_rng(rng_seed)
    d = detections_per_frame
    label = {}
    for f in range(frames):
        perm = rng.permutation(d)
        for k in range(d):
            label[f * d + k] = int(perm[k]) if perm[k] < trajectories else -1 - (f * d + k)

    def cost(v: int, w: int) -> float:
        same = label[v] == label[w] and label[v] >= 0
        return (-1.0 if same else 1.0) + noise * float(rng.standard_normal())

    base, lifted = [], []
    for f in range(frames):
        for g in range(f + 1, min(frames, f + max(max_gap, lifted_gap) + 1)):
            for k in range(d):
                for m in range(d):
                    v, w = f * d + k, g * d + m
                    if g - f <= max_gap:
                        base.append((v, w, cost(v, w)))
                    if 2 <= g - f <= lifted_gap:
                        lifted.append((v, w, cost(v, w)))
    frame_of = [v // d + 1 for v in range(frames * d)]
    inst = Instance.build(frame_of, [0.0] * (frames * d), base, lifted)
    truth = [
        [f * d + k for f in range(frames) for k in range(d) if label[f * d + k] == t]
        for t in range(trajectories)
    ]
    return inst, truth


def random_instance(
    rng: np.random.Generator,
    num_nodes: int,
    num_frames: int,
    *,
    p_base: float = 0.5,
    p_lifted: float = 0.4,
    max_gap: int | None = None,
    node_scale: float = 0.3,
    st_scale: float = 0.0,
) -> Instance:
    """Unstructured random instance with costs uniform in [-1, 1]."""
    num_frames = max(1, min(num_frames, num_nodes))
    frames = list(range(1, num_frames + 1)) + [
        int(rng.integers(1, num_frames + 1)) for _ in range(num_nodes - num_frames)
    ]
    frames.sort()
    base = []
    for v in range(num_nodes):
        for w in range(num_nodes):
            gap = frames[w] - frames[v]
            if gap >= 1 and (max_gap is None or gap <= max_gap) and rng.random() < p_base:
                base.append((v, w, float(rng.uniform(-1, 1))))
    if st_scale:
        for v in range(num_nodes):
            base.append((S, v, float(rng.uniform(-st_scale, st_scale))))
            base.append((v, T, float(rng.uniform(-st_scale, st_scale))))
    probe = Instance.build(frames, [0.0] * num_nodes, base)
    lifted = []
    for v in range(num_nodes):
        for w in range(num_nodes):
            if v != w and probe.reaches(v, w) and rng.random() < p_lifted:
                lifted.append((v, w, float(rng.uniform(-1, 1))))
    node_cost = [float(rng.uniform(-node_scale, node_scale)) for _ in range(num_nodes)]
    return Instance.build(frames, node_cost, base, lifted)
