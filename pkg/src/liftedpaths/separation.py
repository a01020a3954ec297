"""Discovery of violated path and cut factors and their installation.

Separation costs are min-marginals pulled out of the flow factors.  Paths of
negative edges closed by a positive lifted edge become path factors; positive
base-edge cuts separating the endpoints of a negative lifted edge become cut
factors.  Both come with a guaranteed lower-bound improvement used as their
priority.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .cut_factors import CutFactor, make_cut_factor
from .decomposition import Decomposition
from .flow_factors import all_base_min_marginals, all_lifted_min_marginals
from .instance import Instance, S, T
from .path_factors import PathFactor

Key = tuple[str, int]


@dataclass
class SeparationCosts:
    base: dict[int, float]  # inner base edges
    lifted: dict[int, float]
    # shares of the above coming from the tail's outflow and the head's inflow factor
    from_out: dict[Key, float] = field(repr=False, default_factory=dict)
    from_in: dict[Key, float] = field(repr=False, default_factory=dict)

    def get(self, key: Key) -> float:
        return self.base[key[1]] if key[0] == "base" else self.lifted[key[1]]


@dataclass
class SeparationCandidate:
    kind: str  # "path" or "cut"
    factor: PathFactor | CutFactor
    priority: float


def extract_separation_costs(dec: Decomposition) -> SeparationCosts:
    """Half of the lifted and then the base min-marginals of every flow factor.

    The decomposition is not modified; :func:`install_candidates` debits the
    flow factors for the parts that are handed to new factors.
    """
    from_out: dict[Key, float] = {}
    from_in: dict[Key, float] = {}
    for factors, store in ((dec.outflow, from_out), (dec.inflow, from_in)):
        for f in factors:
            work = f.copy()
            lifted = all_lifted_min_marginals(work)
            for e, g in lifted.items():
                work.lifted_theta[e] -= 0.5 * g
                store[("lifted", e)] = 0.5 * g
            for e, g in all_base_min_marginals(work).items():
                if f.base_nbr[e] not in (S, T):
                    store[("base", e)] = g
    inst = dec.inst
    base = {}
    for e, (t, h, _) in enumerate(inst.base_edges):
        if t != S and h != T:
            base[e] = from_out[("base", e)] + from_in[("base", e)]
    lifted = {e: from_out[("lifted", e)] + from_in[("lifted", e)] for e in range(len(inst.lifted_edges))}
    return SeparationCosts(base, lifted, from_out, from_in)


class _Closure:
    """Transitive closure of a growing edge set with first-connection records."""

    def __init__(self, n: int):
        self.pred = [{v} for v in range(n)]
        self.desc = [{v} for v in range(n)]
        self.via: dict[tuple[int, int], tuple[int, int, Key]] = {}

    def connect(self, i: int, j: int, key: Key) -> None:
        for p in sorted(self.pred[i]):
            for d in sorted(self.desc[j]):
                if d not in self.desc[p]:
                    self.desc[p].add(d)
                    self.pred[d].add(p)
                    self.via[(p, d)] = (i, j, key)

    def find_path(self, a: int, b: int) -> list[tuple[int, int, Key]]:
        if a == b:
            return []
        i, j, key = self.via[(a, b)]
        return self.find_path(a, i) + [(i, j, key)] + self.find_path(j, b)


def _path_factor(steps, closing: int, strong) -> PathFactor:
    edges = tuple(key for _, _, key in steps)
    on_path = frozenset(k[1] for k in edges if k[0] == "base" and k[1] in strong)
    return PathFactor((steps[0][0], steps[-1][1]), edges, closing, on_path)


def separate_paths(costs: SeparationCosts, inst: Instance, eps: float, limit: int, strong=frozenset()) -> list[SeparationCandidate]:
    negative = [(c, 0, e) for e, c in costs.base.items() if c < -eps]
    negative += [(c, 1, e) for e, c in costs.lifted.items() if c < -eps]
    negative.sort()
    positive = {
        (inst.lifted_edges[e][0], inst.lifted_edges[e][1]): e
        for e, c in costs.lifted.items() if c > eps
    }
    closure = _Closure(inst.num_nodes)
    found: list[SeparationCandidate] = []
    for c, kind, e in negative:
        key: Key = ("base", e) if kind == 0 else ("lifted", e)
        i, j = (inst.base_edges if kind == 0 else inst.lifted_edges)[e][:2]
        # the newly added edge plus a positive closing lifted edge
        for p in sorted(closure.pred[i]):
            for d in sorted(closure.desc[j]):
                closing = positive.get((p, d))
                if closing is None:
                    continue
                steps = closure.find_path(p, i) + [(i, j, key)] + closure.find_path(j, d)
                prio = min(abs(c), costs.lifted[closing])
                found.append(SeparationCandidate("path", _path_factor(steps, closing, strong), prio))
        # the positive lifted edge lies inside the path and ij closes it
        if kind == 1:
            for p in sorted(closure.pred[j]):
                for d in sorted(closure.desc[i]):
                    inner = positive.get((d, p))
                    if inner is None:
                        continue
                    steps = (
                        closure.find_path(i, d)
                        + [(d, p, ("lifted", inner))]
                        + closure.find_path(p, j)
                    )
                    prio = min(abs(c), costs.lifted[inner])
                    found.append(SeparationCandidate("path", _path_factor(steps, e, strong), prio))
        closure.connect(i, j, key)
    return _top(found, eps, limit)


def separate_cuts(costs: SeparationCosts, inst: Instance, eps: float, limit: int) -> list[SeparationCandidate]:
    negative = {
        (inst.lifted_edges[e][0], inst.lifted_edges[e][1]): e
        for e, c in costs.lifted.items() if c < -eps
    }
    if not negative:
        return []
    closure = _Closure(inst.num_nodes)
    low = [e for e, c in costs.base.items() if c < eps]
    high = sorted((c, e) for e, c in costs.base.items() if c >= eps)
    # closure of the cheap edges; order of insertion is irrelevant here
    for e in sorted(low, key=lambda e: (inst.frame_of[inst.base_edges[e][0]], e)):
        i, j = inst.base_edges[e][:2]
        closure.connect(i, j, ("base", e))
    found: list[SeparationCandidate] = []
    for c, e in high:
        i, j = inst.base_edges[e][:2]
        for u in sorted(closure.pred[i]):
            for v in sorted(closure.desc[j]):
                lifted = negative.get((u, v))
                if lifted is None or v in closure.desc[u]:
                    continue
                side = closure.desc[u]
                cut = [
                    f for f, (a, b, _) in enumerate(inst.base_edges)
                    if a in side and b not in side and b != T and (b == v or inst.reaches(b, v))
                ]
                prio = min(c, -costs.lifted[lifted])
                found.append(SeparationCandidate("cut", make_cut_factor(inst, lifted, cut), prio))
        closure.connect(i, j, ("base", e))
    return _top(found, eps, limit)


def _top(found: list[SeparationCandidate], eps: float, limit: int) -> list[SeparationCandidate]:
    order = sorted(range(len(found)), key=lambda k: (-found[k].priority, k))
    out, seen = [], set()
    for k in order:
        cand = found[k]
        key = cand.factor.canonical_key()
        if cand.priority <= eps or key in seen:
            continue
        seen.add(key)
        out.append(cand)
        if len(out) >= limit:
            break
    return out


def select_candidates(dec: Decomposition, paths, cuts, limit: int) -> list[SeparationCandidate]:
    """Merge both queues by priority, skipping factors the decomposition already has."""
    merged = sorted(
        [(-c.priority, 0, k, c) for k, c in enumerate(paths)] + [(-c.priority, 1, k, c) for k, c in enumerate(cuts)],
        key=lambda x: x[:3],
    )
    out, seen = [], set(dec.registry)
    for *_, cand in merged:
        key = cand.factor.canonical_key()
        if key in seen:
            continue
        seen.add(key)
        out.append(cand)
        if len(out) >= limit:
            break
    return out


def install_candidates(dec: Decomposition, costs: SeparationCosts, candidates: list[SeparationCandidate]) -> int:
    """Add the candidates with the separation costs shared equally among them.

    Returns the number of factors actually added.
    """
    fresh = []
    seen = set(dec.registry)
    for cand in candidates:
        key = cand.factor.canonical_key()
        if key not in seen:
            seen.add(key)
            fresh.append(cand.factor)
    counts = Counter(k for f in fresh for k in f.keys())
    inst = dec.inst
    for f in fresh:
        for k in f.keys():
            n = counts[k]
            f.theta[k] = costs.get(k) / n
            t, h, _ = (inst.base_edges if k[0] == "base" else inst.lifted_edges)[k[1]]
            dec.outflow[t].add(k, -costs.from_out[k] / n)
            dec.inflow[h].add(k, -costs.from_in[k] / n)
        dec.add_factor(f)
    return len(fresh)


def separation_round(dec: Decomposition, eps: float, limit: int, strong=frozenset()) -> int:
    costs = extract_separation_costs(dec)
    paths = separate_paths(costs, dec.inst, eps, limit, strong)
    cuts = separate_cuts(costs, dec.inst, eps, limit)
    return install_candidates(dec, costs, select_candidates(dec, paths, cuts, limit))
