"""Path factors: a lifted edge ``vw`` together with a ``v -> w`` path.

The path is a sequence of base and lifted edges.  Every lifted edge of the
factor (including the closing edge ``vw``) and every strong base edge on the
path may only be inactive if some other edge of the factor is inactive too.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .instance import Instance

Key = tuple[str, int]


@dataclass
class PathFactor:
    endpoints: tuple[int, int]
    edges: tuple[Key, ...]  # path edges in order, ("base", id) or ("lifted", id)
    closing: int  # lifted edge id of vw
    strong: frozenset[int]  # ids of strong base edges on the path
    theta: dict[Key, float] = field(default_factory=dict)

    def __post_init__(self):
        for k in self.keys():
            self.theta.setdefault(k, 0.0)

    @property
    def path_base(self) -> list[int]:
        return [i for kind, i in self.edges if kind == "base"]

    @property
    def path_lifted(self) -> list[int]:
        return [i for kind, i in self.edges if kind == "lifted"]

    def keys(self) -> list[Key]:
        return [*self.edges, ("lifted", self.closing)]

    def constrained(self, key: Key) -> bool:
        """Whether the variable may only be zero if another variable is zero."""
        return key[0] == "lifted" or key[1] in self.strong

    def get(self, key: Key) -> float:
        return self.theta[key]

    def add(self, key: Key, delta: float) -> None:
        self.theta[key] += delta

    def copy(self) -> "PathFactor":
        return PathFactor(self.endpoints, self.edges, self.closing, self.strong, dict(self.theta))

    def canonical_key(self) -> tuple:
        return ("path", self.closing, self.edges)

    def evaluate(self, active: frozenset[Key]) -> float:
        return sum(self.theta[k] for k in self.keys() if k in active)

    def is_feasible(self, active: frozenset[Key]) -> bool:
        keys = self.keys()
        inactive = [k for k in keys if k not in active]
        return not (len(inactive) == 1 and self.constrained(inactive[0]))


def make_path_factor(inst: Instance, nodes: list[int], kinds: list[str], strong=None) -> PathFactor:
    """Path factor over consecutive ``nodes`` joined by edges of the given kinds.

    The closing lifted edge runs from the first to the last node.
    """
    if len(kinds) != len(nodes) - 1 or len(nodes) < 2:
        raise ValueError("need one edge kind per consecutive node pair")
    edges = []
    for (a, b), kind in zip(zip(nodes, nodes[1:]), kinds):
        index = inst.base_index if kind == "base" else inst.lifted_index
        if (a, b) not in index:
            raise ValueError(f"missing {kind} edge {a}->{b}")
        edges.append((kind, index[(a, b)]))
    closing = inst.lifted_index.get((nodes[0], nodes[-1]))
    if closing is None:
        raise ValueError(f"missing closing lifted edge {nodes[0]}->{nodes[-1]}")
    if strong is None:
        from .instance import compute_strong_edges

        strong = compute_strong_edges(inst).members
    on_path = frozenset(i for kind, i in edges if kind == "base" and i in strong)
    return PathFactor((nodes[0], nodes[-1]), tuple(edges), closing, on_path)


def optimize_path(factor: PathFactor) -> float:
    keys = factor.keys()
    values = [factor.theta[k] for k in keys]
    positive = [i for i, x in enumerate(values) if x > 0]
    if len(positive) == 1 and factor.constrained(keys[positive[0]]):
        k = positive[0]
        others = [x for i, x in enumerate(values) if i != k]
        alpha = min(-x for x in others)
        beta = values[k]
        if alpha < beta:
            return sum(others) + alpha
        return sum(others) + beta
    return sum(x for x in values if x <= 0)


def constrained_path_opt(factor: PathFactor, key: Key, value: int) -> float:
    big = 1.0 + sum(abs(x) for x in factor.theta.values())
    work = factor.copy()
    if value:
        work.theta[key] -= big
        return optimize_path(work) + big
    work.theta[key] += big
    return optimize_path(work)


def path_min_marginal(factor: PathFactor, key: Key) -> float:
    return constrained_path_opt(factor, key, 1) - constrained_path_opt(factor, key, 0)
