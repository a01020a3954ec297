"""Random factor builders shared by the tests."""

import numpy as np

from liftedpaths.cut_factors import CutFactor
from liftedpaths.flow_factors import make_flow_factor
from liftedpaths.instance import random_instance
from liftedpaths.path_factors import PathFactor


def random_flow_factor(rng: np.random.Generator, max_far: int = 8, prune: bool = True):
    """A flow factor of a random instance with at most ``max_far`` nodes beyond its center."""
    while True:
        inst = random_instance(rng, int(rng.integers(2, 10)), int(rng.integers(2, 6)), p_lifted=0.6)
        v = int(rng.integers(inst.num_nodes))
        direction = "out" if rng.random() < 0.5 else "in"
        far = inst.descendants[v] if direction == "out" else inst.ancestors[v]
        if bin(far).count("1") <= max_far:
            break
    f = make_flow_factor(inst, v, direction, prune)
    f.node_theta = float(rng.uniform(-1, 1))
    for e in f.base_theta:
        f.base_theta[e] = float(rng.uniform(-1, 1))
    for e in f.lifted_theta:
        f.lifted_theta[e] = float(rng.uniform(-1, 1))
    return inst, f


def random_path_factor(rng: np.random.Generator, max_edges: int = 6) -> PathFactor:
    n = int(rng.integers(1, max_edges + 1))
    kinds = rng.random(n) < 0.5
    edges = tuple(("base", i) if b else ("lifted", 100 + i) for i, b in enumerate(kinds))
    strong = frozenset(i for kind, i in edges if kind == "base" and rng.random() < 0.5)
    f = PathFactor((0, n), edges, 999, strong)
    for k in f.keys():
        f.theta[k] = float(rng.uniform(-1, 1))
    return f


def random_cut_factor(rng: np.random.Generator, max_edges: int = 6) -> CutFactor:
    n = int(rng.integers(1, max_edges + 1))
    tails, heads = int(rng.integers(1, 4)), int(rng.integers(1, 4))
    pairs = [(a, 10 + b) for a in range(tails) for b in range(heads)]
    chosen = rng.permutation(len(pairs))[:n]
    ends = {i: pairs[j] for i, j in enumerate(chosen)}
    uv = None
    if rng.random() < 0.3:
        uv = int(rng.integers(len(ends)))
    endpoints = ends[uv] if uv is not None else (50, 60)
    f = CutFactor(0, endpoints, tuple(sorted(ends)), ends, uv)
    for k in f.keys():
        f.theta[k] = float(rng.uniform(-1, 1))
    return f


def random_paths(inst, rng: np.random.Generator) -> list[list[int]]:
    """Random node-disjoint paths built by greedy walks over base edges."""
    free = set(range(inst.num_nodes))
    paths = []
    for v in inst.order:
        if v not in free or rng.random() < 0.4:
            continue
        path = [v]
        free.discard(v)
        while True:
            nxt = [w for w in inst.succ[path[-1]] if w in free]
            if not nxt or rng.random() < 0.3:
                break
            w = int(rng.choice(nxt))
            path.append(w)
            free.discard(w)
        paths.append(path)
    return paths
