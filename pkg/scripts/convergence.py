"""Solve random instances and compare the bounds with the exact optimum.

Usage: python scripts/convergence.py [--instances N] [--seed S] [--max-iter K]
"""

import argparse
import time

import numpy as np

from liftedpaths.instance import random_instance
from liftedpaths.message_passing import SolverConfig, run
from liftedpaths.oracle import exact_ldp


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--instances", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--max-iter", type=int, default=51)
    parser.add_argument("--p-lifted", type=float, default=0.4)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    cfg = SolverConfig(max_iter=args.max_iter)
    print("instance,nodes,lifted,optimum,lower_bound,best_primal,rel_gap_to_opt,iterations,factors,seconds")
    within = 0
    for k in range(args.instances):
        inst = random_instance(rng, int(rng.integers(4, 13)), int(rng.integers(2, 6)), p_lifted=args.p_lifted)
        start = time.perf_counter()
        report = run(inst, cfg)
        elapsed = time.perf_counter() - start
        opt = exact_ldp(inst).objective
        ub = report.solution.objective
        rel = abs(ub - opt) / abs(opt) if opt else abs(ub - opt)
        within += rel <= 0.02
        last = report.history[-1]
        print(f"{k},{inst.num_nodes},{len(inst.lifted_edges)},{opt:.6f},{report.lower_bound:.6f},{ub:.6f},"
              f"{rel:.4f},{last.iteration},{last.num_factors},{elapsed:.3f}")
    print(f"# {within}/{args.instances} within 2% of the optimum")


if __name__ == "__main__":
    main()
