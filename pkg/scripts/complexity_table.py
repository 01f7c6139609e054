#!/usr/bin/env python3
"""Per-iteration multiplication counts: closed form against the instrumented
tally, and the cost of PGA and AO to reach 95% of their final rates."""

import argparse

import numpy as np

from simhmimo.baselines import AoConfig, ao_run
from simhmimo.complexity import (
    Dims,
    cost_to_threshold,
    formula_cost_per_iteration,
    infer_dims,
    instrumented_iteration_cost,
    large_sim_approximation,
)
from simhmimo.config import StackSpec, desk_config
from simhmimo.experiments import make_instance
from simhmimo.objective import default_point
from simhmimo.optimizer import OptimizerConfig, run


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--seeds", type=int, default=3)
    args = ap.parse_args()

    print(f"{'M':>4} {'formula':>10} {'approx':>10} {'counted':>10} {'PGA to 95%':>12} {'AO to 95%':>12}")
    for side in (2, 3, 4, 5):
        stack = StackSpec(side_count=side, layers=2, antennas=4)
        cfg = desk_config(tx=stack, rx=stack)
        counted, pga_cost, ao_cost = [], [], []
        for seed in range(args.seeds):
            inst = make_instance(cfg, seed)
            start = default_point(inst)
            counted.append(instrumented_iteration_cost(start, inst))
            pga, _ = run(start, inst, OptimizerConfig(max_iters=500, rel_tol=1e-5))
            ao, _ = ao_run(start, inst, AoConfig(max_outer_iters=60, rel_tol=1e-5))
            pga_cost.append(cost_to_threshold(pga, 0.95))
            ao_cost.append(cost_to_threshold(ao, 0.95))
        d = Dims(**inst.dims)
        print(
            f"{d.M:>4} {formula_cost_per_iteration(d):>10,} {large_sim_approximation(d):>10,} "
            f"{int(np.mean(counted)):>10,} {int(np.mean(pga_cost)):>12,} {int(np.mean(ao_cost)):>12,}"
        )

    hits = infer_dims(51476, M=100)
    print(f"\nsymmetric dimensions giving 51476 per iteration at M=100: {hits or 'none'}")


if __name__ == "__main__":
    main()
