#!/usr/bin/env python3
"""Rate against cumulative multiplications for PGA and AO on one instance.

    python scripts/run_convergence.py --seed 3 --iters 200
"""

import argparse

from simhmimo.baselines import AoConfig, ao_run
from simhmimo.complexity import cost_to_threshold
from simhmimo.config import desk_config
from simhmimo.experiments import make_instance
from simhmimo.objective import LN2, default_point
from simhmimo.optimizer import OptimizerConfig, run


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--iters", type=int, default=500)
    ap.add_argument("--sweeps", type=int, default=60)
    ap.add_argument("--shared-kappa", action="store_true", help="one backtracking exponent for all blocks")
    args = ap.parse_args()

    inst = make_instance(desk_config(), args.seed)
    opts = dict(per_variable_search=False, warm_start=False) if args.shared_kappa else {}
    pga, _ = run(default_point(inst), inst, OptimizerConfig(max_iters=args.iters, rel_tol=1e-5, **opts))
    ao, _ = ao_run(default_point(inst), inst, AoConfig(max_outer_iters=args.sweeps, rel_tol=1e-5))

    print(f"start: {pga.f_initial / LN2:.4f} bits")
    for name, tr in (("PGA", pga), ("AO", ao)):
        print(
            f"{name:>3}: {tr.final_f / LN2:.4f} bits after {len(tr)} iterations ({tr.status}), "
            f"{tr.total_mults:,} mults total, {cost_to_threshold(tr, 0.95):,} to 95%"
        )


if __name__ == "__main__":
    main()
