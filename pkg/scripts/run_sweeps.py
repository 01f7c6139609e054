#!/usr/bin/env python3
"""Run the layer, atom and antenna sweeps plus the phase baselines and
print the per-point means.

    python scripts/run_sweeps.py --realizations 20 --out results/sweeps
"""

import argparse
import csv

from simhmimo.config import desk_config
from simhmimo.experiments import run_scenario
from simhmimo.optimizer import OptimizerConfig

SCENARIOS = ("LayerSweep", "AtomSweep", "AntennaSweep", "PhaseBaselines")


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--realizations", type=int, default=10)
    ap.add_argument("--iters", type=int, default=100)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/sweeps")
    args = ap.parse_args()

    for name in SCENARIOS:
        cfg = desk_config(
            scenario=name,
            realizations=args.realizations,
            workers=args.workers,
            output_path=args.out,
            optimizer=OptimizerConfig(max_iters=args.iters),
        )
        paths = run_scenario(cfg)
        print(f"== {name} ({paths['csv']})")
        with open(paths["mean_csv"], newline="") as fh:
            for row in csv.DictReader(fh):
                print("  " + "  ".join(f"{k}={v}" for k, v in row.items() if not k.startswith("seed")))


if __name__ == "__main__":
    main()
