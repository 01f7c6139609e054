"""Command-line entry point.

    simhmimo run CONFIG.yaml
    simhmimo convergence --realizations 5 --out results/
    simhmimo sweep-layers --paper-scale

Preset subcommands start from the small desk setup (16 atoms, 2 layers,
4 antennas per side) unless ``--paper-scale`` is given.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from simhmimo.config import ConfigError, ScenarioConfig, default_config, desk_config, parse_config
from simhmimo.experiments import run_scenario

PRESETS = {
    "convergence": "Convergence",
    "init": "InitSensitivity",
    "sweep-layers": "LayerSweep",
    "sweep-atoms": "AtomSweep",
    "sweep-antennas": "AntennaSweep",
    "baselines": "PhaseBaselines",
    "complexity": "ComplexityTable",
}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, help="seed of the first realization")
    p.add_argument("--realizations", type=int, help="channel realizations per point")
    p.add_argument("--out", help="output directory")
    p.add_argument("--mode", choices=("fixed", "armijo"), help="step-size rule")
    p.add_argument("--workers", type=int, help="worker processes")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simhmimo", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the scenario described by a YAML file")
    p.add_argument("config")
    p.add_argument("--lenient", action="store_true", help="warn on unknown keys instead of failing")
    p.add_argument("--no-defaults", action="store_true", help="reject an empty config file")
    _common(p)

    for name, scenario in PRESETS.items():
        p = sub.add_parser(name, help=f"{scenario} preset")
        p.add_argument("--paper-scale", action="store_true", help="100 atoms, 7 layers, 10 antennas (slow)")
        _common(p)
    return parser


def _apply_flags(cfg: ScenarioConfig, args) -> ScenarioConfig:
    changes = {}
    if args.seed is not None:
        changes["seed_base"] = args.seed
    if args.realizations is not None:
        changes["realizations"] = args.realizations
    if args.out is not None:
        changes["output_path"] = args.out
    if args.workers is not None:
        changes["workers"] = args.workers
    if args.mode is not None:
        changes["optimizer"] = replace(cfg.optimizer, mode=args.mode)
    return replace(cfg, **changes)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "run":
            cfg = parse_config(args.config, strict=not args.lenient, allow_defaults=not args.no_defaults)
        else:
            base = default_config() if args.paper_scale else desk_config()
            cfg = replace(base, scenario=PRESETS[args.command])
        cfg = _apply_flags(cfg, args)
        paths = run_scenario(cfg)
    except (ConfigError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for kind, path in paths.items():
        print(f"{kind}: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
