"""Seeded Monte-Carlo scenarios and their CSV / JSON outputs.

Every scenario is a list of tasks, one per (parameter point, realization).
Realization ``r`` always uses seed ``seed_base + r``, so all parameter points
see the same channel draws. Tasks may run in worker processes; rows are
written in task order regardless.

CSV layouts (header row first, UTF-8, comma separated):

    Convergence      method, seed, realization, iteration, f_nats, R_bits,
                     step, cum_mults, step_Q, step_psi
    InitSensitivity  seed, realization, default_bits, best_random_bits,
                     scaled_steps_bits
    LayerSweep       seed, realization, L, K, M, N, N_t, N_r, R_bits, digital_bits
    AtomSweep        (same columns as LayerSweep)
    AntennaSweep     (same columns as LayerSweep)
    PhaseBaselines   seed, realization, M, optimized_bits, random_bits, equal_bits
    ComplexityTable  seed, realization, M, N, L, K, N_t, N_r, formula_per_iter,
                     counted_per_iter, pga_iters_95, pga_cost_95, ao_outer_95,
                     ao_cost_95

Convergence rows with ``method`` ``ao`` count outer sweeps; ``ao_inner``
rows count single-element (and covariance) updates. ``step`` is the phase
step of the transmit stack.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import subprocess
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from simhmimo import __version__
from simhmimo.baselines import (
    ao_run,
    digital_precoding_rate,
    fixed_phase_rate,
    iid_channel,
)
from simhmimo.channel import path_loss_db
from simhmimo.complexity import (
    Dims,
    cost_to_threshold,
    formula_cost_per_iteration,
    instrumented_iteration_cost,
)
from simhmimo.config import ScenarioConfig
from simhmimo.objective import LN2, build_instance, default_point, random_point, rate_nats
from simhmimo.optimizer import run

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

SWEEP_COLUMNS = ["seed", "realization", "L", "K", "M", "N", "N_t", "N_r", "R_bits", "digital_bits"]
COLUMNS = {
    "Convergence": [
        "method", "seed", "realization", "iteration", "f_nats", "R_bits",
        "step", "cum_mults", "step_Q", "step_psi",
    ],
    "InitSensitivity": ["seed", "realization", "default_bits", "best_random_bits", "scaled_steps_bits"],
    "LayerSweep": SWEEP_COLUMNS,
    "AtomSweep": SWEEP_COLUMNS,
    "AntennaSweep": SWEEP_COLUMNS,
    "PhaseBaselines": ["seed", "realization", "M", "optimized_bits", "random_bits", "equal_bits"],
    "ComplexityTable": [
        "seed", "realization", "M", "N", "L", "K", "N_t", "N_r",
        "formula_per_iter", "counted_per_iter", "pga_iters_95", "pga_cost_95",
        "ao_outer_95", "ao_cost_95",
    ],
}
# the column averaged over realizations in the per-point summary
MEAN_OF = {
    "LayerSweep": ("L", ["R_bits", "digital_bits"]),
    "AtomSweep": ("M", ["R_bits", "digital_bits"]),
    "AntennaSweep": ("N_t", ["R_bits", "digital_bits"]),
    "PhaseBaselines": ("M", ["optimized_bits", "random_bits", "equal_bits"]),
    "ComplexityTable": ("M", ["formula_per_iter", "counted_per_iter", "pga_cost_95", "ao_cost_95"]),
    "InitSensitivity": (None, ["default_bits", "best_random_bits", "scaled_steps_bits"]),
}
DEFAULT_VALUES = {
    "LayerSweep": (1, 2, 3, 4, 5, 6, 7),
    "AtomSweep": (9, 16, 25, 36),
    "AntennaSweep": (1, 2, 4, 6, 8),
    "ComplexityTable": (4, 9, 16, 25),
}


# ---------------------------------------------------------------- tasks


def _side(atoms: int) -> int:
    s = int(round(np.sqrt(atoms)))
    if s * s != atoms:
        raise ValueError(f"atom counts must be perfect squares, got {atoms}")
    return s


def point_config(cfg: ScenarioConfig, value) -> ScenarioConfig:
    """Apply one sweep value to the stacks."""
    if value is None:
        return cfg
    if cfg.scenario == "LayerSweep":
        return replace(cfg, tx=replace(cfg.tx, layers=int(value)))
    if cfg.scenario in ("AtomSweep", "ComplexityTable", "PhaseBaselines"):
        s = _side(int(value))
        return replace(cfg, tx=replace(cfg.tx, side_count=s), rx=replace(cfg.rx, side_count=s))
    if cfg.scenario == "AntennaSweep":
        n = int(value)
        return replace(cfg, tx=replace(cfg.tx, antennas=n), rx=replace(cfg.rx, antennas=n))
    return cfg


def sweep_values(cfg: ScenarioConfig) -> tuple:
    if cfg.values:
        return tuple(cfg.values)
    if cfg.scenario == "PhaseBaselines":
        return (cfg.tx.atoms,)
    return DEFAULT_VALUES.get(cfg.scenario, (None,))


def make_instance(cfg: ScenarioConfig, seed: int):
    return build_instance(cfg.tx_geometry(), cfg.rx_geometry(), cfg.link, seed)


def _dims_row(cfg: ScenarioConfig) -> dict:
    return {
        "L": cfg.tx.layers, "K": cfg.rx.layers, "M": cfg.tx.atoms, "N": cfg.rx.atoms,
        "N_t": cfg.tx.antennas, "N_r": cfg.rx.antennas,
    }


def _digital_bits(cfg: ScenarioConfig, seed: int) -> float:
    # same large-scale fading draw as the SIM link with this seed
    rng = np.random.default_rng(seed)
    link = cfg.link
    pl = path_loss_db(link.distance, link.ref_distance, link.exponent, link.shadow_sigma_db, rng, link.wavelength)
    H = iid_channel(cfg.rx.antennas, cfg.tx.antennas, pl, seed)
    return digital_precoding_rate(H, link.noise_power, link.tx_power)


def _task_convergence(cfg: ScenarioConfig, r: int, seed: int) -> list[dict]:
    inst = make_instance(cfg, seed)
    trace, _ = run(default_point(inst), inst, cfg.optimizer)
    rows = [
        dict(method="pga", seed=seed, realization=r, iteration=0, f_nats=trace.f_initial,
             R_bits=trace.f_initial / LN2, step="", cum_mults=0, step_Q="", step_psi="")
    ]
    for rec in trace.records:
        rows.append(
            dict(method="pga", seed=seed, realization=r, iteration=rec.iteration, f_nats=rec.f_nats,
                 R_bits=rec.R_bits, step=rec.steps[1], cum_mults=rec.cum_mults,
                 step_Q=rec.steps[0], step_psi=rec.steps[2])
        )
    if cfg.compare_ao:
        ao, _ = ao_run(default_point(inst), inst, cfg.ao)
        blank = dict(step="", step_Q="", step_psi="")
        rows.append(dict(method="ao", seed=seed, realization=r, iteration=0, f_nats=ao.f_initial,
                         R_bits=ao.f_initial / LN2, cum_mults=0, **blank))
        for rec in ao.records:
            rows.append(dict(method="ao", seed=seed, realization=r, iteration=rec.iteration,
                             f_nats=rec.f_nats, R_bits=rec.R_bits, cum_mults=rec.cum_mults, **blank))
        for i, (f, c) in enumerate(zip(ao.inner_f, ao.inner_mults), start=1):
            rows.append(dict(method="ao_inner", seed=seed, realization=r, iteration=i, f_nats=f,
                             R_bits=f / LN2, cum_mults=c, **blank))
    return rows


def _task_init(cfg: ScenarioConfig, r: int, seed: int) -> list[dict]:
    inst = make_instance(cfg, seed)
    _, x = run(default_point(inst), inst, cfg.optimizer)
    default_bits = rate_nats(x, inst) / LN2
    # the default start is one of the candidates, so best >= default
    rng = np.random.default_rng([seed, 1])
    best = default_bits
    for _ in range(cfg.random_starts):
        _, y = run(random_point(inst, rng), inst, cfg.optimizer)
        best = max(best, rate_nats(y, inst) / LN2)
    # unequal step bases: covariance 1, transmit 0.1, receive 0.5 of the base
    b = cfg.optimizer.step_base[0]
    scaled = replace(cfg.optimizer, step_base=(b, 0.1 * b, 0.5 * b))
    _, z = run(default_point(inst), inst, scaled)
    return [
        dict(seed=seed, realization=r, default_bits=default_bits, best_random_bits=best,
             scaled_steps_bits=rate_nats(z, inst) / LN2)
    ]


def _task_sweep(cfg: ScenarioConfig, r: int, seed: int) -> list[dict]:
    inst = make_instance(cfg, seed)
    _, x = run(default_point(inst), inst, cfg.optimizer)
    return [
        dict(seed=seed, realization=r, **_dims_row(cfg), R_bits=rate_nats(x, inst) / LN2,
             digital_bits=_digital_bits(cfg, seed))
    ]


def _task_phases(cfg: ScenarioConfig, r: int, seed: int) -> list[dict]:
    inst = make_instance(cfg, seed)
    _, x = run(default_point(inst), inst, cfg.optimizer)
    return [
        dict(seed=seed, realization=r, M=cfg.tx.atoms, optimized_bits=rate_nats(x, inst) / LN2,
             random_bits=fixed_phase_rate("random", inst, seed), equal_bits=fixed_phase_rate("equal", inst))
    ]


def _first_index(trace, fraction: float):
    target = fraction * trace.final_f
    for rec in trace.records:
        if rec.f_nats >= target:
            return rec.iteration
    return None


def _task_complexity(cfg: ScenarioConfig, r: int, seed: int) -> list[dict]:
    inst = make_instance(cfg, seed)
    start = default_point(inst)
    dims = Dims(**inst.dims)
    pga, _ = run(start, inst, cfg.optimizer)
    ao, _ = ao_run(start, inst, cfg.ao)
    return [
        dict(seed=seed, realization=r, **_dims_row(cfg),
             formula_per_iter=formula_cost_per_iteration(dims),
             counted_per_iter=instrumented_iteration_cost(start, inst),
             pga_iters_95=_first_index(pga, 0.95), pga_cost_95=cost_to_threshold(pga, 0.95),
             ao_outer_95=_first_index(ao, 0.95), ao_cost_95=cost_to_threshold(ao, 0.95))
    ]


TASKS = {
    "Convergence": _task_convergence,
    "InitSensitivity": _task_init,
    "LayerSweep": _task_sweep,
    "AtomSweep": _task_sweep,
    "AntennaSweep": _task_sweep,
    "PhaseBaselines": _task_phases,
    "ComplexityTable": _task_complexity,
}


def _run_task(args) -> list[dict]:
    cfg, r, seed = args
    return TASKS[cfg.scenario](cfg, r, seed)


def tasks(cfg: ScenarioConfig) -> list[tuple[ScenarioConfig, int, int]]:
    out = []
    for value in sweep_values(cfg):
        pc = point_config(cfg, value)
        for r in range(cfg.realizations):
            out.append((pc, r, cfg.seed_base + r))
    return out


# ---------------------------------------------------------------- output


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def summarise(cfg: ScenarioConfig, rows: list[dict]) -> list[dict]:
    """Per-point means over realizations, with the seed range used."""
    if cfg.scenario == "Convergence":
        out = []
        methods = sorted({r["method"] for r in rows})
        for method in methods:
            sub = [r for r in rows if r["method"] == method]
            for it in sorted({r["iteration"] for r in sub}):
                vals = [r["R_bits"] for r in sub if r["iteration"] == it]
                out.append({"method": method, "iteration": it, "mean_R_bits": float(np.mean(vals)), "count": len(vals)})
        return out
    key, cols = MEAN_OF[cfg.scenario]
    groups: dict = {}
    for row in rows:
        groups.setdefault(row[key] if key else None, []).append(row)
    out = []
    for k, sub in groups.items():
        entry = {key: k} if key else {}
        entry["seed_first"] = min(r["seed"] for r in sub)
        entry["seed_last"] = max(r["seed"] for r in sub)
        for c in cols:
            vals = [r[c] for r in sub if r[c] is not None]
            entry[f"mean_{c}"] = float(np.mean(vals)) if vals else None
        out.append(entry)
    return out


def provenance() -> str:
    try:
        rev = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True, text=True, timeout=5, cwd=Path(__file__).parent,
        ).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        rev = ""
    return f"simhmimo {__version__}" + (f" ({rev})" if rev else "")


def check_writable(out_dir: Path) -> None:
    """Fail early if results cannot be written to ``out_dir``."""
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        probe = out_dir / f".write-probe-{os.getpid()}"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise PermissionError(f"output path {out_dir} is not writable: {exc}") from exc


def run_scenario(cfg: ScenarioConfig) -> dict[str, Path]:
    """Run every task of the scenario and write its CSV files and JSON summary.

    Returns the paths written, keyed ``csv``, ``mean_csv`` and ``json``.
    """
    out_dir = Path(cfg.output_path)
    check_writable(out_dir)
    jobs = tasks(cfg)
    log.info("%s: %d tasks", cfg.scenario, len(jobs))
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_task, jobs))
    else:
        results = [_run_task(j) for j in jobs]
    rows = [row for res in results for row in res]

    stem = cfg.scenario.lower()
    paths = {
        "csv": out_dir / f"{stem}.csv",
        "mean_csv": out_dir / f"{stem}_mean.csv",
        "json": out_dir / f"{stem}.json",
    }
    paths["csv"].write_text(rows_to_csv(rows, COLUMNS[cfg.scenario]), encoding="utf-8")
    means = summarise(cfg, rows)
    mean_cols = list(means[0]) if means else []
    paths["mean_csv"].write_text(rows_to_csv(means, mean_cols), encoding="utf-8")
    summary = {
        "schema_version": SCHEMA_VERSION,
        "scenario": cfg.scenario,
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "provenance": provenance(),
        "seeds": sorted({seed for _, _, seed in jobs}),
        "config": cfg.to_dict(),
        "means": means,
    }
    paths["json"].write_text(json.dumps(summary, indent=2, default=str) + "\n", encoding="utf-8")
    return paths
