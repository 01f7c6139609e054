"""Per-iteration multiplication counts: closed form versus instrumentation."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from simhmimo.counting import MultCounter
from simhmimo.objective import Instance, OptimPoint, effective_h_bar, gradient, rate_from_h_bar
from simhmimo.optimizer import RunTrace, pga_step

__all__ = [
    "Dims",
    "OpBudget",
    "formula_terms",
    "formula_cost_per_iteration",
    "large_sim_approximation",
    "dropped_terms",
    "instrumented_iteration_cost",
    "op_budget",
    "cost_to_threshold",
    "UNREACHABLE",
    "infer_dims",
    "random_dims",
]

UNREACHABLE = None


@dataclass(frozen=True)
class Dims:
    N_t: int
    N_r: int
    M: int
    N: int
    L: int
    K: int

    def __post_init__(self):
        for name in ("N_t", "N_r", "M", "N", "L", "K"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")

    def swapped(self) -> "Dims":
        """Exchange the roles of the two sides."""
        return Dims(self.N_r, self.N_t, self.N, self.M, self.K, self.L)


@dataclass(frozen=True)
class OpBudget:
    counted_multiplications: int
    formula_multiplications: int
    dims: Dims

    def __post_init__(self):
        if self.counted_multiplications < 0 or self.formula_multiplications < 0:
            raise ValueError("multiplication counts must be >= 0")

    @property
    def ratio(self) -> float:
        return self.counted_multiplications / self.formula_multiplications


def formula_terms(d: Dims) -> dict[str, int]:
    """Every term of the per-iteration closed form, keyed by a short label.

    The cubic cascade terms are clipped at zero: a single-layer stack has no
    inner products to form.
    """
    Nt, Nr, M, N, L, K = d.N_t, d.N_r, d.M, d.N, d.L, d.K
    return {
        "eig_Q": Nt**3,
        "scale_Q": 2 * Nt**2,
        "rebuild_Q": (Nt**2 + Nt) * Nt // 2,
        "N_Nr2": N * Nr**2,
        "Nt_Nr2": Nt * Nr**2,
        "M2_Nt": M**2 * Nt,
        "M_Nt2": M * Nt**2,
        "Nt2_Nr": 2 * Nt**2 * Nr,
        "Nt2_M": Nt**2 * M,
        "Nr2_N": Nr**2 * N,
        "MN_antennas": M * N * (Nt + Nr),
        "phase_blocks": (M * N + 3) * (M + N),
        "tx_cubic": max(L - 2, 0) * M**3,
        "rx_cubic": max(K - 2, 0) * N**3,
    }


_LEADING = ("phase_blocks", "tx_cubic", "rx_cubic")


def formula_cost_per_iteration(d: Dims) -> int:
    return int(sum(formula_terms(d).values()))


def large_sim_approximation(d: Dims) -> int:
    """(MN + 3)(M + N) + (L - 2) M^3 + (K - 2) N^3."""
    t = formula_terms(d)
    return int(sum(t[k] for k in _LEADING))


def dropped_terms(d: Dims) -> int:
    t = formula_terms(d)
    return int(sum(v for k, v in t.items() if k not in _LEADING))


def instrumented_iteration_cost(point: OptimPoint, inst: Instance) -> int:
    """Count one fixed-step iteration: gradient, projected step, new objective.

    The channel at ``point`` is taken as known from the previous iteration.
    """
    channel = effective_h_bar(point, inst)
    counter = MultCounter()
    grad = gradient(point, inst, counter, channel=channel)
    new = pga_step(point, grad, (1e-3, 1e-3, 1e-3), inst.power, counter)
    _, _, H_bar = effective_h_bar(new, inst, counter)
    rate_from_h_bar(new.Q, H_bar, counter)
    return counter.mults


def op_budget(point: OptimPoint, inst: Instance) -> OpBudget:
    d = Dims(**inst.dims)
    return OpBudget(instrumented_iteration_cost(point, inst), formula_cost_per_iteration(d), d)


def cost_to_threshold(trace: RunTrace, threshold_fraction: float):
    """Cumulative multiplications when the rate first reaches the given
    fraction of the final rate; ``UNREACHABLE`` (None) if it never does.

    A zero fraction is met before any work is done.
    """
    if threshold_fraction < 0:
        raise ValueError("threshold_fraction must be >= 0")
    if threshold_fraction == 0:
        return 0
    if not trace.records:
        return UNREACHABLE
    target = threshold_fraction * trace.final_f
    for rec in trace.records:
        if rec.f_nats >= target:
            return rec.cum_mults
    return UNREACHABLE


def infer_dims(
    target: int,
    M: int,
    antennas=range(1, 17),
    atoms=range(1, 129),
    layers=range(1, 11),
) -> list[Dims]:
    """Search for the unreported dimensions that make the formula hit ``target``.

    Tries N_t = N_r and L = K (the symmetric setups used throughout), returning
    every exact match.
    """
    hits = []
    for nt, n, l in itertools.product(antennas, atoms, layers):
        d = Dims(nt, nt, M, n, l, l)
        if formula_cost_per_iteration(d) == target:
            hits.append(d)
    return hits


def random_dims(rng: np.random.Generator) -> Dims:
    """Random dimensions in the regime the closed form describes: at least two
    layers per stack and fewer antennas than meta-atoms."""
    return Dims(
        N_t=int(rng.integers(2, 5)),
        N_r=int(rng.integers(2, 5)),
        M=int(rng.integers(3, 7)) ** 2,
        N=int(rng.integers(3, 7)) ** 2,
        L=int(rng.integers(2, 5)),
        K=int(rng.integers(2, 5)),
    )
