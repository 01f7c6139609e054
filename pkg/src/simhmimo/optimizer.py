"""Simultaneous projected gradient ascent over (Q, phi, psi).

Two step rules are available: a fixed step from the Lipschitz bound, and
Armijo-Goldstein backtracking ``mu^q = L0^q * rho**kappa`` accepted once

    f(x+) >= f(x) + sum_q delta^q ||x+_q - x_q||^2.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from simhmimo.counting import MultCounter
from simhmimo.objective import (
    LN2,
    Instance,
    OptimPoint,
    RateGradient,
    effective_h_bar,
    gradient,
    lipschitz_constant,
    rate_from_h_bar,
)
from simhmimo.projection import project_covariance, project_unit_modulus

log = logging.getLogger(__name__)

__all__ = [
    "OptimizerConfig",
    "IterRecord",
    "RunTrace",
    "pga_step",
    "armijo_search",
    "run",
]

FIXED = "fixed"
ARMIJO = "armijo"


@dataclass(frozen=True)
class OptimizerConfig:
    mode: str = ARMIJO
    step_base: tuple[float, float, float] = (1e4, 1e4, 1e4)
    shrink: float = 0.5
    sufficient_increase: tuple[float, float, float] = (1e-5, 1e-5, 1e-5)
    min_step: float = 1e-4
    max_iters: int = 100
    rel_tol: float = 1e-6
    window: int = 5
    # per-block backtracking with warm starts; set both False for the
    # plain shared-kappa rule restarted at zero every iteration
    per_variable_search: bool = True
    warm_start: bool = True
    fixed_step: float | None = None  # None: 1 / Lipschitz bound
    seed: int = 0

    def __post_init__(self):
        if self.mode not in (FIXED, ARMIJO):
            raise ValueError(f"mode must be {FIXED!r} or {ARMIJO!r}, got {self.mode!r}")
        if not 0 < self.shrink < 1:
            raise ValueError(f"shrink must lie in (0, 1), got {self.shrink}")
        if len(self.step_base) != 3 or len(self.sufficient_increase) != 3:
            raise ValueError("step_base and sufficient_increase need three entries")
        if min(self.step_base) <= 0 or min(self.sufficient_increase) <= 0:
            raise ValueError("step parameters must be positive")
        if self.min_step <= 0 or self.rel_tol <= 0:
            raise ValueError("min_step and rel_tol must be positive")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if self.fixed_step is not None and self.fixed_step <= 0:
            raise ValueError("fixed_step must be positive")

    def max_backtracks(self) -> int:
        """Upper bound on kappa before the search stalls."""
        worst = max(self.step_base)
        return max(0, int(np.ceil(np.log(self.min_step / worst) / np.log(self.shrink))))


@dataclass
class IterRecord:
    iteration: int
    f_nats: float
    R_bits: float
    steps: tuple[float, float, float]
    kappas: tuple[int, int, int]
    cum_mults: int


@dataclass
class RunTrace:
    f_initial: float
    records: list[IterRecord] = field(default_factory=list)
    status: str = "max_iters"
    residual: float = float("nan")

    @property
    def f(self) -> np.ndarray:
        return np.array([r.f_nats for r in self.records])

    @property
    def rates_bits(self) -> np.ndarray:
        return np.array([r.R_bits for r in self.records])

    @property
    def final_f(self) -> float:
        return self.records[-1].f_nats if self.records else self.f_initial

    @property
    def total_mults(self) -> int:
        return self.records[-1].cum_mults if self.records else 0

    def __len__(self):
        return len(self.records)


def pga_step(
    point: OptimPoint,
    grad: RateGradient,
    steps,
    power: float,
    counter: MultCounter | None = None,
) -> OptimPoint:
    """One simultaneous projected step from gradients taken at ``point``."""
    mu_q, mu_phi, mu_psi = steps
    n_t = point.Q.shape[0]
    if counter is not None:
        L, M = point.phi.shape
        K, N = point.psi.shape
        counter.add(n_t * n_t // 2 + 3 * L * M + 3 * K * N)
        Q = project_covariance(point.Q + mu_q * grad.grad_Q, power, counter)
    else:
        Q = project_covariance(point.Q + mu_q * grad.grad_Q, power)
    phi = project_unit_modulus(point.phi + mu_phi * grad.grad_phi)
    psi = project_unit_modulus(point.psi + mu_psi * grad.grad_psi)
    return OptimPoint(Q, phi, psi)


@dataclass
class _Trial:
    point: OptimPoint
    channel: tuple
    f: float


def _evaluate(
    point: OptimPoint, inst: Instance, counter: MultCounter, P=None, Z=None, channel=None
) -> _Trial:
    if channel is None:
        channel = effective_h_bar(point, inst, counter, P=P, Z=Z)
    return _Trial(point, channel, rate_from_h_bar(point.Q, channel[2], counter))


def _increase_terms(new: OptimPoint, old: OptimPoint, delta) -> np.ndarray:
    return np.array(
        [
            delta[0] * np.linalg.norm(new.Q - old.Q) ** 2,
            delta[1] * np.linalg.norm(new.phi - old.phi) ** 2,
            delta[2] * np.linalg.norm(new.psi - old.psi) ** 2,
        ]
    )


def _mix(point: OptimPoint, trial: OptimPoint, which: int) -> OptimPoint:
    parts = [point.Q, point.phi, point.psi]
    parts[which] = (trial.Q, trial.phi, trial.psi)[which]
    return OptimPoint(*parts)


def armijo_search(
    point: OptimPoint,
    f0: float,
    grad: RateGradient,
    inst: Instance,
    config: OptimizerConfig,
    counter: MultCounter,
    kappa_start=(0, 0, 0),
    current_channel: tuple | None = None,
):
    """Backtrack until the sufficient-increase test holds.

    The search starts from ``kappa_start`` (all zeros unless warm-started).
    Returns ``(trial, steps, kappas, stalled)``; on a stall ``trial`` is
    ``None`` and the caller keeps the current point.
    """
    base = np.asarray(config.step_base, dtype=float)
    kappa = np.array(kappa_start, dtype=int)
    if config.per_variable_search and current_channel is None:
        current_channel = effective_h_bar(point, inst)
    while True:
        steps = base * config.shrink**kappa
        cand = pga_step(point, grad, steps, inst.power, counter)
        trial = _evaluate(cand, inst, counter)
        terms = _increase_terms(cand, point, config.sufficient_increase)
        if trial.f >= f0 + terms.sum():
            return trial, tuple(steps), tuple(int(k) for k in kappa), False
        if np.all(steps < config.min_step):
            return None, tuple(steps), tuple(int(k) for k in kappa), True
        if not config.per_variable_search:
            kappa += 1
            continue
        # shrink only the blocks whose own update fails the test
        Z0, P0, _ = current_channel
        Z1, P1, _ = trial.channel
        reuse = (
            {"channel": current_channel},  # Q only: channel unchanged
            {"P": P1, "Z": Z0},
            {"P": P0, "Z": Z1},
        )
        failing = []
        for q in range(3):
            if steps[q] < config.min_step:
                continue
            solo = _evaluate(_mix(point, cand, q), inst, counter, **reuse[q])
            if solo.f < f0 + terms[q]:
                failing.append(q)
        if not failing:
            failing = [q for q in range(3) if steps[q] >= config.min_step]
        kappa[failing] += 1


def run(
    initial: OptimPoint,
    inst: Instance,
    config: OptimizerConfig,
    counter: MultCounter | None = None,
) -> tuple[RunTrace, OptimPoint]:
    initial.check_feasible(inst.power)
    counter = counter if counter is not None else MultCounter()
    current = _evaluate(initial.copy(), inst, counter)
    trace = RunTrace(f_initial=current.f)
    if config.mode == FIXED:
        mu = config.fixed_step if config.fixed_step is not None else 1.0 / lipschitz_constant(inst)
        fixed_steps = (mu, mu, mu)

    calm = 0
    kappa_start = (0, 0, 0)
    for it in range(1, config.max_iters + 1):
        grad = gradient(current.point, inst, counter, channel=current.channel)
        if config.mode == FIXED:
            cand = pga_step(current.point, grad, fixed_steps, inst.power, counter)
            trial = _evaluate(cand, inst, counter)
            steps, kappas, stalled = fixed_steps, (0, 0, 0), False
        else:
            trial, steps, kappas, stalled = armijo_search(
                current.point, current.f, grad, inst, config, counter, kappa_start,
                current.channel,
            )
            if config.warm_start:
                kappa_start = tuple(max(k - 1, 0) for k in kappas)
        if stalled:
            trace.status = "stalled"
            log.debug("stalled at iteration %d, f=%.6g", it, current.f)
            break
        change = abs(trial.f - current.f) / max(abs(current.f), 1e-300)
        current = trial
        trace.records.append(
            IterRecord(it, current.f, current.f / LN2, tuple(steps), kappas, counter.mults)
        )
        calm = calm + 1 if change < config.rel_tol else 0
        if calm >= config.window:
            trace.status = "converged"
            break

    if config.max_iters > 0 and trace.status != "stalled":
        trace.residual = critical_residual(current.point, inst)
    return trace, current.point


def critical_residual(point: OptimPoint, inst: Instance, mu: float = 1.0) -> float:
    """||proj(x + mu grad f(x)) - x||: zero exactly at critical points."""
    grad = gradient(point, inst)
    return pga_step(point, grad, (mu, mu, mu), inst.power).distance(point)
