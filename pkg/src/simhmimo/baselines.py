"""Comparison schemes: alternating optimisation, fixed phases, and a fully
digital MIMO link."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from simhmimo.counting import MultCounter
from simhmimo.objective import LN2, Instance, OptimPoint, effective_h_bar, rate_from_h_bar
from simhmimo.optimizer import IterRecord, RunTrace
from simhmimo.projection import capacity_covariance
from simhmimo.propagation import (
    receive_suffixes,
    transmit_suffixes,
)

__all__ = [
    "AoConfig",
    "AoTrace",
    "ao_run",
    "fixed_phase_rate",
    "digital_precoding_rate",
    "iid_channel",
]


@dataclass(frozen=True)
class AoConfig:
    phase_grid_points: int = 32
    max_outer_iters: int = 10
    rel_tol: float = 1e-6

    def __post_init__(self):
        if self.phase_grid_points < 4:
            raise ValueError("phase_grid_points must be >= 4")
        if self.max_outer_iters < 0:
            raise ValueError("max_outer_iters must be >= 0")
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be positive")


@dataclass
class AoTrace(RunTrace):
    """Outer-iteration records plus the objective after every inner update
    (each phase element and each Q step), with its cumulative cost."""

    inner_f: list[float] = field(default_factory=list)
    inner_mults: list[int] = field(default_factory=list)


class _ElementSearch:
    """Maximise f over one unit-modulus coefficient with everything else fixed.

    The effective channel is H_bar = base + x * u v^T with |x| = 1.
    """

    def __init__(self, Q, n_grid, counter):
        self.Q = Q
        self.grid = np.exp(2j * np.pi * np.arange(n_grid) / n_grid)
        self.h = 2 * np.pi / n_grid
        self.counter = counter

    def f(self, base, u, v, x):
        return self.f_batch(base, u, v, np.atleast_1d(x))[0]

    def f_batch(self, base, u, v, xs):
        """Objective at each candidate in ``xs``; charged as separate evaluations."""
        n_r, n_t = base.shape
        # same charges as rate_from_h_bar plus the rank-one update
        per_eval = u.size * v.size + n_r * n_t * n_t + n_r * n_t * n_r + n_r**3 // 3
        self.counter.add(per_eval * len(xs))
        H = base[None] + xs[:, None, None] * np.outer(u, v)[None]
        S = np.eye(n_r) + H @ self.Q @ np.conj(np.swapaxes(H, 1, 2))
        S = (S + np.conj(np.swapaxes(S, 1, 2))) / 2
        return np.linalg.slogdet(S)[1]

    def maximise(self, H_bar, u, v, x_now, f_now):
        """Return (x, f, H_bar) for the best of: current value, grid, refinement."""
        self.counter.add(u.size * v.size)
        base = H_bar - x_now * np.outer(u, v)
        vals = self.f_batch(base, u, v, self.grid)
        i = int(np.argmax(vals))
        best_x, best_f = self.grid[i], vals[i]
        fm, f0, fp = vals[i - 1], vals[i], vals[(i + 1) % len(vals)]
        curv = fm - 2 * f0 + fp
        if curv < 0:
            offset = 0.5 * self.h * (fm - fp) / curv
            x_ref = self.grid[i] * np.exp(1j * offset)
            f_ref = self.f(base, u, v, x_ref)
            if f_ref > best_f:
                best_x, best_f = x_ref, f_ref
        if best_f <= f_now:
            return x_now, f_now, H_bar
        self.counter.add(u.size * v.size)
        return best_x, best_f, base + best_x * np.outer(u, v)


def ao_run(
    initial: OptimPoint,
    inst: Instance,
    config: AoConfig,
    counter: MultCounter | None = None,
) -> tuple[AoTrace, OptimPoint]:
    """Coordinate ascent: every transmit atom, every receive atom, then Q.

    One outer iteration sweeps all L*M + K*N phase elements (each by grid
    search plus one parabolic refinement) and finishes with the
    capacity-achieving Q for the resulting channel.
    """
    initial.check_feasible(inst.power)
    counter = counter if counter is not None else MultCounter()
    x = initial.copy()
    _, _, H_bar = effective_h_bar(x, inst, counter)
    f = rate_from_h_bar(x.Q, H_bar, counter)
    trace = AoTrace(f_initial=f)
    L, M = x.phi.shape
    K, N = x.psi.shape
    n_r, n_t = H_bar.shape

    def note(val):
        trace.inner_f.append(val)
        trace.inner_mults.append(counter.mults)

    for it in range(1, config.max_outer_iters + 1):
        f_start = f
        search = _ElementSearch(x.Q, config.phase_grid_points, counter)

        # transmit layers
        Z = effective_h_bar(x, inst, counter)[0]
        ZG = counter.mm(Z, inst.G_bar)
        suffixes = transmit_suffixes(inst.chain_tx, x.phi)
        counter.add(max(L - 2, 0) * M**3 + (M * M if L > 1 else 0))
        B = inst.chain_tx.boundary
        for l in range(L):
            left = counter.mm(ZG, suffixes[l]) if l < L - 1 else ZG  # N_r x M
            for m in range(M):
                x.phi[l, m], f, H_bar = search.maximise(H_bar, left[:, m], B[m], x.phi[l, m], f)
                note(f)
            if l < L - 1:
                B = counter.mm(inst.chain_tx.inner[l], x.phi[l][:, None] * B)
                counter.add(M * n_t)

        # receive layers
        P = effective_h_bar(x, inst, counter)[1]
        GP = counter.mm(inst.G_bar, P)
        suffixes = receive_suffixes(inst.chain_rx, x.psi)
        counter.add(max(K - 2, 0) * N**3 + (N * N if K > 1 else 0))
        X = inst.chain_rx.boundary
        for k in range(K):
            right = counter.mm(suffixes[k], GP) if k < K - 1 else GP  # N x N_t
            for n in range(N):
                x.psi[k, n], f, H_bar = search.maximise(H_bar, X[:, n], right[n], x.psi[k, n], f)
                note(f)
            if k < K - 1:
                X = counter.mm(X * x.psi[k][None, :], inst.chain_rx.inner[k])
                counter.add(n_r * N)

        # covariance
        counter.add(n_t * n_t * n_r + n_t**3 + n_t**3)
        Q_new, f_q = capacity_covariance(H_bar, inst.power)
        if f_q >= f:
            x.Q, f = Q_new, f_q
        note(f)

        trace.records.append(IterRecord(it, f, f / LN2, (0.0, 0.0, 0.0), (0, 0, 0), counter.mults))
        if abs(f - f_start) < config.rel_tol * max(abs(f_start), 1e-300):
            trace.status = "converged"
            break
    return trace, x


def fixed_phase_rate(mode: str, inst: Instance, seed: int = 0) -> float:
    """Rate in bits/s/Hz with non-optimised phases and water-filled Q.

    ``"equal"`` puts every phase at pi/2; ``"random"`` draws each phase
    uniformly from [0, 2 pi) using ``seed``.
    """
    L, M = inst.chain_tx.layer_count, inst.chain_tx.atoms
    K, N = inst.chain_rx.layer_count, inst.chain_rx.atoms
    if mode == "equal":
        phi = np.full((L, M), 1j)
        psi = np.full((K, N), 1j)
    elif mode == "random":
        rng = np.random.default_rng(seed)
        phi = np.exp(1j * rng.uniform(0, 2 * np.pi, size=(L, M)))
        psi = np.exp(1j * rng.uniform(0, 2 * np.pi, size=(K, N)))
    else:
        raise ValueError(f"mode must be 'equal' or 'random', got {mode!r}")
    point = OptimPoint(np.zeros((inst.chain_tx.antennas,) * 2, dtype=complex), phi, psi)
    _, _, H_bar = effective_h_bar(point, inst)
    return capacity_covariance(H_bar, inst.power)[1] / LN2


def iid_channel(n_r: int, n_t: int, pathloss_db: float, seed: int) -> np.ndarray:
    """Antenna-to-antenna i.i.d. Rayleigh matrix with the given path loss."""
    rng = np.random.default_rng(seed)
    pl = 10.0 ** (-pathloss_db / 10.0)
    return np.sqrt(pl / 2) * (
        rng.standard_normal((n_r, n_t)) + 1j * rng.standard_normal((n_r, n_t))
    )


def digital_precoding_rate(H: np.ndarray, noise_power: float, power: float) -> float:
    """Water-filling capacity of a conventional MIMO channel H, in bits/s/Hz."""
    if power <= 0:
        return 0.0
    return capacity_covariance(H / np.sqrt(noise_power), power)[1] / LN2
