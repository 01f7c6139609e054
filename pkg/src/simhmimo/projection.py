"""Euclidean projections onto the feasible sets, and capacity water-filling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from simhmimo.counting import NULL, MultCounter

__all__ = [
    "WaterFillingResult",
    "project_unit_modulus",
    "waterfill_projection",
    "project_covariance",
    "capacity_waterfill",
    "capacity_covariance",
]


@dataclass(frozen=True)
class WaterFillingResult:
    eigenvalues_in: np.ndarray
    allocations: np.ndarray
    water_level: float


def project_unit_modulus(v: np.ndarray) -> np.ndarray:
    """Nearest unit-modulus point, entrywise; zero entries map to 1."""
    v = np.asarray(v, dtype=complex)
    mag = np.abs(v)
    out = np.ones_like(v)
    nz = mag > 0
    out[nz] = v[nz] / mag[nz]
    return out


def waterfill_projection(sigma: np.ndarray, power: float, max_iter: int = 200) -> WaterFillingResult:
    """Solve min sum (d_i - sigma_i)^2 s.t. sum d_i <= P, d_i >= 0.

    The solution is d_i = (sigma_i - gamma)_+; gamma is found by bisection
    on [0, max sigma] and then fixed exactly from the active set.
    """
    sigma = np.asarray(sigma, dtype=float)
    clipped = np.clip(sigma, 0.0, None)
    if clipped.sum() <= power:
        return WaterFillingResult(sigma, clipped, 0.0)
    lo, hi = 0.0, float(sigma.max())
    tol = 1e-10 * max(power, 1.0)
    for _ in range(max_iter):
        gamma = 0.5 * (lo + hi)
        excess = np.clip(sigma - gamma, 0.0, None).sum() - power
        if abs(excess) <= tol:
            break
        if excess > 0:
            lo = gamma
        else:
            hi = gamma
    active = sigma > gamma
    gamma = (sigma[active].sum() - power) / active.sum()
    return WaterFillingResult(sigma, np.clip(sigma - gamma, 0.0, None), float(gamma))


def project_covariance(
    Y: np.ndarray, power: float, counter: MultCounter = NULL, atol: float = 1e-8
) -> np.ndarray:
    """Nearest matrix to Y in {Q : Q >= 0, tr Q <= P} (Frobenius norm)."""
    Y = np.asarray(Y, dtype=complex)
    scale = max(np.abs(Y).max(), 1.0)
    if np.abs(Y - Y.conj().T).max() > atol * scale:
        raise ValueError("project_covariance expects a Hermitian matrix")
    Y = (Y + Y.conj().T) / 2
    sigma, U = counter.eigh(Y)
    wf = waterfill_projection(sigma, power)
    counter.add(U.shape[0] ** 2 + U.shape[0] ** 2 * (U.shape[0] + 1) // 2)
    Q = (U * wf.allocations) @ U.conj().T
    return (Q + Q.conj().T) / 2


def capacity_waterfill(gains: np.ndarray, power: float) -> tuple[np.ndarray, float]:
    """Capacity-achieving powers p_i = (mu - 1/g_i)_+ with sum p_i = P.

    Uses the sorted active-set closed form. Returns (powers, mu); channels
    with zero gain get no power.
    """
    gains = np.asarray(gains, dtype=float)
    powers = np.zeros_like(gains)
    if power <= 0:
        return powers, 0.0
    order = np.argsort(gains)[::-1]
    g = gains[order]
    g = g[g > 0]
    mu = 0.0
    for n in range(len(g), 0, -1):
        mu = (power + np.sum(1.0 / g[:n])) / n
        if mu - 1.0 / g[n - 1] > 0:
            break
    p = np.clip(mu - 1.0 / g, 0.0, None)
    powers[order[: len(g)]] = p
    return powers, float(mu)


def capacity_covariance(H_bar: np.ndarray, power: float) -> tuple[np.ndarray, float]:
    """Capacity-achieving input covariance for H_bar and the rate in nats."""
    gains, V = np.linalg.eigh(H_bar.conj().T @ H_bar)
    gains = np.clip(gains, 0.0, None)
    p, _ = capacity_waterfill(gains, power)
    Q = (V * p) @ V.conj().T
    return (Q + Q.conj().T) / 2, float(np.sum(np.log1p(p * gains)))
