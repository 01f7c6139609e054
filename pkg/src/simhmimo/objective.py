"""Achievable-rate objective, its conjugate-coordinate gradients and a
Lipschitz bound for the gradient map.

All gradients are taken with respect to the conjugated variables, so a first
order change is ``df = tr(grad_Q dQ) + 2 Re(grad_phi^H dphi) + 2 Re(grad_psi^H dpsi)``
for Hermitian ``dQ``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from simhmimo.channel import ChannelRealization, LinkParams, draw_channel
from simhmimo.geometry import SimGeometry
from simhmimo.counting import NULL, MultCounter
from simhmimo.propagation import (
    TransferChain,
    build_transfer_chain,
    receive_prefixes,
    receive_suffixes,
    sim_receive_matrix,
    sim_transmit_matrix,
    transmit_prefixes,
    transmit_suffixes,
)

__all__ = [
    "Instance",
    "build_instance",
    "OptimPoint",
    "RateGradient",
    "LipschitzBound",
    "effective_h_bar",
    "rate_nats",
    "rate_bits",
    "rate_from_h_bar",
    "k_matrix",
    "gradient",
    "lipschitz_constant",
    "lipschitz_bound",
    "default_point",
    "random_point",
]

LN2 = np.log(2.0)


@dataclass(frozen=True)
class Instance:
    """Everything fixed during one optimisation: both stacks, the channel and
    the power budget."""

    chain_tx: TransferChain
    chain_rx: TransferChain
    realization: ChannelRealization
    power: float
    G_bar: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "G_bar", self.realization.G_bar)

    @property
    def noise_power(self) -> float:
        return self.realization.noise_power

    @property
    def dims(self) -> dict:
        return {
            "N_t": self.chain_tx.antennas,
            "N_r": self.chain_rx.antennas,
            "M": self.chain_tx.atoms,
            "N": self.chain_rx.atoms,
            "L": self.chain_tx.layer_count,
            "K": self.chain_rx.layer_count,
        }


def build_instance(tx: SimGeometry, rx: SimGeometry, link: LinkParams, seed: int) -> Instance:
    """Both transfer chains plus one seeded channel draw."""
    realization = draw_channel(tx, rx, link, seed)
    return Instance(build_transfer_chain(tx), build_transfer_chain(rx), realization, link.tx_power)


@dataclass
class OptimPoint:
    Q: np.ndarray
    phi: np.ndarray
    psi: np.ndarray

    def copy(self) -> "OptimPoint":
        return OptimPoint(self.Q.copy(), self.phi.copy(), self.psi.copy())

    def check_feasible(self, power: float, tol: float = 1e-9) -> None:
        Q = self.Q
        if not np.allclose(Q, Q.conj().T, atol=1e-12 * max(1.0, np.abs(Q).max())):
            raise ValueError("Q is not Hermitian")
        if np.trace(Q).real > power + tol:
            raise ValueError(f"trace(Q) = {np.trace(Q).real} exceeds power {power}")
        if np.linalg.eigvalsh(Q).min() < -1e-10 * max(power, 1.0):
            raise ValueError("Q is not positive semidefinite")
        for name, v in (("phi", self.phi), ("psi", self.psi)):
            if np.abs(np.abs(v) - 1).max(initial=0.0) > 1e-12:
                raise ValueError(f"{name} has entries off the unit circle")

    def distance(self, other: "OptimPoint") -> float:
        return float(
            np.sqrt(
                np.linalg.norm(self.Q - other.Q) ** 2
                + np.linalg.norm(self.phi - other.phi) ** 2
                + np.linalg.norm(self.psi - other.psi) ** 2
            )
        )


@dataclass
class RateGradient:
    grad_Q: np.ndarray
    grad_phi: np.ndarray
    grad_psi: np.ndarray

    def norm(self) -> float:
        return float(
            np.sqrt(
                np.linalg.norm(self.grad_Q) ** 2
                + np.linalg.norm(self.grad_phi) ** 2
                + np.linalg.norm(self.grad_psi) ** 2
            )
        )


def default_point(inst: Instance) -> OptimPoint:
    """Isotropic Q = (P / N_t) I and every phase at exp(j pi / 2)."""
    n_t = inst.chain_tx.antennas
    Q = (inst.power / n_t) * np.eye(n_t, dtype=complex)
    phi = np.full((inst.chain_tx.layer_count, inst.chain_tx.atoms), 1j, dtype=complex)
    psi = np.full((inst.chain_rx.layer_count, inst.chain_rx.atoms), 1j, dtype=complex)
    return OptimPoint(Q, phi, psi)


def random_point(inst: Instance, rng: np.random.Generator, full_power: bool = True) -> OptimPoint:
    """Uniform random phases and a random covariance with trace P (or below)."""
    n_t = inst.chain_tx.antennas
    A = rng.standard_normal((n_t, n_t)) + 1j * rng.standard_normal((n_t, n_t))
    Q = A @ A.conj().T
    scale = inst.power if full_power else inst.power * rng.uniform()
    Q *= scale / np.trace(Q).real
    phi = np.exp(2j * np.pi * rng.uniform(size=(inst.chain_tx.layer_count, inst.chain_tx.atoms)))
    psi = np.exp(2j * np.pi * rng.uniform(size=(inst.chain_rx.layer_count, inst.chain_rx.atoms)))
    return OptimPoint(Q, phi, psi)


def effective_h_bar(
    point: OptimPoint,
    inst: Instance,
    counter: MultCounter = NULL,
    P: np.ndarray | None = None,
    Z: np.ndarray | None = None,
):
    """Return (Z, P, H_bar) for the current phases.

    Either cascade may be supplied when its phases are unchanged.
    """
    L, K = inst.chain_tx.layer_count, inst.chain_rx.layer_count
    if P is None:
        P = sim_transmit_matrix(inst.chain_tx, point.phi)
        M, n_t = P.shape
        counter.add((L - 1) * M * M * n_t + L * M * n_t)
    if Z is None:
        Z = sim_receive_matrix(inst.chain_rx, point.psi)
        n_r, N = Z.shape
        counter.add((K - 1) * n_r * N * N + K * n_r * N)
    ZG = counter.mm(Z, inst.G_bar)
    H_bar = counter.mm(ZG, P)
    return Z, P, H_bar


def rate_from_h_bar(Q: np.ndarray, H_bar: np.ndarray, counter: MultCounter = NULL) -> float:
    HQ = counter.mm(H_bar, Q)
    S = counter.mm(HQ, H_bar.conj().T)
    S = np.eye(H_bar.shape[0]) + (S + S.conj().T) / 2
    return counter.logdet_psd(S)


def rate_nats(point: OptimPoint, inst: Instance, counter: MultCounter = NULL) -> float:
    """ln det(I + H_bar Q H_bar^H)."""
    _, _, H_bar = effective_h_bar(point, inst, counter)
    return rate_from_h_bar(point.Q, H_bar, counter)


def rate_bits(point: OptimPoint, inst: Instance) -> float:
    return rate_nats(point, inst) / LN2


def k_matrix(Q: np.ndarray, H_bar: np.ndarray) -> np.ndarray:
    """(I + H_bar Q H_bar^H)^{-1}, returned exactly Hermitian."""
    n_r = H_bar.shape[0]
    S = np.eye(n_r) + H_bar @ Q @ H_bar.conj().T
    K = np.linalg.solve(S, np.eye(n_r))
    return (K + K.conj().T) / 2


def gradient(
    point: OptimPoint,
    inst: Instance,
    counter: MultCounter = NULL,
    channel: tuple | None = None,
) -> RateGradient:
    """Closed-form gradients with respect to Q*, phi_l* and psi_k*.

    With B_l, S_l the transmit prefix/suffix cascades (P = S_l Phi^l B_l) and
    X_k, Y_k the receive ones (Z = X_k Psi^k Y_k)::

        grad_Q      = H_bar^H K H_bar
        grad_phi[l] = conj(diag(B_l Q H_bar^H K Z G_bar S_l))
        grad_psi[k] = conj(diag(Y_k G_bar P Q H_bar^H K X_k))

    ``channel`` may carry the ``(Z, P, H_bar)`` triple already computed for
    ``point`` so it is not rebuilt.
    """
    Q, phi, psi = point.Q, point.phi, point.psi
    if channel is None:
        channel = effective_h_bar(point, inst, counter)
    Z, P, H_bar = channel
    n_r, n_t = H_bar.shape
    M, N = P.shape[0], Z.shape[1]

    HQ = counter.mm(H_bar, Q)
    S = np.eye(n_r) + counter.mm(HQ, H_bar.conj().T)
    S = (S + S.conj().T) / 2
    V = counter.solve_psd(S, H_bar)  # K H_bar
    grad_Q = counter.mm(H_bar.conj().T, V)
    grad_Q = (grad_Q + grad_Q.conj().T) / 2

    QVh = counter.mm(Q, V.conj().T)  # Q H_bar^H K, N_t x N_r

    # transmit layers
    ZG = counter.mm(Z, inst.G_bar)  # N_r x M
    T = counter.mm(QVh, ZG)  # N_t x M
    B = transmit_prefixes(inst.chain_tx, phi)
    Sx = transmit_suffixes(inst.chain_tx, phi)
    L = inst.chain_tx.layer_count
    counter.add((L - 1) * (M * M * n_t + M * n_t))
    if L > 1:
        counter.add(M * M + max(L - 2, 0) * (M**3 + M * M))
    grad_phi = np.empty_like(phi)
    for l in range(L):
        TS = counter.mm(T, Sx[l]) if l < L - 1 else T
        grad_phi[l] = np.conj(np.einsum("mj,jm->m", B[l], TS))
        counter.add(M * n_t)

    # receive layers
    R = counter.mm(counter.mm(inst.G_bar, P), QVh)  # N x N_r
    X = receive_prefixes(inst.chain_rx, psi)
    Y = receive_suffixes(inst.chain_rx, psi)
    K = inst.chain_rx.layer_count
    counter.add((K - 1) * (n_r * N * N + n_r * N))
    if K > 1:
        counter.add(N * N + max(K - 2, 0) * (N**3 + N * N))
    grad_psi = np.empty_like(psi)
    for k in range(K):
        RX = counter.mm(R, X[k])  # N x N
        if k < K - 1:
            grad_psi[k] = np.conj(np.einsum("nj,jn->n", Y[k], RX))
            counter.add(N * N)
        else:
            grad_psi[k] = np.conj(np.diagonal(RX))
    return RateGradient(grad_Q, grad_phi, grad_psi)


@dataclass(frozen=True)
class LipschitzBound:
    """Constants entering the Lipschitz bound and the resulting value.

    ``a`` and ``b_k`` are the phase-independent norm-product bounds for the
    transmit and receive cascades; ``c``, ``d``, ``f`` are bounds for the
    spectral norms of H_bar, H_bar and Z combined, and P.
    """

    a: float
    b_k: float
    b: float
    c: float
    d: float
    f: float
    lam_Q: float
    lam_phi: float
    lam_psi: float

    @property
    def value(self) -> float:
        return float(np.sqrt(max(self.lam_Q**2, self.lam_phi**2, self.lam_psi**2)))


def lipschitz_bound(inst: Instance) -> LipschitzBound:
    bt, inner_t = inst.chain_tx.spectral_norms()
    br, inner_r = inst.chain_rx.spectral_norms()
    # unit-modulus diagonal factors have spectral norm one
    f = bt * float(np.prod(inner_t))
    z = br * float(np.prod(inner_r))
    a, b_k = f, z
    b = float(np.linalg.norm(inst.realization.G, 2))
    n0 = inst.noise_power
    P = inst.power
    c = z * b * f / np.sqrt(n0)
    d = c * z
    d_over_c = z
    lam_Q = a * b * c + b_k * b * d_over_c
    shared = (a + b_k) * P * b**2 * d_over_c**2 / n0
    lam_phi = 2 * b**2 * f * d_over_c**2 + shared
    lam_psi = 2 * b**2 * f**2 * d_over_c + shared
    return LipschitzBound(a, b_k, b, c, d, f, lam_Q, lam_phi, lam_psi)


def lipschitz_constant(inst: Instance) -> float:
    return lipschitz_bound(inst).value
