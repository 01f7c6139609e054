"""Rayleigh-Sommerfeld transfer matrices and the cascaded SIM responses.

Phase layers are stored as 2-D complex arrays of shape ``(layers, atoms)``;
row ``l`` holds the unit-modulus coefficients of layer ``l + 1``. Diagonal
phase matrices are never materialised: applying ``diag(phi) @ X`` is a row
scaling ``phi[:, None] * X``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from simhmimo.geometry import (
    SimGeometry,
    antenna_distance_matrix,
    inter_layer_distance_matrix,
)

__all__ = [
    "TransferChain",
    "rs_coefficient",
    "build_transfer_chain",
    "sim_transmit_matrix",
    "sim_receive_matrix",
    "transmit_prefixes",
    "transmit_suffixes",
    "receive_prefixes",
    "receive_suffixes",
]


def rs_coefficient(area, axial_gap, distance, wavelength):
    """Free-space diffraction coefficient between two parallel apertures.

    Works elementwise on arrays. The obliquity factor is the cosine of the
    angle between the propagation vector and the surface normal,
    ``axial_gap / distance``.
    """
    distance = np.asarray(distance, dtype=float)
    if np.any(distance <= 0):
        raise ValueError("distance must be positive")
    cos_chi = axial_gap / distance
    return (
        area
        * cos_chi
        / distance
        * (1.0 / (2 * np.pi * distance) - 1j / wavelength)
        * np.exp(2j * np.pi * distance / wavelength)
    )


@dataclass(frozen=True)
class TransferChain:
    """Fixed diffraction matrices of one stack.

    Transmit side: ``boundary`` is W^1 (M x N_t) and ``inner`` holds W^2..W^L.
    Receive side: ``boundary`` is U^1 (N_r x N) and ``inner`` holds U^2..U^K.
    """

    boundary: np.ndarray
    inner: tuple[np.ndarray, ...]
    side: str

    @property
    def layer_count(self) -> int:
        return len(self.inner) + 1

    @property
    def atoms(self) -> int:
        return self.boundary.shape[0] if self.side == "tx" else self.boundary.shape[1]

    @property
    def antennas(self) -> int:
        return self.boundary.shape[1] if self.side == "tx" else self.boundary.shape[0]

    def spectral_norms(self) -> tuple[float, list[float]]:
        """Spectral norm of the boundary matrix and of each inner matrix."""
        return (
            float(np.linalg.norm(self.boundary, 2)),
            [float(np.linalg.norm(w, 2)) for w in self.inner],
        )


def build_transfer_chain(geometry: SimGeometry) -> TransferChain:
    d = geometry.layer_spacing
    lam = geometry.wavelength
    area = geometry.area
    inner_mat = rs_coefficient(area, d, inter_layer_distance_matrix(geometry), lam)
    inner_mat.setflags(write=False)
    boundary = rs_coefficient(area, d, antenna_distance_matrix(geometry), lam)
    if geometry.side == "rx":
        # antennas receive from the output layer: U^1 is N_r x N
        boundary = np.ascontiguousarray(boundary.T)
    boundary.setflags(write=False)
    inner = tuple(inner_mat for _ in range(geometry.layer_count - 1))
    return TransferChain(boundary=boundary, inner=inner, side=geometry.side)


def _check_phases(chain: TransferChain, phases: np.ndarray, side: str):
    if chain.side != side:
        raise ValueError(f"expected a {side} chain, got {chain.side}")
    phases = np.asarray(phases)
    if phases.shape != (chain.layer_count, chain.atoms):
        raise ValueError(
            f"phase stack shape {phases.shape} does not match chain "
            f"({chain.layer_count}, {chain.atoms})"
        )
    return phases


def transmit_prefixes(chain: TransferChain, phi: np.ndarray) -> list[np.ndarray]:
    """B_l = W^l Phi^{l-1} W^{l-1} ... Phi^1 W^1 for l = 1..L (each M x N_t)."""
    out = [chain.boundary]
    for l, w in enumerate(chain.inner, start=1):
        out.append(w @ (phi[l - 1][:, None] * out[-1]))
    return out


def transmit_suffixes(chain: TransferChain, phi: np.ndarray) -> list[np.ndarray]:
    """S_l = Phi^L W^L ... Phi^{l+1} W^{l+1} for l = 1..L (each M x M, S_L = I)."""
    L = chain.layer_count
    out = [None] * L
    out[L - 1] = np.eye(chain.atoms, dtype=complex)
    for l in range(L - 1, 0, -1):
        # S_{l} = S_{l+1} Phi^{l+1} W^{l+1}
        out[l - 1] = (out[l] * phi[l][None, :]) @ chain.inner[l - 1]
    return out


def receive_prefixes(chain: TransferChain, psi: np.ndarray) -> list[np.ndarray]:
    """X_k = U^1 Psi^1 ... Psi^{k-1} U^k for k = 1..K (each N_r x N)."""
    out = [chain.boundary]
    for k, u in enumerate(chain.inner, start=1):
        out.append((out[-1] * psi[k - 1][None, :]) @ u)
    return out


def receive_suffixes(chain: TransferChain, psi: np.ndarray) -> list[np.ndarray]:
    """Y_k = U^{k+1} Psi^{k+1} ... U^K Psi^K for k = 1..K (each N x N, Y_K = I)."""
    K = chain.layer_count
    out = [None] * K
    out[K - 1] = np.eye(chain.atoms, dtype=complex)
    for k in range(K - 1, 0, -1):
        out[k - 1] = chain.inner[k - 1] @ (psi[k][:, None] * out[k])
    return out


def sim_transmit_matrix(chain: TransferChain, phi: np.ndarray) -> np.ndarray:
    """P = Phi^L W^L ... Phi^1 W^1, shape (M, N_t)."""
    phi = _check_phases(chain, phi, "tx")
    out = phi[0][:, None] * chain.boundary
    for l, w in enumerate(chain.inner, start=1):
        out = phi[l][:, None] * (w @ out)
    return out


def sim_receive_matrix(chain: TransferChain, psi: np.ndarray) -> np.ndarray:
    """Z = U^1 Psi^1 U^2 Psi^2 ... U^K Psi^K, shape (N_r, N)."""
    psi = _check_phases(chain, psi, "rx")
    out = chain.boundary * psi[0][None, :]
    for k, u in enumerate(chain.inner, start=1):
        out = (out @ u) * psi[k][None, :]
    return out
