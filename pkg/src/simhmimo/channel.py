"""Spatially correlated Rayleigh channel between the two stacks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from simhmimo.geometry import SimGeometry, intra_distance_matrix

__all__ = [
    "LinkParams",
    "ChannelRealization",
    "EffectiveChannel",
    "correlation_matrix",
    "psd_sqrt",
    "free_space_loss_db",
    "path_loss_db",
    "draw_channel",
    "effective_channel",
]


@dataclass(frozen=True)
class LinkParams:
    """Large-scale link budget, all in SI units (metres, watts)."""

    distance: float = 250.0
    ref_distance: float = 1.0
    exponent: float = 3.5
    shadow_sigma_db: float = 9.0
    noise_power: float = 1e-14
    tx_power: float = 0.1
    wavelength: float = 0.05


@dataclass(frozen=True)
class ChannelRealization:
    G: np.ndarray
    corr_tx_sqrt: np.ndarray
    corr_rx_sqrt: np.ndarray
    pathloss_db: float
    noise_power: float
    seed: int

    @property
    def pathloss_linear(self) -> float:
        return 10.0 ** (-self.pathloss_db / 10.0)

    @property
    def G_bar(self) -> np.ndarray:
        return self.G / np.sqrt(self.noise_power)


@dataclass(frozen=True)
class EffectiveChannel:
    H: np.ndarray
    H_bar: np.ndarray


def correlation_matrix(geometry: SimGeometry) -> np.ndarray:
    """sinc(2 r / lambda) correlation between the atoms of one surface."""
    # np.sinc is the normalised sinc, sin(pi x) / (pi x)
    return np.sinc(2.0 * intra_distance_matrix(geometry) / geometry.wavelength)


def psd_sqrt(matrix: np.ndarray, atol: float = 1e-10) -> np.ndarray:
    """Hermitian square root with negative eigenvalues clipped to zero."""
    matrix = np.asarray(matrix)
    scale = max(np.abs(matrix).max(), 1.0)
    if not np.allclose(matrix, matrix.conj().T, rtol=0.0, atol=atol * scale):
        raise ValueError("psd_sqrt requires a symmetric/Hermitian matrix")
    vals, vecs = np.linalg.eigh((matrix + matrix.conj().T) / 2)
    root = np.sqrt(np.clip(vals, 0.0, None))
    return (vecs * root) @ vecs.conj().T


def free_space_loss_db(ref_distance: float, wavelength: float) -> float:
    return 20.0 * np.log10(4 * np.pi * ref_distance / wavelength)


def path_loss_db(
    distance: float,
    ref_distance: float,
    exponent: float,
    shadow_sigma_db: float,
    rng: np.random.Generator | None,
    wavelength: float,
) -> float:
    """Log-distance path loss with log-normal shadowing, in dB."""
    if distance < ref_distance:
        raise ValueError(f"distance {distance} is below the reference distance {ref_distance}")
    loss = free_space_loss_db(ref_distance, wavelength) + 10 * exponent * np.log10(
        distance / ref_distance
    )
    if shadow_sigma_db > 0:
        if rng is None:
            raise ValueError("shadow fading needs a random generator")
        loss += rng.normal(0.0, shadow_sigma_db)
    return float(loss)


def draw_channel(
    geometry_tx: SimGeometry,
    geometry_rx: SimGeometry,
    link: LinkParams,
    seed: int,
    corr_tx_sqrt: np.ndarray | None = None,
    corr_rx_sqrt: np.ndarray | None = None,
) -> ChannelRealization:
    """Draw G = R_R^{1/2} G~ R_T^{1/2} with G~ ~ CN(0, PL I).

    The shadowing term is drawn first from the seeded stream, then G~.
    Precomputed correlation roots may be passed to skip the eigensolves.
    """
    rng = np.random.default_rng(seed)
    pl_db = path_loss_db(
        link.distance,
        link.ref_distance,
        link.exponent,
        link.shadow_sigma_db,
        rng,
        link.wavelength,
    )
    if corr_tx_sqrt is None:
        corr_tx_sqrt = psd_sqrt(correlation_matrix(geometry_tx))
    if corr_rx_sqrt is None:
        corr_rx_sqrt = psd_sqrt(correlation_matrix(geometry_rx))
    n, m = geometry_rx.atoms_per_layer, geometry_tx.atoms_per_layer
    pl_lin = 10.0 ** (-pl_db / 10.0)
    g_iid = np.sqrt(pl_lin / 2) * (
        rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    )
    G = corr_rx_sqrt @ g_iid @ corr_tx_sqrt
    return ChannelRealization(
        G=G,
        corr_tx_sqrt=corr_tx_sqrt,
        corr_rx_sqrt=corr_rx_sqrt,
        pathloss_db=pl_db,
        noise_power=link.noise_power,
        seed=seed,
    )


def effective_channel(Z, G, P, noise_power: float) -> EffectiveChannel:
    if Z.shape[1] != G.shape[0] or G.shape[1] != P.shape[0]:
        raise ValueError(
            f"non-conformable shapes Z{Z.shape} G{G.shape} P{P.shape}"
        )
    H = Z @ G @ P
    return EffectiveChannel(H=H, H_bar=H / np.sqrt(noise_power))
