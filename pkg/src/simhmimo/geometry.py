"""Meta-atom lattice layout and the distances used by the diffraction model.

Atom and antenna indices in the public functions are 1-based, matching the
usual row/column numbering of a uniform planar array. The vectorised
``*_matrix`` helpers return 0-based arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SimGeometry",
    "atom_plane_indices",
    "intra_surface_distance",
    "inter_layer_distance",
    "antenna_to_surface_distance",
    "intra_distance_matrix",
    "inter_layer_distance_matrix",
    "antenna_distance_matrix",
]


@dataclass(frozen=True)
class SimGeometry:
    """Physical layout of one metasurface stack and the antenna array behind it.

    ``side`` selects the antenna-distance convention: ``"tx"`` for the
    transmitter stack and ``"rx"`` for the receiver stack.
    """

    side_count: int
    layer_count: int
    element_spacing: float
    thickness: float
    antenna_count: int
    wavelength: float
    element_area: float | None = None
    side: str = "tx"
    _area: float = field(init=False, repr=False)

    def __post_init__(self):
        if self.side_count < 1:
            raise ValueError(f"side_count must be >= 1, got {self.side_count}")
        if self.layer_count < 1:
            raise ValueError(f"layer_count must be >= 1, got {self.layer_count}")
        if self.antenna_count < 1:
            raise ValueError(f"antenna_count must be >= 1, got {self.antenna_count}")
        for name in ("element_spacing", "thickness", "wavelength"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.side not in ("tx", "rx"):
            raise ValueError(f"side must be 'tx' or 'rx', got {self.side!r}")
        area = self.element_area
        if area is None:
            # each atom owns one lattice cell
            area = self.element_spacing**2
        elif not area > 0:
            raise ValueError(f"element_area must be positive, got {area}")
        object.__setattr__(self, "_area", float(area))

    @property
    def atoms_per_layer(self) -> int:
        return self.side_count**2

    @property
    def layer_spacing(self) -> float:
        return self.thickness / self.layer_count

    @property
    def area(self) -> float:
        return self._area


def atom_plane_indices(m: int, side_count: int) -> tuple[int, int]:
    """Return the (column, row) position of 1-based atom ``m``."""
    if not 1 <= m <= side_count**2:
        raise IndexError(f"atom index {m} outside [1, {side_count**2}]")
    return (m - 1) % side_count + 1, math.ceil(m / side_count)


def intra_surface_distance(m: int, m2: int, geometry: SimGeometry) -> float:
    mx, mz = atom_plane_indices(m, geometry.side_count)
    nx, nz = atom_plane_indices(m2, geometry.side_count)
    return geometry.element_spacing * math.hypot(mz - nz, mx - nx)


def inter_layer_distance(m: int, m2: int, geometry: SimGeometry) -> float:
    r = intra_surface_distance(m, m2, geometry)
    return math.sqrt(r * r + geometry.layer_spacing**2)


def antenna_to_surface_distance(s: int, m: int, geometry: SimGeometry) -> float:
    """Distance between antenna ``s`` of the linear array and atom ``m`` of the
    boundary layer.

    The array runs along the z axis with half-wavelength spacing and shares
    its centre with the surface.
    """
    if not 1 <= s <= geometry.antenna_count:
        raise IndexError(f"antenna index {s} outside [1, {geometry.antenna_count}]")
    mx, mz = atom_plane_indices(m, geometry.side_count)
    centre = (geometry.side_count + 1) / 2
    ant_offset = (s - (geometry.antenna_count + 1) / 2) * geometry.wavelength / 2
    spacing = geometry.element_spacing
    dz = (mz - centre) * spacing - ant_offset
    if geometry.side == "tx":
        dx = (mx - centre) * spacing
    else:
        dx = (centre - mx) * spacing
    return math.sqrt(dz * dz + dx * dx + geometry.layer_spacing**2)


def _lattice(geometry: SimGeometry) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(geometry.atoms_per_layer)
    return idx % geometry.side_count + 1, idx // geometry.side_count + 1


def intra_distance_matrix(geometry: SimGeometry) -> np.ndarray:
    """All pairwise in-plane atom distances, shape (M, M)."""
    x, z = _lattice(geometry)
    return geometry.element_spacing * np.hypot(
        z[:, None] - z[None, :], x[:, None] - x[None, :]
    )


def inter_layer_distance_matrix(geometry: SimGeometry) -> np.ndarray:
    r = intra_distance_matrix(geometry)
    return np.sqrt(r**2 + geometry.layer_spacing**2)


def antenna_distance_matrix(geometry: SimGeometry) -> np.ndarray:
    """Atom-to-antenna distances, shape (M, antenna_count)."""
    x, z = _lattice(geometry)
    centre = (geometry.side_count + 1) / 2
    s = np.arange(1, geometry.antenna_count + 1)
    ant_offset = (s - (geometry.antenna_count + 1) / 2) * geometry.wavelength / 2
    spacing = geometry.element_spacing
    dz = (z[:, None] - centre) * spacing - ant_offset[None, :]
    sign = 1.0 if geometry.side == "tx" else -1.0
    dx = sign * (x - centre) * spacing
    return np.sqrt(dz**2 + dx[:, None] ** 2 + geometry.layer_spacing**2)
