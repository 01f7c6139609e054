import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from simhmimo.geometry import (
    SimGeometry,
    antenna_distance_matrix,
    antenna_to_surface_distance,
    atom_plane_indices,
    inter_layer_distance,
    inter_layer_distance_matrix,
    intra_distance_matrix,
    intra_surface_distance,
)

LAM = 0.05


def geom(side=10, layers=7, spacing=0.025, n_ant=10, which="tx"):
    return SimGeometry(side, layers, spacing, 0.04, n_ant, LAM, side=which)


@pytest.mark.parametrize("m, expected", [(1, (1, 1)), (15, (5, 2)), (100, (10, 10))])
def test_plane_indices(m, expected):
    assert atom_plane_indices(m, 10) == expected


@pytest.mark.parametrize("m", [0, 101, -3])
def test_plane_indices_out_of_range(m):
    with pytest.raises(IndexError):
        atom_plane_indices(m, 10)


@given(st.integers(1, 12))
def test_plane_indices_bijective(side):
    cells = {atom_plane_indices(m, side) for m in range(1, side * side + 1)}
    assert cells == {(x, z) for x in range(1, side + 1) for z in range(1, side + 1)}


def test_intra_examples():
    g = geom()
    assert intra_surface_distance(1, 1, g) == 0
    assert intra_surface_distance(1, 2, g) == pytest.approx(0.025, rel=1e-15)
    assert intra_surface_distance(1, 12, g) == pytest.approx(0.025 * math.sqrt(2), rel=1e-15)


def test_inter_layer_examples():
    g = geom()
    assert inter_layer_distance(5, 5, g) == pytest.approx(0.04 / 7, rel=1e-15)
    g2 = SimGeometry(10, 1, 0.025, 0.005714, 1, LAM)
    # scalar oracle: sqrt(0.025^2 + 0.005714^2)
    assert inter_layer_distance(1, 2, g2) == pytest.approx(0.025644683581592505, rel=1e-14)


def test_inter_layer_symmetric(rng):
    g = geom()
    for m, n in rng.integers(1, 101, size=(100, 2)):
        assert inter_layer_distance(int(m), int(n), g) == inter_layer_distance(int(n), int(m), g)


def test_pythagorean_identity():
    g = geom(side=5, layers=3)
    r = intra_distance_matrix(g)
    R = inter_layer_distance_matrix(g)
    assert np.allclose(R**2 - r**2, g.layer_spacing**2, rtol=1e-12, atol=0)


@given(st.integers(2, 6), st.data())
def test_triangle_inequality(side, data):
    g = geom(side=side)
    idx = st.integers(1, side * side)
    a, b, c = data.draw(idx), data.draw(idx), data.draw(idx)
    ab = intra_surface_distance(a, b, g)
    bc = intra_surface_distance(b, c, g)
    ac = intra_surface_distance(a, c, g)
    assert ac <= ab + bc + 1e-15


def test_matrix_helpers_agree_with_scalar_forms():
    g = geom(side=4, layers=3, n_ant=3)
    M = g.atoms_per_layer
    r = intra_distance_matrix(g)
    ant = antenna_distance_matrix(g)
    for m in range(1, M + 1):
        for n in range(1, M + 1):
            assert r[m - 1, n - 1] == pytest.approx(intra_surface_distance(m, n, g), abs=1e-15)
        for s in range(1, 4):
            assert ant[m - 1, s - 1] == pytest.approx(antenna_to_surface_distance(s, m, g), abs=1e-15)


def test_centred_single_antenna_hits_centre_atom():
    g = SimGeometry(5, 2, 0.025, 0.04, 1, LAM)
    assert antenna_to_surface_distance(1, 13, g) == pytest.approx(g.layer_spacing, rel=1e-15)


def test_antenna_distance_oracle():
    # values from an independent scalar evaluation of the two distance formulas
    tx, rx = geom(which="tx"), geom(which="rx")
    assert antenna_to_surface_distance(1, 1, tx) == pytest.approx(0.11264503123185013, rel=1e-14)
    assert antenna_to_surface_distance(1, 1, rx) == pytest.approx(0.11264503123185013, rel=1e-14)
    assert antenna_to_surface_distance(4, 37, tx) == pytest.approx(0.0379328757310132, rel=1e-14)


def test_receive_form_is_mirrored_transmit_form():
    tx, rx = geom(side=6, which="tx"), geom(side=6, which="rx")
    side = 6
    for s in (1, 4, 10):
        for m in range(1, 37):
            mx, mz = atom_plane_indices(m, side)
            mirrored = (mz - 1) * side + (side + 1 - mx)
            assert antenna_to_surface_distance(s, m, rx) == pytest.approx(
                antenna_to_surface_distance(s, mirrored, tx), rel=1e-14
            )


def test_antenna_index_checked():
    with pytest.raises(IndexError):
        antenna_to_surface_distance(11, 1, geom())


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(side_count=0),
        dict(layer_count=0),
        dict(antenna_count=0),
        dict(thickness=0.0),
        dict(element_spacing=-1.0),
        dict(side="up"),
        dict(element_area=0.0),
    ],
)
def test_geometry_validation(kwargs):
    base = dict(side_count=3, layer_count=2, element_spacing=0.025, thickness=0.04, antenna_count=2, wavelength=LAM)
    base.update(kwargs)
    with pytest.raises(ValueError):
        SimGeometry(**base)


def test_defaults_and_area_override():
    g = geom(side=10, layers=7)
    assert g.atoms_per_layer == 100
    assert g.layer_spacing == pytest.approx(0.04 / 7)
    assert g.area == pytest.approx(0.025**2)
    assert SimGeometry(2, 1, 0.025, 0.04, 1, LAM, element_area=1e-4).area == 1e-4
