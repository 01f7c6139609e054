import numpy as np
import pytest
from hypothesis import settings

from simhmimo.channel import LinkParams
from simhmimo.geometry import SimGeometry
from simhmimo.objective import build_instance

settings.register_profile("ci", max_examples=50, deadline=None)
settings.load_profile("ci")

WAVELENGTH = 0.05


def make_instance(side=4, layers_tx=2, layers_rx=2, n_t=4, n_r=None, seed=0, link=None):
    n_r = n_t if n_r is None else n_r
    tx = SimGeometry(side, layers_tx, WAVELENGTH / 2, 0.04, n_t, WAVELENGTH, side="tx")
    rx = SimGeometry(side, layers_rx, WAVELENGTH / 2, 0.04, n_r, WAVELENGTH, side="rx")
    return build_instance(tx, rx, link or LinkParams(), seed)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_instance():
    return make_instance(side=3, n_t=2, seed=7)
