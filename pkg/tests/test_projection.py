import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from helpers import bisection_waterfill, dykstra_projection
from simhmimo.projection import (
    capacity_covariance,
    capacity_waterfill,
    project_covariance,
    project_unit_modulus,
    waterfill_projection,
)


def herm(rng, n, scale=1.0):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (A + A.conj().T) / 2


def test_unit_modulus_examples():
    assert project_unit_modulus(np.array([3 + 4j]))[0] == pytest.approx(0.6 + 0.8j, abs=1e-15)
    assert project_unit_modulus(np.array([0j]))[0] == 1 + 0j


def test_unit_modulus_beats_circle_grid(rng):
    grid = np.exp(2j * np.pi * np.arange(10_000) / 10_000)
    for u in rng.normal(size=20) + 1j * rng.normal(size=20):
        best = project_unit_modulus(np.array([u]))[0]
        assert abs(best - u) <= np.abs(grid - u).min() + 1e-15


@given(arrays(np.complex128, 8, elements=st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False)))
def test_unit_modulus_properties(v):
    out = project_unit_modulus(v)
    assert np.allclose(np.abs(out), 1.0, atol=1e-15, rtol=0)
    assert np.allclose(project_unit_modulus(out), out, atol=1e-15, rtol=0)


def test_waterfill_two_level():
    wf = waterfill_projection(np.array([3.0, 1.0]), 2.0)
    assert np.allclose(wf.allocations, [2.0, 0.0], atol=1e-12)
    assert wf.water_level == pytest.approx(1.0, abs=1e-12)


def test_waterfill_feasible_spectrum_untouched():
    wf = waterfill_projection(np.array([0.5, 0.2, -0.1]), 2.0)
    assert wf.water_level == 0.0
    assert np.array_equal(wf.allocations, [0.5, 0.2, 0.0])


@given(
    arrays(np.float64, st.integers(1, 8), elements=st.floats(-10, 10, allow_nan=False)),
    st.floats(1e-3, 10),
)
def test_waterfill_kkt(sigma, power):
    wf = waterfill_projection(sigma, power)
    d, gamma = wf.allocations, wf.water_level
    assert gamma >= 0
    assert np.allclose(d, np.clip(sigma - gamma, 0, None), atol=1e-9, rtol=0)
    assert d.sum() <= power + 1e-9 * max(power, 1)
    if np.clip(sigma, 0, None).sum() > power:
        assert d.sum() == pytest.approx(power, abs=1e-9 * max(power, 1))


def test_project_covariance_feasible_input_unchanged(rng):
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    Y = A @ A.conj().T
    Y *= 0.5 / np.trace(Y).real
    assert np.allclose(project_covariance(Y, 1.0), Y, atol=1e-14)


def test_project_covariance_matches_dykstra(rng):
    for _ in range(20):
        Y = herm(rng, 3, scale=rng.uniform(0.2, 3))
        P = rng.uniform(0.1, 2)
        assert np.linalg.norm(project_covariance(Y, P) - dykstra_projection(Y, P)) < 1e-6


def test_project_covariance_rejects_non_hermitian():
    with pytest.raises(ValueError):
        project_covariance(np.array([[1, 2], [0, 1]], dtype=complex), 1.0)


def test_project_covariance_idempotent_and_nonexpansive(rng):
    for _ in range(100):
        A, B = herm(rng, 4), herm(rng, 4)
        pa, pb = project_covariance(A, 1.5), project_covariance(B, 1.5)
        assert np.linalg.norm(project_covariance(pa, 1.5) - pa) < 1e-12
        assert np.linalg.norm(pa - pb) <= np.linalg.norm(A - B) + 1e-12
        w = np.linalg.eigvalsh(pa)
        assert w.min() >= -1e-12 and w.sum() <= 1.5 + 1e-9


def test_capacity_waterfill_matches_bisection(rng):
    for _ in range(50):
        g = rng.exponential(size=rng.integers(1, 7)) * 10 ** rng.uniform(-2, 2)
        P = rng.uniform(0.01, 5)
        p, mu = capacity_waterfill(g, P)
        assert np.allclose(p, bisection_waterfill(g, P), atol=1e-9)
        assert p.sum() == pytest.approx(P, rel=1e-12)
        active = p > 0
        assert np.allclose(p[active] + 1 / g[active], mu)


def test_capacity_waterfill_edge_cases():
    p, mu = capacity_waterfill(np.array([1.0, 0.0]), 1.0)
    assert np.array_equal(p, [1.0, 0.0]) and mu == pytest.approx(2.0)
    p, _ = capacity_waterfill(np.array([1.0, 2.0]), 0.0)
    assert np.array_equal(p, [0.0, 0.0])


def test_capacity_covariance_beats_random_feasible(rng):
    H = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
    Q, rate = capacity_covariance(H, 1.0)
    assert np.trace(Q).real == pytest.approx(1.0)
    assert rate == pytest.approx(np.linalg.slogdet(np.eye(3) + H @ Q @ H.conj().T)[1], rel=1e-12)
    for _ in range(50):
        A = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        R = A @ A.conj().T
        R /= np.trace(R).real
        assert np.linalg.slogdet(np.eye(3) + H @ R @ H.conj().T)[1] <= rate + 1e-12
