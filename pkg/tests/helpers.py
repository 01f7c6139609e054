"""Independent oracles shared by the unit and acceptance tests."""

import numpy as np

from simhmimo.objective import OptimPoint, rate_nats


def fd_gradient_errors(point: OptimPoint, inst, grad, h: float = 1e-6) -> dict[str, float]:
    """Worst central-difference mismatch per block, relative to the block's
    largest directional derivative.

    Phase entries are perturbed along their real and imaginary axes, where
    df = 2 Re(g) dx and 2 Im(g) dy. Q is perturbed along Hermitian basis
    directions: E_ii gives g_ii, E_ij + E_ji gives 2 Re g_ij and
    i(E_ij - E_ji) gives 2 Im g_ij.
    """

    def f(p):
        return rate_nats(p, inst)

    errors = {}
    n = point.Q.shape[0]
    fd, an = [], []
    for i in range(n):
        for j in range(i, n):
            dirs = []
            if i == j:
                E = np.zeros((n, n), dtype=complex)
                E[i, i] = 1
                dirs.append((E, grad.grad_Q[i, i].real))
            else:
                E = np.zeros((n, n), dtype=complex)
                E[i, j] = E[j, i] = 1
                dirs.append((E, 2 * grad.grad_Q[i, j].real))
                E = np.zeros((n, n), dtype=complex)
                E[i, j], E[j, i] = 1j, -1j
                dirs.append((E, 2 * grad.grad_Q[i, j].imag))
            for E, expected in dirs:
                hi = OptimPoint(point.Q + h * E, point.phi, point.psi)
                lo = OptimPoint(point.Q - h * E, point.phi, point.psi)
                fd.append((f(hi) - f(lo)) / (2 * h))
                an.append(expected)
    errors["Q"] = _rel(fd, an)

    for name in ("phi", "psi"):
        arr = getattr(point, name)
        g = getattr(grad, f"grad_{name}")
        fd, an = [], []
        for idx in np.ndindex(arr.shape):
            for unit, expected in ((1.0, 2 * g[idx].real), (1j, 2 * g[idx].imag)):
                plus, minus = arr.copy(), arr.copy()
                plus[idx] += h * unit
                minus[idx] -= h * unit
                kw_p = {name: plus}
                kw_m = {name: minus}
                hi = OptimPoint(point.Q, kw_p.get("phi", point.phi), kw_p.get("psi", point.psi))
                lo = OptimPoint(point.Q, kw_m.get("phi", point.phi), kw_m.get("psi", point.psi))
                fd.append((f(hi) - f(lo)) / (2 * h))
                an.append(expected)
        errors[name] = _rel(fd, an)
    return errors


def _rel(fd, an) -> float:
    fd, an = np.asarray(fd), np.asarray(an)
    scale = np.abs(an).max()
    if scale == 0:
        return float(np.abs(fd).max())
    return float(np.abs(fd - an).max() / scale)


def dykstra_projection(Y: np.ndarray, power: float, iters: int = 20_000, tol: float = 1e-13) -> np.ndarray:
    """Nearest point of {Q >= 0} intersected with {tr Q <= P} by Dykstra's
    alternating projections; each set's projection is elementary."""

    def proj_psd(A):
        w, V = np.linalg.eigh((A + A.conj().T) / 2)
        return (V * np.clip(w, 0, None)) @ V.conj().T

    def proj_trace(A):
        t = np.trace(A).real
        if t <= power:
            return A
        return A - (t - power) / A.shape[0] * np.eye(A.shape[0])

    x = Y.copy()
    p = np.zeros_like(Y)
    q = np.zeros_like(Y)
    for _ in range(iters):
        y = proj_psd(x + p)
        p = x + p - y
        x_new = proj_trace(y + q)
        q = y + q - x_new
        if np.linalg.norm(x_new - x) < tol:
            x = x_new
            break
        x = x_new
    return x


def bisection_waterfill(gains: np.ndarray, power: float) -> np.ndarray:
    """p_i = (mu - 1/g_i)_+ with mu found by plain bisection on sum p = P."""
    g = np.asarray(gains, dtype=float)
    pos = g > 0
    lo, hi = 0.0, power + np.max(1 / g[pos])
    for _ in range(200):
        mu = (lo + hi) / 2
        total = np.clip(mu - 1 / g[pos], 0, None).sum()
        lo, hi = (mu, hi) if total < power else (lo, mu)
    out = np.zeros_like(g)
    out[pos] = np.clip((lo + hi) / 2 - 1 / g[pos], 0, None)
    return out
