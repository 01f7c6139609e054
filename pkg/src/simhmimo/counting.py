"""Complex-multiplication tally used to instrument the optimisers.

Costs are charged at the matrix-product level: an (a x b) @ (b x c) product
costs a*b*c, a diagonal scaling of an (a x b) matrix costs a*b.
"""

from __future__ import annotations

import numpy as np


class MultCounter:
    def __init__(self):
        self.mults = 0

    def add(self, n: int) -> None:
        self.mults += int(n)

    def mm(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        a_rows = a.shape[0] if a.ndim > 1 else 1
        b_cols = b.shape[1] if b.ndim > 1 else 1
        self.mults += a_rows * a.shape[-1] * b_cols
        return a @ b

    def eigh(self, a: np.ndarray):
        self.mults += a.shape[0] ** 3
        return np.linalg.eigh(a)

    def solve_psd(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        # Cholesky factorisation plus two triangular solves
        n = a.shape[0]
        cols = b.shape[1] if b.ndim > 1 else 1
        self.mults += n**3 // 3 + n * n * cols
        return np.linalg.solve(a, b)

    def logdet_psd(self, a: np.ndarray) -> float:
        self.mults += a.shape[0] ** 3 // 3
        sign, val = np.linalg.slogdet(a)
        return float(val)


class NullCounter(MultCounter):
    """Counter that discards its tally."""

    def add(self, n: int) -> None:
        pass

    def mm(self, a, b):
        return a @ b

    def eigh(self, a):
        return np.linalg.eigh(a)

    def solve_psd(self, a, b):
        return np.linalg.solve(a, b)

    def logdet_psd(self, a):
        return float(np.linalg.slogdet(a)[1])


NULL = NullCounter()
