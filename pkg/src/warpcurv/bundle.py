"""Container for the curvature tensors of one chart at one point.

Shared by the closed-form route and the finite-difference route so that the
two can be produced and compared without either importing the other.

Riemann sign conventions differ across the literature; the `convention`
tag records which one the riemann array uses.  'common' means
R(X,Y) = [D_X, D_Y] - D_[X,Y] in components R^mu_{nu lam rho}; 'paper'
means the global negative of that.  Christoffels, Ricci, and the scalar do
not depend on the choice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CONVENTIONS = ("paper", "common")


@dataclass
class CurvatureBundle:
    christoffel: np.ndarray  # (d, d, d), [k, i, j] = Gamma^k_ij
    riemann: np.ndarray  # (d, d, d, d), [mu, nu, lam, rho]
    ricci: np.ndarray  # (d, d)
    scalar: float
    convention: str = "paper"

    def __post_init__(self):
        if self.convention not in CONVENTIONS:
            raise ValueError(f"unknown convention {self.convention!r}")
        d = self.christoffel.shape[0]
        if self.christoffel.shape != (d, d, d):
            raise ValueError("christoffel must have shape (d, d, d)")
        if self.riemann.shape != (d, d, d, d):
            raise ValueError("riemann must have shape (d, d, d, d)")
        if self.ricci.shape != (d, d):
            raise ValueError("ricci must have shape (d, d)")
        self.scalar = float(self.scalar)

    @property
    def dim(self) -> int:
        return self.christoffel.shape[0]
