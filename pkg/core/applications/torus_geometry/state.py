from dataclasses import dataclass

import numpy as np

from core.applications.nonlinear_operators.services import NonlinearOperator
from core.applications.torus_geometry.fields import HermitianField
from core.applications.torus_geometry.fields import TorusGrid


@dataclass(frozen=True, eq=False)
class SolutionState:
    """A sup-normalised potential with everything the estimates read off it.

    ``f(lambda[h_phi]) = c_omega * exp(F)`` pointwise and
    ``int e^{nF} omega_X^n = int omega_X^n``.
    """

    grid: TorusGrid
    operator: NonlinearOperator
    phi: np.ndarray
    omega: HermitianField
    omega_X: HermitianField  # noqa: N815
    omega_phi: HermitianField
    eigenvalues: np.ndarray
    F: np.ndarray  # noqa: N815
    c_omega: float
    volume: float
    background_volume: float
    kappa: float

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def c_ratio(self) -> float:
        """c_omega^n / V_omega."""
        return self.c_omega**self.n / self.volume

    @property
    def f_values(self) -> np.ndarray:
        return self.c_omega * np.exp(self.F)

    @property
    def background_weight(self) -> np.ndarray:
        """Density of omega_X^n against dx."""
        return np.broadcast_to(self.omega_X.determinant(), self.grid.shape)

    @property
    def density_weight(self) -> np.ndarray:
        """Density of e^{nF} omega_X^n against dx."""
        return np.exp(self.n * self.F) * self.background_weight

    @property
    def solution_weight(self) -> np.ndarray:
        """Density of omega_phi^n against dx."""
        return self.omega_phi.determinant()

    @property
    def sup_abs_phi(self) -> float:
        return float(-np.min(self.phi))
