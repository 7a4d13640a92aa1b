import logging
from dataclasses import dataclass
from dataclasses import field

import numpy as np

from core.applications.torus_geometry.fields import HermitianField
from core.applications.torus_geometry.fields import TorusGrid
from core.applications.torus_geometry.services import check_hermitian
from core.applications.torus_geometry.services import riemann_sum
from core.helper.custom_exceptions import LabError

logger = logging.getLogger(__name__)

COMPATIBILITY_TOLERANCE = 1e-8
DEFAULT_CONTINUATION = (0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True, eq=False)
class MASolveProblem:
    """(omega + i ddbar psi)^n = g omega_X^n with sup psi = 0.

    ``g`` is renormalised on construction so that
    ``int g omega_X^n = V_omega``; the relative defect before rescaling is kept
    in ``compatibility_defect``.
    """

    omega: HermitianField
    omega_X: HermitianField  # noqa: N815
    grid: TorusGrid
    g: np.ndarray
    tolerance: float = 1e-9
    max_iterations: int = 200
    continuation: tuple[float, ...] = DEFAULT_CONTINUATION
    compatibility_defect: float = field(default=0.0, init=False)

    def __post_init__(self) -> None:
        g = self.grid.check_scalar(self.g, "right-hand side g")
        if not np.all(g > 0):
            msg = "right-hand side g must be strictly positive"
            raise LabError.DomainError(msg, points=np.argwhere(g <= 0)[:10].tolist())
        check_hermitian(self.omega, "omega")
        check_hermitian(self.omega_X, "omega_X")
        if self.tolerance <= 0 or self.max_iterations < 1:
            msg = "tolerance must be positive and max_iterations at least 1"
            raise LabError.ConfigError(msg)
        steps = list(self.continuation)
        if not steps or steps[-1] != 1.0 or steps != sorted(steps):
            msg = f"continuation must increase to 1, got {self.continuation}"
            raise LabError.ConfigError(msg)
        mass = riemann_sum(g * self.background_weight, self.grid)
        defect = abs(mass - self.volume) / self.volume
        if defect > COMPATIBILITY_TOLERANCE:
            logger.warning(
                "Right-hand side misses the volume of omega by %.3e (relative); renormalising",
                defect,
            )
            g = g * (self.volume / mass)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "compatibility_defect", defect)

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def background_weight(self) -> np.ndarray:
        return np.broadcast_to(self.omega_X.determinant(), self.grid.shape)

    @property
    def omega_weight(self) -> np.ndarray:
        return np.broadcast_to(self.omega.determinant(), self.grid.shape)

    @property
    def volume(self) -> float:
        return riemann_sum(self.omega_weight, self.grid)

    @property
    def background_volume(self) -> float:
        return riemann_sum(self.background_weight, self.grid)

    @property
    def log_target(self) -> np.ndarray:
        """log(g det omega_X)."""
        return np.log(self.g) + np.log(self.background_weight)

    def stage_target(self, theta: float) -> np.ndarray:
        """log of the homotopy g_theta = (1 - theta) det omega / det omega_X + theta g, times det omega_X."""
        start = self.omega_weight / self.background_weight
        return np.log((1.0 - theta) * start + theta * self.g) + np.log(self.background_weight)
