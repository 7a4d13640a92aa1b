import logging
import math
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.special import logsumexp

from core.applications.functionals.interface import TrudingerIntegral
from core.applications.functionals.profiles import SublevelProfile
from core.applications.torus_geometry.fields import HermitianField
from core.applications.torus_geometry.fields import TorusGrid
from core.applications.torus_geometry.services import integrate
from core.applications.torus_geometry.services import riemann_sum
from core.applications.torus_geometry.spectral import green_kernel
from core.applications.torus_geometry.state import SolutionState
from core.helper.custom_exceptions import LabError
from core.helper.enums import LevelDirection
from core.helper.enums import Measure

logger = logging.getLogger(__name__)

MAX_LOG_FLOAT = math.log(np.finfo(float).max)
CSV_FLOAT_FORMAT = "%.17g"


def _require_positive(name: str, value: float) -> None:
    if not value > 0:
        msg = f"{name} must be positive, got {value}"
        raise LabError.DomainError(msg)


def entropy_p(state: SolutionState, p: float) -> float:
    """Ent_p = int e^{nF} |F|^p omega_X^n."""
    _require_positive("p", p)
    return integrate(np.abs(state.F) ** p, state.grid, Measure.DENSITY, state=state)


def energy(state: SolutionState) -> float:
    """E = (c^n / V) int (-phi) f(lambda)^n omega_X^n, with f^n = c^n e^{nF}."""
    integral = integrate(-state.phi, state.grid, Measure.DENSITY, state=state)
    return state.c_ratio * state.c_omega**state.n * integral


def monge_ampere_entropy(state: SolutionState) -> float:
    """int log(omega_phi^n / omega_X^n) omega_phi^n."""
    ratio = state.solution_weight / state.background_weight
    return integrate(np.log(ratio), state.grid, Measure.SOLUTION, state=state)


def classical_energy(state: SolutionState) -> float:
    """int (-phi) omega_phi^n."""
    return integrate(-state.phi, state.grid, Measure.SOLUTION, state=state)


def potential_l1(state: SolutionState) -> float:
    return integrate(np.abs(state.phi), state.grid, Measure.BACKGROUND, state=state)


def geometric_levels(s_min: float, count: int) -> np.ndarray:
    """s_j = 2^j s_min for j = 0..count-1."""
    _require_positive("s_min", s_min)
    return s_min * 2.0 ** np.arange(count)


def _level_masses(  # noqa: PLR0913
    excess: np.ndarray,
    weight: np.ndarray,
    grid: TorusGrid,
    a: float,
    s_values,
    scale: float,
    direction: LevelDirection,
) -> SublevelProfile:
    """Masked quadrature of {excess > s} and (excess - s)^a over it."""
    _require_positive("a", a)
    s_values = np.asarray(s_values, dtype=float)
    if s_values.ndim != 1 or np.any(np.diff(s_values) <= 0):
        msg = "s-values must be a strictly increasing list"
        raise LabError.DomainError(msg)
    phi_of_s = np.empty_like(s_values)
    A_of_s = np.empty_like(s_values)  # noqa: N806
    for index, s in enumerate(s_values):
        gap = excess - s
        inside = gap > 0
        phi_of_s[index] = riemann_sum(np.where(inside, weight, 0.0), grid)
        A_of_s[index] = scale * riemann_sum(np.where(inside, gap, 0.0) ** a * weight, grid)
    return SublevelProfile(
        s_values=s_values,
        phi_of_s=phi_of_s,
        A_of_s=A_of_s,
        a=float(a),
        direction=direction,
    )


def sublevel_profile(state: SolutionState, a: float, s_values) -> SublevelProfile:
    """phi(s) = int_{phi < -s} e^{nF} omega_X^n and A_s = (c^n/V) int (-phi - s)^a e^{nF} omega_X^n."""
    return _level_masses(
        -state.phi,
        state.density_weight,
        state.grid,
        a,
        s_values,
        state.c_ratio,
        LevelDirection.SUBLEVEL,
    )


def superlevel_profile(u: np.ndarray, state: SolutionState, a: float, s_values) -> SublevelProfile:
    """Masses of U_s = {u > s} against e^{nF} omega_X^n."""
    u = state.grid.check_scalar(u, "u")
    return _level_masses(
        u,
        state.density_weight,
        state.grid,
        a,
        s_values,
        state.c_ratio,
        LevelDirection.SUPERLEVEL,
    )


def trudinger_integral(state: SolutionState, alpha: float, q: float) -> TrudingerIntegral:
    """int exp(alpha (-phi)^q) omega_X^n, max-shifted before exponentiation."""
    _require_positive("alpha", alpha)
    _require_positive("q", q)
    exponent = alpha * (-state.phi) ** q
    weights = state.background_weight * state.grid.cell_volume
    log_value = float(logsumexp(exponent, b=weights))
    overflow = log_value >= MAX_LOG_FLOAT
    if overflow:
        logger.warning("Trudinger integral overflows (log value %.6g)", log_value)
    return TrudingerIntegral(
        alpha=alpha,
        q=q,
        log_value=log_value,
        value=math.inf if overflow else math.exp(log_value),
        overflow=overflow,
    )


def l1_green_bound(omega_X: HermitianField, kappa: float, grid: TorusGrid) -> float:  # noqa: N803
    """C_0 with int |phi| omega_X^n <= C_0 whenever sup phi = 0 and Delta phi >= -n kappa.

    With the mean-zero kernel G of Delta_{omega_X},
    ``phi(x) - mean(phi) = int (G - min G)(x - y) (-Delta phi)(y) dy``, so
    ``C_0 = n kappa Vol(omega_X) int (G - min G) dy``.
    """
    _require_positive("kappa", kappa)
    if not omega_X.is_constant:
        msg = "the L1 Green bound needs a constant omega_X"
        raise LabError.GeometryError(msg)
    kernel = green_kernel(grid, omega_X)
    shifted_mass = riemann_sum(kernel - np.min(kernel), grid)
    background_volume = float(omega_X.determinant()) * grid.volume
    return grid.n * kappa * background_volume * shifted_mass


def profile_to_csv(profile: SublevelProfile, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(
        {"s": profile.s_values, "phi_s": profile.phi_of_s, "A_s": profile.A_of_s},
    )
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    return path
