"""Mean-value bound for subsolutions of the linearised operator.

For ``Box_{omega_phi} u >= -a`` the pipeline normalises u by its weighted L^1
norm, compares u against the solutions of auxiliary equations concentrated on
``{u > s}``, turns that comparison into a level-set recursion and reports the
level where the recursion stops.
"""

import logging
import math

import numpy as np

from core.applications.functionals.services import entropy_p
from core.applications.functionals.services import superlevel_profile
from core.applications.ma_solver.services import auxiliary_density
from core.applications.ma_solver.services import auxiliary_problem
from core.applications.ma_solver.services import exponential_integrability
from core.applications.ma_solver.services import solve_ma
from core.applications.nonlinear_operators.interface import OperatorSpec
from core.applications.nonlinear_operators.services import NonlinearOperator
from core.applications.nonlinear_operators.services import as_operator
from core.applications.nonlinear_operators.services import resolve_gamma
from core.applications.proof_engine.checks import barrier_passed
from core.applications.proof_engine.checks import barrier_tolerance
from core.applications.proof_engine.checks import linearized_operator
from core.applications.proof_engine.constants import mean_value_epsilon
from core.applications.proof_engine.constants import recursion_constants
from core.applications.proof_engine.constants import young_constant
from core.applications.proof_engine.interface import BarrierCheck
from core.applications.proof_engine.interface import MeanValueResult
from core.applications.proof_engine.iteration import de_giorgi
from core.applications.torus_geometry.services import riemann_sum
from core.applications.torus_geometry.state import SolutionState
from core.helper.custom_exceptions import LabError

logger = logging.getLogger(__name__)

PRECONDITION_TOLERANCE = 1e-6
MASS_CAP = 2.0
PROFILE_LEVELS = 33


def require_subsolution(
    u: np.ndarray,
    a_mv: float,
    state: SolutionState,
    op: "NonlinearOperator | OperatorSpec | None" = None,
    tolerance: float = PRECONDITION_TOLERANCE,
) -> float:
    """Smallest value of Box u + a over the grid; raises at the worst point when it is below -tolerance."""
    defect = linearized_operator(op, state, u) + a_mv
    worst = int(np.argmin(defect))
    smallest = float(defect.flat[worst])
    if smallest < -tolerance:
        point = list(np.unravel_index(worst, defect.shape))
        msg = f"Box u >= -{a_mv:.6g} fails by {-smallest:.3e} at grid point {point}"
        raise LabError.PreconditionError(msg, point=[int(i) for i in point], defect=smallest)
    return smallest


def default_levels(u: np.ndarray) -> tuple[float, ...]:
    top = float(np.max(u))
    if top <= 0:
        return (0.0,)
    return (0.0, 0.5 * top)




def profile_levels(u: np.ndarray, S_inf: float) -> np.ndarray:  # noqa: N803
    """Evenly spaced levels from 0 to max(sup u, S_inf), with S_inf itself when it is finite."""
    top = max(float(np.max(u)), 0.0)
    stop = [S_inf] if math.isfinite(S_inf) else []
    parts = [np.linspace(0.0, max([top, *stop]), PROFILE_LEVELS), [top], stop]
    return np.unique(np.concatenate(parts))


def mean_value_barrier(  # noqa: PLR0913
    u: np.ndarray,
    a_mv: float,
    state: SolutionState,
    s: float,
    k: float,
    nu: float,
    Lambda_0: float,  # noqa: N803
    solver_options: dict | None = None,
    *,
    beta: float | None = None,
    C_X: float | None = None,  # noqa: N803
) -> BarrierCheck:
    """Phi_u = -eps(-psi + phi + Lambda_0)^{n/(n+1)} + u - s for the auxiliary solve on {u > s}."""
    n = state.n
    density = auxiliary_density(state, s, k, 1.0, excess=u)
    psi, _ = solve_ma(auxiliary_problem(state, density, **(solver_options or {})))
    integrability = None
    if beta is not None and C_X is not None:
        integrability = exponential_integrability(psi, state.grid, state.omega_X, beta, C_X)
    epsilon = mean_value_epsilon(n, a_mv, density.A_sk, nu)
    field = -epsilon * (-psi + state.phi + Lambda_0) ** (n / (n + 1)) + u - s
    outside = u <= s
    tolerance = barrier_tolerance(Lambda_0)
    max_value = float(np.max(field))
    return BarrierCheck(
        name="mean value",
        s=s,
        k=k,
        A=density.A_sk,
        epsilon=epsilon,
        Lambda=Lambda_0,
        max_value=max_value,
        outside_max=float(np.max(field[outside])) if np.any(outside) else None,
        tolerance=tolerance,
        integrability=integrability,
        passed=barrier_passed(max_value, tolerance, integrability),
    )


def mean_value_bound(  # noqa: PLR0913
    u: np.ndarray,
    a_mv: float,
    state: SolutionState,
    op: "NonlinearOperator | OperatorSpec | None" = None,
    *,
    r: float | None = None,
    k: float = 32.0,
    levels: tuple[float, ...] | None = None,
    beta: float | None = None,
    C_X: float | None = None,  # noqa: N803
    solver_options: dict | None = None,
) -> MeanValueResult:
    """sup u against ``S_inf (1 + c int |u| e^{nF} omega_X^n)`` for ``Box u >= -a_mv``.

    The superlevel profile of the normalised u is run through the De Giorgi
    recursion; the bound counts as verified when the profile vanishes from
    the stopping level on.
    """
    if a_mv < 0:
        msg = f"a_mv must be non-negative, got {a_mv}"
        raise LabError.DomainError(msg)
    op = state.operator if op is None else as_operator(op)
    u = state.grid.check_scalar(u, "u")
    require_subsolution(u, a_mv, state, op)
    n = state.n
    r = float(n + 1) if r is None else r
    beta = 0.5 / state.kappa if beta is None else beta
    C_X = 2 * state.background_volume if C_X is None else C_X  # noqa: N806

    normalisation = state.c_ratio * riemann_sum(np.abs(u) * state.density_weight, state.grid)
    scale = max(1.0, normalisation)
    u_normalised, a_normalised = u / scale, a_mv / scale

    nu = n * resolve_gamma(op) ** (1.0 / n)
    Lambda_0 = state.sup_abs_phi + 1.0  # noqa: N806
    epsilon_constant = mean_value_epsilon(n, a_normalised, MASS_CAP, nu) / MASS_CAP ** (1.0 / (n + 1))
    alpha = beta / epsilon_constant ** ((n + 1) / n)
    C_38 = math.exp(beta * Lambda_0) * C_X  # noqa: N806
    C_39 = (2 / alpha) ** r * (  # noqa: N806
        state.background_volume + n**r * entropy_p(state, r) + young_constant(r) * C_38
    )
    C_bar = C_39 ** (1.0 / r)  # noqa: N806
    recursion = recursion_constants(n, r, C_bar, state.c_ratio)
    bound = recursion.S_inf * (1.0 + normalisation)

    profile = superlevel_profile(u_normalised, state, 1.0, profile_levels(u_normalised, recursion.S_inf))
    iteration = de_giorgi(profile, state.c_ratio, r, C_bar, n)
    if not iteration.verified:
        logger.warning(
            "Superlevel sets of u/%.4g do not vanish from S_inf = %.6g on",
            scale,
            iteration.S_inf,
        )

    barriers = [
        mean_value_barrier(
            u_normalised,
            a_normalised,
            state,
            s,
            k,
            nu,
            Lambda_0,
            solver_options,
            beta=beta,
            C_X=C_X,
        )
        for s in (default_levels(u_normalised) if levels is None else levels)
    ]
    for barrier in barriers:
        if barrier.A > MASS_CAP:
            logger.warning("Auxiliary mass %.4g at s=%g exceeds %.1f", barrier.A, barrier.s, MASS_CAP)
    sup_u = float(np.max(u))
    passed = sup_u <= bound and iteration.verified and all(barrier.passed for barrier in barriers)
    logger.info("Mean-value bound: sup u = %.6g, bound = %.6g (%s)", sup_u, bound, "pass" if passed else "FAIL")
    return MeanValueResult(
        sup_u=sup_u,
        bound=bound,
        normalisation=normalisation,
        a_mv=a_mv,
        epsilon_constant=epsilon_constant,
        alpha=alpha,
        C_bar=C_bar,
        s_0=recursion.s_0,
        S_inf=recursion.S_inf,
        de_giorgi=iteration,
        verified=iteration.verified,
        barriers=barriers,
        passed=passed,
    )
