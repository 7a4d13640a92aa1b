"""Manufactured near-solutions of the coupled system and their bound checks.

The system is ``f(lambda[h_phi]) = c_omega e^F`` together with
``Box_{omega_phi} F = -c_theta + G^{i j-bar} theta_{i j-bar}``. States are
built from admissible potentials; c_theta is read off as the omega_phi-mean
of ``G theta - Box F`` and the potential is shrunk until what remains after
centering is below the residual tolerance.
"""

import logging
from dataclasses import dataclass

import numpy as np

from core.applications.functionals.services import entropy_p
from core.applications.ma_solver.services import auxiliary_density
from core.applications.ma_solver.services import auxiliary_problem
from core.applications.ma_solver.services import exponential_integrability
from core.applications.ma_solver.services import solve_ma
from core.applications.nonlinear_operators.interface import OperatorSpec
from core.applications.nonlinear_operators.services import NonlinearOperator
from core.applications.nonlinear_operators.services import as_operator
from core.applications.nonlinear_operators.services import resolve_gamma
from core.applications.proof_engine.checks import THETA_TOLERANCE
from core.applications.proof_engine.checks import apply_coefficients
from core.applications.proof_engine.checks import check_psi_test_function
from core.applications.proof_engine.checks import linearized_coefficients
from core.applications.proof_engine.checks import require_theta_lower_bound
from core.applications.proof_engine.checks import theta_eigenvalues
from core.applications.proof_engine.constants import absorption_margin
from core.applications.proof_engine.constants import build_constant_chain
from core.applications.proof_engine.constants import coupled_constants
from core.applications.proof_engine.interface import ConstantChain
from core.applications.proof_engine.interface import CoupledReport
from core.applications.proof_engine.mean_value import mean_value_bound
from core.applications.torus_geometry.fields import HermitianField
from core.applications.torus_geometry.fields import TorusGrid
from core.applications.torus_geometry.services import induce_density
from core.applications.torus_geometry.services import riemann_sum
from core.applications.torus_geometry.services import sample_admissible_potential
from core.applications.torus_geometry.spectral import complex_hessian
from core.applications.torus_geometry.state import SolutionState
from core.helper.custom_exceptions import LabError

logger = logging.getLogger(__name__)

RESIDUAL_TOLERANCE = 1e-6
SHRINK_FACTOR = 4.0
MAX_SHRINKS = 16

LIMITATIONS = (
    "States are manufactured near-solutions of the coupled system: c_theta is read off "
    "from the state and the residual after centering is bounded by the reported tolerance. "
    "Bounds are checked on these states, not on exact solutions of the fourth-order system."
)


@dataclass(frozen=True, eq=False)
class CoupledState:
    state: SolutionState
    theta: HermitianField
    amplitude: float
    c_theta: float
    residual: np.ndarray

    @property
    def residual_norm(self) -> float:
        return float(np.max(np.abs(self.residual)))


def coupled_residual(
    state: SolutionState,
    theta: HermitianField,
    op: "NonlinearOperator | OperatorSpec | None" = None,
) -> tuple[float, np.ndarray]:
    """c_theta and the centred residual of ``Box F = -c_theta + G theta``."""
    coefficients = linearized_coefficients(op, state)
    difference = apply_coefficients(coefficients, theta.on(state.grid)) - apply_coefficients(
        coefficients,
        complex_hessian(state.F, state.grid).data,
    )
    c_theta = riemann_sum(difference * state.solution_weight, state.grid) / riemann_sum(
        state.solution_weight,
        state.grid,
    )
    return c_theta, difference - c_theta


def manufacture_coupled_state(  # noqa: PLR0913
    op: "NonlinearOperator | OperatorSpec",
    omega: HermitianField,
    omega_X: HermitianField,  # noqa: N803
    theta: HermitianField,
    grid: TorusGrid,
    *,
    amplitude: float,
    modes: int,
    seed: int,
    tolerance: float = RESIDUAL_TOLERANCE,
) -> CoupledState:
    """Shrink an admissible potential until the centred residual is a tenth of ``tolerance``."""
    op = as_operator(op)
    shape = sample_admissible_potential(op, omega, amplitude, modes, seed, grid, omega_X)
    residual_norm = np.inf
    for shrink in range(MAX_SHRINKS + 1):
        phi = shape / SHRINK_FACTOR**shrink
        state = induce_density(op, phi, omega, omega_X, grid)
        c_theta, residual = coupled_residual(state, theta, op)
        residual_norm = float(np.max(np.abs(residual)))
        if residual_norm <= 0.1 * tolerance:
            logger.debug("coupled state after %d shrinks: residual %.3e", shrink, residual_norm)
            return CoupledState(
                state=state,
                theta=theta,
                amplitude=state.sup_abs_phi,
                c_theta=c_theta,
                residual=residual,
            )
    msg = f"no coupled near-solution below residual {tolerance:.1e} (last {residual_norm:.3e})"
    raise LabError.BoundViolation(msg, residual=residual_norm)


def theta_bounds(theta: HermitianField, state: SolutionState) -> tuple[float, float]:
    """Smallest K_2 >= 0 with theta >= -K_2 omega and smallest K_3 with theta <= K_3 omega."""
    eigenvalues = theta_eigenvalues(theta, state)
    return max(0.0, -float(np.min(eigenvalues[..., 0]))), float(np.max(eigenvalues[..., -1]))


def _require_theta_upper_bound(theta: HermitianField, K_3: float, state: SolutionState) -> float:  # noqa: N803
    margin = K_3 - theta_eigenvalues(theta, state)[..., -1]
    failing = margin < -THETA_TOLERANCE * max(1.0, abs(K_3))
    if np.any(failing):
        msg = f"theta <= K_3 omega fails at {np.count_nonzero(failing)} grid points"
        raise LabError.PreconditionError(msg, points=np.argwhere(failing)[:10].tolist(), K_3=K_3)
    return float(np.min(margin))


def coupled_check(  # noqa: PLR0913
    coupled_state: CoupledState,
    *,
    p: float = 1.0,
    q: float | None = None,
    k: float = 32.0,
    K_2: float | None = None,  # noqa: N803
    K_3: float | None = None,  # noqa: N803
    lower_bound: bool = True,
    r: float | None = None,
    residual_tolerance: float = RESIDUAL_TOLERANCE,
    solver_options: dict | None = None,
) -> tuple[CoupledReport, ConstantChain]:
    """Barrier and mean-value bounds for F on a manufactured coupled state."""
    state, theta = coupled_state.state, coupled_state.theta
    if coupled_state.residual_norm > residual_tolerance:
        msg = (
            f"state does not solve the coupled equation: residual {coupled_state.residual_norm:.3e} "
            f"exceeds {residual_tolerance:.1e}"
        )
        raise LabError.BoundViolation(msg, residual=coupled_state.residual_norm)
    op = state.operator
    n = state.n
    measured_K_2, measured_K_3 = theta_bounds(theta, state)  # noqa: N806
    K_2 = max(measured_K_2, K_2 or 0.0)  # noqa: N806
    K_2_margin = require_theta_lower_bound(theta, K_2, state)  # noqa: N806
    K_3_margin = None  # noqa: N806
    if lower_bound:
        K_3 = measured_K_3 if K_3 is None else K_3  # noqa: N806
        K_3_margin = _require_theta_upper_bound(theta, K_3, state)  # noqa: N806
    else:
        K_3 = None  # noqa: N806

    gamma = resolve_gamma(op)
    K_1 = entropy_p(state, p)  # noqa: N806
    coupled = coupled_constants(n, gamma, K_1, K_2, coupled_state.c_theta, K_3)
    chain = build_constant_chain(
        n,
        p,
        gamma,
        state.kappa,
        state.c_ratio,
        K_1,
        state.background_volume,
        q=q,
        coupled=coupled,
    )
    margin = absorption_margin(coupled)

    density = auxiliary_density(state, 0.0, k, p, excess=-state.phi + coupled.delta * state.F)
    psi, _ = solve_ma(auxiliary_problem(state, density, **(solver_options or {})))
    integrability = exponential_integrability(psi, state.grid, state.omega_X, chain.beta, chain.C_X)
    barrier = check_psi_test_function(state, psi, theta, chain, density.A_sk, k, integrability=integrability)

    options = {"r": r, "k": k, "beta": chain.beta, "C_X": chain.C_X, "solver_options": solver_options}
    upper = mean_value_bound(state.F - K_2 * state.phi, coupled.a_mv, state, op, **options)
    lower = None
    F_lower_bound = None  # noqa: N806
    if K_3 is not None:
        lower = mean_value_bound(
            -state.F - K_3 * state.phi,
            max(0.0, K_3 - coupled_state.c_theta),
            state,
            op,
            **options,
        )
        F_lower_bound = -lower.bound  # noqa: N806

    sup_F, inf_F = float(np.max(state.F)), float(np.min(state.F))  # noqa: N806
    passed = (
        margin > 0
        and barrier.passed
        and upper.passed
        and sup_F <= upper.bound
        and (lower is None or (lower.passed and inf_F >= F_lower_bound))
    )
    report = CoupledReport(
        amplitude=coupled_state.amplitude,
        c_theta=coupled_state.c_theta,
        residual=coupled_state.residual_norm,
        residual_tolerance=residual_tolerance,
        K_1=K_1,
        K_2=K_2,
        K_2_margin=K_2_margin,
        K_3=K_3,
        K_3_margin=K_3_margin,
        absorption_margin=margin,
        barrier=barrier,
        upper=upper,
        lower=lower,
        sup_F=sup_F,
        inf_F=inf_F,
        F_upper_bound=upper.bound,
        F_lower_bound=F_lower_bound,
        passed=passed,
    )
    return report, chain
