"""Pointwise checks of the maximum-principle claims on computed states."""

import logging
import math

import numpy as np

from core.applications.functionals.profiles import SublevelProfile
from core.applications.ma_solver.interface import IntegrabilityCheck
from core.applications.ma_solver.services import auxiliary_density
from core.applications.nonlinear_operators.interface import OperatorSpec
from core.applications.nonlinear_operators.services import NonlinearOperator
from core.applications.nonlinear_operators.services import as_operator
from core.applications.nonlinear_operators.services import resolve_gamma
from core.applications.proof_engine.constants import coupled_barrier
from core.applications.proof_engine.interface import BarrierCheck
from core.applications.proof_engine.interface import ConstantChain
from core.applications.proof_engine.interface import LevelCheck
from core.applications.proof_engine.interface import LinearizedCheck
from core.applications.proof_engine.interface import SmoothingGap
from core.applications.torus_geometry.fields import HermitianField
from core.applications.torus_geometry.services import generalized_eigenvalues
from core.applications.torus_geometry.services import riemann_sum
from core.applications.torus_geometry.spectral import complex_hessian
from core.applications.torus_geometry.state import SolutionState
from core.helper.custom_exceptions import LabError

logger = logging.getLogger(__name__)

BARRIER_TOLERANCE = 1e-6
DETERMINANT_SLACK = 1e-9
THETA_TOLERANCE = 1e-10


def barrier_tolerance(Lambda: float) -> float:  # noqa: N803
    return BARRIER_TOLERANCE * (1.0 + Lambda)


def barrier_passed(max_value: float, tolerance: float, integrability: IntegrabilityCheck | None = None) -> bool:
    """The test function stays below the tolerance and the auxiliary solution is e^{-beta psi} integrable."""
    return max_value <= tolerance and (integrability is None or integrability.passed)


def _operator(op: "NonlinearOperator | OperatorSpec | None", state: SolutionState) -> NonlinearOperator:
    return state.operator if op is None else as_operator(op)


def _conjugate(matrix: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(matrix, -1, -2))


def linearized_coefficients(
    op: "NonlinearOperator | OperatorSpec | None",
    state: SolutionState,
) -> np.ndarray:
    """G^{i j-bar} = f^{-1} df(lambda[h_phi]) / dh_{i j-bar} at every grid point.

    With ``omega_X = L L^H`` and ``L^{-1} omega_phi L^{-H} = V diag(lambda) V^H``
    the coefficients are ``P diag(f_j / f) P^H`` for ``P = L^{-H} V``.
    """
    op = _operator(op, state)
    grid = state.grid
    lower_inverse = np.linalg.inv(np.linalg.cholesky(state.omega_X.on(grid)))
    reduced = lower_inverse @ state.omega_phi.data @ _conjugate(lower_inverse)
    eigenvalues, vectors = np.linalg.eigh(0.5 * (reduced + _conjugate(reduced)))
    gradient = op.gradient(eigenvalues)
    f = op.evaluate(eigenvalues)
    frame = _conjugate(lower_inverse) @ vectors
    return (frame * (gradient / f[..., None])[..., None, :]) @ _conjugate(frame)


def apply_coefficients(coefficients: np.ndarray, form: np.ndarray) -> np.ndarray:
    """G^{i j-bar} a_{i j-bar} pointwise."""
    return np.real(np.einsum("...ij,...ji->...", coefficients, form))


def linearized_check(
    op: "NonlinearOperator | OperatorSpec | None",
    state: SolutionState,
    coefficients: np.ndarray | None = None,
) -> LinearizedCheck:
    """G positive definite and ``det G det omega_X f^n >= gamma`` at every point."""
    op = _operator(op, state)
    if coefficients is None:
        coefficients = linearized_coefficients(op, state)
    smallest = float(np.min(np.linalg.eigvalsh(coefficients)[..., 0]))
    gamma = resolve_gamma(op)
    product = (
        np.real(np.linalg.det(coefficients)) * state.background_weight * state.f_values**state.n
    )
    margin = float(np.min(product)) - gamma
    return LinearizedCheck(
        min_eigenvalue=smallest,
        min_det_margin=margin,
        passed=smallest > 0 and margin >= -DETERMINANT_SLACK * gamma,
    )


def linearized_operator(
    op: "NonlinearOperator | OperatorSpec | None",
    state: SolutionState,
    v: np.ndarray,
) -> np.ndarray:
    """Box_{omega_phi} v = G^{i j-bar} v_{i j-bar}."""
    coefficients = linearized_coefficients(op, state)
    check = linearized_check(op, state, coefficients)
    if not check.passed:
        logger.warning(
            "Linearised coefficients fail the structural bound (min eigenvalue %.3e, det margin %.3e)",
            check.min_eigenvalue,
            check.min_det_margin,
        )
    return apply_coefficients(coefficients, complex_hessian(v, state.grid).data)


def barrier_field(psi: np.ndarray, epsilon: float, Lambda: float, exponent: float) -> np.ndarray:  # noqa: N803
    """-eps (-psi + Lambda)^exponent."""
    return -epsilon * (-psi + Lambda) ** exponent


def phi_test_field(  # noqa: PLR0913
    state: SolutionState,
    psi: np.ndarray,
    epsilon: float,
    Lambda: float,  # noqa: N803
    b: float,
    s: float,
) -> np.ndarray:
    return barrier_field(psi, epsilon, Lambda, b) - state.phi - s


def psi_test_field(  # noqa: PLR0913
    state: SolutionState,
    psi: np.ndarray,
    epsilon: float,
    Lambda: float,  # noqa: N803
    exponent: float,
    delta: float,
) -> np.ndarray:
    return barrier_field(psi, epsilon, Lambda, exponent) - state.phi + delta * state.F


def check_phi_test_function(  # noqa: PLR0913
    state: SolutionState,
    psi: np.ndarray,
    chain: ConstantChain,
    s: float,
    A_sk: float,  # noqa: N803
    k: float | None = None,
    integrability: IntegrabilityCheck | None = None,
) -> BarrierCheck:
    """Grid maximum of Phi = -eps(-psi + Lambda)^b - phi - s; passes when it is at most 1e-6 (1 + Lambda)."""
    if s < 0:
        msg = f"sublevel sets need s >= 0, got {s}"
        raise LabError.DomainError(msg)
    psi = state.grid.check_scalar(psi, "psi")
    epsilon, Lambda = chain.epsilon(A_sk), chain.Lambda(A_sk)  # noqa: N806
    field = phi_test_field(state, psi, epsilon, Lambda, chain.b, s)
    outside = -state.phi <= s
    tolerance = barrier_tolerance(Lambda)
    max_value = float(np.max(field))
    return BarrierCheck(
        name="phi",
        s=s,
        k=k,
        A=A_sk,
        epsilon=epsilon,
        Lambda=Lambda,
        max_value=max_value,
        outside_max=float(np.max(field[outside])) if np.any(outside) else None,
        tolerance=tolerance,
        integrability=integrability,
        passed=barrier_passed(max_value, tolerance, integrability),
    )


def theta_eigenvalues(theta: HermitianField, state: SolutionState) -> np.ndarray:
    """Eigenvalues of theta relative to omega, ascending, at every grid point."""
    return generalized_eigenvalues(theta.on(state.grid), state.omega.on(state.grid))


def require_theta_lower_bound(theta: HermitianField, K_2: float, state: SolutionState) -> float:  # noqa: N803
    """Margin of ``theta >= -K_2 omega``; raises with the offending points when it fails."""
    smallest = theta_eigenvalues(theta, state)[..., 0]
    margin = smallest + K_2
    failing = margin < -THETA_TOLERANCE * max(1.0, K_2)
    if np.any(failing):
        points = np.argwhere(failing)[:10].tolist()
        msg = (
            f"theta >= -K_2 omega fails at {np.count_nonzero(failing)} grid points "
            f"(worst margin {float(np.min(margin)):.3e})"
        )
        raise LabError.PreconditionError(msg, points=points, K_2=K_2)
    return float(np.min(margin))


def check_psi_test_function(  # noqa: PLR0913
    state: SolutionState,
    psi_k: np.ndarray,
    theta: HermitianField,
    chain: ConstantChain,
    A_k: float,  # noqa: N803
    k: float | None = None,
    integrability: IntegrabilityCheck | None = None,
) -> BarrierCheck:
    """Grid maximum of Psi = -eps(-psi_k + Lambda)^{n/(n+p)} - phi + delta F for the coupled system."""
    if chain.coupled is None:
        msg = "constant chain carries no coupled-system constants"
        raise LabError.ConfigError(msg)
    coupled = chain.coupled
    require_theta_lower_bound(theta, coupled.K_2, state)
    psi_k = state.grid.check_scalar(psi_k, "psi_k")
    n, p = state.n, chain.p
    epsilon, Lambda = coupled_barrier(coupled, n, p, A_k)  # noqa: N806
    field = psi_test_field(state, psi_k, epsilon, Lambda, n / (n + p), coupled.delta)
    tolerance = barrier_tolerance(Lambda)
    max_value = float(np.max(field))
    return BarrierCheck(
        name="psi",
        s=0.0,
        k=k,
        A=A_k,
        epsilon=epsilon,
        Lambda=Lambda,
        max_value=max_value,
        tolerance=tolerance,
        integrability=integrability,
        passed=barrier_passed(max_value, tolerance, integrability),
    )


def sublevel_decay_check(profile: SublevelProfile, chain: ConstantChain) -> LevelCheck:
    """phi(s) (log s)^p <= C_1 for every level s > 1."""
    mask = profile.s_values > 1
    levels = profile.s_values[mask]
    lhs = profile.phi_of_s[mask] * np.log(levels) ** chain.p
    return LevelCheck(
        name="sublevel decay",
        levels=levels.tolist(),
        lhs=lhs.tolist(),
        bound=chain.C_1,
        passed=bool(np.all(lhs <= chain.C_1)),
    )


def sublevel_mass_check(profile: SublevelProfile, chain: ConstantChain) -> LevelCheck:
    """A_s <= C_6 c^{(n+a)/n} for every level s >= s_bar."""
    bound = chain.C_6 * chain.c_ratio ** ((chain.n + chain.a) / chain.n)
    mask = profile.s_values >= chain.s_bar
    lhs = profile.A_of_s[mask]
    return LevelCheck(
        name="sublevel mass",
        levels=profile.s_values[mask].tolist(),
        lhs=lhs.tolist(),
        bound=bound,
        passed=bool(np.all(lhs <= bound)),
    )


def smoothing_gap(
    state: SolutionState,
    s: float,
    a: float,
    k_values: tuple[float, ...] = (8.0, 32.0, 128.0),
) -> SmoothingGap:
    """A_{s,k} - A_s against its uniform bound, for increasing sharpness k."""
    excess = np.maximum(-state.phi - s, 0.0)
    A_s = state.c_ratio * riemann_sum(excess**a * state.density_weight, state.grid)  # noqa: N806
    peak = float(np.max(excess))
    mass = state.c_ratio * state.background_volume
    A_sk, bounds = [], []  # noqa: N806
    for k in sorted(k_values):
        A_sk.append(auxiliary_density(state, s, k, a, floor=0.0).A_sk)
        width = math.log(2) / k
        if a >= 1:
            bounds.append(a * (peak + width) ** (a - 1) * width * mass)
        else:
            bounds.append(width**a * mass)
    gaps = np.array(A_sk) - A_s
    slack = 1e-12 * max(1.0, A_s)
    return SmoothingGap(
        s=s,
        a=a,
        k_values=sorted(k_values),
        A_s=A_s,
        A_sk=A_sk,
        bounds=bounds,
        decreasing=bool(np.all(np.diff(A_sk) < 0)),
        passed=bool(np.all(gaps >= -slack) and np.all(gaps <= np.array(bounds) + slack)),
    )
