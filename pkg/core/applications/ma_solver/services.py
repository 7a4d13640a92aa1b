"""Damped Newton solver for (omega + i ddbar psi)^n = g omega_X^n on the flat torus.

Each step linearises ``log det(omega + i ddbar psi)`` to
``L delta = tr(A^{-1} i ddbar delta)`` with ``A = omega + i ddbar psi`` and
solves ``L delta + mu = -r`` for a mean-zero ``delta`` and a constant ``mu``
with GMRES, preconditioned by the constant-coefficient Laplacian of the
grid average of ``A``.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator
from scipy.sparse.linalg import gmres
from scipy.special import logsumexp

from core.applications.ma_solver.interface import IntegrabilityCheck
from core.applications.ma_solver.interface import SolverReport
from core.applications.ma_solver.problem import MASolveProblem
from core.applications.torus_geometry.fields import HermitianField
from core.applications.torus_geometry.fields import TorusGrid
from core.applications.torus_geometry.services import riemann_sum
from core.applications.torus_geometry.spectral import complex_hessian
from core.applications.torus_geometry.spectral import solve_laplacian
from core.applications.torus_geometry.state import SolutionState
from core.helper.custom_exceptions import LabError

logger = logging.getLogger(__name__)

INTERMEDIATE_TOLERANCE = 1e-4
MIN_DAMPING = 1.0 / 1024
MAX_LOG_VALUE = 700.0
DENSITY_FLOOR = 1e-12
FLOOR_MASS_WARNING = 1e-8


def tau_k(x, k: float):
    """k^{-1} log(1 + e^{kx}), a smooth upper approximation of max(x, 0)."""
    if not k > 0:
        msg = f"sharpness k must be positive, got {k}"
        raise LabError.DomainError(msg)
    return np.logaddexp(0.0, k * np.asarray(x, dtype=float)) / k


def _log_det(form: np.ndarray) -> tuple[np.ndarray, float]:
    """Pointwise log det of a hermitian field and its smallest eigenvalue."""
    eigenvalues = np.linalg.eigvalsh(form)
    smallest = float(np.min(eigenvalues[..., 0]))
    if smallest <= 0:
        return np.full(form.shape[:-2], np.nan), smallest
    return np.sum(np.log(eigenvalues), axis=-1), smallest


def _spread(residual: np.ndarray) -> tuple[float, float]:
    """min over c of sup |residual - c|, and the minimising c."""
    high, low = float(np.max(residual)), float(np.min(residual))
    return 0.5 * (high - low), 0.5 * (high + low)


def _complex_form(problem: MASolveProblem, psi: np.ndarray) -> np.ndarray:
    return problem.omega.on(problem.grid) + complex_hessian(psi, problem.grid).data


def ma_residual(psi: np.ndarray, problem: MASolveProblem) -> float:
    """sup |log det(omega + i ddbar psi) - log(g det omega_X)|, +inf off the Kahler cone."""
    log_det, smallest = _log_det(_complex_form(problem, psi))
    if smallest <= 0:
        return math.inf
    return float(np.max(np.abs(log_det - problem.log_target)))


@dataclass
class _Iterate:
    psi: np.ndarray
    form: np.ndarray
    residual: np.ndarray
    merit: float
    shift: float


class _NewtonSolver:
    def __init__(self, problem: MASolveProblem) -> None:
        self.problem = problem
        self.grid: TorusGrid = problem.grid
        self.iterations = 0
        self.damping_events = 0
        self.fallback_used = False

    def evaluate(self, psi: np.ndarray, target: np.ndarray) -> _Iterate | None:
        form = _complex_form(self.problem, psi)
        log_det, smallest = _log_det(form)
        if smallest <= 0:
            return None
        residual = log_det - target
        merit, shift = _spread(residual)
        return _Iterate(psi=psi, form=form, residual=residual, merit=merit, shift=shift)

    def linearisation(self, current: _Iterate) -> LinearOperator:
        inverse = np.linalg.inv(current.form)
        grid = self.grid

        def matvec(z: np.ndarray) -> np.ndarray:
            field = np.real(z).reshape(grid.shape)
            mean = float(np.mean(field))
            hessian = complex_hessian(field - mean, grid).data
            image = np.real(np.einsum("...ji,...ij->...", inverse, hessian)) + mean
            return image.ravel()

        return LinearOperator((grid.size, grid.size), matvec=matvec, dtype=float)

    def average_form(self, current: _Iterate) -> HermitianField:
        return HermitianField.constant(np.mean(current.form, axis=tuple(range(self.grid.real_dimension))))

    def preconditioner(self, current: _Iterate) -> LinearOperator:
        average = self.average_form(current)
        grid = self.grid

        def matvec(h: np.ndarray) -> np.ndarray:
            field = np.real(h).reshape(grid.shape)
            return (solve_laplacian(field, grid, average) + np.mean(field)).ravel()

        return LinearOperator((grid.size, grid.size), matvec=matvec, dtype=float)

    def newton_direction(self, current: _Iterate) -> np.ndarray:
        rtol = min(1e-4, max(1e-13, 1e-2 * current.merit))
        solution, info = gmres(
            self.linearisation(current),
            -current.residual.ravel(),
            rtol=rtol,
            atol=0.0,
            restart=40,
            maxiter=20,
            M=self.preconditioner(current),
        )
        if info < 0:
            msg = f"GMRES breakdown (info={info})"
            raise LabError.SolverError(msg, iterations=self.iterations)
        if info > 0:
            logger.debug("GMRES stopped before rtol %.1e at iteration %d", rtol, self.iterations)
        step = solution.reshape(self.grid.shape)
        return step - np.mean(step)

    def damped_update(self, current: _Iterate, direction: np.ndarray, target: np.ndarray) -> _Iterate | None:
        theta = 1.0
        while theta >= MIN_DAMPING:
            candidate = self.evaluate(current.psi + theta * direction, target)
            if candidate is not None and candidate.merit < current.merit:
                return candidate
            theta *= 0.5
            self.damping_events += 1
            logger.warning("Newton step damped to %.4g at iteration %d", theta, self.iterations)
        return None

    def fixed_point_sweep(self, current: _Iterate, target: np.ndarray) -> _Iterate:
        """First-order fallback: psi <- psi - t Delta^{-1}(r - mean r) with halving."""
        self.fallback_used = True
        logger.warning("Newton stalled at residual %.3e; switching to fixed-point sweeps", current.merit)
        direction = -solve_laplacian(current.residual, self.grid, self.average_form(current))
        step = 1.0
        while step >= MIN_DAMPING:
            candidate = self.evaluate(current.psi + step * direction, target)
            if candidate is not None and candidate.merit < current.merit:
                return candidate
            step *= 0.5
        msg = f"positivity or descent lost beyond recovery at residual {current.merit:.3e}"
        raise LabError.SolverError(msg, iterations=self.iterations)

    def run_stage(self, current: _Iterate, target: np.ndarray, tolerance: float) -> _Iterate:
        while current.merit > tolerance:
            if self.iterations >= self.problem.max_iterations:
                msg = (
                    f"no convergence after {self.iterations} iterations "
                    f"(residual {current.merit:.3e}, tolerance {tolerance:.1e})"
                )
                raise LabError.SolverError(msg, iterations=self.iterations, residual=current.merit)
            self.iterations += 1
            direction = self.newton_direction(current)
            updated = self.damped_update(current, direction, target)
            current = updated if updated is not None else self.fixed_point_sweep(current, target)
            logger.debug("iteration %d: residual %.3e", self.iterations, current.merit)
        return current

    def solve(self) -> tuple[np.ndarray, SolverReport]:
        problem = self.problem
        start = self.evaluate(self.grid.zeros(), problem.stage_target(problem.continuation[0]))
        if start is None:
            msg = "omega is not positive definite"
            raise LabError.GeometryError(msg)
        current = start
        path = []
        for theta in problem.continuation:
            target = problem.stage_target(theta)
            current = self.evaluate(current.psi, target)
            tolerance = problem.tolerance if theta == 1.0 else max(problem.tolerance, INTERMEDIATE_TOLERANCE)
            current = self.run_stage(current, target, tolerance)
            path.append(float(theta))
        psi = current.psi - np.max(current.psi)
        report = SolverReport(
            iterations=self.iterations,
            residual=current.merit,
            unshifted_residual=ma_residual(psi, problem),
            damping_events=self.damping_events,
            continuation_path=path,
            normalization_shift=current.shift,
            compatibility_defect=problem.compatibility_defect,
            fallback_used=self.fallback_used,
        )
        logger.info(
            "Monge-Ampere solve converged in %d iterations (residual %.3e, shift %.3e)",
            report.iterations,
            report.residual,
            report.normalization_shift,
        )
        return psi, report


def solve_ma(problem: MASolveProblem) -> tuple[np.ndarray, SolverReport]:
    """Sup-normalised psi with log det(omega + i ddbar psi) - log(g det omega_X) constant up to the tolerance.

    The constant is the discrete normalisation shift, reported separately.
    """
    return _NewtonSolver(problem).solve()


@dataclass(frozen=True, eq=False)
class AuxiliaryDensity:
    """Right-hand side of the auxiliary equation at one (s, k) and its normaliser A_{s,k}."""

    s: float
    k: float
    a: float
    g: np.ndarray
    A_sk: float  # noqa: N815
    floor_fraction: float


def auxiliary_density(
    state: SolutionState,
    s: float,
    k: float,
    a: float,
    floor: float = DENSITY_FLOOR,
    excess: np.ndarray | None = None,
) -> AuxiliaryDensity:
    """g = tau_k(w - s)^a c^n e^{nF} / A_{s,k}, floored at ``floor * max`` inside the integrand.

    ``w`` is ``excess`` when given and ``-phi`` otherwise.
    """
    if a <= 0:
        msg = f"exponent a must be positive, got {a}"
        raise LabError.DomainError(msg)
    w = -state.phi if excess is None else state.grid.check_scalar(excess, "excess")
    weight = tau_k(w - s, k) ** a
    floored = np.maximum(weight, floor * float(np.max(weight)))
    floor_mass = riemann_sum((floored - weight) * state.density_weight, state.grid)
    A_sk = state.c_ratio * riemann_sum(floored * state.density_weight, state.grid)  # noqa: N806
    g = floored * state.c_omega**state.n * np.exp(state.n * state.F) / A_sk
    fraction = floor_mass * state.c_ratio / A_sk
    if fraction > FLOOR_MASS_WARNING:
        logger.warning("Density floor carries %.3e of the auxiliary mass at s=%g, k=%g", fraction, s, k)
    return AuxiliaryDensity(s=s, k=k, a=a, g=g, A_sk=A_sk, floor_fraction=fraction)


def auxiliary_problem(state: SolutionState, density: AuxiliaryDensity, **options) -> MASolveProblem:
    return MASolveProblem(
        omega=state.omega,
        omega_X=state.omega_X,
        grid=state.grid,
        g=density.g,
        **options,
    )


def exponential_integrability(
    psi: np.ndarray,
    grid: TorusGrid,
    omega_X: HermitianField,  # noqa: N803
    beta: float,
    C_X: float,  # noqa: N803
) -> IntegrabilityCheck:
    """int e^{-beta psi} omega_X^n <= C_X, logged when violated."""
    weights = np.broadcast_to(omega_X.determinant(), grid.shape) * grid.cell_volume
    log_value = float(logsumexp(-beta * psi, b=weights))
    passed = log_value <= math.log(C_X)
    if not passed:
        logger.warning(
            "int exp(-%.4g psi) omega_X^n = exp(%.6g) exceeds C_X = %.6g",
            beta,
            log_value,
            C_X,
        )
    return IntegrabilityCheck(
        beta=beta,
        C_X=C_X,
        log_value=log_value,
        value=math.exp(log_value) if log_value < MAX_LOG_VALUE else math.inf,
        passed=passed,
    )
