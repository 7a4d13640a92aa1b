import logging

import numpy as np

from core.applications.nonlinear_operators.interface import OperatorSpec
from core.applications.nonlinear_operators.services import NonlinearOperator
from core.applications.nonlinear_operators.services import as_operator
from core.applications.nonlinear_operators.services import cone_contains
from core.applications.torus_geometry.fields import HermitianField
from core.applications.torus_geometry.fields import TorusGrid
from core.applications.torus_geometry.spectral import complex_hessian
from core.applications.torus_geometry.state import SolutionState
from core.helper.custom_exceptions import LabError
from core.helper.enums import Measure

logger = logging.getLogger(__name__)

HERMITIAN_TOLERANCE = 1e-12
PSD_TOLERANCE = 1e-12
ADMISSIBLE_MARGIN = 1e-6
BISECTION_STEPS = 60


def _positive_definite_factor(form: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(form)
    except np.linalg.LinAlgError:
        smallest = np.linalg.eigvalsh(form)[..., 0]
        points = np.argwhere(np.atleast_1d(smallest) <= 0)[:10].tolist()
        msg = "background form is not positive definite"
        raise LabError.GeometryError(msg, points=points) from None


def generalized_eigenvalues(form: np.ndarray, background: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of ``form`` relative to the positive definite ``background``.

    Cholesky reduction: with ``background = L L^H`` these are the eigenvalues
    of ``L^{-1} form L^{-H}``.
    """
    lower_inverse = np.linalg.inv(_positive_definite_factor(background))
    reduced = lower_inverse @ form @ np.conj(np.swapaxes(lower_inverse, -1, -2))
    reduced = 0.5 * (reduced + np.conj(np.swapaxes(reduced, -1, -2)))
    return np.linalg.eigvalsh(reduced)


def relative_eigenvalues(omega_X: HermitianField, omega_phi: HermitianField) -> np.ndarray:  # noqa: N803
    """lambda[h_phi]: eigenvalues of omega_X^{-1} omega_phi at every point, ascending."""
    return generalized_eigenvalues(omega_phi.data, omega_X.data)


def check_hermitian(form: HermitianField, name: str) -> None:
    defect = form.hermitian_defect()
    if defect > HERMITIAN_TOLERANCE * max(1.0, float(np.max(np.abs(form.data)))):
        msg = f"{name} is not hermitian (defect {defect:.3e})"
        raise LabError.GeometryError(msg)


def background_kappa(omega: HermitianField, omega_X: HermitianField) -> float:  # noqa: N803
    """Smallest kappa with omega <= kappa omega_X pointwise."""
    return float(np.max(generalized_eigenvalues(omega.data, omega_X.data)))


def degenerate_background(
    chi: HermitianField,
    t: float,
    omega_X: HermitianField,  # noqa: N803
) -> tuple[HermitianField, float]:
    """omega = chi + t omega_X for a semipositive chi and t > 0."""
    if t <= 0:
        msg = f"t must be positive, got {t}"
        raise LabError.DomainError(msg)
    check_hermitian(chi, "chi")
    check_hermitian(omega_X, "omega_X")
    scale = max(1.0, float(np.max(np.abs(chi.data))))
    smallest = float(np.min(np.linalg.eigvalsh(chi.data)))
    if smallest < -PSD_TOLERANCE * scale:
        msg = f"chi is not positive semidefinite (smallest eigenvalue {smallest:.3e})"
        raise LabError.GeometryError(msg)
    omega = chi + t * omega_X
    return omega, background_kappa(omega, omega_X)


def riemann_sum(values: np.ndarray, grid: TorusGrid) -> float:
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        msg = "integrand has non-finite values"
        raise LabError.DomainError(msg)
    return float(np.sum(values) * grid.cell_volume)


def measure_weight(state: SolutionState, measure: Measure) -> np.ndarray:
    if measure == Measure.BACKGROUND:
        return state.background_weight
    if measure == Measure.DENSITY:
        return state.density_weight
    return state.solution_weight


def integrate(
    field,
    grid: TorusGrid,
    measure: Measure = Measure.BACKGROUND,
    *,
    state: SolutionState | None = None,
    omega_X: HermitianField | None = None,  # noqa: N803
) -> float:
    """Uniform Riemann sum of ``field`` against one of the reference measures."""
    field = np.broadcast_to(np.asarray(field, dtype=float), grid.shape)
    if state is not None:
        weight = measure_weight(state, Measure(measure))
    elif measure == Measure.BACKGROUND:
        background = omega_X if omega_X is not None else HermitianField.identity(grid.n)
        weight = np.broadcast_to(background.determinant(), grid.shape)
    else:
        msg = f"integrating against {measure} needs a solution state"
        raise LabError.DomainError(msg)
    return riemann_sum(field * weight, grid)


def _cone_points(inside: np.ndarray) -> list[list[int]]:
    return np.argwhere(~inside)[:10].tolist()


def induce_density(
    op: "NonlinearOperator | OperatorSpec",
    phi: np.ndarray,
    omega: HermitianField,
    omega_X: HermitianField,  # noqa: N803
    grid: TorusGrid,
) -> SolutionState:
    """Solve f(lambda[h_phi]) = c_omega e^F for (c_omega, F) and sup-normalise phi."""
    op = as_operator(op)
    phi = grid.check_scalar(phi, "potential")
    phi = phi - np.max(phi)
    if not omega_X.is_constant:
        logger.warning("Grid-varying omega_X is experimental")
    omega_phi = HermitianField(omega.on(grid) + complex_hessian(phi, grid).data)
    eigenvalues = relative_eigenvalues(omega_X, omega_phi)
    inside = cone_contains(op.cone, eigenvalues)
    if not np.all(inside):
        msg = f"lambda[h_phi] leaves {op.cone.label} at {np.count_nonzero(~inside)} grid points"
        raise LabError.ConeViolation(msg, points=_cone_points(inside))
    f = op.evaluate(eigenvalues, check=False)
    if not np.all(f > 0):
        msg = "operator is not positive on the eigenvalue field"
        raise LabError.ConeViolation(msg, points=_cone_points(f > 0))

    n = grid.n
    background_weight = np.broadcast_to(omega_X.determinant(), grid.shape)
    background_volume = riemann_sum(background_weight, grid)
    c_omega_n = riemann_sum(f**n * background_weight, grid) / background_volume
    c_omega = c_omega_n ** (1.0 / n)
    F = np.log(f) - np.log(c_omega)  # noqa: N806
    volume = riemann_sum(np.broadcast_to(omega.determinant(), grid.shape), grid)
    return SolutionState(
        grid=grid,
        operator=op,
        phi=phi,
        omega=omega,
        omega_X=omega_X,
        omega_phi=omega_phi,
        eigenvalues=eigenvalues,
        F=F,
        c_omega=float(c_omega),
        volume=volume,
        background_volume=background_volume,
        kappa=background_kappa(omega, omega_X),
    )


def trigonometric_potential(grid: TorusGrid, modes: int, rng: np.random.Generator) -> np.ndarray:
    """Random real trigonometric polynomial with sup norm 1 and at most ``modes`` frequencies."""
    highest = max(1, min(3, grid.N // 4 - 1))
    phi = grid.zeros()
    for _ in range(max(1, modes)):
        frequency = rng.integers(-highest, highest + 1, size=grid.real_dimension)
        if not np.any(frequency):
            frequency[rng.integers(grid.real_dimension)] = 1
        amplitude = rng.standard_normal() / (1.0 + float(frequency @ frequency))
        phase = rng.uniform(0.0, 2 * np.pi)
        argument = sum(
            frequency[axis] * grid.coordinate(axis) for axis in range(grid.real_dimension)
        )
        phi = phi + amplitude * np.cos(2 * np.pi / grid.period * argument + phase)
    return phi / np.max(np.abs(phi))


def sample_admissible_potential(  # noqa: PLR0913
    op: "NonlinearOperator | OperatorSpec",
    omega: HermitianField,
    amplitude: float,
    modes: int,
    seed: int,
    grid: TorusGrid,
    omega_X: HermitianField | None = None,  # noqa: N803
) -> np.ndarray:
    """Largest multiple (up to ``amplitude``) of a random trigonometric polynomial keeping lambda in the cone."""
    if amplitude < 0:
        msg = f"amplitude must be non-negative, got {amplitude}"
        raise LabError.DomainError(msg)
    if amplitude == 0:
        return grid.zeros()
    op = as_operator(op)
    background = omega_X if omega_X is not None else HermitianField.identity(grid.n)
    rng = np.random.default_rng(seed)
    shape = trigonometric_potential(grid, modes, rng)
    hessian = complex_hessian(shape, grid).data
    base = omega.on(grid)

    def admissible(scale: float) -> bool:
        eigenvalues = generalized_eigenvalues(base + scale * hessian, background.data)
        return bool(np.all(cone_contains(op.cone, eigenvalues, margin=ADMISSIBLE_MARGIN)))

    if admissible(amplitude):
        scale = amplitude
    else:
        low, high = 0.0, amplitude
        for _ in range(BISECTION_STEPS):
            middle = 0.5 * (low + high)
            if admissible(middle):
                low = middle
            else:
                high = middle
        scale = low
    phi = scale * shape
    return phi - np.max(phi)
