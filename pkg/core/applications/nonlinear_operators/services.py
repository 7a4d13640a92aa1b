"""Symmetric degree-one operators f(lambda) on admissible cones.

Every function here is vectorised over leading axes: an array of shape
``(..., n)`` is a batch of eigenvalue vectors.
"""

import abc
import itertools
import logging
import math

import numpy as np

from core.applications.nonlinear_operators.interface import ConditionCheck
from core.applications.nonlinear_operators.interface import ConeSpec
from core.applications.nonlinear_operators.interface import OperatorSpec
from core.applications.nonlinear_operators.interface import StructuralReport
from core.helper.custom_exceptions import LabError
from core.helper.enums import ConeKind
from core.helper.enums import OperatorKind

logger = logging.getLogger(__name__)

INTERIOR_MARGIN = 1e-12
HOMOGENEITY_SCALES = (0.5, 2.0, 10.0)
IDENTITY_TOLERANCE = 1e-10
GRADIENT_TOLERANCE = 1e-6
GRADIENT_STEP = 1e-6


def _as_eigenvalues(lam, n: int | None = None) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    if lam.ndim == 0:
        msg = "eigenvalue vectors need at least one axis"
        raise LabError.DomainError(msg)
    if n is not None and lam.shape[-1] != n:
        msg = f"expected eigenvalue vectors of length {n}, got {lam.shape[-1]}"
        raise LabError.DomainError(msg)
    if not np.all(np.isfinite(lam)):
        msg = "eigenvalue vectors must be finite"
        raise LabError.DomainError(msg)
    return lam


def elementary_symmetric(lam, k_max: int) -> np.ndarray:
    """Return ``[sigma_0, ..., sigma_{k_max}]`` along a new trailing axis."""
    lam = np.asarray(lam, dtype=float)
    sigma = np.zeros((*lam.shape[:-1], k_max + 1))
    sigma[..., 0] = 1.0
    for i in range(lam.shape[-1]):
        for j in range(k_max, 0, -1):
            sigma[..., j] += lam[..., i] * sigma[..., j - 1]
    return sigma


def sigma_k(lam, k: int):
    lam = _as_eigenvalues(lam)
    n = lam.shape[-1]
    if not 1 <= k <= n:
        msg = f"sigma_k needs 1 <= k <= {n}, got {k}"
        raise LabError.DomainError(msg)
    value = elementary_symmetric(lam, k)[..., k]
    return float(value) if value.ndim == 0 else value


def _multi_indices(n: int, p: int) -> np.ndarray:
    """Incidence matrix of all p-subsets of {0..n-1}, shape (C(n,p), n)."""
    subsets = list(itertools.combinations(range(n), p))
    incidence = np.zeros((len(subsets), n))
    for row, subset in enumerate(subsets):
        incidence[row, list(subset)] = 1.0
    return incidence


def cone_contains(cone: ConeSpec, lam, margin: float = 0.0) -> np.ndarray:
    """Strict membership; with ``margin`` every defining inequality must exceed margin * |lam|^degree."""
    lam = _as_eigenvalues(lam, cone.n)
    norm = np.linalg.norm(lam, axis=-1)
    if cone.kind == ConeKind.GAMMA_K:
        sigma = elementary_symmetric(lam, cone.k)
        inside = np.ones(lam.shape[:-1], dtype=bool)
        for j in range(1, cone.k + 1):
            inside &= sigma[..., j] > margin * norm**j
        return inside
    partial_sums = lam @ _multi_indices(cone.n, cone.p).T
    return np.all(partial_sums > margin * norm[..., None], axis=-1)


def _require_inside(cone: ConeSpec, lam: np.ndarray) -> None:
    inside = cone_contains(cone, lam)
    if not np.all(inside):
        offending = np.argwhere(~np.atleast_1d(inside))[:10].tolist()
        msg = f"{np.size(inside) - np.count_nonzero(inside)} eigenvalue vectors outside {cone.label}"
        raise LabError.ConeViolation(msg, points=offending)


class NonlinearOperator(abc.ABC):
    """f: Gamma -> (0, inf), symmetric, degree-one homogeneous, increasing."""

    kind: str = "custom"
    # gamma taken from an OperatorSpec; wins over the analytic and sampled values
    configured_gamma: float | None = None

    def __init__(self, n: int) -> None:
        self.n = n

    @property
    @abc.abstractmethod
    def cone(self) -> ConeSpec: ...

    @property
    def gamma(self) -> float | None:
        """Analytic inf of the derivative product, when known."""
        return None

    @property
    def name(self) -> str:
        return f"{self.kind}(n={self.n})"

    @abc.abstractmethod
    def _value(self, lam: np.ndarray) -> np.ndarray: ...

    @abc.abstractmethod
    def _gradient(self, lam: np.ndarray) -> np.ndarray: ...

    def evaluate(self, lam, *, check: bool = True):
        lam = _as_eigenvalues(lam, self.n)
        if check:
            _require_inside(self.cone, lam)
        value = self._value(lam)
        return float(value) if np.ndim(value) == 0 else value

    def gradient(self, lam, *, check: bool = True) -> np.ndarray:
        lam = _as_eigenvalues(lam, self.n)
        if check:
            _require_inside(self.cone, lam)
        return self._gradient(lam)

    def derivative_product(self, lam, *, check: bool = True):
        value = np.prod(self.gradient(lam, check=check), axis=-1)
        return float(value) if np.ndim(value) == 0 else value

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


class MongeAmpereOperator(NonlinearOperator):
    kind = OperatorKind.MONGE_AMPERE.value

    @property
    def cone(self) -> ConeSpec:
        return ConeSpec.gamma(self.n, self.n)

    @property
    def gamma(self) -> float:
        return float(self.n) ** (-self.n)

    def _value(self, lam):
        return np.exp(np.mean(np.log(lam), axis=-1))

    def _gradient(self, lam):
        return self._value(lam)[..., None] / (self.n * lam)


class HessianOperator(NonlinearOperator):
    kind = OperatorKind.HESSIAN.value

    def __init__(self, n: int, k: int) -> None:
        super().__init__(n)
        self.k = k

    @property
    def cone(self) -> ConeSpec:
        return ConeSpec.gamma(self.n, self.k)

    @property
    def name(self) -> str:
        return f"{self.kind}(n={self.n}, k={self.k})"

    @property
    def gamma(self) -> float | None:
        if self.k == 1:
            return 1.0
        if self.k == self.n:
            return float(self.n) ** (-self.n)
        return None

    def _value(self, lam):
        return elementary_symmetric(lam, self.k)[..., self.k] ** (1.0 / self.k)

    def _gradient(self, lam):
        sigma = elementary_symmetric(lam, self.k)[..., self.k]
        reduced = np.stack(
            [
                elementary_symmetric(np.delete(lam, j, axis=-1), self.k - 1)[..., self.k - 1]
                for j in range(self.n)
            ],
            axis=-1,
        )
        return (sigma ** (1.0 / self.k - 1.0) / self.k)[..., None] * reduced


class PMongeAmpereOperator(NonlinearOperator):
    """f = (prod_I lambda_I)^(1/C(n,p)) over p-subsets I, lambda_I the partial sums.

    The exponent is the reciprocal of the binomial coefficient, the reading
    under which f is homogeneous of degree one.
    """

    kind = OperatorKind.P_MONGE_AMPERE.value

    def __init__(self, n: int, p: int) -> None:
        super().__init__(n)
        self.p = p
        self._incidence = _multi_indices(n, p)

    @property
    def cone(self) -> ConeSpec:
        return ConeSpec.pma(self.n, self.p)

    @property
    def name(self) -> str:
        return f"{self.kind}(n={self.n}, p={self.p})"

    @property
    def gamma(self) -> float | None:
        if self.p == 1:
            return float(self.n) ** (-self.n)
        if self.p == self.n:
            return 1.0
        return None

    def _value(self, lam):
        return np.exp(np.mean(np.log(lam @ self._incidence.T), axis=-1))

    def _gradient(self, lam):
        partial_sums = lam @ self._incidence.T
        count = self._incidence.shape[0]
        return self._value(lam)[..., None] / count * ((1.0 / partial_sums) @ self._incidence)


def build_operator(spec: OperatorSpec) -> NonlinearOperator:
    op: NonlinearOperator
    if spec.kind == OperatorKind.MONGE_AMPERE:
        op = MongeAmpereOperator(spec.n)
    elif spec.kind == OperatorKind.HESSIAN:
        op = HessianOperator(spec.n, spec.k)
    else:
        op = PMongeAmpereOperator(spec.n, spec.p)
    op.configured_gamma = spec.gamma
    return op


def as_operator(op: "NonlinearOperator | OperatorSpec") -> NonlinearOperator:
    return build_operator(op) if isinstance(op, OperatorSpec) else op


def f_eval(op: "NonlinearOperator | OperatorSpec", lam):
    return as_operator(op).evaluate(lam)


def f_grad(op: "NonlinearOperator | OperatorSpec", lam) -> np.ndarray:
    return as_operator(op).gradient(lam)


def sample_cone(
    cone: ConeSpec,
    count: int,
    seed: int,
    margin: float = INTERIOR_MARGIN,
    radii: tuple[float, float] = (1e-3, 1e3),
) -> np.ndarray:
    """Uniform directions on the sphere kept by rejection, log-uniform radii."""
    if count < 1:
        msg = "sample count must be at least 1"
        raise LabError.DomainError(msg)
    rng = np.random.default_rng(seed)
    accepted: list[np.ndarray] = []
    total = 0
    for _ in range(10_000):
        directions = rng.standard_normal((max(4 * count, 64), cone.n))
        directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
        keep = directions[cone_contains(cone, directions, margin=margin)]
        accepted.append(keep)
        total += len(keep)
        if total >= count:
            break
    else:
        msg = f"rejection sampling of {cone.label} did not reach {count} points"
        raise LabError.DomainError(msg)
    directions = np.concatenate(accepted)[:count]
    log_r = rng.uniform(math.log(radii[0]), math.log(radii[1]), size=(count, 1))
    return np.exp(log_r) * directions


def gamma_lower_bound(op: "NonlinearOperator | OperatorSpec", sample_budget: int, seed: int) -> float:
    """Infimum of prod_j df/dlambda_j over sampled interior cone points."""
    op = as_operator(op)
    samples = sample_cone(op.cone, sample_budget, seed)
    return float(np.min(op.derivative_product(samples, check=False)))


def resolve_gamma(op: NonlinearOperator, sample_budget: int = 20_000, seed: int = 0) -> float:
    """Configured gamma, else the analytic one, else 0.9 times the sampled infimum."""
    if op.configured_gamma is not None:
        if op.gamma is not None and op.configured_gamma > op.gamma:
            logger.warning("configured gamma %.6g exceeds the analytic infimum %.6g", op.configured_gamma, op.gamma)
        return op.configured_gamma
    if op.gamma is not None:
        return op.gamma
    return 0.9 * gamma_lower_bound(op, sample_budget, seed)


def _permutations(n: int, rng: np.random.Generator) -> list[tuple[int, ...]]:
    if n <= 4:  # noqa: PLR2004
        return list(itertools.permutations(range(n)))
    return [tuple(rng.permutation(n)) for _ in range(50)]


def _finite_difference_gradient(op: NonlinearOperator, lam: np.ndarray) -> np.ndarray:
    step = GRADIENT_STEP * np.linalg.norm(lam, axis=-1, keepdims=True)
    columns = []
    for j in range(op.n):
        shift = np.zeros_like(lam)
        shift[..., j] = step[..., 0]
        forward = op.evaluate(lam + shift, check=False)
        backward = op.evaluate(lam - shift, check=False)
        columns.append((forward - backward) / (2 * step[..., 0]))
    return np.stack(columns, axis=-1)


def verify_structural_conditions(
    op: "NonlinearOperator | OperatorSpec",
    sample_budget: int,
    seed: int,
) -> StructuralReport:
    """Sample-based audit of symmetry, homogeneity, monotonicity, cone nesting and the derivative product."""
    op = as_operator(op)
    rng = np.random.default_rng(seed)
    samples = sample_cone(op.cone, sample_budget, seed)
    values = op.evaluate(samples, check=False)
    checks: list[ConditionCheck] = []

    positivity = float(max(0.0, -np.min(values)))
    checks.append(
        ConditionCheck(name="positivity", passed=bool(np.all(values > 0)), worst_violation=positivity),
    )

    symmetry = 0.0
    for perm in _permutations(op.n, rng):
        permuted = op.evaluate(samples[:, list(perm)], check=False)
        symmetry = max(symmetry, float(np.max(np.abs(permuted - values) / np.abs(values))))
    checks.append(
        ConditionCheck(name="symmetry", passed=symmetry <= IDENTITY_TOLERANCE, worst_violation=symmetry),
    )

    homogeneity = 0.0
    for t in HOMOGENEITY_SCALES:
        scaled = op.evaluate(t * samples, check=False)
        homogeneity = max(homogeneity, float(np.max(np.abs(scaled / (t * values) - 1.0))))
    checks.append(
        ConditionCheck(
            name="homogeneity",
            passed=homogeneity <= IDENTITY_TOLERANCE,
            worst_violation=homogeneity,
        ),
    )

    gradients = op.gradient(samples, check=False)
    min_gradient = float(np.min(gradients))
    checks.append(
        ConditionCheck(
            name="monotonicity",
            passed=min_gradient > 0,
            worst_violation=max(0.0, -min_gradient),
            detail=f"smallest partial derivative {min_gradient:.3e}",
        ),
    )

    interior = sample_cone(op.cone, min(sample_budget, 500), seed + 1, margin=1e-2)
    exact = op.gradient(interior, check=False)
    approx = _finite_difference_gradient(op, interior)
    scale = np.maximum(np.abs(exact), np.max(np.abs(exact), axis=-1, keepdims=True) * 1e-3)
    gradient_error = float(np.max(np.abs(approx - exact) / scale))
    checks.append(
        ConditionCheck(
            name="gradient_consistency",
            passed=gradient_error <= GRADIENT_TOLERANCE,
            worst_violation=gradient_error,
        ),
    )

    positive_octant = sample_cone(ConeSpec.gamma(op.n, op.n), sample_budget, seed + 2)
    outside_cone = int(np.count_nonzero(~cone_contains(op.cone, positive_octant)))
    half_space = ConeSpec.gamma(op.n, 1)
    outside_half_space = int(np.count_nonzero(~cone_contains(half_space, samples)))
    checks.append(
        ConditionCheck(
            name="cone_nesting",
            passed=outside_cone == 0 and outside_half_space == 0,
            worst_violation=float(outside_cone + outside_half_space),
            detail=f"{outside_cone} Gamma_n points outside, {outside_half_space} points outside Gamma_1",
        ),
    )

    products = np.prod(gradients, axis=-1)
    gamma_estimate = float(np.min(products))
    analytic = op.gamma
    if analytic is not None:
        deviation = float(max(0.0, analytic - gamma_estimate) / analytic)
        product_ok = gamma_estimate > 0 and deviation <= 1e-8  # noqa: PLR2004
    else:
        deviation = float(max(0.0, -gamma_estimate))
        product_ok = gamma_estimate > 0
    checks.append(
        ConditionCheck(
            name="derivative_product",
            passed=product_ok,
            worst_violation=deviation,
            detail=f"sampled infimum {gamma_estimate:.6e}",
        ),
    )

    report = StructuralReport(
        operator=op.name,
        n=op.n,
        sample_budget=sample_budget,
        seed=seed,
        gamma_estimate=gamma_estimate,
        gamma_analytic=analytic,
        checks=checks,
    )
    if report.passed:
        logger.info("Operator %s passes all structural checks", op.name)
    else:
        logger.warning("Operator %s fails %s", op.name, ", ".join(report.failed_conditions))
    return report
