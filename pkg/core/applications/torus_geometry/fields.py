from dataclasses import dataclass

import numpy as np

from core.helper.custom_exceptions import LabError

MAX_COMPLEX_DIMENSION = 3
MIN_POINTS = 8


@dataclass(frozen=True)
class TorusGrid:
    """Uniform grid on the flat torus C^n / (period * Z^{2n}).

    Real axes are ordered ``(x_1, ..., x_n, y_1, ..., y_n)`` with
    ``z_j = x_j + i y_j``.
    """

    n: int
    N: int  # noqa: N815
    period: float = 1.0

    def __post_init__(self) -> None:
        if not 1 <= self.n <= MAX_COMPLEX_DIMENSION:
            msg = f"complex dimension must be in 1..{MAX_COMPLEX_DIMENSION}, got {self.n}"
            raise LabError.DomainError(msg)
        if self.N < MIN_POINTS or self.N % 2:
            msg = f"points per axis must be even and >= {MIN_POINTS}, got {self.N}"
            raise LabError.DomainError(msg)
        if self.period <= 0:
            msg = f"period must be positive, got {self.period}"
            raise LabError.DomainError(msg)

    @property
    def real_dimension(self) -> int:
        return 2 * self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.real_dimension

    @property
    def size(self) -> int:
        return self.N**self.real_dimension

    @property
    def spacing(self) -> float:
        return self.period / self.N

    @property
    def volume(self) -> float:
        """Lebesgue volume of the fundamental domain."""
        return self.period**self.real_dimension

    @property
    def cell_volume(self) -> float:
        return self.volume / self.size

    def coordinate(self, axis: int) -> np.ndarray:
        """Grid coordinate along one real axis, shaped to broadcast over the grid."""
        shape = [1] * self.real_dimension
        shape[axis] = self.N
        return (np.arange(self.N) * self.spacing).reshape(shape)

    def x(self, j: int) -> np.ndarray:
        return self.coordinate(j)

    def y(self, j: int) -> np.ndarray:
        return self.coordinate(self.n + j)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def check_scalar(self, field: np.ndarray, name: str = "field") -> np.ndarray:
        field = np.asarray(field, dtype=float)
        if field.shape != self.shape:
            msg = f"{name} has shape {field.shape}, grid expects {self.shape}"
            raise LabError.DomainError(msg)
        if not np.all(np.isfinite(field)):
            msg = f"{name} has non-finite values"
            raise LabError.GeometryError(msg)
        return field


@dataclass(frozen=True, eq=False)
class HermitianField:
    """Coefficients g_{i j-bar} of a (1,1)-form, constant ``(n, n)`` or per point ``(*grid.shape, n, n)``."""

    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=complex)
        if data.ndim < 2 or data.shape[-1] != data.shape[-2]:  # noqa: PLR2004
            msg = f"hermitian field needs trailing (n, n) axes, got {data.shape}"
            raise LabError.GeometryError(msg)
        if not np.all(np.isfinite(data)):
            msg = "hermitian field has non-finite entries"
            raise LabError.GeometryError(msg)
        object.__setattr__(self, "data", data)

    @classmethod
    def constant(cls, matrix) -> "HermitianField":
        return cls(np.asarray(matrix, dtype=complex))

    @classmethod
    def identity(cls, n: int) -> "HermitianField":
        return cls(np.eye(n, dtype=complex))

    @classmethod
    def diagonal(cls, values) -> "HermitianField":
        return cls(np.diag(np.asarray(values, dtype=complex)))

    @classmethod
    def zeros(cls, n: int) -> "HermitianField":
        return cls(np.zeros((n, n), dtype=complex))

    @property
    def n(self) -> int:
        return self.data.shape[-1]

    @property
    def is_constant(self) -> bool:
        return self.data.ndim == 2  # noqa: PLR2004

    @property
    def matrix(self) -> np.ndarray:
        if not self.is_constant:
            msg = "form is not constant over the grid"
            raise LabError.GeometryError(msg)
        return self.data

    def on(self, grid: TorusGrid) -> np.ndarray:
        """Coefficients broadcast to every grid point (read-only view for constant forms)."""
        if self.n != grid.n:
            msg = f"form of dimension {self.n} on a grid of dimension {grid.n}"
            raise LabError.DomainError(msg)
        return np.broadcast_to(self.data, (*grid.shape, self.n, self.n))

    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.data - np.conj(np.swapaxes(self.data, -1, -2)))))

    def determinant(self) -> np.ndarray:
        return np.real(np.linalg.det(self.data))

    def trace_against(self, other: "HermitianField") -> np.ndarray:
        """tr(self^{-1} other) pointwise."""
        return np.real(np.trace(np.linalg.solve(self.data, other.data), axis1=-2, axis2=-1))

    def __add__(self, other: "HermitianField") -> "HermitianField":
        return HermitianField(self.data + other.data)

    def __sub__(self, other: "HermitianField") -> "HermitianField":
        return HermitianField(self.data - other.data)

    def __mul__(self, scale: float) -> "HermitianField":
        return HermitianField(self.data * scale)

    __rmul__ = __mul__

    def __neg__(self) -> "HermitianField":
        return HermitianField(-self.data)
