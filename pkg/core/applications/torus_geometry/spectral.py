"""Fourier differentiation on the flat torus.

Convention: d/dz = (d/dx - i d/dy) / 2, so the complex Hessian is
``phi_{i j-bar} = (phi_{x_i x_j} + phi_{y_i y_j} + i (phi_{x_i y_j} - phi_{y_i x_j})) / 4``.
Pure second derivatives keep the Nyquist mode; mixed ones drop it so the
result of a real field stays real.
"""

from functools import lru_cache

import numpy as np
from django.conf import settings
from django.core.exceptions import ImproperlyConfigured
from scipy import fft

from core.applications.torus_geometry.fields import HermitianField
from core.applications.torus_geometry.fields import TorusGrid
from core.helper.custom_exceptions import LabError


def fft_workers() -> int | None:
    try:
        return getattr(settings, "LAB_FFT_WORKERS", None)
    except ImproperlyConfigured:
        return None


def forward(field: np.ndarray) -> np.ndarray:
    return fft.fftn(field, workers=fft_workers())


def backward(coefficients: np.ndarray) -> np.ndarray:
    return fft.ifftn(coefficients, workers=fft_workers())


@lru_cache(maxsize=16)
def wavenumbers(N: int, period: float) -> tuple[np.ndarray, np.ndarray]:  # noqa: N803
    """Angular wavenumbers with and without the Nyquist mode."""
    full = 2 * np.pi / period * fft.fftfreq(N, d=1.0 / N)
    odd = full.copy()
    odd[N // 2] = 0.0
    full.setflags(write=False)
    odd.setflags(write=False)
    return full, odd


def _along(grid: TorusGrid, axis: int, values: np.ndarray) -> np.ndarray:
    shape = [1] * grid.real_dimension
    shape[axis] = grid.N
    return values.reshape(shape)


def second_derivative_symbol(grid: TorusGrid, a: int, b: int) -> np.ndarray:
    full, odd = wavenumbers(grid.N, grid.period)
    if a == b:
        return -(_along(grid, a, full) ** 2)
    return -_along(grid, a, odd) * _along(grid, b, odd)


@lru_cache(maxsize=8)
def hessian_symbols(grid: TorusGrid) -> dict[tuple[int, int], np.ndarray]:
    """Fourier multipliers of phi -> phi_{i j-bar} for i <= j."""
    n = grid.n
    symbols = {}
    for i in range(n):
        for j in range(i, n):
            xi, yi, xj, yj = i, n + i, j, n + j
            real = second_derivative_symbol(grid, xi, xj) + second_derivative_symbol(grid, yi, yj)
            if i == j:
                symbol = 0.25 * real.astype(complex)
            else:
                imag = second_derivative_symbol(grid, xi, yj) - second_derivative_symbol(grid, yi, xj)
                symbol = 0.25 * (real + 1j * imag)
            symbol.setflags(write=False)
            symbols[i, j] = symbol
    return symbols


def complex_hessian(phi: np.ndarray, grid: TorusGrid) -> HermitianField:
    """Spectral i-d-dbar phi; exact on trigonometric polynomials below Nyquist."""
    phi = grid.check_scalar(phi, "potential")
    coefficients = forward(phi)
    hessian = np.empty((*grid.shape, grid.n, grid.n), dtype=complex)
    for (i, j), symbol in hessian_symbols(grid).items():
        entry = backward(symbol * coefficients)
        if i == j:
            hessian[..., i, i] = entry.real
        else:
            hessian[..., i, j] = entry
            hessian[..., j, i] = np.conj(entry)
    return HermitianField(hessian)


def _constant_inverse(omega_X: HermitianField) -> np.ndarray:  # noqa: N803
    if not omega_X.is_constant:
        msg = "spectral Laplacian needs a constant background form"
        raise LabError.GeometryError(msg)
    return np.linalg.inv(omega_X.matrix)


def laplacian_symbol(grid: TorusGrid, omega_X: HermitianField) -> np.ndarray:  # noqa: N803
    """Non-negative symbol sigma(k) with Delta_{omega_X} = -sigma on Fourier modes."""
    inverse = _constant_inverse(omega_X)
    symbol = np.zeros(grid.shape)
    for (i, j), multiplier in hessian_symbols(grid).items():
        term = inverse[j, i] * multiplier
        if i != j:
            term = term + inverse[i, j] * np.conj(multiplier)
        symbol = symbol - np.real(term)
    return symbol


def complex_laplacian(phi: np.ndarray, grid: TorusGrid, omega_X: HermitianField) -> np.ndarray:  # noqa: N803
    """tr_{omega_X} i-d-dbar phi."""
    hessian = complex_hessian(phi, grid)
    if omega_X.is_constant:
        return np.real(np.einsum("ji,...ij->...", np.linalg.inv(omega_X.matrix), hessian.data))
    return omega_X.trace_against(hessian)


def invert_symbol(symbol: np.ndarray) -> np.ndarray:
    """Pseudo-inverse of a non-negative symbol, zero on the kernel."""
    tiny = 1e-12 * float(np.max(symbol))
    inverse = np.zeros_like(symbol)
    np.divide(1.0, symbol, out=inverse, where=symbol > tiny)
    return inverse


def solve_laplacian(rhs: np.ndarray, grid: TorusGrid, omega_X: HermitianField) -> np.ndarray:  # noqa: N803
    """Mean-zero v with Delta_{omega_X} v = rhs - mean(rhs)."""
    inverse = invert_symbol(laplacian_symbol(grid, omega_X))
    return np.real(backward(-inverse * forward(rhs)))


def green_kernel(grid: TorusGrid, omega_X: HermitianField) -> np.ndarray:  # noqa: N803
    """Kernel G(x - 0) of -Delta_{omega_X}^{-1} on mean-zero functions, as a density against dx.

    ``phi - mean(phi) = sum_y G(x - y) (-Delta phi)(y) * cell_volume``, and every
    row integrates to zero.
    """
    inverse = invert_symbol(laplacian_symbol(grid, omega_X))
    return np.real(backward(inverse)) / grid.cell_volume
