import numpy as np
import pytest

from core.applications.torus_geometry.fields import HermitianField
from core.applications.torus_geometry.fields import TorusGrid
from core.applications.torus_geometry.snapshots import read_field_snapshot
from core.applications.torus_geometry.snapshots import sidecar_path
from core.applications.torus_geometry.snapshots import write_field_snapshot
from core.applications.torus_geometry.spectral import complex_hessian
from core.applications.torus_geometry.spectral import complex_laplacian
from core.applications.torus_geometry.spectral import green_kernel
from core.applications.torus_geometry.spectral import laplacian_symbol
from core.applications.torus_geometry.spectral import solve_laplacian
from core.helper.custom_exceptions import LabError


def analytic_mode_hessian(grid, frequency, amplitude, phase):
    n = grid.n
    argument = sum(frequency[axis] * grid.coordinate(axis) for axis in range(2 * n))
    cosine = amplitude * np.cos(2 * np.pi * argument + phase) * np.ones(grid.shape)
    kx, ky = frequency[:n], frequency[n:]
    hessian = np.empty((*grid.shape, n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            coefficient = kx[i] * kx[j] + ky[i] * ky[j] + 1j * (kx[i] * ky[j] - ky[i] * kx[j])
            hessian[..., i, j] = -0.25 * (2 * np.pi) ** 2 * coefficient * cosine
    return cosine, hessian


class TestTorusGrid:
    def test_cell_volume(self):
        grid = TorusGrid(n=2, N=8, period=2.0)
        assert grid.cell_volume == pytest.approx(16.0 / 8**4)
        assert grid.shape == (8, 8, 8, 8)

    @pytest.mark.parametrize(("n", "N"), [(2, 9), (2, 6), (4, 8)])
    def test_invalid(self, n, N):  # noqa: N803
        with pytest.raises(LabError.DomainError):
            TorusGrid(n=n, N=N)


class TestComplexHessian:
    def test_zero(self, grid):
        assert not np.any(complex_hessian(grid.zeros(), grid).data)

    def test_single_cosine(self, grid):
        epsilon = 0.3
        phi = epsilon * np.cos(2 * np.pi * grid.x(0)) * np.ones(grid.shape)
        hessian = complex_hessian(phi, grid).data
        expected = -(epsilon / 4) * (2 * np.pi) ** 2 * np.cos(2 * np.pi * grid.x(0)) * np.ones(grid.shape)
        np.testing.assert_allclose(hessian[..., 0, 0], expected, atol=1e-12)
        np.testing.assert_allclose(hessian[..., 0, 1], 0.0, atol=1e-12)
        np.testing.assert_allclose(hessian[..., 1, 1], 0.0, atol=1e-12)

    def test_random_band_limited(self, grid):
        rng = np.random.default_rng(17)
        for _ in range(20):
            frequency = rng.integers(-2, 3, size=4)
            amplitude = rng.uniform(0.1, 1.0)
            phase = rng.uniform(0, 2 * np.pi)
            phi, expected = analytic_mode_hessian(grid, frequency, amplitude, phase)
            hessian = complex_hessian(phi, grid).data
            scale = max(1.0, float(np.max(np.abs(expected))))
            np.testing.assert_allclose(hessian, expected, atol=1e-12 * scale)

    def test_linear(self, grid):
        rng = np.random.default_rng(2)
        first, second = rng.standard_normal(grid.shape), rng.standard_normal(grid.shape)
        total = complex_hessian(first + second, grid).data
        parts = complex_hessian(first, grid).data + complex_hessian(second, grid).data
        np.testing.assert_allclose(total, parts, atol=1e-10)

    def test_hermitian(self, grid):
        phi = np.random.default_rng(4).standard_normal(grid.shape)
        assert complex_hessian(phi, grid).hermitian_defect() == 0.0

    def test_rejects_non_finite(self, grid):
        phi = grid.zeros()
        phi[0, 0, 0, 0] = np.inf
        with pytest.raises(LabError.GeometryError):
            complex_hessian(phi, grid)


class TestLaplacian:
    def test_mode_eigenvalue(self, grid, identity_form):
        phi = np.cos(2 * np.pi * (grid.x(0) + grid.y(1))) * np.ones(grid.shape)
        laplacian = complex_laplacian(phi, grid, identity_form)
        np.testing.assert_allclose(laplacian, -(2 * np.pi) ** 2 / 4 * 2 * phi, atol=1e-11)

    def test_symbol_non_negative(self, grid):
        symbol = laplacian_symbol(grid, HermitianField.constant([[2.0, 0.5j], [-0.5j, 1.0]]))
        assert symbol.flat[0] == 0.0
        assert np.min(symbol.flat[1:]) > 0

    def test_green_rows_integrate_to_zero(self, grid, identity_form):
        kernel = green_kernel(grid, identity_form)
        assert abs(np.sum(kernel) * grid.cell_volume) <= 1e-12

    def test_solve_inverts_laplacian(self, grid, identity_form):
        phi = np.sin(2 * np.pi * grid.x(1)) * np.cos(2 * np.pi * grid.y(0)) * np.ones(grid.shape)
        recovered = solve_laplacian(complex_laplacian(phi, grid, identity_form), grid, identity_form)
        np.testing.assert_allclose(recovered, phi - phi.mean(), atol=1e-12)


class TestSnapshots:
    def test_header_and_sidecar(self, tmp_path, grid):
        field = np.random.default_rng(0).standard_normal(grid.shape)
        path = write_field_snapshot(tmp_path / "psi.f64", field, grid, {"label": "psi"})
        raw = path.read_bytes()
        assert np.frombuffer(raw[:16], dtype="<i8").tolist() == [2, 8]
        assert len(raw) == 16 + 8 * grid.size
        restored, restored_grid, metadata = read_field_snapshot(path)
        assert restored.tobytes() == field.tobytes()
        assert restored_grid == grid
        assert metadata == {"label": "psi"}
        assert sidecar_path(path).exists()
