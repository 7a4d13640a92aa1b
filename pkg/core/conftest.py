import pytest

from core.applications.nonlinear_operators.services import MongeAmpereOperator
from core.applications.torus_geometry.fields import HermitianField
from core.applications.torus_geometry.fields import TorusGrid
from core.applications.torus_geometry.services import induce_density
from core.applications.torus_geometry.services import sample_admissible_potential
from core.applications.torus_geometry.state import SolutionState


@pytest.fixture(autouse=True)
def _lab_output_root(settings, tmp_path) -> None:
    settings.LAB_OUTPUT_ROOT = tmp_path / "runs"


@pytest.fixture
def grid() -> TorusGrid:
    return TorusGrid(n=2, N=8)


@pytest.fixture
def identity_form() -> HermitianField:
    return HermitianField.identity(2)


@pytest.fixture
def monge_ampere() -> MongeAmpereOperator:
    return MongeAmpereOperator(2)


@pytest.fixture
def admissible_state(grid, identity_form, monge_ampere) -> SolutionState:
    phi = sample_admissible_potential(monge_ampere, identity_form, 0.02, 3, 7, grid)
    return induce_density(monge_ampere, phi, identity_form, identity_form, grid)
