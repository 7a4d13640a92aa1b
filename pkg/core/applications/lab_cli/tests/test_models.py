import pytest

from core.applications.lab_cli.models import ExperimentRun
from core.applications.lab_cli.tests.factories import ExperimentRunFactory
from core.helper.enums import ExitCode
from core.helper.enums import LabCommand

pytestmark = pytest.mark.django_db


def test_str():
    run = ExperimentRunFactory(command=LabCommand.PROOF_AUDIT, seed=7, exit_code=ExitCode.SOLVER_FAILURE)
    assert str(run) == "proof-audit (seed 7, exit 3)"


def test_passed():
    assert ExperimentRunFactory().passed
    assert not ExperimentRunFactory(exit_code=ExitCode.BOUND_VIOLATION).passed


def test_hex_primary_key():
    run = ExperimentRunFactory()
    assert len(run.pk) == 32
    assert int(run.pk, 16) >= 0
    assert ExperimentRun.objects.get(pk=run.pk).verdict == {"rows": 1, "violations": 0}
