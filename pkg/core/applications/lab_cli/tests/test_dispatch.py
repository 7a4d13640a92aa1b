import pytest

from core.applications.lab_cli.dispatch import dispatch
from core.applications.lab_cli.dispatch import resolve_jobs
from core.applications.lab_cli.tasks import run_sweep_state
from core.applications.lab_cli.tests.factories import ExperimentConfigFactory
from core.helper.enums import DispatchBackend


def row_key(row):
    return (row["t"], row["state"])


@pytest.fixture
def payloads():
    config = ExperimentConfigFactory(background={"t_values": [1.0, 0.5]})
    # reversed so that sorting is observable
    return [
        {"config": config.dict_plain(), "t_index": t_index, "state": index}
        for t_index in (1, 0)
        for index in (1, 0)
    ]


def test_resolve_jobs(settings):
    settings.LAB_DEFAULT_JOBS = 3
    assert resolve_jobs(None) == 3
    assert resolve_jobs(2) == 2
    assert resolve_jobs(0) == 1


def test_empty():
    assert dispatch(run_sweep_state, []) == []


def test_sorted_by_key(payloads):
    rows = dispatch(run_sweep_state, payloads, jobs=1, key=row_key)
    assert [row_key(row) for row in rows] == [(0.5, 0), (0.5, 1), (1.0, 0), (1.0, 1)]


def test_thread_pool_matches_sequential(payloads):
    sequential = dispatch(run_sweep_state, payloads, jobs=1, key=row_key)
    pooled = dispatch(run_sweep_state, payloads, jobs=3, key=row_key)
    assert pooled == sequential


def test_celery_group_matches_local(settings, payloads):
    local = dispatch(run_sweep_state, payloads, jobs=1, key=row_key)
    settings.LAB_DISPATCH = DispatchBackend.CELERY
    settings.CELERY_TASK_ALWAYS_EAGER = True
    assert dispatch(run_sweep_state, payloads, key=row_key) == local
