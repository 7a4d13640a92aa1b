from celery import shared_task

from core.applications.lab_cli.interface import ExperimentConfig
from core.applications.lab_cli.services import barrier_entry
from core.applications.lab_cli.services import sweep_row


@shared_task()
def run_sweep_state(payload: dict) -> dict:
    """Bounds of one sampled state at one t, as a plain BoundsRow dict."""
    config = ExperimentConfig.model_validate(payload["config"])
    return sweep_row(config, payload["t_index"], payload["state"]).dict_plain()


@shared_task()
def run_barrier_solve(payload: dict) -> dict:
    """One auxiliary solve of the proof-audit barrier grid."""
    config = ExperimentConfig.model_validate(payload["config"])
    return barrier_entry(config, payload["s_index"], payload["k"])
