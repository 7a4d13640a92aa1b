import json
import math
from pathlib import Path

import numpy as np
import pytest

from core.applications.lab_cli.interface import ExponentConfig
from core.applications.lab_cli.interface import RunOutcome
from core.applications.lab_cli.interface import SamplingConfig
from core.applications.lab_cli.models import ExperimentRun
from core.applications.lab_cli.services import audit_levels
from core.applications.lab_cli.services import audit_state
from core.applications.lab_cli.services import background_forms
from core.applications.lab_cli.services import barrier_entry
from core.applications.lab_cli.services import load_experiment_config
from core.applications.lab_cli.services import record_run
from core.applications.lab_cli.services import report_header
from core.applications.lab_cli.services import sample_state
from core.applications.lab_cli.services import state_seed
from core.applications.lab_cli.services import sweep_row
from core.applications.lab_cli.tests.factories import ExperimentConfigFactory
from core.applications.lab_cli.tests.factories import ExperimentRunFactory
from core.helper.custom_exceptions import LabError
from core.helper.enums import ExitCode
from core.helper.enums import LabCommand

HESSIAN_TOML = """
jobs = 2

[operator]
kind = "hessian"
n = 3
k = 2

[grid]
n = 3
N = 8

[background]
t_values = [1.0, 0.5]

[sampling]
seed = 4
count = 3
"""


class TestLoadExperimentConfig:
    def test_toml_with_overrides(self, tmp_path):
        path = tmp_path / "experiment.toml"
        path.write_text(HESSIAN_TOML)
        config = load_experiment_config(path, seed=11, grid=12, out=tmp_path / "out")
        assert config.operator.k == 2
        assert config.grid.n == 3
        assert config.grid.N == 12
        assert config.sampling.seed == 11
        assert config.sampling.count == 3
        assert config.background.t_values == [1.0, 0.5]
        assert config.jobs == 2
        assert config.output_dir == tmp_path / "out"

    def test_json_file(self, tmp_path):
        path = tmp_path / "experiment.json"
        path.write_text(json.dumps({"exponents": {"p": 3.0, "q": 1.0}}))
        config = load_experiment_config(path, jobs=4)
        assert config.exponents == ExponentConfig(p=3.0, q=1.0)
        assert config.jobs == 4
        assert config.operator.kind == "monge_ampere"

    def test_defaults_without_file(self):
        config = load_experiment_config()
        assert config.grid.n == 2
        assert config.background.t_values == [1.0]

    def test_missing_file(self, tmp_path):
        with pytest.raises(LabError.ConfigError) as error:
            load_experiment_config(tmp_path / "absent.toml")
        assert error.value.context["path"].endswith("absent.toml")
        assert error.value.exit_code == ExitCode.CONFIG_ERROR

    def test_unparseable_file(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{sampling: ")
        with pytest.raises(LabError.ConfigError):
            load_experiment_config(path)

    @pytest.mark.parametrize("t_values", [[0.0], [1.5], [0.5, -0.1]])
    def test_t_values_in_unit_interval(self, t_values):
        with pytest.raises(LabError.ConfigError) as error:
            load_experiment_config(data={"background": {"t_values": t_values}})
        assert error.value.exit_code == ExitCode.CONFIG_ERROR
        assert any(item.startswith("background.t_values") for item in error.value.context["errors"])

    def test_matrix_dimension_checked(self):
        with pytest.raises(LabError.ConfigError) as error:
            load_experiment_config(data={"background": {"chi": [[1, 0, 0], [0, 0, 0], [0, 0, 0]]}})
        assert "chi must be a 2x2 matrix" in error.value.detail

    def test_operator_dimension_checked(self):
        with pytest.raises(LabError.ConfigError):
            load_experiment_config(data={"operator": {"kind": "monge_ampere", "n": 3}})

    def test_negative_level_rejected(self):
        with pytest.raises(LabError.ConfigError):
            load_experiment_config(data={"audit": {"s_fractions": [-0.1, 0.2]}})

    def test_unknown_key_rejected(self):
        with pytest.raises(LabError.ConfigError):
            load_experiment_config(data={"sampling": {"samples": 3}})


class TestReportHeader:
    def test_digest_ignores_output_and_jobs(self, tmp_path):
        config = ExperimentConfigFactory()
        moved = config.model_copy(update={"output_dir": tmp_path, "jobs": 8})
        assert report_header(LabCommand.SWEEP, config).config_digest == report_header(
            LabCommand.SWEEP,
            moved,
        ).config_digest

    def test_digest_tracks_seed(self):
        config = ExperimentConfigFactory()
        reseeded = ExperimentConfigFactory(sampling=SamplingConfig(seed=8))
        assert report_header(LabCommand.SWEEP, config).config_digest != report_header(
            LabCommand.SWEEP,
            reseeded,
        ).config_digest

    def test_fields(self):
        header = report_header(LabCommand.COUPLED_CHECK, ExperimentConfigFactory(), "manufactured")
        assert header.command == LabCommand.COUPLED_CHECK
        assert header.seed == 7
        assert header.operator == "monge_ampere"
        assert header.limitations == "manufactured"


class TestSampling:
    def test_state_seed_is_stable_and_distinct(self):
        assert state_seed(3, 0) == state_seed(3, 0)
        assert len({state_seed(3, index) for index in range(10)}) == 10
        assert state_seed(3, 1) != state_seed(4, 1)

    def test_degenerate_background(self):
        config = load_experiment_config(data={"background": {"chi": [[1, 0], [0, 0]], "t_values": [0.5]}})
        omega, omega_X, kappa = background_forms(config, 0.5)  # noqa: N806
        assert np.allclose(omega.data, np.diag([1.5, 0.5]))
        assert np.allclose(omega_X.data, np.eye(2))
        assert kappa == pytest.approx(1.5)

    def test_same_state_across_calls(self):
        config = ExperimentConfigFactory()
        first = sample_state(config, 1.0, 2)
        second = sample_state(config, 1.0, 2)
        assert np.array_equal(first.phi, second.phi)
        assert not np.array_equal(first.phi, sample_state(config, 1.0, 3).phi)

    def test_zero_amplitude_is_flat(self):
        config = ExperimentConfigFactory(sampling=SamplingConfig(amplitude=0.0))
        state = sample_state(config, 1.0, 0)
        assert np.all(state.phi == 0)
        assert np.max(np.abs(state.F)) <= 1e-12


class TestSweepRow:
    def test_flat_state_sits_at_trivial_minima(self):
        config = ExperimentConfigFactory(sampling=SamplingConfig(amplitude=0.0))
        row = sweep_row(config, 0, 0)
        assert row.passed
        assert row.energy_lhs == 0.0
        assert row.sup_abs_phi == 0.0
        assert row.trudinger_log_lhs == pytest.approx(0.0, abs=1e-12)
        assert row.c_ratio == pytest.approx(1.0)
        assert row.sup_bound is None
        assert row.barrier_pass is None

    def test_pass_flags_follow_columns(self):
        row = sweep_row(ExperimentConfigFactory(), 0, 0)
        assert row.energy_pass == (row.energy_lhs <= row.C_e)
        assert row.trudinger_pass == (row.trudinger_log_lhs <= row.log_C_T)
        assert row.passed

    def test_kappa_follows_background(self):
        config = ExperimentConfigFactory(
            background=load_experiment_config(
                data={"background": {"chi": [[1, 0], [0, 0]], "t_values": [1.0, 0.1]}},
            ).background,
        )
        row = sweep_row(config, 1, 0)
        assert row.t == 0.1
        assert row.kappa == pytest.approx(1.1)

    def test_sup_bound_beyond_dimension(self):
        config = ExperimentConfigFactory(exponents=ExponentConfig(p=3.0, q=1.0))
        row = sweep_row(config, 0, 0)
        assert row.sup_bound is not None
        assert row.log_sup_bound >= row.log_s_bar
        assert row.sup_pass
        assert math.log(row.sup_abs_phi) <= row.log_sup_bound

    def test_barrier_check_on_request(self):
        config = ExperimentConfigFactory(sweep={"barrier_checks": True, "k": 16.0})
        row = sweep_row(config, 0, 0)
        assert row.status == "ok"
        assert row.barrier_pass
        assert row.barrier_max <= row.barrier_tolerance


class TestBarrierEntry:
    def test_levels_scale_with_sup(self):
        config = ExperimentConfigFactory()
        state = audit_state(config)
        assert audit_levels(config, state) == [0.0, pytest.approx(0.3 * state.sup_abs_phi)]

    def test_entry_holds_check(self):
        entry = barrier_entry(ExperimentConfigFactory(), 1, 8.0)
        assert entry["error"] is None
        assert entry["k"] == 8.0
        assert entry["check"]["passed"]
        assert entry["check"]["s"] == pytest.approx(entry["s"])
        integrability = entry["check"]["integrability"]
        assert integrability["passed"]
        assert integrability["log_value"] <= math.log(integrability["C_X"])


@pytest.mark.django_db
class TestRecordRun:
    def outcome(self, tmp_path):
        return RunOutcome(
            command=LabCommand.SWEEP,
            exit_code=ExitCode.BOUND_VIOLATION,
            output_dir=str(tmp_path),
            files=["sweep.csv"],
            verdict={"rows": 2, "violations": 1},
        )

    def test_records_when_enabled(self, settings, tmp_path):
        settings.LAB_RECORD_RUNS = True
        config = ExperimentConfigFactory()
        record_run(config, self.outcome(tmp_path))
        run = ExperimentRun.objects.get()
        assert run.command == LabCommand.SWEEP
        assert run.seed == 7
        assert run.exit_code == ExitCode.BOUND_VIOLATION
        assert not run.passed
        assert run.verdict == {"rows": 2, "violations": 1}
        assert run.config_digest == report_header(LabCommand.SWEEP, config).config_digest
        assert Path(run.output_dir) == tmp_path

    def test_skipped_when_disabled(self, settings, tmp_path):
        settings.LAB_RECORD_RUNS = False
        record_run(ExperimentConfigFactory(), self.outcome(tmp_path))
        assert not ExperimentRun.objects.exists()

    def test_factory(self):
        run = ExperimentRunFactory()
        assert run.passed
        assert str(run) == f"sweep (seed {run.seed}, exit 0)"
        assert list(ExperimentRun.objects.all()) == [run]
