import json

import numpy as np
import pandas as pd
import pytest
from django.core.management import CommandError
from django.core.management import call_command

from core.applications.lab_cli.interface import CoupledConfig
from core.applications.lab_cli.interface import ExponentConfig
from core.applications.lab_cli.interface import SamplingConfig
from core.applications.lab_cli.models import ExperimentRun
from core.applications.lab_cli.runners import cmd_verify_operator
from core.applications.lab_cli.tests.factories import ExperimentConfigFactory
from core.applications.nonlinear_operators.tests.test_services import FirstEntryOperator
from core.applications.proof_engine.tests.test_constants import CHAIN_FIELDS
from core.applications.torus_geometry.snapshots import read_field_snapshot
from core.helper.enums import ExitCode


def write_config(tmp_path, config, name="experiment.json"):
    path = tmp_path / name
    path.write_text(json.dumps(config.dict_plain()))
    return path


def run_lab(tmp_path, subcommand, config, *extra):
    out = tmp_path / "out"
    call_command("lab", subcommand, "--config", str(write_config(tmp_path, config)), "--out", str(out), *extra)
    return out / subcommand


def read_json(path):
    return json.loads(path.read_text())


class TestVerifyOperator:
    def test_monge_ampere_passes(self, tmp_path):
        directory = run_lab(tmp_path, "verify-operator", ExperimentConfigFactory())
        report = read_json(directory / "report.json")
        assert report["passed"]
        assert report["header"]["command"] == "verify-operator"
        assert report["report"]["gamma_estimate"] == pytest.approx(0.25, abs=1e-10)

    def test_broken_operator_names_condition(self, tmp_path):
        config = ExperimentConfigFactory(output_dir=tmp_path)
        outcome = cmd_verify_operator(config, FirstEntryOperator(2))
        assert outcome.exit_code == ExitCode.BOUND_VIOLATION
        assert "symmetry" in outcome.verdict["failed_conditions"]
        report = read_json(tmp_path / "verify-operator" / "report.json")
        assert report["header"]["operator"] == "first_entry"
        assert not report["passed"]

    def test_invalid_config_exits_two(self, tmp_path):
        path = tmp_path / "experiment.json"
        path.write_text(json.dumps({"grid": {"N": 4}}))
        with pytest.raises(CommandError) as error:
            call_command("lab", "verify-operator", "--config", str(path))
        assert error.value.returncode == ExitCode.CONFIG_ERROR


class TestSweep:
    def test_flat_state_passes(self, tmp_path):
        config = ExperimentConfigFactory(sampling=SamplingConfig(amplitude=0.0))
        directory = run_lab(tmp_path, "sweep", config)
        assert {path.name for path in directory.iterdir()} >= {"sweep.csv", "report.json", "sweep.svg"}
        report = read_json(directory / "report.json")
        assert report["uniform"]
        assert report["rows"][0]["energy_lhs"] == 0.0

    def test_pass_flags_recomputable_from_csv(self, tmp_path):
        config = ExperimentConfigFactory(
            background={"chi": [[1.0, 0.0], [0.0, 0.0]], "t_values": [1.0, 0.5, 0.1]},
            sampling=SamplingConfig(count=2, amplitude=0.05, seed=3),
        )
        directory = run_lab(tmp_path, "sweep", config)
        frame = pd.read_csv(directory / "sweep.csv")
        assert len(frame) == 6
        assert list(frame["t"]) == [0.1, 0.1, 0.5, 0.5, 1.0, 1.0]
        assert list(frame["state"]) == [0, 1, 0, 1, 0, 1]
        assert (frame["energy_pass"] == (frame["energy_lhs"] <= frame["C_e"])).all()
        assert (frame["trudinger_pass"] == (frame["trudinger_log_lhs"] <= frame["log_C_T"])).all()
        assert frame["energy_pass"].all()
        assert frame["trudinger_pass"].all()

    def test_same_seed_same_csv(self, tmp_path):
        config = ExperimentConfigFactory(sampling=SamplingConfig(count=2, amplitude=0.05, seed=5))
        first = run_lab(tmp_path / "first", "sweep", config)
        second = run_lab(tmp_path / "second", "sweep", config, "--jobs", "2")
        assert (first / "sweep.csv").read_bytes() == (second / "sweep.csv").read_bytes()

    def test_seed_override(self, tmp_path):
        config = ExperimentConfigFactory(sampling=SamplingConfig(count=1, amplitude=0.05, seed=5))
        first = run_lab(tmp_path / "first", "sweep", config)
        second = run_lab(tmp_path / "second", "sweep", config, "--seed", "6")
        assert (first / "sweep.csv").read_bytes() != (second / "sweep.csv").read_bytes()
        assert read_json(second / "report.json")["header"]["seed"] == 6

    def test_sup_bound_uniform_beyond_dimension(self, tmp_path):
        config = ExperimentConfigFactory(
            background={"chi": [[1.0, 0.0], [0.0, 0.0]], "t_values": [1.0, 0.1]},
            exponents=ExponentConfig(p=3.0, q=1.0),
        )
        report = read_json(run_lab(tmp_path, "sweep", config) / "report.json")
        assert report["uniform"]
        assert all(row["sup_pass"] for row in report["rows"])
        assert np.log(report["max_sup_abs_phi"]) <= report["max_log_sup_bound"]

    @pytest.mark.django_db
    def test_records_run(self, tmp_path, settings):
        settings.LAB_RECORD_RUNS = True
        run_lab(tmp_path, "sweep", ExperimentConfigFactory())
        run = ExperimentRun.objects.get()
        assert run.command == "sweep"
        assert run.exit_code == ExitCode.PASSED
        assert run.verdict["rows"] == 1


class TestProofAudit:
    def test_default_grid_passes(self, tmp_path):
        directory = run_lab(tmp_path, "proof-audit", ExperimentConfigFactory())
        report = read_json(directory / "report.json")
        assert len(report["barriers"]) == 4
        assert all(check["max_value"] <= check["tolerance"] for check in report["barriers"])
        assert report["mass"]["passed"]
        assert report["decay"]["passed"]
        assert report["passed"]
        assert report["recursion_fit"] is None
        assert (directory / "profile.csv").exists()
        assert (directory / "decay.svg").exists()

    def test_ledger_lists_every_constant(self, tmp_path):
        directory = run_lab(tmp_path, "proof-audit", ExperimentConfigFactory())
        ledger = read_json(directory / "ledger.json")
        names = {entry["name"] for entry in ledger["ledger"]}
        assert set(CHAIN_FIELDS) <= names
        assert ledger["header"]["command"] == "proof-audit"

    def test_recursion_fit_beyond_dimension(self, tmp_path):
        config = ExperimentConfigFactory(exponents=ExponentConfig(p=3.0, q=1.0))
        report = read_json(run_lab(tmp_path, "proof-audit", config) / "report.json")
        assert report["recursion_fit"]["r"] == pytest.approx(3.0)
        assert report["recursion_fit"]["fitted_C_bar"] > 0
        assert report["recursion_fit"]["de_giorgi"]["verified"]

    def test_negative_level_exits_two(self, tmp_path):
        config = ExperimentConfigFactory().dict_plain()
        config["audit"]["s_fractions"] = [-0.5, 0.0]
        path = tmp_path / "experiment.json"
        path.write_text(json.dumps(config))
        with pytest.raises(CommandError) as error:
            call_command("lab", "proof-audit", "--config", str(path))
        assert error.value.returncode == ExitCode.CONFIG_ERROR


class TestCoupledCheck:
    def test_flat_state_passes(self, tmp_path):
        config = ExperimentConfigFactory(coupled=CoupledConfig(amplitude=0.0))
        directory = run_lab(tmp_path, "coupled-check", config)
        report = read_json(directory / "report.json")
        assert report["header"]["limitations"]
        assert report["report"]["c_theta"] == pytest.approx(0.0, abs=1e-12)
        assert report["report"]["passed"]

    def test_manufactured_state_passes(self, tmp_path):
        config = ExperimentConfigFactory(coupled=CoupledConfig(theta=[[0.5, 0.0], [0.0, 0.5]], amplitude=0.05))
        directory = run_lab(tmp_path, "coupled-check", config)
        report = read_json(directory / "report.json")["report"]
        assert report["residual"] <= 1e-6
        assert report["barrier"]["passed"]
        assert report["upper"]["passed"]
        assert report["sup_F"] <= report["F_upper_bound"]
        names = {entry["name"] for entry in read_json(directory / "ledger.json")["ledger"]}
        assert {"delta", "c_theta", "K_2", "a_mv"} <= names

    def test_rejected_state_is_reported(self, tmp_path):
        config = ExperimentConfigFactory(coupled=CoupledConfig(amplitude=0.05, residual_tolerance=1e-30))
        with pytest.raises(CommandError) as error:
            run_lab(tmp_path, "coupled-check", config)
        assert error.value.returncode == ExitCode.BOUND_VIOLATION
        report = read_json(tmp_path / "out" / "coupled-check" / "report.json")
        assert report["rejected"]["code"] == "bound_violation"


class TestSolveMA:
    def test_recovers_manufactured_potential(self, tmp_path):
        directory = run_lab(tmp_path, "solve-ma", ExperimentConfigFactory())
        report = read_json(directory / "report.json")
        assert report["passed"]
        assert report["sup_error"] <= 1e-6
        solver = report["solver"]
        assert solver["unshifted_residual"] <= 2 * report["tolerance"]
        assert abs(solver["unshifted_residual"] - solver["residual"]) <= abs(solver["normalization_shift"]) + 1e-12
        assert report["integrability"]["passed"]
        psi, grid, metadata = read_field_snapshot(directory / "psi.f64")
        exact, _, _ = read_field_snapshot(directory / "exact.f64")
        assert grid.N == 8
        assert metadata["field"] == "psi"
        assert np.max(np.abs(psi - exact)) == pytest.approx(report["sup_error"])
