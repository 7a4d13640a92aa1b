import json
import logging
import math
import tomllib
from pathlib import Path
from typing import Any

import numpy as np
from django.conf import settings
from pydantic import ValidationError

from core.applications.functionals.interface import TrudingerIntegral
from core.applications.functionals.services import energy
from core.applications.functionals.services import entropy_p
from core.applications.functionals.services import trudinger_integral
from core.applications.lab_cli.interface import BoundsRow
from core.applications.lab_cli.interface import ExperimentConfig
from core.applications.lab_cli.interface import ReportHeader
from core.applications.lab_cli.interface import RunOutcome
from core.applications.lab_cli.models import ExperimentRun
from core.applications.ma_solver.services import auxiliary_density
from core.applications.ma_solver.services import auxiliary_problem
from core.applications.ma_solver.services import exponential_integrability
from core.applications.ma_solver.services import solve_ma
from core.applications.nonlinear_operators.services import NonlinearOperator
from core.applications.nonlinear_operators.services import build_operator
from core.applications.nonlinear_operators.services import resolve_gamma
from core.applications.proof_engine.checks import check_phi_test_function
from core.applications.proof_engine.constants import build_constant_chain
from core.applications.proof_engine.constants import recursion_increment
from core.applications.proof_engine.interface import BarrierCheck
from core.applications.proof_engine.interface import ConstantChain
from core.applications.torus_geometry.fields import HermitianField
from core.applications.torus_geometry.fields import TorusGrid
from core.applications.torus_geometry.services import degenerate_background
from core.applications.torus_geometry.services import induce_density
from core.applications.torus_geometry.services import integrate
from core.applications.torus_geometry.services import sample_admissible_potential
from core.applications.torus_geometry.state import SolutionState
from core.helper.custom_exceptions import LabError
from core.helper.enums import LabCommand
from core.helper.enums import Measure

logger = logging.getLogger(__name__)


def _read_config_file(path: Path) -> dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        LabError.raise_error(f"config file {path} does not exist", "ConfigError", path=str(path))
    try:
        if path.suffix == ".toml":
            return tomllib.loads(path.read_text())
        return json.loads(path.read_text())
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as exc:
        msg = f"cannot parse {path}: {exc}"
        raise LabError.ConfigError(msg) from exc


def load_experiment_config(  # noqa: PLR0913
    path: Path | None = None,
    *,
    seed: int | None = None,
    out: Path | None = None,
    grid: int | None = None,
    jobs: int | None = None,
    data: dict[str, Any] | None = None,
) -> ExperimentConfig:
    """Validate a config file (or dict) with the command-line overrides applied."""
    raw: dict[str, Any] = dict(data or {})
    if path is not None:
        raw.update(_read_config_file(path))
    if seed is not None:
        raw["sampling"] = {**raw.get("sampling", {}), "seed": seed}
    if grid is not None:
        raw["grid"] = {**raw.get("grid", {}), "N": grid}
    if out is not None:
        raw["output_dir"] = str(out)
    if jobs is not None:
        raw["jobs"] = jobs
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        errors = [f"{'.'.join(str(part) for part in error['loc'])}: {error['msg']}" for error in exc.errors()]
        msg = "invalid experiment config: " + "; ".join(errors)
        raise LabError.ConfigError(msg, errors=errors) from exc


def build_grid(config: ExperimentConfig) -> TorusGrid:
    return TorusGrid(n=config.grid.n, N=config.grid.N, period=config.grid.period)


def operator_for(config: ExperimentConfig) -> NonlinearOperator:
    return build_operator(config.operator)


def hermitian_form(matrix: list[list[float]] | None, default: np.ndarray) -> HermitianField:
    return HermitianField.constant(default if matrix is None else np.asarray(matrix, dtype=float))


def background_forms(config: ExperimentConfig, t: float) -> tuple[HermitianField, HermitianField, float]:
    """(omega, omega_X, kappa) for one t."""
    n = config.grid.n
    omega_X = hermitian_form(config.background.omega_X, np.eye(n))  # noqa: N806
    chi = hermitian_form(config.background.chi, np.zeros((n, n)))
    omega, kappa = degenerate_background(chi, t, omega_X)
    return omega, omega_X, kappa


def state_seed(seed: int, index: int) -> int:
    """Independent stream per sampled state; the same across t."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def sample_state(config: ExperimentConfig, t: float, index: int) -> SolutionState:
    op = operator_for(config)
    grid = build_grid(config)
    omega, omega_X, _ = background_forms(config, t)  # noqa: N806
    sampling = config.sampling
    phi = sample_admissible_potential(
        op,
        omega,
        sampling.amplitude,
        sampling.modes,
        state_seed(sampling.seed, index),
        grid,
        omega_X,
    )
    return induce_density(op, phi, omega, omega_X, grid)


def report_header(command: LabCommand, config: ExperimentConfig, limitations: str | None = None) -> ReportHeader:
    return ReportHeader(
        command=command,
        seed=config.sampling.seed,
        config_digest=config.model_copy(update={"output_dir": None, "jobs": None}).digest(),
        operator=operator_for(config).name,
        limitations=limitations,
    )


def output_directory(command: LabCommand, config: ExperimentConfig) -> Path:
    root = Path(config.output_dir) if config.output_dir is not None else Path(settings.LAB_OUTPUT_ROOT)
    directory = root / command.value
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def write_json(path: Path, payload: Any) -> Path:
    path.write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n")
    return path


def record_run(config: ExperimentConfig, outcome: RunOutcome) -> None:
    if not settings.LAB_RECORD_RUNS:
        return
    ExperimentRun.objects.create(
        command=outcome.command,
        seed=config.sampling.seed,
        config_digest=report_header(outcome.command, config).config_digest,
        output_dir=outcome.output_dir,
        exit_code=outcome.exit_code,
        verdict=outcome.verdict,
    )
    logger.info("Recorded %s run with exit code %d", outcome.command, outcome.exit_code)


def _log(value: float) -> float:
    return math.log(value) if value > 0 else -math.inf


def state_chain(config: ExperimentConfig, state: SolutionState, C_0: float | None = None) -> ConstantChain:  # noqa: N803
    """Constant chain for one state, with K the measured Ent_p."""
    p = config.exponents.p
    return build_constant_chain(
        state.n,
        p,
        resolve_gamma(state.operator, config.verify.sample_budget, config.sampling.seed),
        state.kappa,
        state.c_ratio,
        entropy_p(state, p),
        state.background_volume,
        q=config.exponents.q,
        C_0=C_0,
    )


def barrier_check(  # noqa: PLR0913
    config: ExperimentConfig,
    state: SolutionState,
    chain: ConstantChain,
    s: float,
    k: float,
) -> BarrierCheck:
    """Solve the auxiliary equation at (s, k) and evaluate the Phi test function on its solution."""
    density = auxiliary_density(state, s, k, chain.a)
    psi, report = solve_ma(auxiliary_problem(state, density, **config.solver.options()))
    logger.debug("auxiliary solve s=%g k=%g: %d iterations", s, k, report.iterations)
    integrability = exponential_integrability(psi, state.grid, state.omega_X, chain.beta, chain.C_X)
    return check_phi_test_function(state, psi, chain, s, density.A_sk, k, integrability=integrability)


def bound_integrals(state: SolutionState, chain: ConstantChain) -> tuple[float, TrudingerIntegral]:
    """Energy left-hand side int (-phi)^a e^{nF} omega_X^n and the Trudinger integral at alpha_T."""
    energy_lhs = integrate((-state.phi) ** chain.a, state.grid, Measure.DENSITY, state=state)
    return energy_lhs, trudinger_integral(state, chain.alpha_T, chain.q)


def sweep_row(config: ExperimentConfig, t_index: int, index: int) -> BoundsRow:
    """Energy, Trudinger and sup-norm bounds of one sampled state at one t."""
    t = config.background.t_values[t_index]
    state = sample_state(config, t, index)
    chain = state_chain(config, state)
    energy_lhs, trudinger = bound_integrals(state, chain)
    row = {
        "t": t,
        "state": index,
        "kappa": state.kappa,
        "c_ratio": state.c_ratio,
        "ent_p": chain.K,
        "sup_abs_phi": state.sup_abs_phi,
        "energy": energy(state),
        "energy_lhs": energy_lhs,
        "C_e": chain.C_e,
        "energy_pass": chain.energy_bound_holds(energy_lhs),
        "trudinger_log_lhs": trudinger.log_value,
        "log_C_T": chain.log_C_T,
        "C_T": chain.C_T,
        "trudinger_pass": chain.trudinger_bound_holds(trudinger.log_value),
        "s_bar": chain.s_bar,
        "log_s_bar": chain.log_s_bar,
    }
    if chain.degiorgi is not None:
        log_bound = float(np.logaddexp(chain.degiorgi.log_s_0, _log(recursion_increment(chain.degiorgi.delta))))
        row["sup_bound"] = chain.degiorgi.S_inf
        row["log_sup_bound"] = log_bound
        row["sup_pass"] = _log(state.sup_abs_phi) <= log_bound
    if config.sweep.barrier_checks:
        try:
            check = barrier_check(config, state, chain, 0.0, config.sweep.k)
        except LabError.SolverError as exc:
            logger.warning("t=%g state %d: auxiliary solve failed: %s", t, index, exc.detail)
            row["status"] = "solver_failure"
        else:
            row["barrier_max"] = check.max_value
            row["barrier_tolerance"] = check.tolerance
            row["barrier_pass"] = check.passed
    return BoundsRow(**row)


def audit_state(config: ExperimentConfig) -> SolutionState:
    """The proof audit runs on the first sampled state at the first t."""
    return sample_state(config, config.background.t_values[0], 0)


def audit_levels(config: ExperimentConfig, state: SolutionState) -> list[float]:
    """Barrier-grid levels as fractions of sup|phi|."""
    return [fraction * state.sup_abs_phi for fraction in config.audit.s_fractions]


def barrier_entry(config: ExperimentConfig, s_index: int, k: float) -> dict[str, Any]:
    """One cell of the proof-audit barrier grid; a solver failure is reported in place of the check."""
    state = audit_state(config)
    chain = state_chain(config, state, config.audit.C_0)
    s = audit_levels(config, state)[s_index]
    try:
        check = barrier_check(config, state, chain, s, k)
    except LabError.SolverError as exc:
        logger.warning("barrier solve at s=%g, k=%g failed: %s", s, k, exc.detail)
        return {"s_index": s_index, "s": s, "k": k, "check": None, "error": exc.as_dict()}
    return {"s_index": s_index, "s": s, "k": k, "check": check.dict_plain(), "error": None}
