"""The five lab commands.

Each command receives an already validated ``ExperimentConfig``, writes its
files under ``<out>/<command>/`` and hands back a ``RunOutcome`` whose exit
code follows 0 pass, 1 bound violation, 3 solver failure.
Configuration and domain errors propagate as ``LabException`` (exit code 2).
"""

import logging

import numpy as np
import pandas as pd

from core.applications.functionals.services import CSV_FLOAT_FORMAT
from core.applications.functionals.services import geometric_levels
from core.applications.functionals.services import profile_to_csv
from core.applications.functionals.services import sublevel_profile
from core.applications.lab_cli.dispatch import dispatch
from core.applications.lab_cli.interface import AuditReport
from core.applications.lab_cli.interface import BoundsReport
from core.applications.lab_cli.interface import BoundsRow
from core.applications.lab_cli.interface import ExperimentConfig
from core.applications.lab_cli.interface import RunOutcome
from core.applications.lab_cli.plots import plot_decay
from core.applications.lab_cli.plots import plot_sweep
from core.applications.lab_cli.services import audit_levels
from core.applications.lab_cli.services import audit_state
from core.applications.lab_cli.services import background_forms
from core.applications.lab_cli.services import bound_integrals
from core.applications.lab_cli.services import build_grid
from core.applications.lab_cli.services import hermitian_form
from core.applications.lab_cli.services import operator_for
from core.applications.lab_cli.services import output_directory
from core.applications.lab_cli.services import record_run
from core.applications.lab_cli.services import report_header
from core.applications.lab_cli.services import state_chain
from core.applications.lab_cli.services import state_seed
from core.applications.lab_cli.services import write_json
from core.applications.lab_cli.tasks import run_barrier_solve
from core.applications.lab_cli.tasks import run_sweep_state
from core.applications.ma_solver.problem import MASolveProblem
from core.applications.ma_solver.services import exponential_integrability
from core.applications.ma_solver.services import solve_ma
from core.applications.nonlinear_operators.services import MongeAmpereOperator
from core.applications.nonlinear_operators.services import NonlinearOperator
from core.applications.nonlinear_operators.services import verify_structural_conditions
from core.applications.proof_engine.checks import linearized_check
from core.applications.proof_engine.checks import smoothing_gap
from core.applications.proof_engine.checks import sublevel_decay_check
from core.applications.proof_engine.checks import sublevel_mass_check
from core.applications.proof_engine.coupled import LIMITATIONS
from core.applications.proof_engine.coupled import coupled_check
from core.applications.proof_engine.coupled import manufacture_coupled_state
from core.applications.proof_engine.interface import BarrierCheck
from core.applications.proof_engine.interface import ConstantChain
from core.applications.proof_engine.iteration import de_giorgi
from core.applications.proof_engine.iteration import fit_recursion_constant
from core.applications.proof_engine.iteration import simulate_recursion
from core.applications.torus_geometry.services import sample_admissible_potential
from core.applications.torus_geometry.snapshots import write_field_snapshot
from core.applications.torus_geometry.spectral import complex_hessian
from core.applications.torus_geometry.state import SolutionState
from core.helper.custom_exceptions import LabError
from core.helper.enums import ExitCode
from core.helper.enums import LabCommand

logger = logging.getLogger(__name__)


def _outcome(command: LabCommand, exit_code: ExitCode, directory, files, verdict: dict) -> RunOutcome:
    logger.info("%s finished with exit code %d in %s", command.value, exit_code, directory)
    return RunOutcome(
        command=command,
        exit_code=int(exit_code),
        output_dir=str(directory),
        files=[path.name for path in files],
        verdict=verdict,
    )


def _ledger_payload(header, chain: ConstantChain) -> dict:
    return {
        "header": header.dict_plain(),
        "ledger": [entry.dict_plain() for entry in chain.ledger],
    }


def cmd_verify_operator(config: ExperimentConfig, op: NonlinearOperator | None = None) -> RunOutcome:
    """Structural-condition audit and gamma estimate of the configured operator."""
    command = LabCommand.VERIFY_OPERATOR
    op = operator_for(config) if op is None else op
    report = verify_structural_conditions(op, config.verify.sample_budget, config.sampling.seed)
    header = report_header(command, config).model_copy(update={"operator": op.name})
    directory = output_directory(command, config)
    path = write_json(
        directory / "report.json",
        {
            "header": header.dict_plain(),
            "report": report.dict_plain(),
            "passed": report.passed,
            "failed_conditions": report.failed_conditions,
        },
    )
    verdict = {
        "passed": report.passed,
        "gamma_estimate": report.gamma_estimate,
        "failed_conditions": report.failed_conditions,
    }
    return _outcome(
        command,
        ExitCode.PASSED if report.passed else ExitCode.BOUND_VIOLATION,
        directory,
        [path],
        verdict,
    )


def sweep_exit_code(rows: list[BoundsRow]) -> ExitCode:
    if any(row.status == "ok" and not row.passed for row in rows):
        return ExitCode.BOUND_VIOLATION
    if any(row.status != "ok" for row in rows):
        return ExitCode.SOLVER_FAILURE
    return ExitCode.PASSED


def sweep_frame(rows: list[BoundsRow]) -> pd.DataFrame:
    return pd.DataFrame([row.model_dump() for row in rows], columns=list(BoundsRow.model_fields))


def cmd_sweep(config: ExperimentConfig) -> RunOutcome:
    """Energy, Trudinger and sup-norm bounds for every (t, sampled state)."""
    command = LabCommand.SWEEP
    payloads = [
        {"config": config.dict_plain(), "t_index": t_index, "state": index}
        for t_index in range(len(config.background.t_values))
        for index in range(config.sampling.count)
    ]
    results = dispatch(run_sweep_state, payloads, jobs=config.jobs, key=lambda row: (row["t"], row["state"]))
    rows = [BoundsRow.model_validate(result) for result in results]
    solved = [row for row in rows if row.status == "ok"]
    sup_bounds = [row.log_sup_bound for row in rows if row.log_sup_bound is not None]
    exit_code = sweep_exit_code(rows)
    report = BoundsReport(
        header=report_header(command, config),
        rows=rows,
        max_C_e=max(row.C_e for row in rows),
        max_log_C_T=max(row.log_C_T for row in rows),
        max_sup_abs_phi=max(row.sup_abs_phi for row in rows),
        max_log_sup_bound=max(sup_bounds) if sup_bounds else None,
        solver_failures=len(rows) - len(solved),
        uniform=exit_code == ExitCode.PASSED,
    )

    directory = output_directory(command, config)
    csv_path = directory / "sweep.csv"
    sweep_frame(rows).to_csv(csv_path, index=False, float_format=CSV_FLOAT_FORMAT)
    json_path = write_json(directory / "report.json", report.dict_plain())
    svg_path = plot_sweep(rows, directory / "sweep.svg")
    verdict = {
        "rows": len(rows),
        "violations": sum(1 for row in solved if not row.passed),
        "solver_failures": report.solver_failures,
        "uniform": report.uniform,
    }
    return _outcome(command, exit_code, directory, [csv_path, json_path, svg_path], verdict)


def audit_profile_levels(config: ExperimentConfig, state: SolutionState, chain: ConstantChain) -> np.ndarray:
    """Evenly spaced levels up to sup|phi|, dyadic levels from 1 and s_bar when it is finite."""
    count = config.audit.profile_levels
    parts = [
        np.linspace(0.0, state.sup_abs_phi, count, endpoint=False),
        geometric_levels(1.0, count),
    ]
    if np.isfinite(chain.s_bar):
        parts.append(np.array([chain.s_bar]))
    return np.unique(np.concatenate(parts))


def recursion_fit(profile, state: SolutionState, chain: ConstantChain) -> dict | None:
    """Fitted recursion constant and the De Giorgi stopping level of the measured profile."""
    if chain.degiorgi is None:
        return None
    r, n = chain.degiorgi.r, state.n
    fitted = fit_recursion_constant(profile, state.c_ratio, r, n)
    trace = simulate_recursion(profile, state.c_ratio, r, fitted, n)
    return {
        "r": r,
        "C_bar": chain.degiorgi.C_bar,
        "fitted_C_bar": fitted,
        "de_giorgi": de_giorgi(profile, state.c_ratio, r, chain.degiorgi.C_bar, n).dict_plain(),
        "terminated": trace.terminated,
        "final_level": trace.final_level,
        "steps": len(trace.levels) - 1,
    }


def cmd_proof_audit(config: ExperimentConfig) -> RunOutcome:
    """Barrier grid, level-set checks and the Trudinger assembly on one state, with its constant ledger."""
    command = LabCommand.PROOF_AUDIT
    state = audit_state(config)
    chain = state_chain(config, state, config.audit.C_0)
    header = report_header(command, config)
    levels = audit_levels(config, state)

    payloads = [
        {"config": config.dict_plain(), "s_index": s_index, "k": k}
        for s_index in range(len(levels))
        for k in config.audit.k_values
    ]
    entries = dispatch(run_barrier_solve, payloads, jobs=config.jobs, key=lambda entry: (entry["s_index"], entry["k"]))
    barriers = [BarrierCheck.model_validate(entry["check"]) for entry in entries if entry["check"] is not None]
    failures = [
        {"s": entry["s"], "k": entry["k"], **entry["error"]} for entry in entries if entry["error"] is not None
    ]

    profile = sublevel_profile(state, chain.a, audit_profile_levels(config, state, chain))
    decay = sublevel_decay_check(profile, chain)
    mass = sublevel_mass_check(profile, chain)
    smoothing = smoothing_gap(state, levels[len(levels) // 2], chain.a, tuple(config.audit.k_values))
    linearized = linearized_check(None, state)
    energy_lhs, trudinger = bound_integrals(state, chain)
    energy_pass = chain.energy_bound_holds(energy_lhs)
    trudinger_pass = chain.trudinger_bound_holds(trudinger.log_value)
    passed = all(
        [
            all(check.passed for check in barriers),
            decay.passed,
            mass.passed,
            smoothing.passed,
            linearized.passed,
            energy_pass,
            trudinger_pass,
        ],
    )
    report = AuditReport(
        header=header,
        t=config.background.t_values[0],
        sup_abs_phi=state.sup_abs_phi,
        ent_p=chain.K,
        barriers=barriers,
        solver_failures=failures,
        decay=decay,
        mass=mass,
        smoothing=smoothing,
        linearized=linearized,
        energy_lhs=energy_lhs,
        energy_pass=energy_pass,
        trudinger_log_lhs=trudinger.log_value,
        trudinger_pass=trudinger_pass,
        recursion_fit=recursion_fit(profile, state, chain),
        passed=passed,
    )

    directory = output_directory(command, config)
    files = [
        write_json(directory / "ledger.json", _ledger_payload(header, chain)),
        write_json(directory / "report.json", report.dict_plain()),
        profile_to_csv(profile, directory / "profile.csv"),
        plot_decay(profile, chain.p, chain.C_1, directory / "decay.svg"),
    ]
    if not passed:
        exit_code = ExitCode.BOUND_VIOLATION
    elif failures:
        exit_code = ExitCode.SOLVER_FAILURE
    else:
        exit_code = ExitCode.PASSED
    verdict = {
        "passed": passed,
        "barriers": len(barriers),
        "barrier_failures": sum(1 for check in barriers if not check.passed),
        "solver_failures": len(failures),
    }
    return _outcome(command, exit_code, directory, files, verdict)


def cmd_coupled_check(config: ExperimentConfig) -> RunOutcome:
    """Bounds for F on a manufactured near-solution of the coupled system."""
    command = LabCommand.COUPLED_CHECK
    header = report_header(command, config, LIMITATIONS)
    coupled = config.coupled
    omega, omega_X, _ = background_forms(config, config.background.t_values[0])  # noqa: N806
    theta = hermitian_form(coupled.theta, np.zeros((config.grid.n, config.grid.n)))
    directory = output_directory(command, config)
    try:
        coupled_state = manufacture_coupled_state(
            operator_for(config),
            omega,
            omega_X,
            theta,
            build_grid(config),
            amplitude=coupled.amplitude,
            modes=config.sampling.modes,
            seed=state_seed(config.sampling.seed, 0),
            tolerance=coupled.residual_tolerance,
        )
        report, chain = coupled_check(
            coupled_state,
            p=config.exponents.p,
            q=config.exponents.q,
            k=coupled.k,
            K_2=coupled.K_2,
            K_3=coupled.K_3,
            lower_bound=coupled.lower_bound,
            residual_tolerance=coupled.residual_tolerance,
            solver_options=config.solver.options(),
        )
    except LabError.BoundViolation as exc:
        logger.warning("coupled state rejected: %s", exc.detail)
        path = write_json(directory / "report.json", {"header": header.dict_plain(), "rejected": exc.as_dict()})
        return _outcome(command, ExitCode.BOUND_VIOLATION, directory, [path], {"passed": False, "rejected": True})

    files = [
        write_json(directory / "ledger.json", _ledger_payload(header, chain)),
        write_json(directory / "report.json", {"header": header.dict_plain(), "report": report.dict_plain()}),
    ]
    verdict = {
        "passed": report.passed,
        "residual": report.residual,
        "c_theta": report.c_theta,
        "K_2": report.K_2,
    }
    return _outcome(
        command,
        ExitCode.PASSED if report.passed else ExitCode.BOUND_VIOLATION,
        directory,
        files,
        verdict,
    )


def cmd_solve_ma(config: ExperimentConfig) -> RunOutcome:
    """Solve a manufactured Monge-Ampere problem and snapshot the exact and computed potentials."""
    command = LabCommand.SOLVE_MA
    grid = build_grid(config)
    omega, omega_X, kappa = background_forms(config, config.background.t_values[0])  # noqa: N806
    exact = sample_admissible_potential(
        MongeAmpereOperator(grid.n),
        omega,
        config.sampling.amplitude,
        config.sampling.modes,
        state_seed(config.sampling.seed, 0),
        grid,
        omega_X,
    )
    form = omega.on(grid) + complex_hessian(exact, grid).data
    g = np.real(np.linalg.det(form)) / np.broadcast_to(omega_X.determinant(), grid.shape)
    problem = MASolveProblem(omega=omega, omega_X=omega_X, grid=grid, g=g, **config.solver.options())
    psi, solver_report = solve_ma(problem)
    sup_error = float(np.max(np.abs(psi - exact)))

    directory = output_directory(command, config)
    metadata = {"seed": config.sampling.seed, "config_digest": report_header(command, config).config_digest}
    integrability = exponential_integrability(psi, grid, omega_X, 0.5 / kappa, 2 * problem.background_volume)
    # min r <= 0 <= max r on a compatible problem, so |shift| never exceeds the spread
    unshifted_pass = solver_report.unshifted_residual <= 2 * problem.tolerance
    solved = solver_report.residual <= problem.tolerance and unshifted_pass
    passed = solved and integrability.passed
    files = [
        write_field_snapshot(directory / "psi.f64", psi, grid, {**metadata, "field": "psi"}),
        write_field_snapshot(directory / "exact.f64", exact, grid, {**metadata, "field": "exact"}),
        write_json(
            directory / "report.json",
            {
                "header": report_header(command, config).dict_plain(),
                "solver": solver_report.dict_plain(),
                "tolerance": problem.tolerance,
                "integrability": integrability.dict_plain(),
                "sup_error": sup_error,
                "passed": passed,
            },
        ),
    ]
    verdict = {
        "passed": passed,
        "residual": solver_report.residual,
        "unshifted_residual": solver_report.unshifted_residual,
        "normalization_shift": solver_report.normalization_shift,
        "integrability": integrability.passed,
        "sup_error": sup_error,
    }
    if not solved:
        exit_code = ExitCode.SOLVER_FAILURE
    elif not passed:
        exit_code = ExitCode.BOUND_VIOLATION
    else:
        exit_code = ExitCode.PASSED
    return _outcome(command, exit_code, directory, files, verdict)


COMMANDS = {
    LabCommand.VERIFY_OPERATOR: cmd_verify_operator,
    LabCommand.SWEEP: cmd_sweep,
    LabCommand.PROOF_AUDIT: cmd_proof_audit,
    LabCommand.COUPLED_CHECK: cmd_coupled_check,
    LabCommand.SOLVE_MA: cmd_solve_ma,
}


def run_command(command: LabCommand | str, config: ExperimentConfig) -> RunOutcome:
    """Run one lab command and record it as an ExperimentRun."""
    outcome = COMMANDS[LabCommand(command)](config)
    record_run(config, outcome)
    return outcome
