from pathlib import Path

from pydantic import Field
from pydantic import NonNegativeFloat
from pydantic import PositiveFloat
from pydantic import PositiveInt
from pydantic import field_validator
from pydantic import model_validator

from core.applications.nonlinear_operators.interface import OperatorSpec
from core.applications.proof_engine.interface import BarrierCheck
from core.applications.proof_engine.interface import LevelCheck
from core.applications.proof_engine.interface import LinearizedCheck
from core.applications.proof_engine.interface import SmoothingGap
from core.helper.enums import LabCommand
from core.helper.interface import BaseModel


class GridConfig(BaseModel):
    n: int = Field(default=2, ge=1, le=3)
    N: int = Field(default=8, ge=8)  # noqa: N815
    period: PositiveFloat = 1.0


class BackgroundConfig(BaseModel):
    """omega = chi + t omega_X for each t; chi defaults to zero, omega_X to the identity."""

    chi: list[list[float]] | None = None
    omega_X: list[list[float]] | None = None  # noqa: N815
    t_values: list[float] = Field(default_factory=lambda: [1.0], min_length=1)

    @field_validator("t_values")
    @classmethod
    def check_t_values(cls, values: list[float]) -> list[float]:
        if any(not 0 < t <= 1 for t in values):
            msg = f"t values must lie in (0, 1], got {values}"
            raise ValueError(msg)
        return values


class SamplingConfig(BaseModel):
    count: PositiveInt = 1
    amplitude: NonNegativeFloat = 0.05
    modes: PositiveInt = 3
    seed: int = 0


class ExponentConfig(BaseModel):
    p: PositiveFloat = 1.0
    q: PositiveFloat | None = None


class SolverConfig(BaseModel):
    tolerance: PositiveFloat = 1e-9
    max_iterations: PositiveInt = 200
    continuation: list[float] = Field(default_factory=lambda: [0.25, 0.5, 0.75, 1.0])

    def options(self) -> dict:
        return {
            "tolerance": self.tolerance,
            "max_iterations": self.max_iterations,
            "continuation": tuple(self.continuation),
        }


class VerifyConfig(BaseModel):
    sample_budget: PositiveInt = 20_000


class SweepConfig(BaseModel):
    barrier_checks: bool = False
    k: PositiveFloat = 32.0


class AuditConfig(BaseModel):
    """Barrier grid of the proof audit; levels are fractions of sup|phi|."""

    s_fractions: list[NonNegativeFloat] = Field(default_factory=lambda: [0.0, 0.25, 0.5], min_length=1)
    k_values: list[PositiveFloat] = Field(default_factory=lambda: [8.0, 32.0, 128.0], min_length=1)
    profile_levels: PositiveInt = 16
    C_0: PositiveFloat | None = None  # noqa: N815


class CoupledConfig(BaseModel):
    theta: list[list[float]] | None = None
    amplitude: NonNegativeFloat = 0.05
    residual_tolerance: PositiveFloat = 1e-6
    K_2: NonNegativeFloat | None = None  # noqa: N815
    K_3: float | None = None  # noqa: N815
    lower_bound: bool = True
    k: PositiveFloat = 32.0


class ExperimentConfig(BaseModel):
    """Everything a lab command reads; loaded from JSON or TOML."""

    operator: OperatorSpec = Field(default_factory=lambda: OperatorSpec(kind="monge_ampere", n=2))
    grid: GridConfig = Field(default_factory=GridConfig)
    background: BackgroundConfig = Field(default_factory=BackgroundConfig)
    sampling: SamplingConfig = Field(default_factory=SamplingConfig)
    exponents: ExponentConfig = Field(default_factory=ExponentConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    verify: VerifyConfig = Field(default_factory=VerifyConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    audit: AuditConfig = Field(default_factory=AuditConfig)
    coupled: CoupledConfig = Field(default_factory=CoupledConfig)
    output_dir: Path | None = None
    jobs: PositiveInt | None = None

    @model_validator(mode="after")
    def check_dimensions(self) -> "ExperimentConfig":
        n = self.grid.n
        if self.operator.n != n:
            msg = f"operator dimension {self.operator.n} differs from grid dimension {n}"
            raise ValueError(msg)
        for name, matrix in (
            ("chi", self.background.chi),
            ("omega_X", self.background.omega_X),
            ("theta", self.coupled.theta),
        ):
            if matrix is not None and (len(matrix) != n or any(len(row) != n for row in matrix)):
                msg = f"{name} must be a {n}x{n} matrix"
                raise ValueError(msg)
        return self


class ReportHeader(BaseModel):
    command: LabCommand
    seed: int
    config_digest: str
    operator: str
    limitations: str | None = None


class BoundsRow(BaseModel):
    """One sampled state at one t; every pass flag is recomputable from the row."""

    t: float
    state: int
    kappa: float
    c_ratio: float
    ent_p: float
    sup_abs_phi: float
    energy: float
    energy_lhs: float
    C_e: float  # noqa: N815
    energy_pass: bool
    trudinger_log_lhs: float
    log_C_T: float  # noqa: N815
    C_T: float  # noqa: N815
    trudinger_pass: bool
    s_bar: float
    log_s_bar: float
    sup_bound: float | None = None
    log_sup_bound: float | None = None
    sup_pass: bool | None = None
    barrier_max: float | None = None
    barrier_tolerance: float | None = None
    barrier_pass: bool | None = None
    status: str = "ok"

    @property
    def passed(self) -> bool:
        return (
            self.status == "ok"
            and self.energy_pass
            and self.trudinger_pass
            and self.sup_pass is not False
            and self.barrier_pass is not False
        )


class BoundsReport(BaseModel):
    header: ReportHeader
    rows: list[BoundsRow]
    max_C_e: float  # noqa: N815
    max_log_C_T: float  # noqa: N815
    max_sup_abs_phi: float
    max_log_sup_bound: float | None = None
    solver_failures: int = 0
    uniform: bool


class AuditReport(BaseModel):
    header: ReportHeader
    t: float
    sup_abs_phi: float
    ent_p: float
    barriers: list[BarrierCheck]
    solver_failures: list[dict] = Field(default_factory=list)
    decay: LevelCheck
    mass: LevelCheck
    smoothing: SmoothingGap
    linearized: LinearizedCheck
    energy_lhs: float
    energy_pass: bool
    trudinger_log_lhs: float
    trudinger_pass: bool
    recursion_fit: dict | None = None
    passed: bool


class RunOutcome(BaseModel):
    """What a lab command hands back to its caller."""

    command: LabCommand
    exit_code: int
    output_dir: str
    files: list[str]
    verdict: dict
