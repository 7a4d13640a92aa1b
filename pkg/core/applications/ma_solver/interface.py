from pydantic import Field

from core.helper.interface import BaseModel


class SolverReport(BaseModel):
    """``residual`` is the spread around the normalisation shift; ``unshifted_residual`` includes the shift."""

    iterations: int = Field(ge=0)
    residual: float
    unshifted_residual: float = 0.0
    damping_events: int = 0
    continuation_path: list[float] = Field(default_factory=list)
    normalization_shift: float = 0.0
    compatibility_defect: float = 0.0
    fallback_used: bool = False


class IntegrabilityCheck(BaseModel):
    """int e^{-beta psi} omega_X^n against the configured C_X."""

    beta: float
    C_X: float  # noqa: N815
    log_value: float
    value: float
    passed: bool
