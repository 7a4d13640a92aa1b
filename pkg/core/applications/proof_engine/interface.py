from pydantic import Field

from core.applications.ma_solver.interface import IntegrabilityCheck
from core.helper.enums import Provenance
from core.helper.interface import BaseModel


class LedgerEntry(BaseModel):
    name: str
    value: float
    formula_id: str
    proof_step: str
    provenance: Provenance = Provenance.FORMULA


class CoupledConstants(BaseModel):
    """Constants of the barrier argument for the coupled system."""

    delta: float
    c_theta: float
    K_1: float  # noqa: N815
    K_2: float  # noqa: N815
    K_3: float | None = None  # noqa: N815
    a_mv: float
    nu: float


class RecursionConstants(BaseModel):
    """De Giorgi recursion ``t phi(s+t) <= C_bar c^{1/n} phi(s)^{1+delta}`` and where it stops."""

    r: float
    C_bar: float  # noqa: N815
    delta: float
    log_s_0: float
    s_0: float
    S_inf: float  # noqa: N815


class ConstantChain(BaseModel):
    n: int
    p: float
    q: float
    a: float
    b: float
    gamma: float
    kappa: float
    c_ratio: float
    K: float  # noqa: N815
    vol: float
    e_0: float
    l_0: float
    s_bar: float
    log_s_bar: float
    C_p_young: float  # noqa: N815
    C_0: float  # noqa: N815
    C_1: float  # noqa: N815
    C_2: float  # noqa: N815
    C_3: float  # noqa: N815
    C_4: float  # noqa: N815
    C_5: float  # noqa: N815
    C_6: float  # noqa: N815
    C_7: float  # noqa: N815
    C_8: float  # noqa: N815
    C_9: float  # noqa: N815
    C_10: float  # noqa: N815
    C_e: float  # noqa: N815
    alpha: float
    alpha_T: float  # noqa: N815
    log_C_T: float  # noqa: N815
    C_T: float  # noqa: N815
    beta: float
    C_X: float  # noqa: N815
    alpha_invariant: float
    coupled: CoupledConstants | None = None
    degiorgi: RecursionConstants | None = None
    ledger: list[LedgerEntry] = Field(default_factory=list)

    def epsilon(self, A: float) -> float:  # noqa: N803
        """Barrier height for a sublevel mass A_{s,k}."""
        return self.e_0 * A ** (1.0 / (self.n + self.a))

    def Lambda(self, A: float) -> float:  # noqa: N802, N803
        return self.l_0 * A ** (1.0 / self.a)

    def lambda_consistency(self, A: float) -> float:  # noqa: N803
        """|eps b Lambda^{-(1-b)} - 1|."""
        return abs(self.epsilon(A) * self.b * self.Lambda(A) ** (-(1.0 - self.b)) - 1.0)

    @property
    def trudinger_exponent(self) -> float:
        return (self.n + self.a) / self.n

    def entry(self, name: str) -> LedgerEntry:
        for item in self.ledger:
            if item.name == name:
                return item
        msg = f"no ledger entry {name}"
        raise KeyError(msg)

    def energy_bound_holds(self, value: float) -> bool:
        return value <= self.C_e

    def trudinger_bound_holds(self, log_value: float) -> bool:
        return log_value <= self.log_C_T


class BarrierCheck(BaseModel):
    """Maximum of a barrier test function on the grid."""

    name: str
    s: float
    k: float | None = None
    A: float
    epsilon: float
    Lambda: float  # noqa: N815
    max_value: float
    outside_max: float | None = None
    tolerance: float
    integrability: IntegrabilityCheck | None = None
    passed: bool


class LinearizedCheck(BaseModel):
    min_eigenvalue: float
    min_det_margin: float
    passed: bool


class DeGiorgiResult(BaseModel):
    s_0: float
    S_inf: float  # noqa: N815
    increment: float
    checked_levels: int
    verified: bool


class RecursionTrace(BaseModel):
    levels: list[float]
    terminated: bool
    final_level: float


class MeanValueResult(BaseModel):
    sup_u: float
    bound: float
    normalisation: float
    a_mv: float
    epsilon_constant: float
    alpha: float
    C_bar: float  # noqa: N815
    s_0: float
    S_inf: float  # noqa: N815
    de_giorgi: DeGiorgiResult
    verified: bool
    barriers: list[BarrierCheck] = Field(default_factory=list)
    passed: bool


class LevelCheck(BaseModel):
    """A pointwise inequality over a list of levels."""

    name: str
    levels: list[float]
    lhs: list[float]
    bound: float
    passed: bool


class SmoothingGap(BaseModel):
    s: float
    a: float
    k_values: list[float]
    A_s: float  # noqa: N815
    A_sk: list[float]
    bounds: list[float]
    decreasing: bool
    passed: bool


class CoupledReport(BaseModel):
    """Bound checks for a manufactured state of the coupled system."""

    amplitude: float
    c_theta: float
    residual: float
    residual_tolerance: float
    K_1: float  # noqa: N815
    K_2: float  # noqa: N815
    K_2_margin: float  # noqa: N815
    K_3: float | None = None  # noqa: N815
    K_3_margin: float | None = None  # noqa: N815
    absorption_margin: float
    barrier: BarrierCheck
    upper: MeanValueResult
    lower: MeanValueResult | None = None
    sup_F: float  # noqa: N815
    inf_F: float  # noqa: N815
    F_upper_bound: float  # noqa: N815
    F_lower_bound: float | None = None  # noqa: N815
    passed: bool
