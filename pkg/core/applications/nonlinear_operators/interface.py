from pydantic import Field
from pydantic import PositiveFloat
from pydantic import model_validator

from core.helper.enums import ConeKind
from core.helper.enums import OperatorKind
from core.helper.interface import BaseModel


class ConeSpec(BaseModel):
    """An admissible cone in R^n: Gamma_k or the p-Monge-Ampere cone."""

    kind: ConeKind
    n: int = Field(ge=1)
    k: int | None = None
    p: int | None = None

    @model_validator(mode="after")
    def check_order(self) -> "ConeSpec":
        order = self.k if self.kind == ConeKind.GAMMA_K else self.p
        if order is None or not 1 <= order <= self.n:
            msg = f"{self.kind} cone needs an order in 1..{self.n}, got {order}"
            raise ValueError(msg)
        return self

    @classmethod
    def gamma(cls, n: int, k: int) -> "ConeSpec":
        return cls(kind=ConeKind.GAMMA_K, n=n, k=k)

    @classmethod
    def pma(cls, n: int, p: int) -> "ConeSpec":
        return cls(kind=ConeKind.PMA, n=n, p=p)

    @property
    def label(self) -> str:
        if self.kind == ConeKind.GAMMA_K:
            return f"Gamma_{self.k}"
        return f"PMA(p={self.p})"


class OperatorSpec(BaseModel):
    """Operator named in an experiment config, e.g. {"kind": "hessian", "k": 2, "n": 3}."""

    kind: OperatorKind
    n: int = Field(ge=1, le=4)
    k: int | None = None
    p: int | None = None
    gamma: PositiveFloat | None = None

    @model_validator(mode="after")
    def check_parameters(self) -> "OperatorSpec":
        if self.kind == OperatorKind.HESSIAN and (self.k is None or not 1 <= self.k <= self.n):
            msg = f"hessian operator needs 1 <= k <= {self.n}, got {self.k}"
            raise ValueError(msg)
        if self.kind == OperatorKind.P_MONGE_AMPERE and (
            self.p is None or not 1 <= self.p <= self.n
        ):
            msg = f"p-Monge-Ampere operator needs 1 <= p <= {self.n}, got {self.p}"
            raise ValueError(msg)
        return self

    @property
    def cone(self) -> ConeSpec:
        if self.kind == OperatorKind.MONGE_AMPERE:
            return ConeSpec.gamma(self.n, self.n)
        if self.kind == OperatorKind.HESSIAN:
            return ConeSpec.gamma(self.n, self.k)
        return ConeSpec.pma(self.n, self.p)


class ConditionCheck(BaseModel):
    name: str
    passed: bool
    worst_violation: float
    detail: str = ""


class StructuralReport(BaseModel):
    operator: str
    n: int
    sample_budget: int
    seed: int
    gamma_estimate: float
    gamma_analytic: float | None = None
    checks: list[ConditionCheck]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failed_conditions(self) -> list[str]:
        return [check.name for check in self.checks if not check.passed]
