import math

from core.helper.interface import BaseModel


class TrudingerIntegral(BaseModel):
    """int exp(alpha (-phi)^q) omega_X^n, carried in log space."""

    alpha: float
    q: float
    log_value: float
    value: float
    overflow: bool = False

    def at_most(self, bound: float, *, log_bound: float | None = None) -> bool:
        """Compare against a constant in log space so an overflowed value still compares."""
        if log_bound is None:
            log_bound = math.log(bound) if bound > 0 else -math.inf
        return self.log_value <= log_bound
