from dataclasses import dataclass

import numpy as np

from core.helper.enums import LevelDirection


@dataclass(frozen=True, eq=False)
class SublevelProfile:
    """Level-set masses phi(s) and weighted masses A_s on an increasing s-grid.

    For ``direction == SUBLEVEL`` the sets are ``{phi < -s}``; for
    ``SUPERLEVEL`` they are ``{u > s}``.
    """

    s_values: np.ndarray
    phi_of_s: np.ndarray
    A_of_s: np.ndarray  # noqa: N815
    a: float
    direction: LevelDirection = LevelDirection.SUBLEVEL

    def __len__(self) -> int:
        return len(self.s_values)

    def is_nonincreasing(self) -> bool:
        return bool(np.all(np.diff(self.phi_of_s) <= 0) and np.all(np.diff(self.A_of_s) <= 0))

    def restrict(self, mask: np.ndarray) -> "SublevelProfile":
        return SublevelProfile(
            s_values=self.s_values[mask],
            phi_of_s=self.phi_of_s[mask],
            A_of_s=self.A_of_s[mask],
            a=self.a,
            direction=self.direction,
        )
