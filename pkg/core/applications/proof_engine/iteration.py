"""De Giorgi iteration on measured level-set profiles."""

import numpy as np

from core.applications.functionals.profiles import SublevelProfile
from core.applications.proof_engine.constants import recursion_constants
from core.applications.proof_engine.interface import DeGiorgiResult
from core.applications.proof_engine.interface import RecursionTrace
from core.helper.custom_exceptions import LabError

MAX_RECURSION_STEPS = 10_000


def _require_monotone(profile: SublevelProfile) -> None:
    if not profile.is_nonincreasing():
        msg = "level-set profile must be nonincreasing in s"
        raise LabError.DomainError(msg)


def recursion_exponent(n: int, r: float) -> float:
    return 1.0 / n - 1.0 / r


def profile_upper_value(profile: SublevelProfile, s: float) -> float:
    """phi(s) bounded by the last measured level at or below s."""
    index = int(np.searchsorted(profile.s_values, s, side="right")) - 1
    return float(profile.phi_of_s[max(index, 0)])


def de_giorgi(
    profile: SublevelProfile,
    c_ratio: float,
    r: float,
    C_bar: float,  # noqa: N803
    n: int,
) -> DeGiorgiResult:
    """Stopping level of the recursion and whether the measured profile vanishes beyond it."""
    _require_monotone(profile)
    constants = recursion_constants(n, r, C_bar, c_ratio)
    s_values, masses = profile.s_values, profile.phi_of_s
    S_inf = constants.S_inf  # noqa: N806
    if np.any((s_values <= constants.s_0) & (masses == 0)):
        S_inf = constants.s_0  # noqa: N806
    beyond = s_values >= S_inf
    vanishes = bool(np.all(masses[beyond] == 0))
    return DeGiorgiResult(
        s_0=constants.s_0,
        S_inf=S_inf,
        increment=S_inf - constants.s_0,
        checked_levels=int(np.count_nonzero(beyond)),
        verified=vanishes and (bool(np.any(beyond)) or bool(np.any(masses == 0))),
    )


def fit_recursion_constant(profile: SublevelProfile, c_ratio: float, r: float, n: int) -> float:
    """Smallest C_bar with ``t phi(s+t) <= C_bar c^{1/n} phi(s)^{1+delta}`` over all measured level pairs."""
    _require_monotone(profile)
    delta = recursion_exponent(n, r)
    s_values, masses = profile.s_values, profile.phi_of_s
    positive = masses > 0
    if not np.any(positive):
        return 0.0
    lower = s_values[positive][:, None]
    denominator = c_ratio ** (1.0 / n) * masses[positive][:, None] ** (1 + delta)
    ratios = (s_values[None, :] - lower) * masses[None, :] / denominator
    ratios = np.where(s_values[None, :] > lower, ratios, 0.0)
    return float(np.max(ratios))


def simulate_recursion(  # noqa: PLR0913
    profile: SublevelProfile,
    c_ratio: float,
    r: float,
    C_bar: float,  # noqa: N803
    n: int,
    s_start: float | None = None,
) -> RecursionTrace:
    """Walk s_{j+1} = s_j + 2 C_bar c^{1/n} phi(s_j)^delta until the profile vanishes."""
    _require_monotone(profile)
    delta = recursion_exponent(n, r)
    step_scale = 2 * C_bar * c_ratio ** (1.0 / n)
    s = recursion_constants(n, r, C_bar, c_ratio).s_0 if s_start is None else s_start
    levels = [float(s)]
    terminated = False
    for _ in range(MAX_RECURSION_STEPS):
        mass = profile_upper_value(profile, s)
        if mass == 0:
            terminated = True
            break
        s += step_scale * mass**delta
        levels.append(float(s))
    return RecursionTrace(levels=levels, terminated=terminated, final_level=float(s))
