import numpy as np
import pytest

from core.applications.functionals.profiles import SublevelProfile
from core.applications.proof_engine.iteration import de_giorgi
from core.applications.proof_engine.iteration import fit_recursion_constant
from core.applications.proof_engine.iteration import profile_upper_value
from core.applications.proof_engine.iteration import simulate_recursion
from core.helper.custom_exceptions import LabError
from core.helper.enums import LevelDirection


def superlevel(s_values, masses) -> SublevelProfile:
    s_values = np.asarray(s_values, dtype=float)
    masses = np.asarray(masses, dtype=float)
    return SublevelProfile(
        s_values=s_values,
        phi_of_s=masses,
        A_of_s=masses.copy(),
        a=1.0,
        direction=LevelDirection.SUPERLEVEL,
    )


def cubic_profile(scale=1.0) -> SublevelProfile:
    s_values = np.linspace(0.0, 2.0, 2001)
    return superlevel(s_values, scale * np.maximum(0.0, 1.0 - s_values) ** 3)


class TestDeGiorgi:
    def test_vanishing_profile(self):
        profile = superlevel(np.linspace(0.0, 5.0, 11), np.zeros(11))
        result = de_giorgi(profile, 1.0, 4.0, 0.5, 2)
        assert result.s_0 == pytest.approx(1.0)
        assert result.S_inf == result.s_0
        assert result.increment == 0.0
        assert result.verified

    def test_increment(self):
        s_values = np.linspace(0.0, 8.0, 801)
        profile = superlevel(s_values, np.maximum(0.0, 1.0 - s_values) ** 3)
        result = de_giorgi(profile, 1.0, 4.0, 0.25, 2)
        assert result.s_0 == pytest.approx(0.0625)
        assert result.increment == pytest.approx(1 / (1 - 2 ** (-1 / 4)), rel=1e-12)
        assert result.checked_levels > 0
        assert result.verified

    def test_mass_beyond_stopping_level(self):
        s_values = np.linspace(0.0, 8.0, 81)
        profile = superlevel(s_values, np.linspace(1.0, 0.1, 81))
        result = de_giorgi(profile, 1.0, 4.0, 0.25, 2)
        assert not result.verified

    def test_rejects_increasing_profile(self):
        with pytest.raises(LabError.DomainError):
            de_giorgi(superlevel([0.0, 1.0], [1.0, 2.0]), 1.0, 4.0, 0.5, 2)

    def test_rejects_small_exponent(self):
        with pytest.raises(LabError.DomainError):
            de_giorgi(superlevel([0.0, 1.0], [1.0, 0.0]), 1.0, 2.0, 0.5, 2)


class TestRecursion:
    def test_fitted_constant(self):
        # t (1 - s - t)^3 / (1 - s)^{15/4} peaks at s = 0, t = 1/4
        assert fit_recursion_constant(cubic_profile(), 1.0, 4.0, 2) == pytest.approx(27 / 256, rel=1e-9)

    def test_fitted_constant_scaling(self):
        base = fit_recursion_constant(cubic_profile(), 1.0, 4.0, 2)
        scaled = fit_recursion_constant(cubic_profile(16.0), 1.0, 4.0, 2)
        assert scaled == pytest.approx(base / 2, rel=1e-9)

    def test_fit_bounds_every_pair(self):
        profile = cubic_profile()
        C_bar = fit_recursion_constant(profile, 1.0, 4.0, 2)  # noqa: N806
        s, masses = profile.s_values, profile.phi_of_s
        for i, j in ((0, 100), (200, 900), (500, 501), (10, 1500)):
            assert (s[j] - s[i]) * masses[j] <= C_bar * masses[i] ** 1.25 * (1 + 1e-12)

    def test_terminates_below_stopping_level(self):
        profile = cubic_profile()
        C_bar = fit_recursion_constant(profile, 1.0, 4.0, 2)  # noqa: N806
        trace = simulate_recursion(profile, 1.0, 4.0, C_bar, 2)
        result = de_giorgi(profile, 1.0, 4.0, C_bar, 2)
        assert trace.terminated
        assert 0.999 <= trace.final_level <= result.S_inf
        assert trace.levels == sorted(trace.levels)
        assert result.verified

    def test_empty_profile_fits_zero(self):
        assert fit_recursion_constant(superlevel([0.0, 1.0], [0.0, 0.0]), 1.0, 4.0, 2) == 0.0

    def test_upper_value_uses_lower_level(self):
        profile = superlevel([0.0, 1.0, 2.0], [4.0, 2.0, 0.0])
        assert profile_upper_value(profile, 0.5) == 4.0
        assert profile_upper_value(profile, 1.0) == 2.0
        assert profile_upper_value(profile, 5.0) == 0.0
