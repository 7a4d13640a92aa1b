import math

import numpy as np
import pytest

from core.applications.proof_engine.iteration import de_giorgi
from core.applications.proof_engine.mean_value import default_levels
from core.applications.proof_engine.mean_value import mean_value_bound
from core.applications.proof_engine.mean_value import profile_levels
from core.applications.proof_engine.mean_value import require_subsolution
from core.helper.custom_exceptions import LabError


class TestSubsolution:
    def test_constant_field(self, admissible_state):
        u = 0.7 * np.ones(admissible_state.grid.shape)
        assert require_subsolution(u, 0.0, admissible_state) >= -1e-12

    def test_reports_worst_point(self, admissible_state):
        with pytest.raises(LabError.PreconditionError) as error:
            require_subsolution(-10 * admissible_state.phi, 0.0, admissible_state)
        assert len(error.value.context["point"]) == admissible_state.grid.real_dimension
        assert error.value.context["defect"] < -1e-6


class TestMeanValueBound:
    def test_constant_field(self, admissible_state):
        u = 0.7 * np.ones(admissible_state.grid.shape)
        result = mean_value_bound(u, 0.0, admissible_state)
        assert result.sup_u == pytest.approx(0.7)
        assert result.bound >= 0.7
        assert result.passed
        levels = default_levels(u / max(1.0, result.normalisation))
        assert [barrier.s for barrier in result.barriers] == pytest.approx(list(levels))

    def test_normalisation_is_linear(self, admissible_state):
        small = mean_value_bound(0.7 * np.ones(admissible_state.grid.shape), 0.0, admissible_state)
        large = mean_value_bound(7.0 * np.ones(admissible_state.grid.shape), 0.0, admissible_state)
        assert large.normalisation == pytest.approx(10 * small.normalisation, rel=1e-12)
        assert large.passed == small.passed
        assert large.bound >= large.sup_u

    def test_recursion_verified_on_superlevel_profile(self, admissible_state):
        u = -admissible_state.phi
        result = mean_value_bound(u, 1.0, admissible_state)
        assert result.verified
        assert result.de_giorgi.verified
        assert result.de_giorgi.checked_levels >= 1
        assert result.de_giorgi.S_inf <= result.S_inf

    def test_unverified_recursion_fails(self, admissible_state, monkeypatch):
        def unverified(*args):
            return de_giorgi(*args).model_copy(update={"verified": False})

        monkeypatch.setattr("core.applications.proof_engine.mean_value.de_giorgi", unverified)
        result = mean_value_bound(0.7 * np.ones(admissible_state.grid.shape), 0.0, admissible_state)
        assert result.sup_u <= result.bound
        assert not result.verified
        assert not result.passed

    def test_potential_is_a_subsolution(self, admissible_state):
        # Box phi = 1 - tr G omega and tr G omega stays below 2 near the flat state
        result = mean_value_bound(admissible_state.phi, 1.0, admissible_state)
        assert result.sup_u == 0.0
        assert result.passed

    def test_precondition_failure(self, admissible_state):
        with pytest.raises(LabError.PreconditionError):
            mean_value_bound(-10 * admissible_state.phi, 0.0, admissible_state)

    def test_rejects_negative_constant(self, admissible_state):
        with pytest.raises(LabError.DomainError):
            mean_value_bound(admissible_state.grid.zeros(), -1.0, admissible_state)


def test_default_levels():
    assert default_levels(np.array([-1.0, 0.0])) == (0.0,)
    assert default_levels(np.array([0.0, 2.0])) == (0.0, 1.0)


def test_profile_levels():
    levels = profile_levels(np.array([0.0, 2.0]), 5.0)
    assert levels[0] == 0.0
    assert levels[-1] == 5.0
    assert 2.0 in levels
    assert np.all(np.diff(levels) > 0)
    assert profile_levels(np.array([-1.0, 0.0]), math.inf).tolist() == [0.0]
