import numpy as np
import pytest

from core.applications.functionals.profiles import SublevelProfile
from core.applications.functionals.services import entropy_p
from core.applications.functionals.services import sublevel_profile
from core.applications.ma_solver.services import auxiliary_density
from core.applications.ma_solver.services import auxiliary_problem
from core.applications.ma_solver.services import exponential_integrability
from core.applications.ma_solver.services import solve_ma
from core.applications.nonlinear_operators.services import HessianOperator
from core.applications.nonlinear_operators.services import resolve_gamma
from core.applications.proof_engine.checks import check_phi_test_function
from core.applications.proof_engine.checks import check_psi_test_function
from core.applications.proof_engine.checks import linearized_check
from core.applications.proof_engine.checks import linearized_coefficients
from core.applications.proof_engine.checks import linearized_operator
from core.applications.proof_engine.checks import phi_test_field
from core.applications.proof_engine.checks import psi_test_field
from core.applications.proof_engine.checks import require_theta_lower_bound
from core.applications.proof_engine.checks import smoothing_gap
from core.applications.proof_engine.checks import sublevel_decay_check
from core.applications.proof_engine.checks import sublevel_mass_check
from core.applications.proof_engine.constants import build_constant_chain
from core.applications.torus_geometry.fields import HermitianField
from core.applications.torus_geometry.services import induce_density
from core.applications.torus_geometry.services import trigonometric_potential
from core.applications.torus_geometry.spectral import complex_hessian
from core.applications.torus_geometry.spectral import complex_laplacian
from core.helper.custom_exceptions import LabError


def state_chain(state, p=1.0):
    return build_constant_chain(
        state.n,
        p,
        resolve_gamma(state.operator),
        state.kappa,
        state.c_ratio,
        entropy_p(state, p),
        state.background_volume,
        C_0=0.1,
    )


def barrier_solve(state, chain, s, k=32.0):
    density = auxiliary_density(state, s, k, chain.a)
    psi, _ = solve_ma(auxiliary_problem(state, density))
    return psi, density


def random_field(grid, seed):
    return 0.1 * trigonometric_potential(grid, 4, np.random.default_rng(seed))


class TestLinearizedOperator:
    def test_laplacian_type_operator(self, admissible_state):
        op = HessianOperator(2, 1)
        state = induce_density(
            op,
            admissible_state.phi,
            admissible_state.omega,
            admissible_state.omega_X,
            admissible_state.grid,
        )
        v = random_field(state.grid, 3)
        expected = complex_laplacian(v, state.grid, state.omega_X) / state.f_values
        assert np.max(np.abs(linearized_operator(op, state, v) - expected)) <= 1e-10

    def test_monge_ampere_traces_over_solution_form(self, admissible_state):
        state = admissible_state
        v = random_field(state.grid, 4)
        hessian = complex_hessian(v, state.grid).data
        inverse = np.linalg.inv(state.omega_phi.data)
        expected = np.real(np.einsum("...ij,...ji->...", inverse, hessian)) / state.n
        assert np.max(np.abs(linearized_operator(None, state, v) - expected)) <= 1e-8

    def test_constant_field(self, admissible_state):
        v = 0.7 * np.ones(admissible_state.grid.shape)
        assert np.max(np.abs(linearized_operator(None, admissible_state, v))) <= 1e-12

    def test_euler_identity(self, admissible_state):
        # f is 1-homogeneous, so G omega_phi traces to one
        state = admissible_state
        coefficients = linearized_coefficients(None, state)
        trace = np.real(np.einsum("...ij,...ji->...", coefficients, state.omega.on(state.grid)))
        assert np.max(np.abs(linearized_operator(None, state, state.phi) - (1 - trace))) <= 1e-10

    def test_structural_bound(self, admissible_state):
        check = linearized_check(None, admissible_state)
        assert check.passed
        assert check.min_eigenvalue > 0
        assert abs(check.min_det_margin) <= 1e-10


class TestPhiTestFunction:
    @pytest.mark.parametrize("fraction", [0.0, 0.3])
    def test_barrier_holds(self, admissible_state, fraction):
        chain = state_chain(admissible_state)
        s = fraction * admissible_state.sup_abs_phi
        psi, density = barrier_solve(admissible_state, chain, s)
        check = check_phi_test_function(admissible_state, psi, chain, s, density.A_sk, 32.0)
        assert check.passed
        assert check.max_value <= check.tolerance
        assert check.outside_max < 0
        assert chain.epsilon(density.A_sk) * chain.b * chain.Lambda(density.A_sk) ** (chain.b - 1) == pytest.approx(
            1.0,
            rel=1e-12,
        )

    def test_larger_barrier_still_holds(self, admissible_state):
        chain = state_chain(admissible_state)
        psi, density = barrier_solve(admissible_state, chain, 0.0)
        base = check_phi_test_function(admissible_state, psi, chain, 0.0, density.A_sk)
        taller = chain.model_copy(update={"e_0": 10 * chain.e_0})
        check = check_phi_test_function(admissible_state, psi, taller, 0.0, density.A_sk)
        assert check.passed
        assert check.max_value <= base.max_value

    def test_integrability_failure_fails_barrier(self, admissible_state):
        chain = state_chain(admissible_state)
        psi, density = barrier_solve(admissible_state, chain, 0.0)
        grid, omega_X = admissible_state.grid, admissible_state.omega_X  # noqa: N806
        held = exponential_integrability(psi, grid, omega_X, chain.beta, chain.C_X)
        # C_X below the background volume cannot hold for a sup-normalised psi
        broken = exponential_integrability(psi, grid, omega_X, chain.beta, 0.5 * admissible_state.background_volume)
        assert held.passed
        assert not broken.passed
        base = check_phi_test_function(admissible_state, psi, chain, 0.0, density.A_sk, integrability=held)
        check = check_phi_test_function(admissible_state, psi, chain, 0.0, density.A_sk, integrability=broken)
        assert base.passed
        assert check.max_value == base.max_value
        assert not check.passed
        assert check.integrability.C_X == pytest.approx(0.5 * admissible_state.background_volume)

    def test_rejects_negative_level(self, admissible_state):
        chain = state_chain(admissible_state)
        with pytest.raises(LabError.DomainError):
            check_phi_test_function(admissible_state, admissible_state.grid.zeros(), chain, -0.1, 1.0)


class TestPsiTestFunction:
    def test_reduces_to_phi_shape_without_coupling(self, admissible_state):
        psi = random_field(admissible_state.grid, 5)
        psi = psi - np.max(psi)
        phi_shape = phi_test_field(admissible_state, psi, 0.4, 0.2, 2 / 3, 0.0)
        psi_shape = psi_test_field(admissible_state, psi, 0.4, 0.2, 2 / 3, 0.0)
        assert np.array_equal(phi_shape, psi_shape)

    def test_theta_lower_bound_violation(self, admissible_state):
        theta = HermitianField.identity(2) * -1.0
        with pytest.raises(LabError.PreconditionError) as error:
            require_theta_lower_bound(theta, 0.5, admissible_state)
        assert error.value.context["K_2"] == 0.5
        assert error.value.context["points"]

    def test_theta_lower_bound_margin(self, admissible_state):
        theta = HermitianField.identity(2) * -0.3
        assert require_theta_lower_bound(theta, 0.5, admissible_state) == pytest.approx(0.2)

    def test_needs_coupled_constants(self, admissible_state):
        chain = state_chain(admissible_state)
        with pytest.raises(LabError.ConfigError):
            check_psi_test_function(
                admissible_state,
                admissible_state.grid.zeros(),
                HermitianField.zeros(2),
                chain,
                1.0,
            )


class TestSmoothingGap:
    @pytest.mark.parametrize("a", [2.0, 0.5])
    def test_gap_within_uniform_bound(self, admissible_state, a):
        gap = smoothing_gap(admissible_state, 0.2 * admissible_state.sup_abs_phi, a)
        assert gap.decreasing
        assert gap.passed
        assert all(value >= gap.A_s for value in gap.A_sk)
        assert gap.k_values == [8.0, 32.0, 128.0]


class TestLevelChecks:
    def test_decay_on_computed_state(self, admissible_state):
        chain = state_chain(admissible_state)
        profile = sublevel_profile(admissible_state, chain.a, [0.5, 1.5, 3.0])
        check = sublevel_decay_check(profile, chain)
        assert check.passed
        assert check.levels == [1.5, 3.0]

    def test_decay_violation(self, admissible_state):
        chain = state_chain(admissible_state)
        profile = SublevelProfile(
            s_values=np.array([2.0, 4.0]),
            phi_of_s=np.array([100 * chain.C_1, 50 * chain.C_1]),
            A_of_s=np.array([1.0, 1.0]),
            a=chain.a,
        )
        assert not sublevel_decay_check(profile, chain).passed

    def test_mass_bound(self, admissible_state):
        chain = state_chain(admissible_state)
        bound = chain.C_6 * chain.c_ratio ** ((chain.n + chain.a) / chain.n)
        levels = np.array([chain.s_bar, 2 * chain.s_bar])
        holding = SublevelProfile(s_values=levels, phi_of_s=np.zeros(2), A_of_s=np.zeros(2), a=chain.a)
        failing = SublevelProfile(
            s_values=levels,
            phi_of_s=np.ones(2),
            A_of_s=np.array([10 * bound, 5 * bound]),
            a=chain.a,
        )
        assert sublevel_mass_check(holding, chain).passed
        check = sublevel_mass_check(failing, chain)
        assert not check.passed
        assert check.bound == pytest.approx(bound)
