"""Validate the RK4 step against analytic and step-by-step references."""

import math

import numpy as np
import pytest

from tregsim.core.exceptions import IntegrationError
from tregsim.core.models import EffectiveCoefficients, Phase, RegimePhase, ScenarioParameters
from tregsim.engine.integrator import StepPropagator, advance_step
from tregsim.model.dynamics import (
    Q,
    R,
    SystemState,
    derivatives,
    flow_operator,
    regime_coefficients,
)


def reference_rk4(state, coeffs, h, params):
    """Textbook RK4 built directly on derivatives()."""
    y, t = state.stocks, state.t

    def f(tt, yy):
        return derivatives(state.evolve(stocks=yy, t=tt), coeffs, params)

    k1 = f(t, y)
    k2 = f(t + h / 2, y + h / 2 * k1)
    k3 = f(t + h / 2, y + h / 2 * k2)
    k4 = f(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _contraction_state(params, q=1000.0):
    state = SystemState.initial(params)
    state.stocks[1, Q] = q
    return state.evolve(phase=RegimePhase(phase=Phase.PRIMARY_CONTRACTION, active_clone=1))


class TestAdvanceStep:
    """Single-step behaviour of advance_step."""

    def test_fixed_point(self):
        params = ScenarioParameters(sigma0=0.0)
        state = SystemState.initial(params)
        after = advance_step(state, EffectiveCoefficients(), 0.1, params)
        np.testing.assert_array_equal(after.stocks, state.stocks)
        assert after.t == pytest.approx(0.1)

    def test_input_state_is_not_modified(self):
        params = ScenarioParameters()
        state = SystemState.initial(params)
        before = state.stocks.copy()
        advance_step(state, EffectiveCoefficients(m_eff=0.035), 0.1, params)
        np.testing.assert_array_equal(state.stocks, before)

    @pytest.mark.parametrize(
        "phase, coeffs",
        [
            (Phase.PRIMARY_EXPANSION, EffectiveCoefficients(b_eff=0.05, m_eff=0.035)),
            (Phase.SECONDARY_EXPANSION, EffectiveCoefficients(b_eff=0.05, f_eff=0.3, m_eff=0.035)),
            (Phase.SECONDARY_CONTRACTION, EffectiveCoefficients(c_eff=0.2, dR_eff=0.1, dQ_eff=0.01)),
        ],
    )
    def test_matches_textbook_rk4(self, phase, coeffs):
        params = ScenarioParameters(n_clones=2, global_quiescent_decay=True, dQ=0.01)
        state = SystemState.initial(params)
        state.stocks[1] = (0.0, 250.0, 4000.0)
        state.stocks[2] = (0.0, 10.0, 300.0)
        state = state.evolve(phase=RegimePhase(phase=phase, active_clone=1), t=1234.5)

        after = advance_step(state, coeffs, 0.1, params)
        np.testing.assert_allclose(after.stocks, reference_rk4(state, coeffs, 0.1, params), rtol=1e-13)

    def test_pure_decay_against_exponential(self):
        params = ScenarioParameters(sigma0=0.0, P0=0.0, Q0=0.0)
        coeffs = EffectiveCoefficients(dQ_eff=0.1)
        state = _contraction_state(params)
        for _ in range(1000):
            state = advance_step(state, coeffs, 0.1, params)
        exact = 1000.0 * math.exp(-0.1 * 100.0)
        assert abs(state.stocks[1, Q] - exact) / exact < 1e-8

    def test_fourth_order_convergence(self):
        params = ScenarioParameters(sigma0=0.0, P0=0.0, Q0=0.0)
        coeffs = EffectiveCoefficients(dQ_eff=0.1)
        exact = 1000.0 * math.exp(-0.1 * 100.0)

        errors = []
        for h, steps in ((0.1, 1000), (0.2, 500)):
            state = _contraction_state(params)
            for _ in range(steps):
                state = advance_step(state, coeffs, h, params)
            errors.append(abs(state.stocks[1, Q] - exact))
        assert 12.0 < errors[1] / errors[0] < 20.0

    def test_conserves_mass_without_gain_or_loss(self):
        params = ScenarioParameters(sigma0=0.0, b=0.0, dR=0.0, dQ=0.0)
        state = SystemState.initial(params)
        total = state.stocks.sum()
        for phase in (Phase.PRIMARY_EXPANSION, Phase.PRIMARY_CONTRACTION, Phase.SECONDARY_EXPANSION):
            state = state.evolve(phase=RegimePhase(phase=phase, active_clone=1))
            coeffs = regime_coefficients(state.phase, params)
            for _ in range(500):
                state = advance_step(state, coeffs, 0.1, params)
        assert state.stocks.sum() == pytest.approx(total, rel=1e-12)


class TestClampingAndFailures:
    """Negative stocks and non-finite states."""

    def test_overshoot_is_clamped_and_counted(self):
        params = ScenarioParameters(sigma0=0.0, P0=0.0, Q0=0.0)
        state = SystemState.initial(params)
        state.stocks[1, R] = 100.0
        state = state.evolve(phase=RegimePhase(phase=Phase.PRIMARY_CONTRACTION, active_clone=1))
        # c * h = 10: the R to Q transfer term of one RK4 step is negative
        after = advance_step(state, EffectiveCoefficients(c_eff=10.0), 1.0, params)
        assert after.stocks[1, Q] == 0.0
        assert after.clamp_warnings == 1
        assert np.all(after.stocks >= 0)

    def test_non_finite_state_raises_with_diagnostics(self):
        params = ScenarioParameters(sigma0=0.0, P0=0.0, Q0=0.0)
        state = SystemState.initial(params)
        state.stocks[1, R] = 1e300
        state = state.evolve(phase=RegimePhase(phase=Phase.PRIMARY_EXPANSION, active_clone=1))
        with pytest.raises(IntegrationError) as excinfo:
            advance_step(state, EffectiveCoefficients(b_eff=1e6), 1.0, params)
        assert excinfo.value.t == pytest.approx(1.0)
        assert excinfo.value.snapshot is not None
        assert excinfo.value.exit_code == 4


class TestStepPropagator:
    """Cached one-step propagator."""

    def test_step_matches_advance_step(self):
        params = ScenarioParameters()
        coeffs = EffectiveCoefficients(m_eff=0.035)
        state = SystemState.initial(params).evolve(
            phase=RegimePhase(phase=Phase.PRIMARY_EXPANSION, active_clone=1), t=50.0
        )
        propagator = StepPropagator.from_operator(flow_operator(coeffs, params, 1), 0.1)
        flat = state.stocks.copy().ravel()
        propagator.step(flat, 50.0, lambda t: params.sigma0 * math.exp(-params.nu * t))
        np.testing.assert_allclose(
            flat.reshape(state.stocks.shape),
            advance_step(state, coeffs, 0.1, params).stocks,
            rtol=1e-15,
        )
