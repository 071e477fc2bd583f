"""
Fixed-step classical RK4 on the linear stock/flow system.

For dy/dt = J y + sigma(t) u one RK4 step is exactly

    y' = M y + sigma(t) w0 + sigma(t + h/2) wh + sigma(t + h) w1

with M = I + A + A^2/2 + A^3/6 + A^4/24 (A = hJ) and the weight vectors below. The
propagator is built once per regime and cached, so a step is one small mat-vec.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from tregsim.core.exceptions import IntegrationError
from tregsim.core.models import EffectiveCoefficients, ScenarioParameters
from tregsim.model.dynamics import FlowOperator, SystemState, flow_operator
from tregsim.model.schedules import ThymicInput, thymic_schedule


@dataclass(frozen=True)
class StepPropagator:
    """One RK4 step of size h for a fixed regime, over the touched stocks."""

    indices: np.ndarray
    transition: np.ndarray
    w_start: np.ndarray
    w_mid: np.ndarray
    w_end: np.ndarray
    h: float

    @classmethod
    def from_operator(cls, operator: FlowOperator, h: float) -> "StepPropagator":
        a1 = h * operator.matrix
        a2 = a1 @ a1
        a3 = a2 @ a1
        a4 = a3 @ a1
        identity = np.eye(a1.shape[0])
        transition = identity + a1 + a2 / 2.0 + a3 / 6.0 + a4 / 24.0

        u = operator.forcing
        a1u, a2u, a3u = a1 @ u, a2 @ u, a3 @ u
        w_start = (h / 6.0) * (u + a1u + a2u / 2.0 + a3u / 4.0)
        w_mid = (h / 6.0) * (4.0 * u + 2.0 * a1u + a2u / 2.0)
        w_end = (h / 6.0) * u
        return cls(operator.indices, transition, w_start, w_mid, w_end, h)

    def step(self, flat: np.ndarray, t: float, thymic: ThymicInput) -> int:
        """Advance flat stocks in place from t to t + h; returns stocks clamped at 0."""
        idx = self.indices
        y = self.transition @ flat[idx]
        y += (
            thymic(t) * self.w_start
            + thymic(t + 0.5 * self.h) * self.w_mid
            + thymic(t + self.h) * self.w_end
        )
        if not math.isfinite(y.sum()):
            snapshot = flat.copy()
            snapshot[idx] = y
            raise IntegrationError(
                f"Non-finite stock after step at t={t + self.h:.6g} days",
                t=t + self.h,
                snapshot=snapshot.tolist(),
            )
        clamped = 0
        if y.min() < 0.0:
            negative = y < 0.0
            clamped = int(negative.sum())
            y[negative] = 0.0
        flat[idx] = y
        return clamped


@lru_cache(maxsize=512)
def propagator_for(
    coeffs: EffectiveCoefficients,
    params: ScenarioParameters,
    active_clone: Optional[int],
    h: float,
) -> StepPropagator:
    """Cached propagator for one (regime, clone, step) combination."""
    return StepPropagator.from_operator(flow_operator(coeffs, params, active_clone), h)


def advance_step(
    state: SystemState,
    coeffs: EffectiveCoefficients,
    h: float,
    params: ScenarioParameters,
    thymic: Optional[ThymicInput] = None,
) -> SystemState:
    """Integrate one step of size h; negative stocks are clamped and counted."""
    if not h > 0:
        raise ValueError(f"step size must be positive, got {h}")
    propagator = propagator_for(coeffs, params, state.phase.active_clone, h)
    flat = state.stocks.astype(float).ravel()
    clamped = propagator.step(flat, state.t, thymic or thymic_schedule(params))
    return state.evolve(
        stocks=flat.reshape(state.stocks.shape),
        t=state.t + h,
        clamp_warnings=state.clamp_warnings + clamped,
    )
