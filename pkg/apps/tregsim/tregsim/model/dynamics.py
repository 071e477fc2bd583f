"""
Stock/flow dynamics of the T_reg compartments.

Stocks are held in a (n_clones + 1, 3) table: row 0 is the nonspecific pool, row i the
antigen-specific clone i; columns are precursors P, active matures R and quiescent
matures Q. During a response only clone s and the shared precursor pool move:

    dP0/dt = sigma(t) - m_eff * piN * P0
    dRs/dt = m_eff * piN * P0 + (b_eff - c_eff - dR_eff) * Rs + f_eff * Qs
    dQs/dt = c_eff * Rs - (f_eff + dQ_eff) * Qs

With global_quiescent_decay every other quiescent stock also loses dQ_eff * Q.
All flows are linear in the stocks, so the right-hand side is represented once as a
FlowOperator (matrix over the touched stocks plus the thymic forcing direction).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import FrozenSet, Optional, Tuple

import numpy as np

from tregsim.core.models import (
    EffectiveCoefficients,
    Phase,
    RegimePhase,
    ScenarioParameters,
)
from tregsim.model.schedules import ThymicInput, thymic_schedule

P, R, Q = 0, 1, 2
STOCK_NAMES = ("P", "R", "Q")


def flat_index(row: int, column: int) -> int:
    return 3 * row + column


@dataclass(frozen=True)
class SystemState:
    """Stocks, regime and clock at one instant."""

    stocks: np.ndarray
    t: float = 0.0
    phase: RegimePhase = field(default_factory=RegimePhase)
    primed: FrozenSet[int] = frozenset()
    onsets: int = 0
    clamp_warnings: int = 0

    @classmethod
    def initial(cls, params: ScenarioParameters) -> "SystemState":
        """State at t = 0: nonspecific pool only, no response running."""
        stocks = np.zeros((params.n_clones + 1, 3))
        stocks[0] = (params.P0, params.R0, params.Q0)
        return cls(stocks=stocks)

    @property
    def n_clones(self) -> int:
        return self.stocks.shape[0] - 1

    def totals(self) -> Tuple[float, float, float]:
        """(P_total, R_total, Q_total) summed over the pool and every clone."""
        sums = self.stocks.sum(axis=0)
        return float(sums[P]), float(sums[R]), float(sums[Q])

    def evolve(self, **changes) -> "SystemState":
        return replace(self, **changes)


def regime_coefficients(
    phase: RegimePhase, params: ScenarioParameters
) -> EffectiveCoefficients:
    """Rates switched on by the current state-chart phase."""
    state = phase.phase
    if state is Phase.PRIMARY_EXPANSION:
        return EffectiveCoefficients(b_eff=params.b, m_eff=params.m)
    if state is Phase.SECONDARY_EXPANSION:
        return EffectiveCoefficients(b_eff=params.b, f_eff=params.f, m_eff=params.m)
    if state.is_contraction:
        return EffectiveCoefficients(c_eff=params.c, dR_eff=params.dR, dQ_eff=params.dQ)
    return EffectiveCoefficients()


@dataclass(frozen=True)
class FlowOperator:
    """Linear right-hand side restricted to the stocks that can change.

    indices are flat positions into stocks.ravel(); derivative of those stocks is
    matrix @ y + sigma(t) * forcing, every other stock has zero derivative.
    """

    indices: np.ndarray
    matrix: np.ndarray
    forcing: np.ndarray

    def derivatives(self, stocks: np.ndarray, sigma: float) -> np.ndarray:
        flat = stocks.ravel()
        rates = np.zeros_like(flat)
        rates[self.indices] = self.matrix @ flat[self.indices] + sigma * self.forcing
        return rates.reshape(stocks.shape)


def flow_operator(
    coeffs: EffectiveCoefficients,
    params: ScenarioParameters,
    active_clone: Optional[int],
) -> FlowOperator:
    """Assemble the linear operator for one regime."""
    touched = [flat_index(0, P)]
    if active_clone is not None:
        touched += [flat_index(active_clone, R), flat_index(active_clone, Q)]
    decaying = []
    if params.global_quiescent_decay and coeffs.dQ_eff > 0:
        decaying = [
            flat_index(row, Q)
            for row in range(params.n_clones + 1)
            if row != active_clone
        ]
    touched += decaying

    local = {flat: i for i, flat in enumerate(touched)}
    matrix = np.zeros((len(touched), len(touched)))
    forcing = np.zeros(len(touched))

    p0 = local[flat_index(0, P)]
    maturation = coeffs.m_eff * params.piN
    forcing[p0] = 1.0
    matrix[p0, p0] = -maturation

    if active_clone is not None:
        rs = local[flat_index(active_clone, R)]
        qs = local[flat_index(active_clone, Q)]
        matrix[rs, p0] += maturation
        matrix[rs, rs] = coeffs.b_eff - coeffs.c_eff - coeffs.dR_eff
        matrix[rs, qs] = coeffs.f_eff
        matrix[qs, rs] = coeffs.c_eff
        matrix[qs, qs] = -(coeffs.f_eff + coeffs.dQ_eff)

    for flat in decaying:
        matrix[local[flat], local[flat]] = -coeffs.dQ_eff

    return FlowOperator(indices=np.array(touched, dtype=np.intp), matrix=matrix, forcing=forcing)


def derivatives(
    state: SystemState,
    coeffs: EffectiveCoefficients,
    params: ScenarioParameters,
    thymic: Optional[ThymicInput] = None,
) -> np.ndarray:
    """Per-stock rates (cells/day), same shape as state.stocks."""
    sigma = (thymic or thymic_schedule(params))(state.t)
    operator = flow_operator(coeffs, params, state.phase.active_clone)
    return operator.derivatives(state.stocks, sigma)
