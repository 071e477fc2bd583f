"""Time-dependent inputs: thymic output and the primary-response probability."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from tregsim.core.models import ScenarioParameters

ThymicInput = Callable[[float], float]


@dataclass(frozen=True)
class ExponentialSchedule:
    """amplitude * exp(-rate * t), t in days."""

    amplitude: float
    rate: float

    def __call__(self, t: float) -> float:
        if self.rate == 0.0:
            return self.amplitude
        return self.amplitude * math.exp(-self.rate * t)


def thymic_schedule(params: ScenarioParameters) -> ThymicInput:
    """Thymic output sigma(t) in cells/day; exponential involution."""
    return ExponentialSchedule(params.sigma0, params.nu)


def primary_probability(params: ScenarioParameters, t: float) -> float:
    """q(t) = clamp(q0 * exp(-lambda_q * t), 0, 1)."""
    q = ExponentialSchedule(params.q0, params.lambda_q)(t)
    return min(1.0, max(0.0, q))
