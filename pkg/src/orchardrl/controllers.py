"""Irrigation controllers behind one decide(state) interface.

All controllers are pure functions of the state (plus their frozen config or
policy), so replaying a logged season reproduces every decision.  Decisions
carry a source tag — agent, et_baseline, sensor_baseline, shield_fallback —
so season logs can attribute every drop of water.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .agent.policy import SquashedGaussianPolicy
from .env import EnvState, state_vector
from .hydrology import SoilLevels
from .safety import ShieldConfig, ShieldReport, screen

SOURCE_AGENT = "agent"
SOURCE_ET = "et_baseline"
SOURCE_SENSOR = "sensor_baseline"
SOURCE_SHIELD = "shield_fallback"


@dataclass(frozen=True)
class ControllerDecision:
    action: np.ndarray
    source: str
    report: ShieldReport | None = None


class EtController:
    """Loss-replacement baseline: replace yesterday's net water loss.

    Applies max(0, ET - precip) of the most recent completed day, the same
    depth to every region (centralized control), capped at a_max.
    """

    name = "et"

    def __init__(self, n_regions: int, a_max: float):
        self.n_regions = n_regions
        self.a_max = a_max

    def decide(self, state: EnvState) -> ControllerDecision:
        w = state.weather_today
        dose = min(self.a_max, max(0.0, w.et - w.precip))
        return ControllerDecision(action=np.full(self.n_regions, dose),
                                  source=SOURCE_ET)


@dataclass(frozen=True)
class SensorControllerConfig:
    """Two-threshold on-demand watering: start below lower, fill to upper."""

    lower_threshold: float = 4.96
    upper_threshold: float = 6.97

    def __post_init__(self) -> None:
        if not self.lower_threshold < self.upper_threshold:
            raise ValueError("lower_threshold must be below upper_threshold")

    def validate_against(self, levels: SoilLevels) -> None:
        if not (levels.v_mad <= self.lower_threshold
                and self.upper_threshold <= levels.v_fc):
            raise ValueError(
                "thresholds must satisfy v_mad <= lower < upper <= v_fc "
                f"(levels: mad={levels.v_mad:.3f}, fc={levels.v_fc:.3f})"
            )


class SensorController:
    """Per-region threshold baseline.

    When a region's soil water drops strictly below the lower threshold, it
    receives the dose that fills it to the upper threshold under the assumed
    application gain (the shield predictor's irrigation coefficient), capped
    at a_max; otherwise nothing.
    """

    name = "sensor"

    def __init__(self, config: SensorControllerConfig, fill_gain: float,
                 a_max: float):
        if fill_gain <= 0:
            raise ValueError("fill_gain must be positive")
        self.config = config
        self.fill_gain = fill_gain
        self.a_max = a_max

    def decide(self, state: EnvState) -> ControllerDecision:
        a = np.zeros(len(state.v))
        for i, v_i in enumerate(state.v):
            if v_i < self.config.lower_threshold:
                a[i] = min(self.a_max,
                           (self.config.upper_threshold - v_i) / self.fill_gain)
        return ControllerDecision(action=a, source=SOURCE_SENSOR)


class RlController:
    """Deterministic deployment of a trained policy (squashed network mean).

    The policy must carry the normalization statistics it was trained with.
    """

    name = "rl"

    def __init__(self, policy: SquashedGaussianPolicy):
        if policy.norm_stats is None:
            raise ValueError("policy has no normalization statistics attached")
        self.policy = policy

    def decide(self, state: EnvState) -> ControllerDecision:
        obs = self.policy.norm_stats.apply(state_vector(state))
        action = self.policy.mean_action(obs)
        return ControllerDecision(action=np.asarray(action, dtype=float),
                                  source=SOURCE_AGENT)


class ConstantController:
    """Fixed-depth controller; the zero-depth case is the adversarial probe
    used to exercise the shield."""

    name = "constant"

    def __init__(self, n_regions: int, depth: float = 0.0):
        if depth < 0:
            raise ValueError("depth must be nonnegative")
        self.action = np.full(n_regions, float(depth))

    def decide(self, state: EnvState) -> ControllerDecision:
        return ControllerDecision(action=self.action.copy(), source=SOURCE_AGENT)


class ShieldedController:
    """Wrap any controller with the safety screen.

    The inner proposal is screened each cycle; on a trigger the fallback's
    action executes and the decision is tagged shield_fallback.  The shield
    report rides along on every decision either way.
    """

    def __init__(self, inner, shield: ShieldConfig, fallback):
        self.inner = inner
        self.shield = shield
        self.fallback = fallback
        self.name = getattr(inner, "name", "inner")

    def decide(self, state: EnvState) -> ControllerDecision:
        proposal = self.inner.decide(state)
        action, report = screen(self.shield, state, proposal.action,
                                self.fallback)
        source = SOURCE_SHIELD if report.triggered else proposal.source
        return ControllerDecision(action=action, source=source, report=report)
