"""Predictor-based action screening (the safe-irrigation mechanism).

Before an agent action executes, the shield predicts each region's next-day
soil water under that action using its own learned water-balance model and
the forecast weather channels.  If the aggregate predicted stress deficit
exceeds the detector threshold, the fallback controller's action replaces
the agent's for this cycle only; the agent resumes control next cycle.

The default detector aggregates per-region positive parts,
sum_i max(0, v_mad - v_hat_i), so a well-watered region can never mask
another region's predicted deficit.  A signed variant
sum_i (v_mad - v_hat_i) is available behind ``signed_detector`` for
fidelity comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .env import EnvState
from .predictor import PredictorModel, predict_next


@dataclass(frozen=True)
class ShieldConfig:
    """Shield settings: learned dynamics, stress level, detector tuning.

    model may be a single PredictorModel (shared by all regions) or one per
    region; it is the shield's own fitted model, distinct from the
    simulator's ground-truth dynamics.  cap, when given, saturates the
    shield's predictions the same way the simulator saturates true storage.
    """

    model: PredictorModel | tuple[PredictorModel, ...] | None
    v_mad: float
    detector_threshold: float = 0.0
    enabled: bool = True
    signed_detector: bool = False
    cap: float | None = None

    def __post_init__(self) -> None:
        if self.detector_threshold < 0:
            raise ValueError("detector_threshold must be nonnegative")
        if self.v_mad < 0:
            raise ValueError("v_mad must be nonnegative")

    def models_for(self, n_regions: int) -> tuple[PredictorModel, ...]:
        if self.model is None:
            raise ValueError("shield model is unfitted; provide a PredictorModel")
        if isinstance(self.model, PredictorModel):
            return (self.model,) * n_regions
        models = tuple(self.model)
        if len(models) != n_regions:
            raise ValueError(
                f"shield has {len(models)} models for {n_regions} regions"
            )
        return models


@dataclass(frozen=True)
class ShieldReport:
    """What the screen saw and did for one control cycle."""

    predicted_v_next: np.ndarray
    deficit_sum: float
    triggered: bool
    substituted_action: np.ndarray | None


def predicted_deficit(config: ShieldConfig, state: EnvState,
                      action: np.ndarray) -> tuple[np.ndarray, float]:
    """Next-day per-region predictions under an action, and the aggregate
    stress deficit those predictions imply."""
    a = np.asarray(action, dtype=float).reshape(-1)
    models = config.models_for(len(a))
    e_pred = state.predicted_et_next
    p_forecast = state.forecast_precip_next
    v_hat = np.array([
        predict_next(m, float(v_i), float(a_i), p_forecast, e_pred, cap=config.cap)
        for m, v_i, a_i in zip(models, state.v, a)
    ])
    gaps = config.v_mad - v_hat
    if not config.signed_detector:
        gaps = np.maximum(0.0, gaps)
    return v_hat, float(gaps.sum())


def screen(config: ShieldConfig, state: EnvState, proposed: np.ndarray,
           fallback) -> tuple[np.ndarray, ShieldReport]:
    """Screen a proposed action; substitute the fallback's if unsafe.

    fallback is any controller object whose decide(state) returns a decision
    with an ``action`` attribute.  With the shield disabled the proposal
    always passes through, but the report still records the counterfactual
    deficit so ablation runs can count would-have-triggered days.
    """
    proposed = np.asarray(proposed, dtype=float).reshape(-1)
    v_hat, deficit = predicted_deficit(config, state, proposed)
    would_trigger = deficit > config.detector_threshold
    if config.enabled and would_trigger:
        substituted = np.asarray(fallback.decide(state).action, dtype=float)
        return substituted.copy(), ShieldReport(
            predicted_v_next=v_hat, deficit_sum=deficit, triggered=True,
            substituted_action=substituted)
    return proposed.copy(), ShieldReport(
        predicted_v_next=v_hat, deficit_sum=deficit, triggered=False,
        substituted_action=None)
