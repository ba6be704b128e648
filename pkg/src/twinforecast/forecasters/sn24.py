"""Seasonal-naive baseline: repeat the value observed 24 hours earlier."""

import numpy as np

from ..errors import HistoryTooShortError, NotTrainedError
from .base import Forecaster

SEASON = 24


def sn24_forecast(history, horizon=SEASON):
    """forecast[t] = history[-24 + t]; horizon is capped at one season."""
    history = np.asarray(history, dtype=np.float64)
    if history.ndim != 1 or len(history) < SEASON:
        raise HistoryTooShortError(
            f"need at least {SEASON} hourly values, got {history.shape}"
        )
    if horizon > SEASON:
        raise HistoryTooShortError(
            f"horizon {horizon} exceeds the {SEASON} h season this baseline repeats"
        )
    return history[-SEASON : -SEASON + horizon] if horizon < SEASON else history[-SEASON:].copy()


class SN24Forecaster(Forecaster):
    tag = "SN24"

    def __init__(self, task, hyper=None, seed=0):
        super().__init__(task, hyper, seed)
        self.trained = True  # nothing to fit

    def predict_batch(self, past_target, past_cov, future_cov, past_physical):
        if not self.trained:
            raise NotTrainedError("SN24 should always be trained")
        past_physical = np.asarray(past_physical, dtype=np.float64)
        if past_physical.shape[1] < SEASON:
            raise HistoryTooShortError(
                f"window history of {past_physical.shape[1]} h is shorter than {SEASON} h"
            )
        reps = -(-self.task.horizon // SEASON)
        tiled = np.tile(past_physical[:, -SEASON:], (1, reps))
        return tiled[:, : self.task.horizon]
