"""Stacked-LSTM forecaster: recurrent encoder over the lookback window,
dense head over [final hidden state | flattened future covariates]."""

from dataclasses import dataclass

import numpy as np

from ..autodiff import concat, nn, reshape
from ..errors import InvalidHyperparameterError
from .base import Forecaster


@dataclass
class LSTMHyper:
    hidden: int = 64
    layers: int = 2


class LSTMForecaster(Forecaster):
    tag = "LSTM"

    def __init__(self, task, hyper=None, seed=0):
        hyper = hyper if isinstance(hyper, LSTMHyper) else LSTMHyper(**(hyper or {}))
        if hyper.hidden < 1 or hyper.layers < 1:
            raise InvalidHyperparameterError(f"bad LSTM hyperparameters: {hyper}")
        super().__init__(task, hyper, seed)
        rng = np.random.Generator(np.random.Philox(key=[seed, 0x4C53544D]))
        dtype = np.float32
        c = task.n_covariates
        self.lstm = nn.LSTM(1 + c, hyper.hidden, hyper.layers, rng, dtype)
        self.head = nn.Linear(hyper.hidden + task.horizon * c, task.horizon, rng, dtype)

    def named_parameters(self):
        yield from self.lstm.named_parameters("lstm.")
        yield from self.head.named_parameters("head.")

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def _forward_batch(self, past_target, past_cov, future_cov, training):
        b, length = past_target.shape
        x = concat([reshape(past_target, (b, length, 1)), past_cov], axis=2)
        h = self.lstm(x)
        last = h[:, -1, :]
        fut = reshape(future_cov, (b, -1))
        return self.head(concat([last, fut], axis=1))
