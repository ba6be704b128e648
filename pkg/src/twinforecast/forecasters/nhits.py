"""Hierarchical-interpolation forecaster.

Three max-pooled stacks operate doubly-residually on the past target:
each block emits coarse backcast/forecast coefficient vectors that are
linearly upsampled to the lookback/horizon lengths, the backcast is
subtracted from the running residual, and stack forecasts add up to the
model output.  Future covariates are appended to every block's input.
"""

from dataclasses import dataclass, field

import numpy as np

from ..autodiff import concat, interp_linear, maxpool1d, nn, relu, reshape, sub
from ..errors import InvalidHyperparameterError
from .base import Forecaster


@dataclass
class NHiTSHyper:
    stacks: int = 3
    mlp_width: int = 512
    pool_kernels: tuple = field(default=(8, 4, 1))
    # coefficient lengths per stack: coarse to fine, H/12, H/2, H
    forecast_downsample: tuple = field(default=(12, 2, 1))


class _Block(nn.Module):
    def __init__(self, in_dim, width, back_len, fore_len, rng, dtype):
        self.fc1 = nn.Linear(in_dim, width, rng, dtype)
        self.fc2 = nn.Linear(width, width, rng, dtype)
        self.back_head = nn.Linear(width, back_len, rng, dtype)
        self.fore_head = nn.Linear(width, fore_len, rng, dtype)

    def __call__(self, x):
        h = relu(self.fc2(relu(self.fc1(x))))
        return self.back_head(h), self.fore_head(h)


class NHiTSForecaster(Forecaster):
    tag = "NHITS"

    def __init__(self, task, hyper=None, seed=0):
        hyper = hyper if isinstance(hyper, NHiTSHyper) else NHiTSHyper(**(hyper or {}))
        hyper.pool_kernels = tuple(hyper.pool_kernels)
        hyper.forecast_downsample = tuple(hyper.forecast_downsample)
        if (
            hyper.stacks < 1
            or hyper.mlp_width < 1
            or len(hyper.pool_kernels) != hyper.stacks
            or len(hyper.forecast_downsample) != hyper.stacks
            or any(k < 1 for k in hyper.pool_kernels)
            or any(d < 1 for d in hyper.forecast_downsample)
        ):
            raise InvalidHyperparameterError(f"bad N-HiTS hyperparameters: {hyper}")
        super().__init__(task, hyper, seed)
        rng = np.random.Generator(np.random.Philox(key=[seed, 0x4E48]))
        dtype = np.float32
        c = task.n_covariates
        fut_dim = task.horizon * c
        self.blocks = []
        for kernel, down in zip(hyper.pool_kernels, hyper.forecast_downsample):
            pooled = -(-task.lookback // kernel)
            back_len = max(task.lookback // down, 1)
            fore_len = max(task.horizon // down, 1)
            self.blocks.append(
                _Block(pooled + fut_dim, hyper.mlp_width, back_len, fore_len, rng, dtype)
            )

    def named_parameters(self):
        for i, block in enumerate(self.blocks):
            yield from block.named_parameters(f"stack{i}.")

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def forward_components(self, past_target, past_cov, future_cov, training):
        """Returns (total forecast, per-stack forecasts); all scaled."""
        b = past_target.shape[0]
        fut = reshape(future_cov, (b, -1))
        residual = past_target
        components = []
        total = None
        for block, kernel in zip(self.blocks, self.hyper.pool_kernels):
            pooled = maxpool1d(residual, kernel) if kernel > 1 else residual
            theta_b, theta_f = block(concat([pooled, fut], axis=1))
            backcast = interp_linear(theta_b, self.task.lookback)
            forecast = interp_linear(theta_f, self.task.horizon)
            residual = sub(residual, backcast)
            components.append(forecast)
            total = forecast if total is None else total + forecast
        return total, components

    def _forward_batch(self, past_target, past_cov, future_cov, training):
        total, _ = self.forward_components(past_target, past_cov, future_cov, training)
        return total
