"""Temporal convolutional network: residual blocks of two dilated causal
convolutions, dense head over [last-step features | future covariates]."""

from dataclasses import dataclass, field

import numpy as np

from ..autodiff import concat, nn, relu, reshape
from ..errors import InvalidHyperparameterError
from .base import Forecaster


@dataclass
class TCNHyper:
    channels: int = 32
    kernel: int = 3
    dilations: tuple = field(default=(1, 2, 4, 8, 16, 32, 64))


def receptive_field(kernel, dilations):
    """Each block applies two convs, so each dilation widens twice."""
    return 1 + 2 * (kernel - 1) * sum(dilations)


class _Block(nn.Module):
    def __init__(self, c_in, c_out, kernel, dilation, rng, dtype):
        self.conv1 = nn.CausalConv1d(c_in, c_out, kernel, dilation, rng, dtype)
        self.conv2 = nn.CausalConv1d(c_out, c_out, kernel, dilation, rng, dtype)
        self.down = (
            nn.CausalConv1d(c_in, c_out, 1, 1, rng, dtype) if c_in != c_out else None
        )

    def __call__(self, x):
        y = relu(self.conv2(relu(self.conv1(x))))
        res = self.down(x) if self.down is not None else x
        return y + res


class TCNForecaster(Forecaster):
    tag = "TCN"

    def __init__(self, task, hyper=None, seed=0):
        hyper = hyper if isinstance(hyper, TCNHyper) else TCNHyper(
            **{**(hyper or {}), }
        )
        hyper.dilations = tuple(hyper.dilations)
        if hyper.channels < 1 or hyper.kernel < 1 or not hyper.dilations:
            raise InvalidHyperparameterError(f"bad TCN hyperparameters: {hyper}")
        if receptive_field(hyper.kernel, hyper.dilations) < task.lookback:
            raise InvalidHyperparameterError(
                "receptive field "
                f"{receptive_field(hyper.kernel, hyper.dilations)} does not cover "
                f"the {task.lookback} h lookback"
            )
        super().__init__(task, hyper, seed)
        rng = np.random.Generator(np.random.Philox(key=[seed, 0x54434E]))
        dtype = np.float32
        c = task.n_covariates
        self.blocks = []
        c_in = 1 + c
        for d in hyper.dilations:
            self.blocks.append(_Block(c_in, hyper.channels, hyper.kernel, d, rng, dtype))
            c_in = hyper.channels
        self.head = nn.Linear(
            hyper.channels + task.horizon * c, task.horizon, rng, dtype
        )

    def named_parameters(self):
        for i, block in enumerate(self.blocks):
            yield from block.named_parameters(f"block{i}.")
        yield from self.head.named_parameters("head.")

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def _forward_batch(self, past_target, past_cov, future_cov, training):
        b, length = past_target.shape
        x = concat([reshape(past_target, (b, length, 1)), past_cov], axis=2)
        for block in self.blocks:
            x = block(x)
        last = x[:, -1, :]
        fut = reshape(future_cov, (b, -1))
        return self.head(concat([last, fut], axis=1))
