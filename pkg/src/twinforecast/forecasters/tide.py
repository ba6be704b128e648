"""Dense-encoder forecaster.

Covariates at every past and future step are projected to a small width by
a shared residual unit; the flattened [past target | projected covariates]
vector runs through residual-unit encoder/decoder stacks; a per-step
temporal decoder turns [decoder step | projected future covariate] into a
scalar; a global linear skip from the raw lookback closes the loop.
"""

from dataclasses import dataclass

import numpy as np

from ..autodiff import concat, nn, relu, reshape
from ..errors import InvalidHyperparameterError
from .base import Forecaster


@dataclass
class TiDEHyper:
    hidden: int = 128
    encoder_layers: int = 2
    decoder_layers: int = 2
    projection_dim: int = 8
    projection_hidden: int = 32
    decoder_output_dim: int = 16
    temporal_hidden: int = 32
    dropout: float = 0.1


class _ResidualUnit(nn.Module):
    """dense -> ReLU -> dense with a linear skip, dropout and layer norm."""

    def __init__(self, n_in, n_out, hidden, dropout, rng, dtype, seed_tag):
        self.fc1 = nn.Linear(n_in, hidden, rng, dtype)
        self.fc2 = nn.Linear(hidden, n_out, rng, dtype)
        self.skip = nn.Linear(n_in, n_out, rng, dtype)
        self.drop = nn.Dropout(dropout, seed_tag)
        self.norm = nn.LayerNorm(n_out, dtype)

    def __call__(self, x, training):
        y = self.drop(self.fc2(relu(self.fc1(x))), training)
        return self.norm(y + self.skip(x))


class TiDEForecaster(Forecaster):
    tag = "TIDE"

    def __init__(self, task, hyper=None, seed=0):
        hyper = hyper if isinstance(hyper, TiDEHyper) else TiDEHyper(**(hyper or {}))
        if (
            hyper.hidden < 1
            or hyper.encoder_layers < 1
            or hyper.decoder_layers < 1
            or hyper.projection_dim < 1
            or hyper.decoder_output_dim < 1
            or not 0.0 <= hyper.dropout < 1.0
        ):
            raise InvalidHyperparameterError(f"bad TiDE hyperparameters: {hyper}")
        super().__init__(task, hyper, seed)
        rng = np.random.Generator(np.random.Philox(key=[seed, 0x54494445]))
        dtype = np.float32
        c = task.n_covariates
        lb, hz = task.lookback, task.horizon

        mk = lambda n_in, n_out, hidden, tag: _ResidualUnit(
            n_in, n_out, hidden, hyper.dropout, rng, dtype, seed * 1000 + tag
        )
        self.projection = mk(c, hyper.projection_dim, hyper.projection_hidden, 1)
        enc_in = lb + (lb + hz) * hyper.projection_dim
        self.encoders = [mk(enc_in, hyper.hidden, hyper.hidden, 2)]
        self.encoders += [
            mk(hyper.hidden, hyper.hidden, hyper.hidden, 3 + i)
            for i in range(hyper.encoder_layers - 1)
        ]
        self.decoders = [
            mk(hyper.hidden, hyper.hidden, hyper.hidden, 20 + i)
            for i in range(hyper.decoder_layers - 1)
        ]
        self.decoders.append(
            mk(hyper.hidden, hz * hyper.decoder_output_dim, hyper.hidden, 40)
        )
        self.temporal = mk(
            hyper.decoder_output_dim + hyper.projection_dim, 1, hyper.temporal_hidden, 41
        )
        self.skip = nn.Linear(lb, hz, rng, dtype)

    def named_parameters(self):
        yield from self.projection.named_parameters("projection.")
        for i, m in enumerate(self.encoders):
            yield from m.named_parameters(f"encoder{i}.")
        for i, m in enumerate(self.decoders):
            yield from m.named_parameters(f"decoder{i}.")
        yield from self.temporal.named_parameters("temporal.")
        yield from self.skip.named_parameters("skip.")

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def _forward_batch(self, past_target, past_cov, future_cov, training):
        hyper = self.hyper
        b = past_target.shape[0]
        lb, hz = self.task.lookback, self.task.horizon
        c = self.task.n_covariates

        cov_steps = concat([past_cov, future_cov], axis=1)  # (B, L+H, C)
        flat_steps = reshape(cov_steps, (b * (lb + hz), c))
        projected = self.projection(flat_steps, training)  # (B*(L+H), P)

        enc_in = concat(
            [past_target, reshape(projected, (b, (lb + hz) * hyper.projection_dim))],
            axis=1,
        )
        h = enc_in
        for unit in self.encoders:
            h = unit(h, training)
        for unit in self.decoders:
            h = unit(h, training)

        decoded = reshape(h, (b * hz, hyper.decoder_output_dim))
        proj_steps = reshape(
            projected, (b, lb + hz, hyper.projection_dim)
        )[:, lb:, :]
        fut_proj = reshape(proj_steps, (b * hz, hyper.projection_dim))
        per_step = self.temporal(concat([decoded, fut_proj], axis=1), training)
        out = reshape(per_step, (b, hz))
        return out + self.skip(past_target)
