"""Layer primitives built on the tape: the building blocks the forecasting
architectures share."""

import math

import numpy as np

from ..errors import InvalidHyperparameterError
from . import tensor as T


def uniform_fanin(rng, shape, fan_in, dtype):
    bound = 1.0 / math.sqrt(fan_in) if fan_in > 0 else 1.0
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


class Module:
    """Minimal parameter container with named traversal."""

    def _params(self):
        return {
            k: v for k, v in vars(self).items() if isinstance(v, T.Tensor)
        }

    def _children(self):
        out = {}
        for k, v in vars(self).items():
            if isinstance(v, Module):
                out[k] = v
            elif isinstance(v, (list, tuple)):
                for i, item in enumerate(v):
                    if isinstance(item, Module):
                        out[f"{k}.{i}"] = item
        return out

    def named_parameters(self, prefix=""):
        for k, v in self._params().items():
            yield (prefix + k, v)
        for k, child in self._children().items():
            yield from child.named_parameters(prefix + k + ".")

    def parameters(self):
        return [p for _, p in self.named_parameters()]


class Linear(Module):
    def __init__(self, n_in, n_out, rng, dtype):
        if n_in < 1 or n_out < 1:
            raise InvalidHyperparameterError(f"linear dims ({n_in}, {n_out})")
        self.w = T.Tensor(uniform_fanin(rng, (n_in, n_out), n_in, dtype), requires_grad=True)
        self.b = T.Tensor(uniform_fanin(rng, (n_out,), n_in, dtype), requires_grad=True)

    def __call__(self, x):
        return T.matmul(x, self.w) + self.b


class LayerNorm(Module):
    def __init__(self, dim, dtype, eps=1e-5):
        self.gain = T.Tensor(np.ones(dim, dtype=dtype), requires_grad=True)
        self.bias = T.Tensor(np.zeros(dim, dtype=dtype), requires_grad=True)
        self.eps = eps

    def __call__(self, x):
        return T.layer_norm(x, self.gain, self.bias, self.eps)


class Dropout(Module):
    """Inverted dropout; each call advances the mask counter."""

    def __init__(self, p, seed):
        self.p = p
        self.seed = seed
        self.counter = 0

    def __call__(self, x, training):
        if not training or self.p <= 0.0:
            return x
        self.counter += 1
        return T.dropout(x, self.p, self.seed, self.counter, training)


class CausalConv1d(Module):
    def __init__(self, c_in, c_out, kernel, dilation, rng, dtype):
        if c_in < 1 or c_out < 1 or kernel < 1 or dilation < 1:
            raise InvalidHyperparameterError("conv dims must be >= 1")
        fan_in = c_in * kernel
        self.w = T.Tensor(
            uniform_fanin(rng, (kernel, c_in, c_out), fan_in, dtype), requires_grad=True
        )
        self.b = T.Tensor(uniform_fanin(rng, (c_out,), fan_in, dtype), requires_grad=True)
        self.dilation = dilation

    def __call__(self, x):
        return T.causal_conv1d(x, self.w, self.b, self.dilation)


class LSTMLayer(Module):
    def __init__(self, n_in, hidden, rng, dtype):
        if hidden < 1:
            raise InvalidHyperparameterError(f"lstm hidden {hidden}")
        self.wx = T.Tensor(
            uniform_fanin(rng, (n_in, 4 * hidden), hidden, dtype), requires_grad=True
        )
        self.wh = T.Tensor(
            uniform_fanin(rng, (hidden, 4 * hidden), hidden, dtype), requires_grad=True
        )
        self.b = T.Tensor(uniform_fanin(rng, (4 * hidden,), hidden, dtype), requires_grad=True)

    def __call__(self, x):
        return T.lstm_seq(x, self.wx, self.wh, self.b)


class LSTM(Module):
    def __init__(self, n_in, hidden, num_layers, rng, dtype):
        sizes = [n_in] + [hidden] * num_layers
        self.layers = [
            LSTMLayer(sizes[i], hidden, rng, dtype) for i in range(num_layers)
        ]

    def __call__(self, x):
        h = x
        for layer in self.layers:
            h = layer(h)
        return h
