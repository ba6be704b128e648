"""Adam optimizer with bias correction."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeMismatchError


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)


class Adam:
    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.state = AdamState(lr=lr, beta1=beta1, beta2=beta2, eps=eps)
        self.state.m = [np.zeros_like(p.data) for p in self.params]
        self.state.v = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self):
        for p in self.params:
            p.grad = None

    def step(self):
        s = self.state
        s.step_count += 1
        bc1 = 1.0 - s.beta1**s.step_count
        bc2 = 1.0 - s.beta2**s.step_count
        for p, m, v in zip(self.params, s.m, s.v):
            if p.grad is None:
                continue
            g = p.grad
            if g.shape != p.data.shape:
                raise ShapeMismatchError(
                    f"adam: grad {g.shape} vs param {p.data.shape}"
                )
            m *= s.beta1
            m += (1.0 - s.beta1) * g
            v *= s.beta2
            v += (1.0 - s.beta2) * (g * g)
            p.data -= s.lr * (m / bc1) / (np.sqrt(v / bc2) + s.eps)
