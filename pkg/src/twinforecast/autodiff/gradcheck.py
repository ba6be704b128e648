"""Finite-difference gradient verification."""

import numpy as np

from .tensor import Tensor


def grad_check(fn, point, epsilon=1e-6):
    """Compare analytic and central-difference gradients of a scalar function.

    ``fn`` maps a Tensor to a scalar Tensor; ``point`` is the ndarray at
    which to differentiate.  Returns the max over coordinates of
    |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
    """
    point = np.asarray(point, dtype=np.float64)
    x = Tensor(point.copy(), requires_grad=True)
    out = fn(x)
    out.backward()
    analytic = x.grad.copy() if x.grad is not None else np.zeros_like(point)

    numeric = np.zeros_like(point)
    flat = point.reshape(-1)
    num_flat = numeric.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + epsilon
        hi = float(fn(Tensor(point.copy())).data)
        flat[i] = orig - epsilon
        lo = float(fn(Tensor(point.copy())).data)
        flat[i] = orig
        num_flat[i] = (hi - lo) / (2.0 * epsilon)

    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / denom))
