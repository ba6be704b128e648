"""Reverse-mode automatic differentiation over dense NumPy tensors.

A ``Tensor`` wraps an ndarray and records the tape needed to backpropagate
from a scalar loss.  The op set is exactly what the forecasting
architectures require; every op validates shapes up front and checks its
output for NaN/Inf.  Dropout draws its mask from a counter-based generator
so runs are reproducible for a given (seed, counter) pair.
"""

import threading

import numpy as np

from ..errors import NonFiniteValueError, NotScalarLossError, ShapeMismatchError
from . import kernels

_state = threading.local()  # per-thread so serve-mode inference can't race
finite_checks = True


class no_grad:
    """Context manager disabling tape construction (inference path)."""

    def __enter__(self):
        self._prev = grad_enabled()
        _state.grad = False
        return self

    def __exit__(self, *exc):
        _state.grad = self._prev
        return False


def grad_enabled():
    return getattr(_state, "grad", True)


def _check_finite(op, arr):
    if finite_checks and not np.all(np.isfinite(arr)):
        raise NonFiniteValueError(f"non-finite values produced by {op}")


def _owns(a):
    return a.base is None and a.flags.owndata


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad=False, dtype=None):
        self.data = np.asarray(data, dtype=dtype)
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._parents = ()
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype})"

    def _accum(self, g):
        if not self.requires_grad:
            return
        if self.grad is None:
            self.grad = g if _owns(g) else g.copy()
        else:
            self.grad += g

    def backward(self):
        if self.data.size != 1:
            raise NotScalarLossError(
                f"backward requires a scalar loss, got shape {self.data.shape}"
            )
        topo = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None:
                node._backward()
                # Free the closure so cached activations can be collected.
                node._backward = None
                node._parents = ()

    # Operator sugar; every op is also a module-level function.
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return take(self, key)

    def reshape(self, *shape):
        return reshape(self, *shape)

    def sum(self, axis=None, keepdims=False):
        return reduce_sum(self, axis, keepdims)

    def mean(self, axis=None, keepdims=False):
        return reduce_mean(self, axis, keepdims)


def _as_tensor(x, like):
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=like.dtype))


def _make(op, data, parents, backward):
    _check_finite(op, data)
    out = Tensor(data)
    if grad_enabled() and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward(out)
    return out


def _unbroadcast(g, shape):
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def add(a, b):
    b = _as_tensor(b, a)
    try:
        data = a.data + b.data
    except ValueError as exc:
        raise ShapeMismatchError(f"add: {a.shape} + {b.shape}") from exc

    def bw(out):
        def run():
            a._accum(_unbroadcast(out.grad, a.data.shape))
            b._accum(_unbroadcast(out.grad, b.data.shape))

        return run

    return _make("add", data, (a, b), bw)


def sub(a, b):
    b = _as_tensor(b, a)
    try:
        data = a.data - b.data
    except ValueError as exc:
        raise ShapeMismatchError(f"sub: {a.shape} - {b.shape}") from exc

    def bw(out):
        def run():
            a._accum(_unbroadcast(out.grad, a.data.shape))
            b._accum(_unbroadcast(-out.grad, b.data.shape))

        return run

    return _make("sub", data, (a, b), bw)


def mul(a, b):
    b = _as_tensor(b, a)
    try:
        data = a.data * b.data
    except ValueError as exc:
        raise ShapeMismatchError(f"mul: {a.shape} * {b.shape}") from exc

    def bw(out):
        def run():
            a._accum(_unbroadcast(out.grad * b.data, a.data.shape))
            b._accum(_unbroadcast(out.grad * a.data, b.data.shape))

        return run

    return _make("mul", data, (a, b), bw)


def matmul(a, b):
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeMismatchError(f"matmul: {a.shape} @ {b.shape}")
    data = a.data @ b.data

    def bw(out):
        def run():
            a._accum(out.grad @ b.data.T)
            b._accum(a.data.T @ out.grad)

        return run

    return _make("matmul", data, (a, b), bw)


def concat(tensors, axis):
    data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]

    def bw(out):
        def run():
            offset = 0
            for t, n in zip(tensors, sizes):
                idx = [slice(None)] * out.grad.ndim
                idx[axis] = slice(offset, offset + n)
                t._accum(out.grad[tuple(idx)])
                offset += n

        return run

    return _make("concat", data, tuple(tensors), bw)


def take(a, key):
    data = a.data[key]

    def bw(out):
        def run():
            g = np.zeros_like(a.data)
            g[key] = out.grad
            a._accum(g)

        return run

    return _make("slice", data, (a,), bw)


def reshape(a, *shape):
    if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
        shape = tuple(shape[0])
    data = a.data.reshape(shape)

    def bw(out):
        def run():
            a._accum(out.grad.reshape(a.data.shape))

        return run

    return _make("reshape", data, (a,), bw)


def reduce_sum(a, axis=None, keepdims=False):
    data = a.data.sum(axis=axis, keepdims=keepdims)

    def bw(out):
        def run():
            g = out.grad
            if not keepdims and axis is not None:
                g = np.expand_dims(g, axis)
            a._accum(np.broadcast_to(g, a.data.shape))

        return run

    return _make("sum", data, (a,), bw)


def reduce_mean(a, axis=None, keepdims=False):
    data = a.data.mean(axis=axis, keepdims=keepdims)
    count = a.data.size if axis is None else np.prod(
        [a.data.shape[i] for i in np.atleast_1d(axis)]
    )

    def bw(out):
        def run():
            g = out.grad
            if not keepdims and axis is not None:
                g = np.expand_dims(g, axis)
            a._accum(np.broadcast_to(g, a.data.shape) / count)

        return run

    return _make("mean", data, (a,), bw)


def relu(a):
    data = np.maximum(a.data, 0)

    def bw(out):
        def run():
            a._accum(out.grad * (a.data > 0))

        return run

    return _make("relu", data, (a,), bw)


def sigmoid(a):
    data = 1.0 / (1.0 + np.exp(-a.data))

    def bw(out):
        def run():
            a._accum(out.grad * data * (1.0 - data))

        return run

    return _make("sigmoid", data, (a,), bw)


def tanh(a):
    data = np.tanh(a.data)

    def bw(out):
        def run():
            a._accum(out.grad * (1.0 - data * data))

        return run

    return _make("tanh", data, (a,), bw)


def layer_norm(a, gain, bias, eps=1e-5):
    """Normalize over the last axis, then scale and shift."""
    mu = a.data.mean(axis=-1, keepdims=True)
    var = a.data.var(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (a.data - mu) * inv_std
    data = xhat * gain.data + bias.data
    n = a.data.shape[-1]

    def bw(out):
        def run():
            g = out.grad
            dxhat = g * gain.data
            dx = (
                dxhat
                - dxhat.mean(axis=-1, keepdims=True)
                - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
            ) * inv_std
            a._accum(dx)
            flat = (g * xhat).reshape(-1, n)
            gain._accum(flat.sum(axis=0))
            bias._accum(g.reshape(-1, n).sum(axis=0))

        return run

    return _make("layer_norm", data, (a, gain, bias), bw)


def dropout(a, p, seed, counter, training):
    """Inverted dropout with a Philox counter-based mask."""
    if not training or p <= 0.0:
        return a
    rng = np.random.Generator(np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, counter]))
    mask = (rng.random(a.data.shape) >= p).astype(a.data.dtype) / (1.0 - p)
    data = a.data * mask

    def bw(out):
        def run():
            a._accum(out.grad * mask)

        return run

    return _make("dropout", data, (a,), bw)


def causal_conv1d(a, w, b, dilation):
    """1-D causal convolution.

    a: (B, L, Cin), w: (K, Cin, Cout), b: (Cout,).  The input is left-padded
    with (K-1)*dilation zeros so output t never reads beyond input t.
    """
    B, L, cin = a.data.shape
    K, wcin, cout = w.data.shape
    if wcin != cin:
        raise ShapeMismatchError(f"conv: input {cin} channels, kernel {wcin}")
    pad = (K - 1) * dilation
    xpad = np.zeros((B, L + pad, cin), dtype=a.data.dtype)
    xpad[:, pad:, :] = a.data
    cols = np.empty((B, L, K, cin), dtype=a.data.dtype)
    for k in range(K):
        cols[:, :, k, :] = xpad[:, k * dilation : k * dilation + L, :]
    cols_flat = cols.reshape(B * L, K * cin)
    data = (cols_flat @ w.data.reshape(K * cin, cout)).reshape(B, L, cout)
    data += b.data

    def bw(out):
        def run():
            g = out.grad.reshape(B * L, cout)
            w._accum((cols_flat.T @ g).reshape(K, cin, cout))
            b._accum(out.grad.sum(axis=(0, 1)))
            dcols = (g @ w.data.reshape(K * cin, cout).T).reshape(B, L, K, cin)
            dxpad = np.zeros_like(xpad)
            for k in range(K):
                dxpad[:, k * dilation : k * dilation + L, :] += dcols[:, :, k, :]
            a._accum(dxpad[:, pad:, :])

        return run

    return _make("causal_conv1d", data, (a, w, b), bw)


_interp_cache = {}


def _interp_matrix(n, t_len, dtype):
    """Sparse-ish (n, t_len) matrix mapping coefficients to an upsampled grid."""
    key = (n, t_len, np.dtype(dtype).str)
    mat = _interp_cache.get(key)
    if mat is None:
        mat = np.zeros((n, t_len), dtype=dtype)
        for t in range(t_len):
            if t_len == 1 or n == 1:
                pos = 0.0
            else:
                pos = t * (n - 1) / (t_len - 1)
            lo = int(np.floor(pos))
            frac = pos - lo
            if lo >= n - 1:
                mat[n - 1, t] = 1.0
            else:
                mat[lo, t] = 1.0 - frac
                mat[lo + 1, t] = frac
        _interp_cache[key] = mat
    return mat


def interp_linear(a, out_len):
    """Linearly upsample coefficient vectors (B, n) to (B, out_len)."""
    B, n = a.data.shape
    mat = _interp_matrix(n, out_len, a.data.dtype)
    data = a.data @ mat

    def bw(out):
        def run():
            a._accum(out.grad @ mat.T)

        return run

    return _make("interp_linear", data, (a,), bw)


def maxpool1d(a, kernel):
    """Non-overlapping 1-D max pooling over (B, L); stride = kernel."""
    B, L = a.data.shape
    nb = -(-L // kernel)
    pad = nb * kernel - L
    if pad:
        xp = np.full((B, nb * kernel), -np.inf, dtype=a.data.dtype)
        xp[:, :L] = a.data
    else:
        xp = a.data
    blocks = xp.reshape(B, nb, kernel)
    idx = blocks.argmax(axis=2)
    data = np.take_along_axis(blocks, idx[:, :, None], axis=2)[:, :, 0]

    def bw(out):
        def run():
            g = np.zeros((B, nb, kernel), dtype=a.data.dtype)
            np.put_along_axis(g, idx[:, :, None], out.grad[:, :, None], axis=2)
            a._accum(g.reshape(B, nb * kernel)[:, :L])

        return run

    return _make("maxpool1d", data, (a,), bw)


def lstm_seq(x, wx, wh, b):
    """LSTM over a full sequence via the active kernel backend.

    x: (B, L, D), wx: (D, 4H), wh: (H, 4H), b: (4H,) -> h_seq (B, L, H).
    """
    if x.data.ndim != 3 or wx.data.shape[0] != x.data.shape[2]:
        raise ShapeMismatchError(f"lstm_seq: x {x.shape}, wx {wx.shape}")
    backend = kernels.active
    need_cache = grad_enabled() and any(
        t.requires_grad for t in (x, wx, wh, b)
    )
    data, cache = backend.lstm_forward(x.data, wx.data, wh.data, b.data, need_cache)

    def bw(out):
        def run():
            dx, dwx, dwh, db = backend.lstm_backward(out.grad, cache)
            x._accum(dx)
            wx._accum(dwx)
            wh._accum(dwh)
            b._accum(db)

        return run

    return _make("lstm_seq", data, (x, wx, wh, b), bw)
