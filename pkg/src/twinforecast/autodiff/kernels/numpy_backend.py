"""NumPy implementation of the recurrent kernels.

The LSTM recurrence is the one loop where per-step dispatch dominates, so
both backends expose it as a single fused sequence kernel.  Gate layout in
the 4H axis is [input | forget | output | cell] so that the three sigmoid
gates occupy one contiguous block.
"""

import numpy as np

NAME = "numpy"


def _sigmoid_inplace(a):
    np.negative(a, out=a)
    np.exp(a, out=a)
    np.add(a, 1.0, out=a)
    np.reciprocal(a, out=a)


def lstm_forward(x, wx, wh, b, need_cache):
    """Run an LSTM over a full sequence.

    x: (B, L, D), wx: (D, 4H), wh: (H, 4H), b: (4H,).
    Returns (h_seq (B, L, H), cache or None). h0 = c0 = 0.
    """
    B, L, D = x.shape
    H = wh.shape[0]
    dtype = x.dtype

    # One big input projection, then time-major buffers so each step is a
    # contiguous (B, 4H) block.
    zseq = (x.reshape(B * L, D) @ wx).reshape(B, L, 4 * H)
    zseq = np.ascontiguousarray(zseq.transpose(1, 0, 2))
    zseq += b

    c_seq = np.empty((L, B, H), dtype=dtype)
    tanh_c = np.empty((L, B, H), dtype=dtype)
    h_seq = np.empty((L, B, H), dtype=dtype)

    h = np.zeros((B, H), dtype=dtype)
    c = np.zeros((B, H), dtype=dtype)
    hw = np.empty((B, 4 * H), dtype=dtype)
    for t in range(L):
        z = zseq[t]
        np.matmul(h, wh, out=hw)
        z += hw
        _sigmoid_inplace(z[:, : 3 * H])
        np.tanh(z[:, 3 * H :], out=z[:, 3 * H :])
        i = z[:, :H]
        f = z[:, H : 2 * H]
        o = z[:, 2 * H : 3 * H]
        g = z[:, 3 * H :]
        c = f * c
        c += i * g
        c_seq[t] = c
        np.tanh(c, out=tanh_c[t])
        np.multiply(o, tanh_c[t], out=h_seq[t])
        h = h_seq[t]

    out = np.ascontiguousarray(h_seq.transpose(1, 0, 2))
    if not need_cache:
        return out, None
    return out, (x, wx, wh, zseq, c_seq, tanh_c, h_seq)


def lstm_backward(dh_out, cache):
    """Backprop through lstm_forward. dh_out: (B, L, H) gradient on h_seq."""
    x, wx, wh, gates, c_seq, tanh_c, h_seq = cache
    B, L, D = x.shape
    H = wh.shape[0]
    dtype = x.dtype

    dh_seq = np.ascontiguousarray(dh_out.transpose(1, 0, 2))
    dz_seq = np.empty((L, B, 4 * H), dtype=dtype)
    dwh = np.zeros_like(wh)

    dh_next = np.zeros((B, H), dtype=dtype)
    dc = np.zeros((B, H), dtype=dtype)
    for t in range(L - 1, -1, -1):
        z = gates[t]
        i = z[:, :H]
        f = z[:, H : 2 * H]
        o = z[:, 2 * H : 3 * H]
        g = z[:, 3 * H :]
        tc = tanh_c[t]

        dh = dh_seq[t] + dh_next
        dz = dz_seq[t]
        # dc accumulates the carry from t+1 plus the path through h_t.
        dc += dh * o * (1.0 - tc * tc)
        c_prev = c_seq[t - 1] if t > 0 else 0.0
        dz[:, :H] = dc * g * i * (1.0 - i)
        dz[:, H : 2 * H] = dc * c_prev * f * (1.0 - f)
        dz[:, 2 * H : 3 * H] = dh * tc * o * (1.0 - o)
        dz[:, 3 * H :] = dc * i * (1.0 - g * g)
        dc *= f

        dh_next = dz @ wh.T
        h_prev = h_seq[t - 1] if t > 0 else None
        if h_prev is not None:
            dwh += h_prev.T @ dz

    dz_flat = dz_seq.transpose(1, 0, 2).reshape(B * L, 4 * H)
    db = dz_seq.sum(axis=(0, 1))
    dwx = x.reshape(B * L, D).T @ dz_flat
    dx = (dz_flat @ wx.T).reshape(B, L, D)
    return dx, dwx, dwh, db
