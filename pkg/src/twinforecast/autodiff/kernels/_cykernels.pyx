# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled LSTM sequence kernels.

Same contract as ``numpy_backend``: gate layout [input | forget | output |
cell] along the 4H axis, h0 = c0 = 0.  Matrix products go through BLAS
(via scipy's exported routines); the per-step gate math runs as fused C
loops, which is where the NumPy version pays per-op dispatch and temporary
allocation on every timestep.
"""

import numpy as np

from libc.math cimport expf, tanhf, exp, tanh
from scipy.linalg.cython_blas cimport sgemm, dgemm

NAME = "cython"

ctypedef fused real:
    float
    double


cdef inline void _gemm(char ta, char tb, int m, int n, int k,
                       real alpha, real* a, int lda, real* b, int ldb,
                       real beta, real* c, int ldc) noexcept nogil:
    if real is float:
        sgemm(&ta, &tb, &m, &n, &k, <float*>&alpha, <float*>a, &lda,
              <float*>b, &ldb, <float*>&beta, <float*>c, &ldc)
    else:
        dgemm(&ta, &tb, &m, &n, &k, <double*>&alpha, <double*>a, &lda,
              <double*>b, &ldb, <double*>&beta, <double*>c, &ldc)


# Row-major products expressed through Fortran GEMM by computing C^T.
cdef inline void rm_nn(int m, int n, int k, real* a, real* b, real beta,
                       real* c) noexcept nogil:
    # C (m,n) = A (m,k) @ B (k,n) + beta*C
    _gemm(c'N', c'N', n, m, k, <real>1.0, b, n, a, k, beta, c, n)


cdef inline void rm_nt(int m, int n, int k, real* a, real* b, real beta,
                       real* c) noexcept nogil:
    # C (m,n) = A (m,k) @ B^T, with B stored (n,k)
    _gemm(c'T', c'N', n, m, k, <real>1.0, b, k, a, k, beta, c, n)


cdef inline void rm_tn(int m, int n, int k, real* a, real* b, real beta,
                       real* c) noexcept nogil:
    # C (m,n) = A^T @ B + beta*C, with A stored (k,m), B stored (k,n)
    _gemm(c'N', c'T', n, m, k, <real>1.0, b, n, a, m, beta, c, n)


cdef inline real _sigmoid(real v) noexcept nogil:
    if real is float:
        return <float>1.0 / (<float>1.0 + expf(-v))
    else:
        return 1.0 / (1.0 + exp(-v))


cdef inline real _tanh(real v) noexcept nogil:
    if real is float:
        return tanhf(v)
    else:
        return tanh(v)


cdef void _forward_loop(real[:, :, ::1] z, real[:, :, ::1] c_seq,
                        real[:, :, ::1] tanh_c, real[:, :, ::1] h_seq,
                        real[:, ::1] wh, real[::1] b, real[:, ::1] hw) noexcept nogil:
    cdef Py_ssize_t L = z.shape[0]
    cdef Py_ssize_t B = z.shape[1]
    cdef Py_ssize_t H4 = z.shape[2]
    cdef Py_ssize_t H = H4 // 4
    cdef Py_ssize_t t, r, j
    cdef real* zp
    cdef real* hwp
    cdef real cv, prev
    for t in range(L):
        if t > 0:
            rm_nn(<int>B, <int>H4, <int>H, &h_seq[t - 1, 0, 0], &wh[0, 0],
                  <real>0.0, &hw[0, 0])
        for r in range(B):
            zp = &z[t, r, 0]
            hwp = &hw[r, 0]
            if t > 0:
                for j in range(H4):
                    zp[j] += hwp[j] + b[j]
            else:
                for j in range(H4):
                    zp[j] += b[j]
            for j in range(3 * H):
                zp[j] = _sigmoid(zp[j])
            for j in range(3 * H, H4):
                zp[j] = _tanh(zp[j])
            for j in range(H):
                prev = c_seq[t - 1, r, j] if t > 0 else <real>0.0
                cv = zp[H + j] * prev + zp[j] * zp[3 * H + j]
                c_seq[t, r, j] = cv
                cv = _tanh(cv)
                tanh_c[t, r, j] = cv
                h_seq[t, r, j] = zp[2 * H + j] * cv


cdef void _backward_loop(real[:, :, ::1] gates, real[:, :, ::1] c_seq,
                         real[:, :, ::1] tanh_c, real[:, :, ::1] h_seq,
                         real[:, :, ::1] dh_tm, real[:, :, ::1] dz_seq,
                         real[:, ::1] wh, real[:, ::1] dwh,
                         real[:, ::1] dc, real[:, ::1] dh_next) noexcept nogil:
    cdef Py_ssize_t L = gates.shape[0]
    cdef Py_ssize_t B = gates.shape[1]
    cdef Py_ssize_t H4 = gates.shape[2]
    cdef Py_ssize_t H = H4 // 4
    cdef Py_ssize_t t, r, j
    cdef real* zp
    cdef real* dzp
    cdef real dh, dcv, tc, i, f, o, g, c_prev
    for t in range(L - 1, -1, -1):
        for r in range(B):
            zp = &gates[t, r, 0]
            dzp = &dz_seq[t, r, 0]
            for j in range(H):
                i = zp[j]
                f = zp[H + j]
                o = zp[2 * H + j]
                g = zp[3 * H + j]
                tc = tanh_c[t, r, j]
                dh = dh_tm[t, r, j] + (dh_next[r, j] if t < L - 1 else <real>0.0)
                dcv = dc[r, j] + dh * o * (<real>1.0 - tc * tc)
                c_prev = c_seq[t - 1, r, j] if t > 0 else <real>0.0
                dzp[j] = dcv * g * i * (<real>1.0 - i)
                dzp[H + j] = dcv * c_prev * f * (<real>1.0 - f)
                dzp[2 * H + j] = dh * tc * o * (<real>1.0 - o)
                dzp[3 * H + j] = dcv * i * (<real>1.0 - g * g)
                dc[r, j] = dcv * f
        rm_nt(<int>B, <int>H, <int>H4, &dz_seq[t, 0, 0], &wh[0, 0],
              <real>0.0, &dh_next[0, 0])
        if t > 0:
            rm_tn(<int>H, <int>H4, <int>B, &h_seq[t - 1, 0, 0],
                  &dz_seq[t, 0, 0], <real>1.0, &dwh[0, 0])


def _lstm_forward_typed(real[:, :, ::1] x_tm, wx_arr, wh_arr, b_arr, bint need_cache):
    cdef Py_ssize_t L = x_tm.shape[0]
    cdef Py_ssize_t B = x_tm.shape[1]
    cdef Py_ssize_t D = x_tm.shape[2]
    dtype = wx_arr.dtype
    cdef Py_ssize_t H = wh_arr.shape[0]

    z_arr = np.empty((L, B, 4 * H), dtype=dtype)
    c_arr = np.empty((L, B, H), dtype=dtype)
    tc_arr = np.empty((L, B, H), dtype=dtype)
    h_arr = np.empty((L, B, H), dtype=dtype)
    hw_arr = np.empty((B, 4 * H), dtype=dtype)

    cdef real[:, :, ::1] z = z_arr
    cdef real[:, :, ::1] c_seq = c_arr
    cdef real[:, :, ::1] tanh_c = tc_arr
    cdef real[:, :, ::1] h_seq = h_arr
    cdef real[:, ::1] wx = wx_arr
    cdef real[:, ::1] wh = wh_arr
    cdef real[::1] b = b_arr
    cdef real[:, ::1] hw = hw_arr

    with nogil:
        rm_nn(<int>(L * B), <int>(4 * H), <int>D, &x_tm[0, 0, 0], &wx[0, 0],
              <real>0.0, &z[0, 0, 0])
        _forward_loop(z, c_seq, tanh_c, h_seq, wh, b, hw)

    out = np.ascontiguousarray(h_arr.transpose(1, 0, 2))
    if not need_cache:
        return out, None
    return out, (np.asarray(x_tm), wx_arr, wh_arr, z_arr, c_arr, tc_arr, h_arr)


def _lstm_backward_typed(real[:, :, ::1] dh_tm, x_tm_arr, wx_arr, wh_arr,
                         gates_arr, c_arr, tc_arr, h_arr):
    cdef Py_ssize_t L = dh_tm.shape[0]
    cdef Py_ssize_t B = dh_tm.shape[1]
    cdef Py_ssize_t H = dh_tm.shape[2]
    cdef Py_ssize_t D = x_tm_arr.shape[2]
    dtype = wx_arr.dtype

    dz_arr = np.empty((L, B, 4 * H), dtype=dtype)
    dwh_arr = np.zeros_like(wh_arr)
    dc_arr = np.zeros((B, H), dtype=dtype)
    dhn_arr = np.empty((B, H), dtype=dtype)
    dx_arr = np.empty((L, B, D), dtype=dtype)
    dwx_arr = np.empty((D, 4 * H), dtype=dtype)

    cdef real[:, :, ::1] gates = gates_arr
    cdef real[:, :, ::1] c_seq = c_arr
    cdef real[:, :, ::1] tanh_c = tc_arr
    cdef real[:, :, ::1] h_seq = h_arr
    cdef real[:, :, ::1] dz_seq = dz_arr
    cdef real[:, ::1] wx = wx_arr
    cdef real[:, ::1] wh = wh_arr
    cdef real[:, ::1] dwh = dwh_arr
    cdef real[:, ::1] dc = dc_arr
    cdef real[:, ::1] dh_next = dhn_arr
    cdef real[:, :, ::1] x_tm = x_tm_arr
    cdef real[:, :, ::1] dx_tm = dx_arr
    cdef real[:, ::1] dwx = dwx_arr

    with nogil:
        _backward_loop(gates, c_seq, tanh_c, h_seq, dh_tm, dz_seq, wh, dwh,
                       dc, dh_next)
        # dwx = x^T @ dz over all (t, b) rows; dx = dz @ wx^T
        rm_tn(<int>D, <int>(4 * H), <int>(L * B), &x_tm[0, 0, 0],
              &dz_seq[0, 0, 0], <real>0.0, &dwx[0, 0])
        rm_nt(<int>(L * B), <int>D, <int>(4 * H), &dz_seq[0, 0, 0],
              &wx[0, 0], <real>0.0, &dx_tm[0, 0, 0])

    dx = np.ascontiguousarray(dx_arr.transpose(1, 0, 2))
    db = dz_arr.sum(axis=(0, 1))
    return dx, dwx_arr, dwh_arr, db


def lstm_forward(x, wx, wh, b, need_cache):
    """Drop-in replacement for numpy_backend.lstm_forward."""
    x_tm = np.ascontiguousarray(x.transpose(1, 0, 2))
    return _lstm_forward_typed(x_tm, wx, wh, b, need_cache)


def lstm_backward(dh_out, cache):
    """Drop-in replacement for numpy_backend.lstm_backward."""
    x_tm, wx, wh, gates, c_seq, tanh_c, h_seq = cache
    dh_tm = np.ascontiguousarray(dh_out.transpose(1, 0, 2))
    return _lstm_backward_typed(dh_tm, x_tm, wx, wh, gates, c_seq, tanh_c,
                                h_seq)
