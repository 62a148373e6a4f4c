# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled fused block kernels.

Same contract and summation order as ``_fallback``. Matrix products go
straight to BLAS through scipy's Cython bindings. Shift, bias, ReLU and
residual passes are fused into single loops.
"""
import numpy as np

from scipy.linalg.cython_blas cimport sgemm, dgemm

NAME = "cython"

ctypedef fused real:
    float
    double


cdef inline void _gemm(bint ta, bint tb, int M, int N, int K,
                       real* A, int lda, real* B, int ldb,
                       real beta, real* C, int ldc) noexcept nogil:
    # Row-major C[MxN] = op(A) op(B) + beta*C, via column-major C^T = op(B)^T op(A)^T.
    cdef char ca = b'T' if ta else b'N'
    cdef char cb = b'T' if tb else b'N'
    cdef real one = 1
    if M == 0 or N == 0:
        return
    if real is float:
        sgemm(&cb, &ca, &N, &M, &K, &one, B, &ldb, A, &lda, &beta, C, &ldc)
    else:
        dgemm(&cb, &ca, &N, &M, &K, &one, B, &ldb, A, &lda, &beta, C, &ldc)


cdef inline real _relu(real v) noexcept nogil:
    # same as np.maximum(v, 0): NaN passes through, -0.0 becomes +0.0
    return v if not v <= 0 else 0


cdef inline real _step(real v) noexcept nogil:
    return 1 if v > 0 else 0


def block_forward(real[:, ::1] x, real[:, ::1] wp, real[:, ::1] wc, wf_obj,
                  real[:, ::1] wq, real[::1] b_taps, real[::1] bq, int d):
    cdef Py_ssize_t T = x.shape[0]
    cdef int C = <int>x.shape[1]
    cdef int iT = <int>T
    cdef bint causal = wf_obj is None
    cdef real[:, ::1] wf
    dtype = np.float32 if real is float else np.float64

    pre_arr = np.empty((T, C), dtype=dtype)
    past_arr = np.empty((T, C), dtype=dtype)
    cdef real[:, ::1] pre = pre_arr
    cdef real[:, ::1] past = past_arr
    cdef real[:, ::1] fut
    cdef real zero = 0
    cdef Py_ssize_t t, j
    cdef real* row
    cdef real* pp
    cdef real* fp
    cdef bint has_past = d < T
    cdef bint has_fut = has_past and not causal

    if has_fut:
        wf = wf_obj
        fut_arr = np.empty((T, C), dtype=dtype)
        fut = fut_arr
    else:
        fut = past

    with nogil:
        _gemm(False, False, iT, C, C, &x[0, 0], C, &wc[0, 0], C, zero, &pre[0, 0], C)
        if has_past:
            _gemm(False, False, iT, C, C, &x[0, 0], C, &wp[0, 0], C, zero, &past[0, 0], C)
        if has_fut:
            _gemm(False, False, iT, C, C, &x[0, 0], C, &wf[0, 0], C, zero, &fut[0, 0], C)
        for t in range(T):
            row = &pre[t, 0]
            pp = &past[t - d, 0] if has_past and t >= d else NULL
            fp = &fut[t + d, 0] if has_fut and t + d < T else NULL
            if pp != NULL and fp != NULL:
                for j in range(C):
                    row[j] = _relu(((row[j] + pp[j]) + fp[j]) + b_taps[j])
            elif pp != NULL:
                for j in range(C):
                    row[j] = _relu((row[j] + pp[j]) + b_taps[j])
            elif fp != NULL:
                for j in range(C):
                    row[j] = _relu((row[j] + fp[j]) + b_taps[j])
            else:
                for j in range(C):
                    row[j] = _relu(row[j] + b_taps[j])

    # pre now holds h; reuse past as q
    q_arr = past_arr
    out_arr = np.empty((T, C), dtype=dtype)
    cdef real[:, ::1] q = past
    cdef real[:, ::1] out = out_arr
    with nogil:
        _gemm(False, False, iT, C, C, &pre[0, 0], C, &wq[0, 0], C, zero, &q[0, 0], C)
        for t in range(T):
            row = &q[t, 0]
            pp = &out[t, 0]
            fp = &x[t, 0]
            for j in range(C):
                row[j] = _relu(row[j] + bq[j])
                pp[j] = fp[j] + row[j]
    return out_arr, pre_arr, q_arr


def block_backward(real[:, ::1] x, real[:, ::1] h, real[:, ::1] q, real[:, ::1] gout,
                   real[:, ::1] wp, real[:, ::1] wc, wf_obj, real[:, ::1] wq,
                   real[:, ::1] gwp, real[:, ::1] gwc, gwf_obj, real[:, ::1] gwq, int d):
    cdef Py_ssize_t T = x.shape[0]
    cdef int C = <int>x.shape[1]
    cdef int iT = <int>T
    cdef bint causal = wf_obj is None
    cdef real[:, ::1] wf
    cdef real[:, ::1] gwf
    dtype = np.float32 if real is float else np.float64

    gq_arr = np.empty((T, C), dtype=dtype)
    gpre_arr = np.empty((T, C), dtype=dtype)
    gx_arr = np.empty((T, C), dtype=dtype)
    tmp_arr = np.empty((T, C), dtype=dtype)
    gbq_arr = np.zeros(C, dtype=dtype)
    gbt_arr = np.zeros(C, dtype=dtype)
    cdef real[:, ::1] gq = gq_arr
    cdef real[:, ::1] gpre = gpre_arr
    cdef real[:, ::1] gx = gx_arr
    cdef real[:, ::1] tmp = tmp_arr
    cdef real[::1] gbq = gbq_arr
    cdef real[::1] gbt = gbt_arr
    cdef real zero = 0
    cdef real one = 1
    cdef Py_ssize_t t, j
    cdef bint has_past = d < T
    cdef bint has_fut = has_past and not causal
    cdef int n_shift = iT - d

    if has_fut:
        wf = wf_obj
        gwf = gwf_obj
    else:
        wf = wp
        gwf = gwp

    with nogil:
        for t in range(T):
            for j in range(C):
                gq[t, j] = gout[t, j] * _step(q[t, j])
        _gemm(True, False, C, C, iT, &h[0, 0], C, &gq[0, 0], C, one, &gwq[0, 0], C)
        for t in range(T):
            for j in range(C):
                gbq[j] = gbq[j] + gq[t, j]
        _gemm(False, True, iT, C, C, &gq[0, 0], C, &wq[0, 0], C, zero, &gpre[0, 0], C)
        for t in range(T):
            for j in range(C):
                gpre[t, j] = gpre[t, j] * _step(h[t, j])
        _gemm(True, False, C, C, iT, &x[0, 0], C, &gpre[0, 0], C, one, &gwc[0, 0], C)
        for t in range(T):
            for j in range(C):
                gbt[j] = gbt[j] + gpre[t, j]
        _gemm(False, True, iT, C, C, &gpre[0, 0], C, &wc[0, 0], C, zero, &gx[0, 0], C)
        for t in range(T):
            for j in range(C):
                gx[t, j] = gout[t, j] + gx[t, j]
        if has_past:
            _gemm(True, False, C, C, n_shift, &x[0, 0], C, &gpre[d, 0], C, one, &gwp[0, 0], C)
            _gemm(False, True, iT, C, C, &gpre[0, 0], C, &wp[0, 0], C, zero, &tmp[0, 0], C)
            for t in range(n_shift):
                for j in range(C):
                    gx[t, j] = gx[t, j] + tmp[t + d, j]
        if has_fut:
            _gemm(True, False, C, C, n_shift, &x[d, 0], C, &gpre[0, 0], C, one, &gwf[0, 0], C)
            _gemm(False, True, iT, C, C, &gpre[0, 0], C, &wf[0, 0], C, zero, &tmp[0, 0], C)
            for t in range(d, T):
                for j in range(C):
                    gx[t, j] = gx[t, j] + tmp[t - d, j]
    return gx_arr, gbt_arr, gbq_arr
