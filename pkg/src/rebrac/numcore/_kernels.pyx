# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the MLP engine.

Semantics mirror `_kernels_np` exactly (same cache layout, same returned
structures); the win is fused per-row loops for bias/LayerNorm/ReLU/Adam and
direct BLAS calls without intermediate temporaries.  Matrix products go
through scipy's exported BLAS (sgemm/dgemm).
"""

import numpy as np

cimport cython
cimport numpy as cnp
from libc.math cimport sqrt, sqrtf, tanh, tanhf
from scipy.linalg.cython_blas cimport dgemm, sgemm

cnp.import_array()

OUT_ACT_NONE = 0
OUT_ACT_TANH = 1

ctypedef fused real:
    float
    double


cdef inline void _gemm(bint ta, bint tb, int m, int n, int k,
                       real* a, int lda, real* b, int ldb,
                       real beta, real* c, int ldc) noexcept nogil:
    """Row-major C(m,n) = op(A) @ op(B) + beta*C via the column-major BLAS.

    lda/ldb/ldc are row strides (column counts) of the stored arrays.
    """
    cdef char ta_c = b'T' if ta else b'N'
    cdef char tb_c = b'T' if tb else b'N'
    cdef real one = <real>1.0
    if real is float:
        sgemm(&tb_c, &ta_c, &n, &m, &k, &one, <float*>b, &ldb, <float*>a, &lda,
              <float*>&beta, <float*>c, &ldc)
    else:
        dgemm(&tb_c, &ta_c, &n, &m, &k, &one, <double*>b, &ldb, <double*>a, &lda,
              <double*>&beta, <double*>c, &ldc)


cdef inline real _tanh(real x) noexcept nogil:
    if real is float:
        return tanhf(x)
    else:
        return tanh(x)


cdef inline real _sqrt(real x) noexcept nogil:
    if real is float:
        return sqrtf(x)
    else:
        return sqrt(x)


def layer_norm(real[:, ::1] x, real[::1] gain, real[::1] offset, double eps):
    cdef Py_ssize_t batch = x.shape[0], d = x.shape[1]
    out_arr = np.empty((batch, d), dtype=np.asarray(x).dtype)
    cdef real[:, ::1] out = out_arr
    cdef Py_ssize_t r, j
    cdef double s, sq, mu, dev
    cdef real istd
    for r in range(batch):
        s = 0.0
        for j in range(d):
            s += x[r, j]
        mu = s / d
        sq = 0.0
        for j in range(d):
            dev = x[r, j] - mu
            sq += dev * dev
        istd = <real>(1.0 / sqrt(sq / d + eps))
        for j in range(d):
            out[r, j] = gain[j] * ((x[r, j] - <real>mu) * istd) + offset[j]
    return out_arr


cdef void _hidden_layer_fwd(real[:, ::1] z, real[::1] bias,
                            bint ln, real[::1] gain, real[::1] offset, double ln_eps,
                            real[:, ::1] h, real[:, ::1] xhat, real[::1] inv_std) noexcept nogil:
    """z holds the raw gemm output; writes post-activation into h (and the
    LayerNorm intermediates when ln is set)."""
    cdef Py_ssize_t batch = z.shape[0], d = z.shape[1]
    cdef Py_ssize_t r, j
    cdef double s, sq, mu, dev
    cdef real istd, t, xh
    for r in range(batch):
        if ln:
            s = 0.0
            for j in range(d):
                t = z[r, j] + bias[j]
                z[r, j] = t
                s += t
            mu = s / d
            sq = 0.0
            for j in range(d):
                dev = z[r, j] - mu
                sq += dev * dev
            istd = <real>(1.0 / sqrt(sq / d + ln_eps))
            inv_std[r] = istd
            for j in range(d):
                xh = (z[r, j] - <real>mu) * istd
                xhat[r, j] = xh
                t = gain[j] * xh + offset[j]
                h[r, j] = t if t > 0.0 else <real>0.0
        else:
            for j in range(d):
                t = z[r, j] + bias[j]
                h[r, j] = t if t > 0.0 else <real>0.0


def _mlp_forward_impl(real[:, ::1] x, list weights, list biases, list gains, list offsets,
                      bint layer_norm_on, int out_act, double max_action, double ln_eps):
    cdef Py_ssize_t n_lin = len(weights)
    cdef Py_ssize_t n_hidden = n_lin - 1
    cdef Py_ssize_t batch = x.shape[0]
    dtype = np.asarray(x).dtype

    hs = [np.asarray(x)]
    xhats = []
    inv_stds = []

    cdef real[:, ::1] h = x
    cdef real[:, ::1] W
    cdef real[::1] b
    cdef real[:, ::1] z
    cdef real[:, ::1] hv
    cdef real[:, ::1] xhat_v
    cdef real[::1] istd_v
    cdef real[::1] gain_v
    cdef real[::1] offset_v
    cdef real zero = <real>0.0
    cdef Py_ssize_t i, r, j
    cdef int m, n, k

    for i in range(n_hidden):
        W = weights[i]
        b = biases[i]
        m = <int>batch
        k = <int>W.shape[0]
        n = <int>W.shape[1]
        z_arr = np.empty((batch, n), dtype=dtype)
        z = z_arr
        _gemm(False, False, m, n, k, &h[0, 0], k, &W[0, 0], n, zero, &z[0, 0], n)
        h_arr = np.empty((batch, n), dtype=dtype)
        hv = h_arr
        if layer_norm_on:
            xhat_arr = np.empty((batch, n), dtype=dtype)
            istd_arr = np.empty(batch, dtype=dtype)
            xhat_v = xhat_arr
            istd_v = istd_arr
            gain_v = gains[i]
            offset_v = offsets[i]
            _hidden_layer_fwd(z, b, True, gain_v, offset_v, ln_eps, hv, xhat_v, istd_v)
            xhats.append(xhat_arr)
            inv_stds.append(istd_arr)
        else:
            _hidden_layer_fwd(z, b, False, b, b, ln_eps, hv, z, b)
        hs.append(h_arr)
        h = hv

    W = weights[n_lin - 1]
    b = biases[n_lin - 1]
    m = <int>batch
    k = <int>W.shape[0]
    n = <int>W.shape[1]
    y_arr = np.empty((batch, n), dtype=dtype)
    cdef real[:, ::1] y = y_arr
    _gemm(False, False, m, n, k, &h[0, 0], k, &W[0, 0], n, zero, &y[0, 0], n)
    tanh_arr = None
    cdef real[:, ::1] tv
    cdef real t
    if out_act == 1:
        tanh_arr = np.empty((batch, n), dtype=dtype)
        tv = tanh_arr
        for r in range(batch):
            for j in range(n):
                t = _tanh(y[r, j] + b[j])
                tv[r, j] = t
                y[r, j] = <real>max_action * t
    else:
        for r in range(batch):
            for j in range(n):
                y[r, j] = y[r, j] + b[j]
    return y_arr, (hs, xhats, inv_stds, tanh_arr)


def mlp_forward(weights, biases, gains, offsets, x, layer_norm_on, out_act,
                max_action, ln_eps):
    return _mlp_forward_impl(x, list(weights), list(biases), list(gains), list(offsets),
                             bool(layer_norm_on), int(out_act), float(max_action),
                             float(ln_eps))


cdef void _colsum(real[:, ::1] g, real[::1] out) noexcept nogil:
    cdef Py_ssize_t rows = g.shape[0], cols = g.shape[1]
    cdef Py_ssize_t r, j
    for j in range(cols):
        out[j] = 0.0
    for r in range(rows):
        for j in range(cols):
            out[j] += g[r, j]


cdef void _relu_ln_bwd(real[:, ::1] g, real[:, ::1] h_post,
                       bint ln, real[:, ::1] xhat, real[::1] inv_std,
                       real[::1] gain, real[::1] gain_g, real[::1] offset_g) noexcept nogil:
    """In place on g: ReLU mask from the post-activation h, then the LayerNorm
    backward transform; accumulates gain/offset gradients."""
    cdef Py_ssize_t batch = g.shape[0], d = g.shape[1]
    cdef Py_ssize_t r, j
    cdef double s1, s2
    cdef real gv, gx, m1, m2, istd
    if ln:
        for j in range(d):
            gain_g[j] = 0.0
            offset_g[j] = 0.0
    for r in range(batch):
        if ln:
            s1 = 0.0
            s2 = 0.0
            for j in range(d):
                gv = g[r, j] if h_post[r, j] > 0.0 else <real>0.0
                gain_g[j] += gv * xhat[r, j]
                offset_g[j] += gv
                gx = gv * gain[j]
                g[r, j] = gx
                s1 += gx
                s2 += <double>gx * xhat[r, j]
            m1 = <real>(s1 / d)
            m2 = <real>(s2 / d)
            istd = inv_std[r]
            for j in range(d):
                g[r, j] = istd * (g[r, j] - m1 - xhat[r, j] * m2)
        else:
            for j in range(d):
                if h_post[r, j] <= 0.0:
                    g[r, j] = 0.0


def _mlp_backward_impl(real[:, ::1] upstream, list weights, list gains, tuple cache,
                       bint layer_norm_on, int out_act, double max_action, double ln_eps):
    hs, xhats, inv_stds, tanh_arr = cache
    cdef Py_ssize_t n_lin = len(weights)
    cdef Py_ssize_t batch = upstream.shape[0]
    dtype = np.asarray(upstream).dtype

    cdef real[:, ::1] g
    cdef real[:, ::1] tv
    cdef Py_ssize_t r, j, i
    cdef real ma = <real>max_action
    cdef real t

    g_arr = np.empty((batch, upstream.shape[1]), dtype=dtype)
    g = g_arr
    if out_act == 1:
        tv = tanh_arr
        for r in range(batch):
            for j in range(upstream.shape[1]):
                t = tv[r, j]
                g[r, j] = upstream[r, j] * (ma * (<real>1.0 - t * t))
    else:
        g[:, :] = upstream

    w_grads = [None] * n_lin
    b_grads = [None] * n_lin
    cdef Py_ssize_t n_hidden = n_lin - 1
    gain_grads = [None] * n_hidden if layer_norm_on else []
    offset_grads = [None] * n_hidden if layer_norm_on else []

    cdef real[:, ::1] W
    cdef real[:, ::1] hprev
    cdef real[:, ::1] dW
    cdef real[::1] db
    cdef real[:, ::1] gprev
    cdef real[:, ::1] xh
    cdef real[::1] istd
    cdef real[::1] gain_v
    cdef real[::1] gg
    cdef real[::1] og
    cdef real zero = <real>0.0
    cdef int m, n, k

    for i in range(n_lin - 1, 0, -1):
        W = weights[i]
        hprev = hs[i]
        m = <int>W.shape[0]
        n = <int>W.shape[1]
        k = <int>batch
        dW_arr = np.empty((m, n), dtype=dtype)
        dW = dW_arr
        _gemm(True, False, m, n, k, &hprev[0, 0], m, &g[0, 0], n, zero, &dW[0, 0], n)
        db_arr = np.empty(n, dtype=dtype)
        db = db_arr
        _colsum(g, db)
        w_grads[i] = dW_arr
        b_grads[i] = db_arr
        gprev_arr = np.empty((batch, m), dtype=dtype)
        gprev = gprev_arr
        _gemm(False, True, <int>batch, m, n, &g[0, 0], n, &W[0, 0], n, zero, &gprev[0, 0], m)
        if layer_norm_on:
            xh = xhats[i - 1]
            istd = inv_stds[i - 1]
            gain_v = gains[i - 1]
            gg_arr = np.empty(m, dtype=dtype)
            og_arr = np.empty(m, dtype=dtype)
            gg = gg_arr
            og = og_arr
            _relu_ln_bwd(gprev, hprev, True, xh, istd, gain_v, gg, og)
            gain_grads[i - 1] = gg_arr
            offset_grads[i - 1] = og_arr
        else:
            _relu_ln_bwd(gprev, hprev, False, gprev, db, db, db, db)
        g_arr = gprev_arr
        g = gprev

    W = weights[0]
    hprev = hs[0]
    m = <int>W.shape[0]
    n = <int>W.shape[1]
    k = <int>batch
    dW_arr = np.empty((m, n), dtype=dtype)
    dW = dW_arr
    _gemm(True, False, m, n, k, &hprev[0, 0], m, &g[0, 0], n, zero, &dW[0, 0], n)
    db_arr = np.empty(n, dtype=dtype)
    db = db_arr
    _colsum(g, db)
    w_grads[0] = dW_arr
    b_grads[0] = db_arr
    xg_arr = np.empty((batch, m), dtype=dtype)
    cdef real[:, ::1] xg = xg_arr
    _gemm(False, True, <int>batch, m, n, &g[0, 0], n, &W[0, 0], n, zero, &xg[0, 0], m)
    return w_grads, b_grads, gain_grads, offset_grads, xg_arr


def mlp_backward(weights, gains, cache, upstream, layer_norm_on, out_act,
                 max_action, ln_eps):
    upstream = np.ascontiguousarray(upstream, dtype=weights[0].dtype)
    return _mlp_backward_impl(upstream, list(weights), list(gains), tuple(cache),
                              bool(layer_norm_on), int(out_act), float(max_action),
                              float(ln_eps))


def _adam_one(real[::1] p, real[::1] g, real[::1] m, real[::1] v,
              double lr, double beta1, double beta2, double eps,
              double bc1, double bc2,
              real[::1] new_p, real[::1] new_m, real[::1] new_v):
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t i
    cdef real b1 = <real>beta1, b2 = <real>beta2
    cdef real ob1 = <real>(1.0 - beta1), ob2 = <real>(1.0 - beta2)
    cdef real lr_r = <real>lr, eps_r = <real>eps
    cdef real ibc1 = <real>(1.0 / bc1), ibc2 = <real>(1.0 / bc2)
    cdef real mi, vi
    for i in range(n):
        mi = b1 * m[i] + ob1 * g[i]
        vi = b2 * v[i] + ob2 * (g[i] * g[i])
        new_m[i] = mi
        new_v[i] = vi
        new_p[i] = p[i] - lr_r * (mi * ibc1) / (_sqrt(vi * ibc2) + eps_r)


def adam_step(params, grads, m, v, t, lr, beta1, beta2, eps):
    cdef double bc1 = 1.0 - beta1 ** (t + 1)
    cdef double bc2 = 1.0 - beta2 ** (t + 1)
    new_p, new_m, new_v = [], [], []
    for p_a, g_a, m_a, v_a in zip(params, grads, m, v):
        np_a = np.empty_like(p_a)
        nm_a = np.empty_like(p_a)
        nv_a = np.empty_like(p_a)
        _adam_one(p_a.ravel(), np.ascontiguousarray(g_a, dtype=p_a.dtype).ravel(),
                  m_a.ravel(), v_a.ravel(),
                  lr, beta1, beta2, eps, bc1, bc2,
                  np_a.ravel(), nm_a.ravel(), nv_a.ravel())
        new_p.append(np_a)
        new_m.append(nm_a)
        new_v.append(nv_a)
    return new_p, new_m, new_v
