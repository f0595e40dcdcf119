# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend; must match kernels._ref bit-for-bit in structure.

Hot paths: the extended normal-shift C(y,q) for preset-coded boundary specs
and its anisotropic mollification by tensor Gauss-Legendre quadrature.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, fmod, hypot, sin, sqrt

cnp.import_array()


cdef inline double _coef(const double* c, double x0, double x1) nogil:
    return c[0] + c[1] * x0 + c[2] * x1 + c[3] * sin(c[4] * x0 + c[5] * x1 + c[6])


cdef inline double _phi_prime(double s, double r0) nogil:
    cdef double half = 0.5 * r0
    cdef double t
    if s <= half:
        return 1.0
    t = (s - half) / half
    if t >= 1.0:
        return 0.0
    return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)


cdef inline double _blend(double t) nogil:
    if t <= 0.0:
        return 0.0
    if t >= 1.0:
        return 1.0
    return t * t * t * t * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t * t * t)


cdef double _root_side(long variant, long nc1, long nc2, long d,
                       const double* rows, long rowlen,
                       double px0, double px1,
                       double n0, double n1,
                       double q0, double q1) nogil:
    cdef double qn = q0 * n0 + q1 * n1
    cdef double g, gam0, gam1, th, ptan2, tau, t, inner, outer
    cdef const double* r
    cdef long i, j
    if variant == 0:
        return _coef(rows, px0, px1) - qn
    if variant == 1:
        g = _coef(rows, px0, px1)
        gam0 = _coef(rows + 7, px0, px1)
        gam1 = _coef(rows + 14, px0, px1) if d == 2 else 0.0
        return (g - (gam0 * q0 + gam1 * q1)) / (gam0 * n0 + gam1 * n1)
    if variant == 2:
        th = _coef(rows, px0, px1)
        ptan2 = q0 * q0 + q1 * q1 - qn * qn
        if ptan2 < 0.0:
            ptan2 = 0.0
        tau = th * sqrt((1.0 + ptan2) / (1.0 - th * th))
        return tau - qn
    outer = -INFINITY
    for i in range(nc1):
        inner = INFINITY
        for j in range(nc2):
            r = rows + (i * nc2 + j) * rowlen
            g = _coef(r, px0, px1)
            gam0 = _coef(r + 7, px0, px1)
            gam1 = _coef(r + 14, px0, px1) if d == 2 else 0.0
            t = (g - (gam0 * q0 + gam1 * q1)) / (gam0 * n0 + gam1 * n1)
            if t < inner:
                inner = t
        if inner > outer:
            outer = inner
    return outer


cdef double _shift_point(const cnp.int64_t* iv, const double* fv,
                         const double* rows, long rowlen,
                         double y0, double y1, double q0, double q1) nogil:
    cdef long d = iv[0], dcode = iv[1], variant = iv[2], nc1 = iv[3], nc2 = iv[4]
    cdef double r0 = fv[2]
    cdef double a, b, lo, hi, w, rootl, rootr, period, h, x1, rr, xh0, xh1
    if dcode == 0:
        a = fv[0]; b = fv[1]
        lo = a + 0.5 * r0; hi = b - 0.5 * r0
        w = _blend((hi - y0) / (hi - lo))
        rootl = _root_side(variant, nc1, nc2, d, rows, rowlen, a, 0.0, -1.0, 0.0, q0, q1)
        rootr = _root_side(variant, nc1, nc2, d, rows, rowlen, b, 0.0, 1.0, 0.0, q0, q1)
        return w * rootl + (1.0 - w) * rootr
    if dcode == 1:
        period = fv[0]; h = fv[1]
        x1 = fmod(y0, period)
        if x1 < 0.0:
            x1 += period
        lo = 0.5 * r0; hi = h - 0.5 * r0
        w = _blend((hi - y1) / (hi - lo))
        rootl = _root_side(variant, nc1, nc2, d, rows, rowlen, x1, 0.0, 0.0, -1.0, q0, q1)
        rootr = _root_side(variant, nc1, nc2, d, rows, rowlen, x1, h, 0.0, 1.0, q0, q1)
        return w * rootl + (1.0 - w) * rootr
    rr = hypot(y0, y1)
    if rr < 1e-300:
        xh0 = 1.0; xh1 = 0.0
    else:
        xh0 = y0 / rr; xh1 = y1 / rr
    return _root_side(variant, nc1, nc2, d, rows, rowlen,
                      fv[0] * xh0, fv[0] * xh1, xh0, xh1, q0, q1)


cdef inline long _rowlen(long variant, long d) nogil:
    if variant == 0 or variant == 2:
        return 7
    return 7 + 7 * d


def shift_batch(desc, Y, Q):
    ints_a, floats_a, rows_a = desc
    cdef cnp.ndarray[cnp.int64_t, ndim=1] iv = np.ascontiguousarray(ints_a, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] fv = np.ascontiguousarray(floats_a, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] rows = np.ascontiguousarray(rows_a, dtype=np.float64)
    cdef long d = iv[0]
    shape = np.broadcast_shapes(np.shape(Y)[:-1], np.shape(Q)[:-1])
    Yb = np.broadcast_to(np.asarray(Y, dtype=np.float64), shape + (d,))
    Qb = np.broadcast_to(np.asarray(Q, dtype=np.float64), shape + (d,))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Yf = np.ascontiguousarray(Yb.reshape(-1, d))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Qf = np.ascontiguousarray(Qb.reshape(-1, d))
    cdef Py_ssize_t m, M = Yf.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(M)
    cdef long rowlen = _rowlen(iv[2], d)
    cdef double y1, q1
    with nogil:
        for m in range(M):
            y1 = Yf[m, 1] if d == 2 else 0.0
            q1 = Qf[m, 1] if d == 2 else 0.0
            out[m] = _shift_point(&iv[0], &fv[0], &rows[0, 0], rowlen,
                                  Yf[m, 0], y1, Qf[m, 0], q1)
    return out.reshape(shape)


def ca_batch(desc, X, P, A, nodes, W):
    ints_a, floats_a, rows_a = desc
    cdef cnp.ndarray[cnp.int64_t, ndim=1] iv = np.ascontiguousarray(ints_a, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] fv = np.ascontiguousarray(floats_a, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] rows = np.ascontiguousarray(rows_a, dtype=np.float64)
    cdef long d = iv[0], dcode = iv[1], variant = iv[2], nc1 = iv[3], nc2 = iv[4]
    cdef long rowlen = _rowlen(variant, d)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Xf = np.ascontiguousarray(
        np.asarray(X, dtype=np.float64).reshape(-1, d))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Pf = np.ascontiguousarray(
        np.asarray(P, dtype=np.float64).reshape(-1, d))
    cdef Py_ssize_t M = Xf.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] Af = np.ascontiguousarray(
        np.broadcast_to(np.asarray(A, dtype=np.float64), (M,)))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] s = np.ascontiguousarray(
        np.asarray(nodes, dtype=np.float64))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(M)
    cdef Py_ssize_t m, i, j, q = s.shape[0], L
    cdef double r0 = fv[2]
    cdef double a_m, lam, gam, pn, n0, n1, sdist, sl, sr, rl, rr, w, yv, qv
    cdef double x0, x1, p0, p1, scale, acc, accj, y0c, y1c
    cdef double aa, bb, lo, hi, rad, rdist
    cdef cnp.ndarray[cnp.float64_t, ndim=2] S2
    cdef cnp.ndarray[cnp.float64_t, ndim=1] Wf, Wv

    if d == 1:
        Wv = np.ascontiguousarray(np.asarray(W, dtype=np.float64))
        aa = fv[0]; bb = fv[1]
        lo = aa + 0.5 * r0; hi = bb - 0.5 * r0
        with nogil:
            for m in range(M):
                x0 = Xf[m, 0]; p0 = Pf[m, 0]; a_m = Af[m]
                # extended normal from the blend profile
                if x0 - aa <= bb - x0:
                    sdist = x0 - aa
                    n0 = -_phi_prime(sdist, r0)
                else:
                    sdist = bb - x0
                    n0 = _phi_prime(sdist, r0)
                pn = p0 * n0
                lam = sqrt(a_m * a_m + pn * pn)
                gam = sqrt(1.0 + p0 * p0)
                scale = lam / gam
                sl = 0.0; sr = 0.0; rl = 0.0; rr = 0.0
                for i in range(q):
                    yv = x0 - scale * s[i]
                    w = _blend((hi - yv) / (hi - lo))
                    sl += Wv[i] * w
                    sr += Wv[i] * (1.0 - w)
                    qv = p0 - lam * s[i]
                    rl += Wv[i] * _root_side(variant, nc1, nc2, d, &rows[0, 0],
                                             rowlen, aa, 0.0, -1.0, 0.0, qv, 0.0)
                    rr += Wv[i] * _root_side(variant, nc1, nc2, d, &rows[0, 0],
                                             rowlen, bb, 0.0, 1.0, 0.0, qv, 0.0)
                out[m] = sl * rl + sr * rr
        return out

    # 2D: flatten live tensor nodes once
    W2 = np.asarray(W, dtype=np.float64).reshape(q, q)
    grid = np.stack(np.meshgrid(s, s, indexing="ij"), axis=-1).reshape(q * q, 2)
    flat = W2.reshape(q * q)
    live = flat > 0.0
    S2 = np.ascontiguousarray(grid[live])
    Wf = np.ascontiguousarray(flat[live])
    L = S2.shape[0]
    with nogil:
        for m in range(M):
            x0 = Xf[m, 0]; x1 = Xf[m, 1]
            p0 = Pf[m, 0]; p1 = Pf[m, 1]
            a_m = Af[m]
            if dcode == 1:
                hi = fv[1]
                if x1 <= hi - x1:
                    sdist = x1
                    n0 = 0.0; n1 = -_phi_prime(sdist, r0)
                else:
                    sdist = hi - x1
                    n0 = 0.0; n1 = _phi_prime(sdist, r0)
            else:
                rad = fv[0]
                rdist = hypot(x0, x1)
                sdist = rad - rdist
                if rdist < 1e-300:
                    n0 = 0.0; n1 = 0.0
                else:
                    n0 = _phi_prime(sdist, r0) * x0 / rdist
                    n1 = _phi_prime(sdist, r0) * x1 / rdist
            pn = p0 * n0 + p1 * n1
            lam = sqrt(a_m * a_m + pn * pn)
            gam = sqrt(1.0 + p0 * p0 + p1 * p1)
            scale = lam / gam
            acc = 0.0
            for i in range(L):
                y0c = x0 - scale * S2[i, 0]
                y1c = x1 - scale * S2[i, 1]
                accj = 0.0
                for j in range(L):
                    accj += Wf[j] * _shift_point(&iv[0], &fv[0], &rows[0, 0], rowlen,
                                                 y0c, y1c,
                                                 p0 - lam * S2[j, 0],
                                                 p1 - lam * S2[j, 1])
                acc += Wf[i] * accj
            out[m] = acc
    return out
