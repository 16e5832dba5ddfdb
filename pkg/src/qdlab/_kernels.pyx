# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels: orbit chunks, discrepancy scans, cocycle products,
Chebyshev propagation.  Mirrors qdlab._fallback; see that module for the
reference semantics and the error discussion."""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor, log, sqrt, INFINITY

cnp.import_array()

DEF RENORM_EVERY = 16
DEF RENORM_THRESHOLD = 1e50


def shift_chunk(y0, alpha, Py_ssize_t n):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.ascontiguousarray(y0, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a = np.ascontiguousarray(alpha, dtype=np.float64)
    cdef Py_ssize_t d = y.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, d), dtype=np.float64)
    cdef Py_ssize_t k, i
    cdef double v
    for i in range(d):
        for k in range(n):
            v = y[i] + k * a[i]
            out[k, i] = v - floor(v)
    return out


def skew_chunk(y0, double alpha, Py_ssize_t n):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.array(y0, dtype=np.float64)
    cdef Py_ssize_t d = y.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, d), dtype=np.float64)
    cdef Py_ssize_t k, i
    cdef double v
    for k in range(n):
        for i in range(d):
            out[k, i] = y[i]
        # step: top coordinate advances by alpha, each lower one by the
        # previous value of the coordinate above it
        for i in range(d - 1, 0, -1):
            v = y[i] + y[i - 1]
            y[i] = v - floor(v)
        v = y[0] + alpha
        y[0] = v - floor(v)
    return out


def exact_discrepancy_1d(xs_sorted):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.ascontiguousarray(xs_sorted, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0]
    cdef double fn = <double> n
    cdef double prem = -INFINITY
    cdef double dplus = 0.0, dminus = 0.0, term, xi, xj
    cdef Py_ssize_t j
    for j in range(n):
        xj = x[j]
        term = xj - j / fn
        if term > prem:
            prem = term
        term = (j + 1) / fn - xj + prem
        if term > dplus:
            dplus = term
    # underfilled side with sentinels at 0 and 1 (b_0 = 0 for the sentinel)
    cdef double premb = 0.0
    for j in range(1, n + 2):
        xj = x[j - 1] if j <= n else 1.0
        term = xj - (j - 1) / fn + premb
        if term > dminus:
            dminus = term
        term = j / fn - xj
        if term > premb:
            premb = term
    if dplus > dminus:
        return dplus if dplus > 0.0 else 0.0
    return dminus if dminus > 0.0 else 0.0


def grid_discrepancy_2d(counts, double n_points):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] cnts = np.ascontiguousarray(counts, dtype=np.float64)
    cdef Py_ssize_t g = cnts.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] p = np.zeros((g + 1, g), dtype=np.float64)
    cdef Py_ssize_t i, j, i1, i2
    for i in range(g):
        for j in range(g):
            p[i + 1, j] = p[i, j] + cnts[i, j]
    cdef double best = 0.0
    cdef double fg = <double> g
    cdef double w, csum, gj, gprev, runp, runm, term
    for i1 in range(g):
        for i2 in range(i1 + 1, g + 1):
            w = (i2 - i1) / fg
            csum = 0.0
            gprev = 0.0            # g value at j = 0
            runp = -gprev          # max of -g over j1 <= current
            runm = gprev
            for j in range(1, g + 1):
                csum += p[i2, j - 1] - p[i1, j - 1]
                gj = csum / n_points - w * j / fg
                term = gj + runp
                if term > best:
                    best = term
                term = -gj + runm
                if term > best:
                    best = term
                if -gj > runp:
                    runp = -gj
                if gj > runm:
                    runm = gj
    return best


cdef inline double _speclog(double q, double det2) nogil:
    cdef double disc = q * q - 4.0 * det2
    if disc < 0.0:
        disc = 0.0
    return 0.5 * log(0.5 * (q + sqrt(disc)))


def cocycle_batch(v, double e, double eta=0.0, bint inverse=False):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] vv = np.atleast_2d(
        np.ascontiguousarray(v, dtype=np.float64))
    cdef Py_ssize_t pcount = vv.shape[0], n = vv.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lognorm = np.empty(pcount, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] detlog = np.empty(pcount, dtype=np.float64)
    cdef Py_ssize_t pi, k
    cdef double a, b, c, d, na, nb, t, logs, q, s, det2
    cdef double complex za, zb, zc, zd, zna, znb, zt, z
    if eta == 0.0:
        for pi in range(pcount):
            a = 1.0; b = 0.0; c = 0.0; d = 1.0; logs = 0.0
            for k in range(n):
                t = e - vv[pi, k]
                if inverse:
                    na = c; nb = d
                    c = -a + t * c; d = -b + t * d
                    a = na; b = nb
                else:
                    na = t * a - c; nb = t * b - d
                    c = a; d = b
                    a = na; b = nb
                if (k + 1) % RENORM_EVERY == 0:
                    q = a * a + b * b + c * c + d * d
                    if q > RENORM_THRESHOLD:
                        s = sqrt(q)
                        a /= s; b /= s; c /= s; d /= s
                        logs += log(s)
            q = a * a + b * b + c * c + d * d
            det2 = (a * d - b * c) * (a * d - b * c)
            lognorm[pi] = _speclog(q, det2) + logs
            detlog[pi] = (0.5 * log(det2) if det2 > 0.0 else -INFINITY) + 2.0 * logs
    else:
        z = e + 1j * eta
        for pi in range(pcount):
            za = 1.0; zb = 0.0; zc = 0.0; zd = 1.0; logs = 0.0
            for k in range(n):
                zt = z - vv[pi, k]
                if inverse:
                    zna = zc; znb = zd
                    zc = -za + zt * zc; zd = -zb + zt * zd
                    za = zna; zb = znb
                else:
                    zna = zt * za - zc; znb = zt * zb - zd
                    zc = za; zd = zb
                    za = zna; zb = znb
                if (k + 1) % RENORM_EVERY == 0:
                    q = (za.real * za.real + za.imag * za.imag
                         + zb.real * zb.real + zb.imag * zb.imag
                         + zc.real * zc.real + zc.imag * zc.imag
                         + zd.real * zd.real + zd.imag * zd.imag)
                    if q > RENORM_THRESHOLD:
                        s = sqrt(q)
                        za /= s; zb /= s; zc /= s; zd /= s
                        logs += log(s)
            q = (za.real * za.real + za.imag * za.imag
                 + zb.real * zb.real + zb.imag * zb.imag
                 + zc.real * zc.real + zc.imag * zc.imag
                 + zd.real * zd.real + zd.imag * zd.imag)
            zna = za * zd - zb * zc
            det2 = zna.real * zna.real + zna.imag * zna.imag
            lognorm[pi] = _speclog(q, det2) + logs
            detlog[pi] = (0.5 * log(det2) if det2 > 0.0 else -INFINITY) + 2.0 * logs
    return lognorm, detlog


def cocycle_lognorms_all(v, double e, double eta=0.0, bint inverse=False):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef Py_ssize_t n = vv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t k
    cdef double a, b, c, d, na, nb, t, logs, q, s, det2
    cdef double complex za, zb, zc, zd, zna, znb, zt, z
    logs = 0.0
    if eta == 0.0:
        a = 1.0; b = 0.0; c = 0.0; d = 1.0
        for k in range(n):
            t = e - vv[k]
            if inverse:
                na = c; nb = d
                c = -a + t * c; d = -b + t * d
                a = na; b = nb
            else:
                na = t * a - c; nb = t * b - d
                c = a; d = b
                a = na; b = nb
            q = a * a + b * b + c * c + d * d
            det2 = (a * d - b * c) * (a * d - b * c)
            out[k] = _speclog(q, det2) + logs
            if q > RENORM_THRESHOLD:
                s = sqrt(q)
                a /= s; b /= s; c /= s; d /= s
                logs += log(s)
    else:
        z = e + 1j * eta
        za = 1.0; zb = 0.0; zc = 0.0; zd = 1.0
        for k in range(n):
            zt = z - vv[k]
            if inverse:
                zna = zc; znb = zd
                zc = -za + zt * zc; zd = -zb + zt * zd
                za = zna; zb = znb
            else:
                zna = zt * za - zc; znb = zt * zb - zd
                zc = za; zd = zb
                za = zna; zb = znb
            q = (za.real * za.real + za.imag * za.imag
                 + zb.real * zb.real + zb.imag * zb.imag
                 + zc.real * zc.real + zc.imag * zc.imag
                 + zd.real * zd.real + zd.imag * zd.imag)
            zna = za * zd - zb * zc
            det2 = zna.real * zna.real + zna.imag * zna.imag
            out[k] = _speclog(q, det2) + logs
            if q > RENORM_THRESHOLD:
                s = sqrt(q)
                za /= s; zb /= s; zc /= s; zd /= s
                logs += log(s)
    return out


def cheb_apply(diag_scaled, double off_scaled, coeffs, psi0):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] diag = np.ascontiguousarray(diag_scaled, dtype=np.float64)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] cf = np.ascontiguousarray(coeffs, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] t0 = np.array(psi0, dtype=np.complex128)
    cdef Py_ssize_t m = t0.shape[0], kmax = cf.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] acc = np.empty(m, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] t1 = np.empty(m, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] t2 = np.empty(m, dtype=np.complex128)
    cdef Py_ssize_t i, k
    cdef double complex ck
    ck = cf[0]
    for i in range(m):
        acc[i] = ck * t0[i]
    if kmax == 1:
        return acc
    for i in range(m):
        t1[i] = diag[i] * t0[i]
        if i + 1 < m:
            t1[i] = t1[i] + off_scaled * t0[i + 1]
        if i > 0:
            t1[i] = t1[i] + off_scaled * t0[i - 1]
    ck = cf[1]
    for i in range(m):
        acc[i] = acc[i] + ck * t1[i]
    for k in range(2, kmax):
        for i in range(m):
            t2[i] = 2.0 * diag[i] * t1[i] - t0[i]
            if i + 1 < m:
                t2[i] = t2[i] + 2.0 * off_scaled * t1[i + 1]
            if i > 0:
                t2[i] = t2[i] + 2.0 * off_scaled * t1[i - 1]
        ck = cf[k]
        for i in range(m):
            acc[i] = acc[i] + ck * t2[i]
            t0[i] = t1[i]
            t1[i] = t2[i]
    return acc
