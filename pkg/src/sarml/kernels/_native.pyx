# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: level-set quadrature and band-limited cosine sums.

Mirrors sarml.kernels.fallback; the Python wrappers there document the
contracts.  Cell visit order is row-major with ascending level index so the
accumulation order matches the fallback.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport ceil, cos, floor, sqrt

cnp.import_array()


cdef inline double _clamp01(double f) nogil:
    if f < 0.0:
        return 0.0
    if f > 1.0:
        return 1.0
    return f


cdef inline void _edge_point(int edge, double fb, double ft, double fl, double fr,
                             double du, double dv, double* x, double* y) nogil:
    if edge == 0:      # bottom
        x[0] = fb * du
        y[0] = 0.0
    elif edge == 1:    # top
        x[0] = ft * du
        y[0] = dv
    elif edge == 2:    # left
        x[0] = 0.0
        y[0] = fl * dv
    else:              # right
        x[0] = du
        y[0] = fr * dv


def level_set_sums(object T_in, object VA_in, object GT_in,
                   double du, double dv, double t0, double dt, int n_t,
                   double grad_eps):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] T = np.ascontiguousarray(T_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] VA = np.ascontiguousarray(VA_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] GT = np.ascontiguousarray(GT_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vals = np.zeros(n_t, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] skipped = np.zeros(n_t, dtype=np.int64)

    cdef double[:, ::1] t = T
    cdef double[:, ::1] va = VA
    cdef double[:, ::1] gt = GT
    cdef double[::1] v_out = vals
    cdef cnp.int64_t[::1] s_out = skipped

    cdef Py_ssize_t n_u = T.shape[0], n_v = T.shape[1]
    cdef Py_ssize_t i, j
    cdef int k, klo, khi, case, nseg, m
    cdef double t00, t10, t01, t11, tmin, tmax, lev
    cdef double fb, ft, fl, fr
    cdef bint b0, b1, b2, b3, centre, iso0011
    cdef int e[4]
    cdef double x1, y1, x2, y2, mx, my, wx, wy
    cdef double w00, w10, w01, w11, vmid, gmid, seg_len

    with nogil:
        for i in range(n_u - 1):
            for j in range(n_v - 1):
                t00 = t[i, j]
                t10 = t[i + 1, j]
                t01 = t[i, j + 1]
                t11 = t[i + 1, j + 1]
                tmin = t00
                if t10 < tmin: tmin = t10
                if t01 < tmin: tmin = t01
                if t11 < tmin: tmin = t11
                tmax = t00
                if t10 > tmax: tmax = t10
                if t01 > tmax: tmax = t01
                if t11 > tmax: tmax = t11

                klo = <int>ceil((tmin - t0) / dt)
                khi = <int>floor((tmax - t0) / dt)
                if klo < 0: klo = 0
                if khi > n_t - 1: khi = n_t - 1
                if klo > khi:
                    continue
                if t0 + khi * dt < tmin or t0 + klo * dt > tmax:
                    continue

                for k in range(klo, khi + 1):
                    lev = t0 + k * dt
                    b0 = t00 > lev
                    b1 = t10 > lev
                    b2 = t01 > lev
                    b3 = t11 > lev
                    case = (1 if b0 else 0) | (2 if b1 else 0) | (4 if b2 else 0) | (8 if b3 else 0)
                    if case == 0 or case == 15:
                        continue

                    fb = _clamp01((lev - t00) / (t10 - t00)) if b0 != b1 else 0.0
                    ft = _clamp01((lev - t01) / (t11 - t01)) if b2 != b3 else 0.0
                    fl = _clamp01((lev - t00) / (t01 - t00)) if b0 != b2 else 0.0
                    fr = _clamp01((lev - t10) / (t11 - t10)) if b1 != b3 else 0.0

                    nseg = 1
                    if case == 1 or case == 14:
                        e[0] = 0; e[1] = 2
                    elif case == 2 or case == 13:
                        e[0] = 0; e[1] = 3
                    elif case == 3 or case == 12:
                        e[0] = 2; e[1] = 3
                    elif case == 4 or case == 11:
                        e[0] = 2; e[1] = 1
                    elif case == 5 or case == 10:
                        e[0] = 0; e[1] = 1
                    elif case == 7 or case == 8:
                        e[0] = 3; e[1] = 1
                    else:
                        # saddle (case 6 or 9): centre value picks the pairing
                        centre = 0.25 * (t00 + t10 + t01 + t11) > lev
                        if case == 9:
                            iso0011 = not centre
                        else:
                            iso0011 = centre
                        nseg = 2
                        if iso0011:
                            e[0] = 0; e[1] = 2; e[2] = 3; e[3] = 1
                        else:
                            e[0] = 0; e[1] = 3; e[2] = 2; e[3] = 1

                    for m in range(nseg):
                        _edge_point(e[2 * m], fb, ft, fl, fr, du, dv, &x1, &y1)
                        _edge_point(e[2 * m + 1], fb, ft, fl, fr, du, dv, &x2, &y2)
                        seg_len = sqrt((x2 - x1) * (x2 - x1) + (y2 - y1) * (y2 - y1))
                        mx = 0.5 * (x1 + x2)
                        my = 0.5 * (y1 + y2)
                        wx = mx / du
                        wy = my / dv
                        w00 = (1.0 - wx) * (1.0 - wy)
                        w10 = wx * (1.0 - wy)
                        w01 = (1.0 - wx) * wy
                        w11 = wx * wy
                        gmid = (w00 * gt[i, j] + w10 * gt[i + 1, j]
                                + w01 * gt[i, j + 1] + w11 * gt[i + 1, j + 1])
                        if gmid <= grad_eps:
                            s_out[k] += 1
                            continue
                        vmid = (w00 * va[i, j] + w10 * va[i + 1, j]
                                + w01 * va[i, j + 1] + w11 * va[i + 1, j + 1])
                        v_out[k] += vmid * seg_len / gmid

    return vals, skipped


def bandlimited_cosine_sum(object x_in, object w_in, double omega0, double domega,
                           int n_omega):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.ascontiguousarray(
        np.asarray(x_in, dtype=np.float64).ravel())
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.ascontiguousarray(
        np.asarray(w_in, dtype=np.float64).ravel())
    if n_omega < 2:
        raise ValueError("n_omega must be at least 2")

    cdef double[::1] xv = x
    cdef double[::1] wv = w
    cdef Py_ssize_t n = x.shape[0], i
    cdef int j
    cdef double total = 0.0, acc, two_cd, cprev, ccur, cnext, xi

    with nogil:
        for i in range(n):
            xi = xv[i]
            two_cd = 2.0 * cos(domega * xi)
            cprev = cos(omega0 * xi)
            ccur = cos((omega0 + domega) * xi)
            acc = 0.5 * cprev
            for j in range(1, n_omega - 1):
                acc += ccur
                cnext = two_cd * ccur - cprev
                cprev = ccur
                ccur = cnext
            acc += 0.5 * ccur
            total += wv[i] * acc

    return total
