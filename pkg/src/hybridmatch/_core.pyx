# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for kernel sums and varifold sums.

Mirrors ``_reference``: same signatures, same math, tight C loops instead of
broadcasted temporaries.  Summation order is fixed (row-major), so results
are deterministic.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, sqrt

cnp.import_array()


cdef inline double _poly(const double[::1] coeffs, double u) nogil:
    cdef Py_ssize_t k = coeffs.shape[0] - 1
    cdef double acc = coeffs[k]
    while k > 0:
        k -= 1
        acc = acc * u + coeffs[k]
    return acc


def gram_apply(const double[:, ::1] points_rows, const double[:, ::1] points_cols,
               const double[:, ::1] momenta, const double[::1] coeffs, double inv_scale):
    cdef Py_ssize_t n = points_rows.shape[0], m = points_cols.shape[0]
    cdef Py_ssize_t d = points_rows.shape[1]
    out_arr = np.zeros((n, d), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, k
    cdef double r2, dk, u, w
    with nogil:
        for i in range(n):
            for j in range(m):
                r2 = 0.0
                for k in range(d):
                    dk = points_rows[i, k] - points_cols[j, k]
                    r2 += dk * dk
                u = sqrt(r2) * inv_scale
                w = _poly(coeffs, u) * exp(-u)
                for k in range(d):
                    out[i, k] += w * momenta[j, k]
    return out_arr


def gram_self_vjp(const double[:, ::1] points, const double[:, ::1] momenta,
                  const double[:, ::1] cotangents, const double[::1] coeffs,
                  deriv_coeffs, double inv_scale):
    cdef Py_ssize_t n = points.shape[0], d = points.shape[1]
    out_arr = np.zeros((n, d), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef bint smooth = deriv_coeffs is not None
    cdef double[::1] dcoeffs
    if smooth:
        dcoeffs = deriv_coeffs
    else:
        dcoeffs = np.zeros(1)
    cdef Py_ssize_t i, j, k
    cdef double r2, r, u, coef, s, dk
    cdef double inv2 = inv_scale * inv_scale
    with nogil:
        for i in range(n):
            for j in range(n):
                r2 = 0.0
                for k in range(d):
                    dk = points[i, k] - points[j, k]
                    r2 += dk * dk
                if r2 == 0.0:
                    continue
                r = sqrt(r2)
                u = r * inv_scale
                if smooth:
                    coef = _poly(dcoeffs, u) * exp(-u) * inv2
                else:
                    coef = -exp(-u) * inv_scale / r
                s = 0.0
                for k in range(d):
                    s += cotangents[i, k] * momenta[j, k] + cotangents[j, k] * momenta[i, k]
                coef *= s
                for k in range(d):
                    out[i, k] += coef * (points[i, k] - points[j, k])
    return out_arr


def varifold_inner(const double[:, ::1] ca, const double[:, ::1] na, const double[::1] wa,
                   const double[:, ::1] cb, const double[:, ::1] nb, const double[::1] wb,
                   double inv_two_tau2, double normal_weight):
    cdef Py_ssize_t n = ca.shape[0], m = cb.shape[0], d = ca.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double total = 0.0, d2, al, dk
    with nogil:
        for i in range(n):
            for j in range(m):
                d2 = 0.0
                al = 0.0
                for k in range(d):
                    dk = ca[i, k] - cb[j, k]
                    d2 += dk * dk
                    al += na[i, k] * nb[j, k]
                total += exp(-d2 * inv_two_tau2) * (1.0 + normal_weight * al * al) * wa[i] * wb[j]
    return total


def varifold_grad_first(const double[:, ::1] ca, const double[:, ::1] na, const double[::1] wa,
                        const double[:, ::1] cb, const double[:, ::1] nb, const double[::1] wb,
                        double inv_two_tau2, double normal_weight):
    cdef Py_ssize_t n = ca.shape[0], m = cb.shape[0], d = ca.shape[1]
    gc_arr = np.zeros((n, d), dtype=np.float64)
    gn_arr = np.zeros((n, d), dtype=np.float64)
    gw_arr = np.zeros(n, dtype=np.float64)
    cdef double[:, ::1] gc = gc_arr
    cdef double[:, ::1] gn = gn_arr
    cdef double[::1] gw = gw_arr
    cdef Py_ssize_t i, j, k
    cdef double d2, al, chi, geom, ww, cc, cn, dk
    with nogil:
        for i in range(n):
            for j in range(m):
                d2 = 0.0
                al = 0.0
                for k in range(d):
                    dk = ca[i, k] - cb[j, k]
                    d2 += dk * dk
                    al += na[i, k] * nb[j, k]
                chi = exp(-d2 * inv_two_tau2)
                geom = 1.0 + normal_weight * al * al
                ww = wa[i] * wb[j]
                cc = -2.0 * inv_two_tau2 * chi * geom * ww
                cn = 2.0 * normal_weight * chi * al * ww
                for k in range(d):
                    gc[i, k] += cc * (ca[i, k] - cb[j, k])
                    gn[i, k] += cn * nb[j, k]
                gw[i] += chi * geom * wb[j]
    return gc_arr, gn_arr, gw_arr
