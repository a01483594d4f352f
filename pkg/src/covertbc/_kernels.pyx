# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: hot inner loops of the region optimizer.

Contract mirrors covertbc._kernels_py; see there for semantics.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport log

BACKEND = "compiled"

cnp.import_array()


cdef double _kl(const double[::1] p, const double[::1] q) noexcept nogil:
    cdef Py_ssize_t i, n = p.shape[0]
    cdef double s = 0.0
    for i in range(n):
        if p[i] > 0.0:
            s += p[i] * log(p[i] / q[i])
    return s


cdef double _chi2(const double[::1] p, const double[::1] q) noexcept nogil:
    cdef Py_ssize_t i, n = p.shape[0]
    cdef double s = 0.0, d
    for i in range(n):
        d = p[i] - q[i]
        if d != 0.0:
            s += d * d / q[i]
    return s


cdef double _cross_chi2(const double[::1] pa, const double[::1] pb,
                        const double[::1] q) noexcept nogil:
    cdef Py_ssize_t i, n = q.shape[0]
    cdef double s = 0.0, da, db
    for i in range(n):
        da = pa[i] - q[i]
        db = pb[i] - q[i]
        if da != 0.0 and db != 0.0:
            s += da * db / q[i]
    return s


cdef void _matvec(const double[::1] px, const double[:, ::1] mat,
                  double[::1] out) noexcept nogil:
    cdef Py_ssize_t x, y, nx = mat.shape[0], ny = mat.shape[1]
    for y in range(ny):
        out[y] = 0.0
    for x in range(nx):
        if px[x] != 0.0:
            for y in range(ny):
                out[y] += px[x] * mat[x, y]


cdef double _mi(const double[::1] px, const double[:, ::1] mat,
                double[::1] scratch) noexcept nogil:
    cdef Py_ssize_t x, nx = mat.shape[0]
    cdef double s = 0.0
    _matvec(px, mat, scratch)
    for x in range(nx):
        if px[x] > 0.0:
            s += px[x] * _kl(mat[x], scratch)
    if s < 0.0:
        s = 0.0
    return s


def kl(const double[::1] p, const double[::1] q):
    return _kl(p, q)


def chi2(const double[::1] p, const double[::1] q):
    return _chi2(p, q)


def cross_chi2(const double[::1] pa, const double[::1] pb, const double[::1] q):
    return _cross_chi2(pa, pb, q)


def output_dist(const double[::1] px, const double[:, ::1] mat):
    out = np.empty(mat.shape[1])
    _matvec(px, mat, out)
    return out


def mutual_information(const double[::1] px, const double[:, ::1] mat):
    scratch = np.empty(mat.shape[1])
    return _mi(px, mat, scratch)


def conditional_mutual_information(const double[::1] pu, const double[:, ::1] rows,
                                   const double[:, ::1] mat):
    cdef double[::1] scratch = np.empty(mat.shape[1])
    cdef double s = 0.0
    cdef Py_ssize_t u
    for u in range(rows.shape[0]):
        if pu[u] > 0.0:
            s += pu[u] * _mi(rows[u], mat, scratch)
    if s < 0.0:
        s = 0.0
    return s


def region_coeffs(const double[::1] ptilde, const double[::1] w,
                  const double[:, ::1] rows, const double[:, ::1] p1,
                  const double[:, ::1] p2, const double[:, ::1] q,
                  Py_ssize_t x0, const double[::1] d1, const double[::1] d2):
    cdef Py_ssize_t u, x, nb = rows.shape[0], nx = rows.shape[1]
    cdef double t_a = 0.0, i1b = 0.0, s2u = 0.0
    cdef double[::1] px_b = np.empty(nx)
    cdef double[::1] pz_a = np.empty(q.shape[1])
    cdef double[::1] pz_b = np.empty(q.shape[1])
    cdef double[::1] mix1 = np.empty(p1.shape[1])
    cdef double[::1] mix2 = np.empty(p2.shape[1])
    cdef double h11, h22, hx

    for x in range(nx):
        t_a += ptilde[x] * d1[x]
    _matvec(w, rows, px_b)
    _matvec(px_b, q, pz_b)
    _matvec(ptilde, q, pz_a)
    h11 = _chi2(pz_b, q[x0])
    h22 = _chi2(pz_a, q[x0])
    hx = _cross_chi2(pz_a, pz_b, q[x0])
    for x in range(nx):
        i1b += px_b[x] * d1[x]
    for u in range(nb):
        if w[u] > 0.0:
            _matvec(rows[u], p1, mix1)
            i1b -= w[u] * _kl(mix1, p1[x0])
            _matvec(rows[u], p2, mix2)
            s2u += w[u] * _kl(mix2, p2[x0])
    if i1b < 0.0:
        i1b = 0.0
    if s2u < 0.0:
        s2u = 0.0
    return t_a, i1b, s2u, h11, h22, hx
