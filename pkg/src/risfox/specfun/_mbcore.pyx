# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled joint-gamma kernels for multivariate Mellin-Barnes quadrature."""
import numpy as np
from cython.parallel cimport prange
from libc.math cimport exp, cos, sin
from scipy.special.cython_special cimport loggamma


cdef inline double complex _cexp(double complex z) noexcept nogil:
    cdef double e = exp(z.real)
    return e * cos(z.imag) + 1j * e * sin(z.imag)


def joint_points(double complex[:, ::1] pts, double[::1] c0, double[:, ::1] coef,
                 double[::1] power):
    """exp(sum_j power_j * lnGamma(c0_j + coef_j . s)) at each row s of ``pts``."""
    cdef Py_ssize_t P = pts.shape[0], N = pts.shape[1], J = c0.shape[0]
    out = np.empty(P, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef Py_ssize_t p, j, d
    cdef double complex z, acc
    for p in prange(P, nogil=True, schedule="static"):
        acc = 0
        for j in range(J):
            z = c0[j]
            for d in range(N):
                z = z + coef[j, d] * pts[p, d]
            acc = acc + power[j] * loggamma(z)
        o[p] = _cexp(acc)
    return out


def joint_grid(double complex[::1] flat, long[::1] sizes, double[::1] c0,
               double[:, ::1] coef, double[::1] power):
    """Joint factor on the tensor grid whose axes are concatenated in ``flat``.

    Returns a flat array in C order; the caller reshapes it to ``sizes``.
    """
    cdef Py_ssize_t N = sizes.shape[0], J = c0.shape[0]
    cdef Py_ssize_t P = 1, d
    offs_np = np.zeros(N, dtype=np.int64)
    cdef long[::1] offs = offs_np
    for d in range(N):
        P *= sizes[d]
        if d > 0:
            offs[d] = offs[d - 1] + sizes[d - 1]
    out = np.empty(P, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef Py_ssize_t p, j, rem, idx
    cdef double complex z, acc
    for p in prange(P, nogil=True, schedule="static"):
        acc = 0
        for j in range(J):
            z = c0[j]
            rem = p
            for d in range(N - 1, -1, -1):
                idx = rem % sizes[d]
                rem = rem // sizes[d]
                z = z + coef[j, d] * flat[offs[d] + idx]
            acc = acc + power[j] * loggamma(z)
        o[p] = _cexp(acc)
    return out


def lattice_grid(double complex[::1] table, long[::1] toff, long[:, ::1] mult, long[::1] sizes):
    """exp(sum_j table[toff_j + sum_d mult[j, d] * i_d]) over the index grid ``sizes``.

    Used when every joint term is a function of an integer combination of
    the node indices, so its log-gamma values can be tabulated once.
    """
    cdef Py_ssize_t N = sizes.shape[0], J = toff.shape[0]
    cdef Py_ssize_t n0 = sizes[0], R = 1, d
    for d in range(1, N):
        R *= sizes[d]
    # index contribution of the trailing axes, shared by every leading index
    idx = np.indices(tuple(sizes[1:]), dtype=np.int64).reshape(N - 1, R)
    tail_np = np.ascontiguousarray(np.asarray(mult)[:, 1:] @ idx)
    cdef long[:, ::1] tail = tail_np
    out = np.empty(n0 * R, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef Py_ssize_t i0, r, j
    cdef double complex acc
    for i0 in prange(n0, nogil=True, schedule="static"):
        for r in range(R):
            acc = 0
            for j in range(J):
                acc = acc + table[toff[j] + mult[j, 0] * i0 + tail[j, r]]
            o[i0 * R + r] = _cexp(acc)
    return out
