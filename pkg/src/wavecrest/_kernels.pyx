# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled alternating-point quadrature sums (see _kernels_py for the reference)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, sinh, cosh

cnp.import_array()


cdef inline double complex cot_half(double complex w) noexcept nogil:
    cdef double x = 0.5 * w.real
    cdef double y = 0.5 * w.imag
    cdef double sx = sin(x)
    cdef double shy = sinh(y)
    cdef double den = 2.0 * (sx * sx + shy * shy)
    return (2.0 * sx * cos(x) - 2j * shy * cosh(y)) / den


cdef inline double complex four_sin2_half(double complex w) noexcept nogil:
    cdef double x = 0.5 * w.real
    cdef double y = 0.5 * w.imag
    cdef double complex s = sin(x) * cosh(y) + 1j * cos(x) * sinh(y)
    return 4.0 * s * s


def _c(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


def cauchy(z, g):
    cdef const double complex[::1] zv = _c(z)
    cdef const double complex[::1] gv = _c(g)
    cdef Py_ssize_t n = zv.shape[0]
    out = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef Py_ssize_t i, m, j
    cdef double complex acc
    with nogil:
        for i in range(n):
            acc = 0
            for m in range(1, n, 2):
                j = (i + m) % n
                acc = acc + cot_half(zv[i] - zv[j]) * gv[j]
            ov[i] = acc
    return out


def cauchy_diff(z, f, g):
    cdef const double complex[::1] zv = _c(z)
    cdef const double complex[::1] fv = _c(f)
    cdef const double complex[::1] gv = _c(g)
    cdef Py_ssize_t n = zv.shape[0]
    out = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef Py_ssize_t i, m, j
    cdef double complex acc
    with nogil:
        for i in range(n):
            acc = 0
            for m in range(1, n, 2):
                j = (i + m) % n
                acc = acc + (fv[i] - fv[j]) * cot_half(zv[i] - zv[j]) * gv[j]
            ov[i] = acc
    return out


def imcot_diff(z, f, g):
    cdef const double complex[::1] zv = _c(z)
    cdef const double complex[::1] fv = _c(f)
    cdef const double complex[::1] gv = _c(g)
    cdef Py_ssize_t n = zv.shape[0]
    out = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef Py_ssize_t i, m, j
    cdef double complex acc
    with nogil:
        for i in range(n):
            acc = 0
            for m in range(1, n, 2):
                j = (i + m) % n
                acc = acc + (fv[i] - fv[j]) * cot_half(zv[i] - zv[j]).imag * gv[j]
            ov[i] = acc
    return out


def square_diff(z, f, g):
    cdef const double complex[::1] zv = _c(z)
    cdef const double complex[::1] fv = _c(f)
    cdef const double complex[::1] gv = _c(g)
    cdef Py_ssize_t n = zv.shape[0]
    out = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef Py_ssize_t i, m, j
    cdef double complex acc, df
    with nogil:
        for i in range(n):
            acc = 0
            for m in range(1, n, 2):
                j = (i + m) % n
                df = fv[i] - fv[j]
                acc = acc + df * df / four_sin2_half(zv[i] - zv[j]) * gv[j]
            ov[i] = acc
    return out


def abs2_diff(z, f, g):
    cdef const double complex[::1] zv = _c(z)
    cdef const double complex[::1] fv = _c(f)
    cdef const double complex[::1] gv = _c(g)
    cdef Py_ssize_t n = zv.shape[0]
    out = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef Py_ssize_t i, m, j
    cdef double complex acc, df
    cdef double a2
    with nogil:
        for i in range(n):
            acc = 0
            for m in range(1, n, 2):
                j = (i + m) % n
                df = fv[i] - fv[j]
                a2 = df.real * df.real + df.imag * df.imag
                acc = acc + a2 / four_sin2_half(zv[i] - zv[j]) * gv[j]
            ov[i] = acc
    return out


def cot_matrix(z):
    cdef const double complex[::1] zv = _c(z)
    cdef Py_ssize_t n = zv.shape[0]
    out = np.zeros((n, n), dtype=np.complex128)
    cdef double complex[:, ::1] ov = out
    cdef Py_ssize_t i, m, j
    with nogil:
        for i in range(n):
            for m in range(1, n, 2):
                j = (i + m) % n
                ov[i, j] = cot_half(zv[i] - zv[j])
    return out


def dlp_matrix(z, unit, speed):
    cdef const double complex[::1] zv = _c(z)
    cdef const double complex[::1] uv = _c(unit)
    cdef const double[::1] sv = np.ascontiguousarray(speed, dtype=np.float64)
    cdef Py_ssize_t n = zv.shape[0]
    out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t i, m, j
    with nogil:
        for i in range(n):
            for m in range(1, n, 2):
                j = (i + m) % n
                ov[i, j] = (uv[i] * cot_half(zv[i] - zv[j])).imag * sv[j]
    return out
