# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled state-vector kernels; same contract as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()

NAME = "cython"

ctypedef double complex cplx


def apply_1q(cplx[:, ::1] states, int n, int q, u):
    cdef cplx u00 = u[0, 0], u01 = u[0, 1], u10 = u[1, 0], u11 = u[1, 1]
    cdef Py_ssize_t k, hi, lo, i0, i1
    cdef Py_ssize_t stride = 1 << (n - q - 1)
    cdef Py_ssize_t dim = states.shape[1]
    cdef cplx a0, a1
    with nogil:
        for k in range(states.shape[0]):
            for hi in range(dim // (2 * stride)):
                for lo in range(stride):
                    i0 = 2 * stride * hi + lo
                    i1 = i0 + stride
                    a0 = states[k, i0]
                    a1 = states[k, i1]
                    states[k, i0] = u00 * a0 + u01 * a1
                    states[k, i1] = u10 * a0 + u11 * a1


def apply_ry(cplx[:, ::1] states, int n, int q, double theta):
    cdef double c = cos(0.5 * theta), s = sin(0.5 * theta)
    cdef Py_ssize_t k, hi, lo, i0, i1
    cdef Py_ssize_t stride = 1 << (n - q - 1)
    cdef Py_ssize_t dim = states.shape[1]
    cdef cplx a0, a1
    with nogil:
        for k in range(states.shape[0]):
            for hi in range(dim // (2 * stride)):
                for lo in range(stride):
                    i0 = 2 * stride * hi + lo
                    i1 = i0 + stride
                    a0 = states[k, i0]
                    a1 = states[k, i1]
                    states[k, i0] = c * a0 - s * a1
                    states[k, i1] = s * a0 + c * a1


def apply_y(cplx[:, ::1] states, int n, int q):
    cdef Py_ssize_t k, hi, lo, i0, i1
    cdef Py_ssize_t stride = 1 << (n - q - 1)
    cdef Py_ssize_t dim = states.shape[1]
    cdef cplx a0, a1
    cdef cplx im = 1j
    with nogil:
        for k in range(states.shape[0]):
            for hi in range(dim // (2 * stride)):
                for lo in range(stride):
                    i0 = 2 * stride * hi + lo
                    i1 = i0 + stride
                    a0 = states[k, i0]
                    a1 = states[k, i1]
                    states[k, i0] = -im * a1
                    states[k, i1] = im * a0


def apply_cz(cplx[:, ::1] states, int n, int q1, int q2):
    cdef Py_ssize_t mask = (1 << (n - 1 - q1)) | (1 << (n - 1 - q2))
    cdef Py_ssize_t k, i
    with nogil:
        for k in range(states.shape[0]):
            for i in range(states.shape[1]):
                if (i & mask) == mask:
                    states[k, i] = -states[k, i]


cdef inline int _parity(Py_ssize_t v) nogil:
    cdef int p = 0
    while v:
        p ^= 1
        v &= v - 1
    return p


def apply_pauli(cplx[:, ::1] states, Py_ssize_t x_mask, Py_ssize_t phase_mask, int n_y):
    out = np.empty((states.shape[0], states.shape[1]), dtype=np.complex128)
    cdef cplx[:, ::1] o = out
    cdef cplx base = (1j) ** (n_y % 4)
    cdef Py_ssize_t k, i
    with nogil:
        for k in range(states.shape[0]):
            for i in range(states.shape[1]):
                if _parity(i & phase_mask):
                    o[k, i ^ x_mask] = -base * states[k, i]
                else:
                    o[k, i ^ x_mask] = base * states[k, i]
    return out
