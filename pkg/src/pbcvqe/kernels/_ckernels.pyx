# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled state-vector kernels; same contracts as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()

cdef extern from *:
    int __builtin_popcountll(unsigned long long) noexcept nogil

ctypedef unsigned long long u64


cdef inline double complex _ipow(int k) noexcept nogil:
    k &= 3
    if k == 0:
        return 1.0
    elif k == 1:
        return 1.0j
    elif k == 2:
        return -1.0
    return -1.0j


cdef inline double complex _ph(double complex base, u64 z, u64 b) noexcept nogil:
    if __builtin_popcountll(z & b) & 1:
        return -base
    return base


def apply_pauli_inplace(double complex[::1] psi, u64 x, u64 z):
    cdef Py_ssize_t dim = psi.shape[0]
    cdef double complex base = _ipow(__builtin_popcountll(x & z))
    cdef u64 b, p
    cdef double complex a, c
    with nogil:
        if x == 0:
            for b in range(<u64>dim):
                psi[b] = _ph(base, z, b) * psi[b]
        else:
            for b in range(<u64>dim):
                p = b ^ x
                if b < p:
                    a = psi[b]
                    c = psi[p]
                    psi[p] = _ph(base, z, b) * a
                    psi[b] = _ph(base, z, p) * c


def pauli_rotation_inplace(double complex[::1] psi, u64 x, u64 z, double theta):
    cdef Py_ssize_t dim = psi.shape[0]
    cdef double complex base = _ipow(__builtin_popcountll(x & z))
    cdef double co = cos(theta)
    cdef double complex mis = -1.0j * sin(theta)
    cdef u64 b, p
    cdef double complex a, c
    with nogil:
        if x == 0:
            for b in range(<u64>dim):
                psi[b] = (co + mis * _ph(base, z, b)) * psi[b]
        else:
            for b in range(<u64>dim):
                p = b ^ x
                if b < p:
                    a = psi[b]
                    c = psi[p]
                    psi[b] = co * a + mis * _ph(base, z, p) * c
                    psi[p] = co * c + mis * _ph(base, z, b) * a


def expectations(double complex[::1] psi, xs, zs):
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t k, nk = len(xs)
    cdef u64[::1] xv = np.ascontiguousarray(xs, dtype=np.uint64)
    cdef u64[::1] zv = np.ascontiguousarray(zs, dtype=np.uint64)
    out = np.empty(nk, dtype=complex)
    cdef double complex[::1] ov = out
    cdef u64 b, x, z
    cdef double complex acc, base, term
    with nogil:
        for k in range(nk):
            x = xv[k]
            z = zv[k]
            base = _ipow(__builtin_popcountll(x & z))
            acc = 0
            for b in range(<u64>dim):
                term = psi[b ^ x].conjugate() * psi[b]
                if __builtin_popcountll(z & b) & 1:
                    acc = acc - term
                else:
                    acc = acc + term
            ov[k] = base * acc
    return out


def dense_matrix(int n_qubits, xs, zs, coeffs):
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n_qubits
    cdef Py_ssize_t k, nk = len(xs)
    cdef u64[::1] xv = np.ascontiguousarray(xs, dtype=np.uint64)
    cdef u64[::1] zv = np.ascontiguousarray(zs, dtype=np.uint64)
    cdef double complex[::1] cv = np.ascontiguousarray(coeffs, dtype=complex)
    mat = np.zeros((dim, dim), dtype=complex)
    cdef double complex[:, ::1] mv = mat
    cdef u64 b, x, z
    cdef double complex base
    with nogil:
        for k in range(nk):
            x = xv[k]
            z = zv[k]
            base = cv[k] * _ipow(__builtin_popcountll(x & z))
            for b in range(<u64>dim):
                mv[b ^ x, b] += _ph(base, z, b)
    return mat
