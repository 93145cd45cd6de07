"""Pure numpy implementations of the state-vector kernels.

Qubit q of a basis index b is bit q (little-endian).  A Pauli word is the pair
of masks (x, z) and stands for i**popcount(x & z) * X**x * Z**z, so that a
letter with both bits set is Y.
"""
from functools import lru_cache

import numpy as np

_IPOW = np.array([1, 1j, -1, -1j], dtype=complex)


@lru_cache(maxsize=32)
def _indices(dim):
    idx = np.arange(dim, dtype=np.int64)
    idx.setflags(write=False)
    return idx


def _signs(idx, z):
    # (-1)**popcount(idx & z)
    return 1 - 2 * (np.bitwise_count(idx & z) & 1).astype(np.int8)


def _phase(x, z):
    return _IPOW[bin(x & z).count("1") % 4]


def apply_pauli_inplace(psi, x, z):
    idx = _indices(psi.shape[0])
    out = np.empty_like(psi)
    out[idx ^ x] = _phase(x, z) * _signs(idx, z) * psi
    psi[:] = out


def pauli_rotation_inplace(psi, x, z, theta):
    """psi <- exp(-i theta P) psi."""
    c, s = np.cos(theta), np.sin(theta)
    idx = _indices(psi.shape[0])
    moved = np.empty_like(psi)
    moved[idx ^ x] = _phase(x, z) * _signs(idx, z) * psi
    psi *= c
    psi -= 1j * s * moved


def expectations(psi, xs, zs):
    """Complex <psi|P_k|psi> for each word k."""
    idx = _indices(psi.shape[0])
    out = np.empty(len(xs), dtype=complex)
    conj = psi.conj()
    for k, (x, z) in enumerate(zip(xs, zs)):
        x = int(x)
        z = int(z)
        out[k] = _phase(x, z) * np.dot(conj[idx ^ x], _signs(idx, z) * psi)
    return out


def dense_matrix(n_qubits, xs, zs, coeffs):
    dim = 1 << n_qubits
    idx = _indices(dim)
    mat = np.zeros((dim, dim), dtype=complex)
    for x, z, c in zip(xs, zs, coeffs):
        x = int(x)
        z = int(z)
        mat[idx ^ x, idx] += c * _phase(x, z) * _signs(idx, z)
    return mat
