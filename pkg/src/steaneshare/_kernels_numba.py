"""Numba-compiled kernels: the default backend for the hot inner loops.

Contracts match ``_kernels_numpy`` exactly; the test suite runs both backends
against each other.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def merge_terms(keys, amps):
    order = np.argsort(keys)
    n = len(keys)
    out_keys = np.empty(n, dtype=np.uint64)
    out_amps = np.empty(n, dtype=np.complex128)
    m = -1
    for idx in range(n):
        j = order[idx]
        k = keys[j]
        if m >= 0 and out_keys[m] == k:
            out_amps[m] += amps[j]
        else:
            m += 1
            out_keys[m] = k
            out_amps[m] = amps[j]
    return out_keys[: m + 1].copy(), out_amps[: m + 1].copy()


@njit(cache=True)
def measure_cascade(keys, amps, qubits, draws):
    keys = keys.copy()
    amps = amps.copy()
    n = len(keys)
    outcomes = np.zeros(len(qubits), dtype=np.uint8)
    for i in range(len(qubits)):
        q = qubits[i]
        p1 = 0.0
        for t in range(n):
            if (keys[t] >> np.uint64(q)) & np.uint64(1):
                p1 += abs(amps[t]) ** 2
        out = np.uint64(1) if draws[i] < p1 else np.uint64(0)
        p = p1 if out else 1.0 - p1
        scale = 1.0 / np.sqrt(p)
        m = 0
        for t in range(n):
            if ((keys[t] >> np.uint64(q)) & np.uint64(1)) == out:
                keys[m] = keys[t]
                amps[m] = amps[t] * scale
                m += 1
        n = m
        outcomes[i] = out
    return outcomes, keys[:n].copy(), amps[:n].copy()


@njit(cache=True)
def gf2_eliminate(mat, nbits):
    rows, words = mat.shape
    pivots = np.empty(min(rows, nbits), dtype=np.int64)
    npiv = 0
    r = 0
    for col in range(nbits):
        if r >= rows:
            break
        w = col >> 6
        b = np.uint64(col & 63)
        piv = -1
        for i in range(r, rows):
            if (mat[i, w] >> b) & np.uint64(1):
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(words):
                tmp = mat[r, j]
                mat[r, j] = mat[piv, j]
                mat[piv, j] = tmp
        for i in range(rows):
            if i != r and ((mat[i, w] >> b) & np.uint64(1)):
                for j in range(words):
                    mat[i, j] ^= mat[r, j]
        pivots[npiv] = col
        npiv += 1
        r += 1
    return pivots[:npiv].copy()


@njit(cache=True)
def parity_rows(a, b):
    rows, words = a.shape
    out = np.zeros(rows, dtype=np.uint8)
    for i in range(rows):
        acc = np.uint64(0)
        for j in range(words):
            acc ^= a[i, j] & b[j]
        acc ^= acc >> np.uint64(32)
        acc ^= acc >> np.uint64(16)
        acc ^= acc >> np.uint64(8)
        acc ^= acc >> np.uint64(4)
        acc ^= acc >> np.uint64(2)
        acc ^= acc >> np.uint64(1)
        out[i] = np.uint8(acc & np.uint64(1))
    return out
