"""Pure-NumPy kernels: the portable fallback for every hot inner loop.

Same contracts as the numba twins in ``_kernels_numba``; selected via the
``STEANESHARE_BACKEND`` environment variable (see ``_backend``).
"""

import numpy as np


def merge_terms(keys: np.ndarray, amps: np.ndarray):
    """Sum amplitudes of duplicate keys; returns sorted unique keys."""
    uniq, inverse = np.unique(keys, return_inverse=True)
    summed = np.zeros(len(uniq), dtype=np.complex128)
    np.add.at(summed, inverse, amps)
    return uniq, summed


def measure_cascade(keys: np.ndarray, amps: np.ndarray, qubits: np.ndarray,
                    draws: np.ndarray):
    """Sequential Z measurements of ``qubits``, one uniform draw per qubit.

    Outcome convention: 1 when the draw falls below the weight of the bit-1
    branch.  Returns (outcomes, collapsed keys, collapsed amps); the collapsed
    state is renormalized after every step.
    """
    outcomes = np.zeros(len(qubits), dtype=np.uint8)
    for i, q in enumerate(qubits):
        bits = (keys >> np.uint64(q)) & np.uint64(1)
        p1 = float(np.sum(np.abs(amps[bits == 1]) ** 2))
        out = 1 if draws[i] < p1 else 0
        keep = bits == out
        keys = keys[keep]
        amps = amps[keep]
        p = p1 if out else 1.0 - p1
        amps = amps / np.sqrt(p)
        outcomes[i] = out
    return outcomes, keys, amps


def gf2_eliminate(mat: np.ndarray, nbits: int):
    """In-place reduced row echelon form of bit-packed GF(2) rows.

    Rows are uint64-packed with bit column ``c`` at word ``c >> 6``, bit
    ``c & 63``.  Pivot order is ascending bit column.  Returns the pivot
    columns; afterwards row ``r`` has leading bit at ``pivots[r]``.
    """
    rows = mat.shape[0]
    pivots = []
    r = 0
    for col in range(nbits):
        if r >= rows:
            break
        w = col >> 6
        b = np.uint64(col & 63)
        has = (mat[r:, w] >> b) & np.uint64(1)
        hits = np.nonzero(has)[0]
        if len(hits) == 0:
            continue
        piv = r + int(hits[0])
        if piv != r:
            mat[[r, piv]] = mat[[piv, r]]
        col_bits = (mat[:, w] >> b) & np.uint64(1)
        col_bits[r] = 0
        targets = np.nonzero(col_bits)[0]
        if len(targets):
            mat[targets] ^= mat[r]
        pivots.append(col)
        r += 1
    return np.array(pivots, dtype=np.int64)


def parity_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Per-row parity of popcount(row & b) for packed uint64 rows."""
    return (np.bitwise_count(a & b).sum(axis=1) & 1).astype(np.uint8)
