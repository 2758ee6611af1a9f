"""Sparse state-vector engine: the exact reference for small instances.

States are stored as parallel arrays of uint64 basis keys (bit ``q`` of a key
is qubit ``q``; qubit 0 is the leftmost character of a printed bitstring) and
complex amplitudes, kept sorted by key, pruned, and renormalized-checked after
every operation.  Hard caps keep this engine at desk scale; larger instances
belong to the stabilizer engine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .steane import CODEWORD_INTS

MAX_QUBITS = 26
MAX_TERMS = 1 << 20
PRUNE_TOL = 1e-12
NORM_TOL = 1e-10
MAX_KEPT = 14  # partial-trace subset cap

_SQRT8 = np.sqrt(8.0)
_T_PHASE = np.exp(1j * np.pi / 4)

GATES_1Q = ("X", "Z", "H", "S", "SDG", "T")


class SparseEngineError(ValueError):
    """Capacity, dimension, or consistency failure in the sparse engine."""


@dataclass(frozen=True)
class SecretQubit:
    """A single-qubit secret: amplitudes for |0> and |1>."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise SparseEngineError(f"secret not normalized: |a|^2+|b|^2 = {norm}")

    def as_vector(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=np.complex128)

    def fidelity(self, other: "SecretQubit") -> float:
        ov = np.conj(self.alpha) * other.alpha + np.conj(self.beta) * other.beta
        return float(abs(ov) ** 2)

    @classmethod
    def random(cls, rng: np.random.Generator) -> "SecretQubit":
        v = rng.normal(size=4)
        a = v[0] + 1j * v[1]
        b = v[2] + 1j * v[3]
        n = np.sqrt(abs(a) ** 2 + abs(b) ** 2)
        return cls(complex(a / n), complex(b / n))


def _bit(keys: np.ndarray, q: int) -> np.ndarray:
    return (keys >> np.uint64(q)) & np.uint64(1)


class SparseState:
    """Mutable sparse register of up to 26 qubits; one owner at a time."""

    __slots__ = ("qubit_count", "keys", "amps", "rng")

    def __init__(self, qubit_count: int, keys, amps, rng: np.random.Generator):
        self.qubit_count = qubit_count
        self.keys = np.asarray(keys, dtype=np.uint64)
        self.amps = np.asarray(amps, dtype=np.complex128)
        self.rng = rng
        self._settle(check_norm=True)

    @classmethod
    def from_secret(cls, secret: SecretQubit, seed: int = 1) -> "SparseState":
        rng = np.random.default_rng(seed)
        return cls(1, [0, 1], [secret.alpha, secret.beta], rng)

    @classmethod
    def zeros(cls, qubit_count: int, seed: int = 1) -> "SparseState":
        if qubit_count > MAX_QUBITS:
            raise SparseEngineError(
                f"{qubit_count} qubits exceeds the sparse-engine cap of "
                f"{MAX_QUBITS}; use the stabilizer engine"
            )
        rng = np.random.default_rng(seed)
        return cls(qubit_count, [0], [1.0], rng)

    def copy(self) -> "SparseState":
        clone = object.__new__(SparseState)
        clone.qubit_count = self.qubit_count
        clone.keys = self.keys.copy()
        clone.amps = self.amps.copy()
        clone.rng = np.random.default_rng(self.rng.integers(1 << 63))
        return clone

    # -- internal bookkeeping ------------------------------------------------

    def _settle(self, check_norm: bool):
        keep = np.abs(self.amps) >= PRUNE_TOL
        if not keep.all():
            self.keys = self.keys[keep]
            self.amps = self.amps[keep]
        order = np.argsort(self.keys)
        self.keys = self.keys[order]
        self.amps = self.amps[order]
        if len(self.keys) > MAX_TERMS:
            raise SparseEngineError(
                f"{len(self.keys)} stored terms exceeds the cap of {MAX_TERMS}; "
                "use the stabilizer engine"
            )
        if self.qubit_count > MAX_QUBITS:
            raise SparseEngineError(
                f"{self.qubit_count} qubits exceeds the sparse-engine cap of "
                f"{MAX_QUBITS}; use the stabilizer engine"
            )
        if check_norm:
            norm = float(np.sum(np.abs(self.amps) ** 2))
            if abs(norm - 1.0) > NORM_TOL:
                raise SparseEngineError(f"state norm drifted to {norm}")

    def _check_qubit(self, q: int):
        if not 0 <= q < self.qubit_count:
            raise SparseEngineError(
                f"qubit {q} out of range for {self.qubit_count}-qubit state"
            )

    # -- gates ----------------------------------------------------------------

    def apply_1q(self, gate: str, q: int):
        self._check_qubit(q)
        bits = _bit(self.keys, q)
        if gate == "X":
            self.keys = self.keys ^ (np.uint64(1) << np.uint64(q))
        elif gate == "Z":
            self.amps = np.where(bits == 1, -self.amps, self.amps)
        elif gate == "S":
            self.amps = np.where(bits == 1, 1j * self.amps, self.amps)
        elif gate == "SDG":
            self.amps = np.where(bits == 1, -1j * self.amps, self.amps)
        elif gate == "T":
            self.amps = np.where(bits == 1, _T_PHASE * self.amps, self.amps)
        elif gate == "H":
            mask = np.uint64(1) << np.uint64(q)
            signs = 1.0 - 2.0 * bits.astype(np.float64)
            keys = np.concatenate([self.keys & ~mask, self.keys | mask])
            amps = np.concatenate([self.amps, self.amps * signs]) / np.sqrt(2.0)
            self.keys, self.amps = kernels.merge_terms(keys, amps)
        else:
            raise SparseEngineError(f"unknown single-qubit gate {gate!r}")
        self._settle(check_norm=True)

    def apply_cnot(self, control: int, target: int):
        self._check_qubit(control)
        self._check_qubit(target)
        if control == target:
            raise SparseEngineError("control and target must differ")
        flips = _bit(self.keys, control) << np.uint64(target)
        self.keys = self.keys ^ flips
        self._settle(check_norm=True)

    def apply_gate(self, gate: str, *qubits: int):
        if gate == "CNOT":
            self.apply_cnot(*qubits)
        else:
            (q,) = qubits
            self.apply_1q(gate, q)

    def encode_steane(self, q: int):
        """Replace qubit ``q`` in place by seven qubits carrying its value in
        the code: bit value b becomes the eight parity-b codewords at 1/sqrt(8)
        amplitude each.  Later qubits shift up by six."""
        self._check_qubit(q)
        if self.qubit_count + 6 > MAX_QUBITS:
            raise SparseEngineError(
                f"encoding would need {self.qubit_count + 6} qubits, above the "
                f"sparse-engine cap of {MAX_QUBITS}; use the stabilizer engine"
            )
        if len(self.keys) * 8 > MAX_TERMS:
            raise SparseEngineError(
                "encoding would overflow the stored-term cap; "
                "use the stabilizer engine"
            )
        low_mask = np.uint64((1 << q) - 1)
        low = self.keys & low_mask
        bits = _bit(self.keys, q).astype(np.int64)
        high = self.keys >> np.uint64(q + 1)
        words = CODEWORD_INTS[bits]  # (terms, 8)
        keys = (
            np.repeat(low, 8)
            | (words.ravel() << np.uint64(q))
            | (np.repeat(high, 8) << np.uint64(q + 7))
        )
        self.keys = keys
        self.amps = np.repeat(self.amps, 8) / _SQRT8
        self.qubit_count += 6
        self._settle(check_norm=True)

    # -- measurement -----------------------------------------------------------

    def measure_z(self, q: int) -> int:
        """Measure one qubit in Z; consumes exactly one RNG draw."""
        return int(self.measure_many([q])[0])

    def measure_many(self, qubits) -> np.ndarray:
        """Measure the listed qubits in order; one RNG draw per qubit."""
        for q in qubits:
            self._check_qubit(q)
        draws = self.rng.random(len(qubits))
        outcomes, keys, amps = kernels.measure_cascade(
            self.keys, self.amps, np.asarray(qubits, dtype=np.int64), draws
        )
        self.keys = keys
        self.amps = amps
        self._settle(check_norm=True)
        return outcomes

    # -- analysis ---------------------------------------------------------------

    def partial_trace(self, keep) -> "DensityMap":
        keep = tuple(keep)
        for q in keep:
            self._check_qubit(q)
        if len(set(keep)) != len(keep):
            raise SparseEngineError("duplicate qubits in keep set")
        if len(keep) > MAX_KEPT:
            raise SparseEngineError(
                f"partial trace over {len(keep)} kept qubits exceeds the cap "
                f"of {MAX_KEPT}"
            )
        kept_idx = np.zeros(len(self.keys), dtype=np.int64)
        for j, q in enumerate(keep):
            kept_idx |= _bit(self.keys, q).astype(np.int64) << j
        traced = [q for q in range(self.qubit_count) if q not in keep]
        traced_idx = np.zeros(len(self.keys), dtype=np.uint64)
        for j, q in enumerate(traced):
            traced_idx |= _bit(self.keys, q) << np.uint64(j)
        order = np.argsort(traced_idx, kind="stable")
        groups = traced_idx[order]
        entries: dict[tuple[int, int], complex] = {}
        start = 0
        n = len(order)
        while start < n:
            stop = start
            while stop < n and groups[stop] == groups[start]:
                stop += 1
            idx = order[start:stop]
            rows = kept_idx[idx]
            vals = self.amps[idx]
            outer = vals[:, None] * np.conj(vals[None, :])
            for i, r in enumerate(rows):
                for j, c in enumerate(rows):
                    key = (int(r), int(c))
                    entries[key] = entries.get(key, 0.0) + complex(outer[i, j])
            start = stop
        return DensityMap(keep, entries)

    def fidelity(self, other: "SparseState") -> float:
        """|<self|other>|^2; both states must have the same qubit count."""
        if self.qubit_count != other.qubit_count:
            raise SparseEngineError("qubit counts differ")
        common, ia, ib = np.intersect1d(
            self.keys, other.keys, assume_unique=True, return_indices=True
        )
        overlap = np.sum(np.conj(self.amps[ia]) * other.amps[ib])
        return float(abs(overlap) ** 2)

    # -- text dump ----------------------------------------------------------------

    def bitstring(self, key: int) -> str:
        return "".join(
            "1" if (int(key) >> q) & 1 else "0" for q in range(self.qubit_count)
        )

    def dumps(self) -> str:
        lines = sorted(
            f"{self.bitstring(k)} {a.real:.17g} {a.imag:.17g}"
            for k, a in zip(self.keys, self.amps)
        )
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str, seed: int = 1) -> "SparseState":
        keys: list[int] = []
        amps: list[complex] = []
        width = None
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise SparseEngineError(f"line {lineno}: expected 'bits re im'")
            bits, re_s, im_s = parts
            if width is None:
                width = len(bits)
                if not 1 <= width <= MAX_QUBITS:
                    raise SparseEngineError(f"line {lineno}: bad bitstring width")
            if len(bits) != width or set(bits) - {"0", "1"}:
                raise SparseEngineError(f"line {lineno}: malformed bitstring")
            keys.append(sum(int(c) << i for i, c in enumerate(bits)))
            amps.append(float(re_s) + 1j * float(im_s))
        if width is None:
            raise SparseEngineError("empty state dump")
        if len(set(keys)) != len(keys):
            raise SparseEngineError("duplicate bitstring in state dump")
        rng = np.random.default_rng(seed)
        return cls(width, keys, amps, rng)


class DensityMap:
    """Sparse Hermitian reduced density matrix over a kept qubit subset."""

    __slots__ = ("qubits", "entries")

    def __init__(self, qubits, entries: dict[tuple[int, int], complex]):
        self.qubits = tuple(qubits)
        self.entries = {k: complex(v) for k, v in entries.items() if abs(v) > 0}
        trace = sum(v.real for (r, c), v in self.entries.items() if r == c)
        if abs(trace - 1.0) > 1e-10:
            raise SparseEngineError(f"reduced matrix trace is {trace}, expected 1")
        for (r, c), v in self.entries.items():
            if abs(np.conj(self.entries.get((c, r), 0.0)) - v) > 1e-10:
                raise SparseEngineError("reduced matrix is not Hermitian")

    @property
    def dim(self) -> int:
        return 1 << len(self.qubits)

    def to_dense(self) -> np.ndarray:
        if len(self.qubits) > 12:
            raise SparseEngineError("dense form capped at 12 kept qubits")
        out = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for (r, c), v in self.entries.items():
            out[r, c] = v
        return out

    def max_abs_diff(self, other: "DensityMap") -> float:
        keys = set(self.entries) | set(other.entries)
        if not keys:
            return 0.0
        return max(
            abs(self.entries.get(k, 0.0) - other.entries.get(k, 0.0)) for k in keys
        )
