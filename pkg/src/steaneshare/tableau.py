"""Hybrid stabilizer engine: bit-packed GF(2) tableau plus a dense logical register.

Pauli words are stored canonically as ``i^phase * prod_q X_q^{x_q} Z_q^{z_q}``
(X before Z on each qubit, qubits ascending), with ``phase`` an exponent of i
mod 4.  The tableau keeps one packed row per stabilizer generator and per
logical-operator representative; Clifford gates conjugate every row with exact
phase tracking and never touch the register.  Measurements follow the
three-case contract: stabilizer outcomes are deterministic, anticommuting
outcomes are uniformly random with the standard generator update, and
normalizer-only words act on the register by the Born rule, after which the
measured logical qubit is converted to stabilizer form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .scheme import Encode, Leaf, SchemeTree
from .steane import GENERATOR_SUPPORTS

MAX_TABLEAU_QUBITS = 4096
MAX_LOGICAL = 12


class TableauError(ValueError):
    """Capacity or consistency failure in the stabilizer engine."""


def _words_for(n: int) -> int:
    return max(1, (n + 63) >> 6)


def _set_bits(row: np.ndarray, qubits):
    for q in qubits:
        row[q >> 6] |= np.uint64(1) << np.uint64(q & 63)


def _get_bit(row: np.ndarray, q: int) -> int:
    return int((row[q >> 6] >> np.uint64(q & 63)) & np.uint64(1))


def _bits_of(row: np.ndarray, n: int) -> list[int]:
    out = []
    for q in range(n):
        if _get_bit(row, q):
            out.append(q)
    return out


def _parity_and(a: np.ndarray, b: np.ndarray) -> int:
    return int(kernels.parity_rows(a.reshape(1, -1), b)[0])


@dataclass
class PauliWord:
    """One Pauli operator on ``n`` qubits in canonical packed form."""

    n: int
    x: np.ndarray
    z: np.ndarray
    phase: int  # exponent of i, mod 4

    @classmethod
    def identity(cls, n: int) -> "PauliWord":
        w = _words_for(n)
        return cls(n, np.zeros(w, np.uint64), np.zeros(w, np.uint64), 0)

    @classmethod
    def single(cls, n: int, kind: str, q: int) -> "PauliWord":
        word = cls.identity(n)
        if kind in ("X", "Y"):
            _set_bits(word.x, [q])
        if kind in ("Z", "Y"):
            _set_bits(word.z, [q])
        if kind == "Y":
            word.phase = 1  # Y = i X Z
        return word

    @classmethod
    def x_on(cls, n: int, qubits) -> "PauliWord":
        word = cls.identity(n)
        _set_bits(word.x, qubits)
        return word

    @classmethod
    def z_on(cls, n: int, qubits) -> "PauliWord":
        word = cls.identity(n)
        _set_bits(word.z, qubits)
        return word

    def copy(self) -> "PauliWord":
        return PauliWord(self.n, self.x.copy(), self.z.copy(), self.phase)

    @property
    def is_identity(self) -> bool:
        return not self.x.any() and not self.z.any()

    def commutes(self, other: "PauliWord") -> bool:
        s = _parity_and(self.x, other.z) ^ _parity_and(self.z, other.x)
        return s == 0

    def mul(self, other: "PauliWord") -> "PauliWord":
        """self * other, exact phase."""
        phase = (
            self.phase + other.phase + 2 * _parity_and(self.z, other.x)
        ) % 4
        return PauliWord(self.n, self.x ^ other.x, self.z ^ other.z, phase)

    def support(self) -> tuple[int, ...]:
        return tuple(sorted(set(_bits_of(self.x, self.n)) | set(_bits_of(self.z, self.n))))

    @property
    def sign(self) -> int:
        """+1 or -1 for a Hermitian word."""
        y_count = int(np.bitwise_count(self.x & self.z).sum())
        e = (self.phase - y_count) % 4
        if e == 0:
            return 1
        if e == 2:
            return -1
        raise TableauError("word is not Hermitian")

    def to_string(self) -> str:
        letters = []
        for q in range(self.n):
            xb, zb = _get_bit(self.x, q), _get_bit(self.z, q)
            letters.append("IXZY"[xb + 2 * zb])
        return ("+" if self.sign > 0 else "-") + "".join(letters)


# conjugation rules for one gate applied to the state, acting on packed rows
def _conjugate_rows(xs, zs, phases, gate: str, qubits):
    if gate == "CNOT":
        c, t = qubits
        wc, bc = c >> 6, np.uint64(c & 63)
        wt, bt = t >> 6, np.uint64(t & 63)
        xc = (xs[:, wc] >> bc) & np.uint64(1)
        zt = (zs[:, wt] >> bt) & np.uint64(1)
        xs[:, wt] ^= xc << bt
        zs[:, wc] ^= zt << bc
        return
    (q,) = qubits
    w, b = q >> 6, np.uint64(q & 63)
    xb = (xs[:, w] >> b) & np.uint64(1)
    zb = (zs[:, w] >> b) & np.uint64(1)
    if gate == "X":
        phases += 2 * zb.astype(np.int64)
    elif gate == "Z":
        phases += 2 * xb.astype(np.int64)
    elif gate == "H":
        phases += 2 * (xb & zb).astype(np.int64)
        xs[:, w] ^= (xb ^ zb) << b
        zs[:, w] ^= (xb ^ zb) << b
    elif gate == "S":
        phases += xb.astype(np.int64)
        zs[:, w] ^= xb << b
    elif gate == "SDG":
        phases += 3 * xb.astype(np.int64)
        zs[:, w] ^= xb << b
    else:
        raise TableauError(f"unknown Clifford gate {gate!r}")
    phases %= 4


def conjugate_word(word: PauliWord, gate: str, qubits) -> PauliWord:
    out = word.copy()
    phases = np.array([out.phase], dtype=np.int64)
    _conjugate_rows(out.x.reshape(1, -1), out.z.reshape(1, -1), phases, gate, qubits)
    out.phase = int(phases[0]) % 4
    return out


@dataclass(frozen=True)
class RecoveryPlan:
    """Clifford circuit moving the logical qubit onto one accessible leaf."""

    gates: tuple[tuple[str, tuple[int, ...]], ...]
    target: int
    x_rep: PauliWord
    z_rep: PauliWord

    def shifted(self, offset: int) -> "RecoveryPlan":
        gates = tuple(
            (g, tuple(q + offset for q in qs)) for g, qs in self.gates
        )
        return RecoveryPlan(gates, self.target + offset, self.x_rep, self.z_rep)


def _pack_bit_matrix(bits: np.ndarray) -> np.ndarray:
    """uint8 [rows, B] -> packed uint64 [rows, ceil(B/64)]."""
    rows, b = bits.shape
    pad = (-b) % 64
    if pad:
        bits = np.concatenate([bits, np.zeros((rows, pad), np.uint8)], axis=1)
    packed = np.packbits(bits, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view(np.uint64)


def _unpack_rows(packed: np.ndarray, nbits: int) -> np.ndarray:
    """packed uint64 [rows, W] -> uint8 [rows, nbits] (little-endian bits)."""
    as_bytes = np.ascontiguousarray(packed).view(np.uint8)
    bits = np.unpackbits(as_bytes, axis=1, bitorder="little")
    return bits[:, :nbits]


class HybridTableau:
    """Stabilizer generators + logical representatives + dense register."""

    __slots__ = ("n", "w", "k", "n_gens", "xs", "zs", "phases", "register", "rng")

    def __init__(self, n: int, k: int, seed: int = 1):
        if n > MAX_TABLEAU_QUBITS:
            raise TableauError(
                f"{n} qubits exceeds the tableau cap of {MAX_TABLEAU_QUBITS}"
            )
        if k > MAX_LOGICAL:
            raise TableauError(
                f"{k} logical qubits exceeds the register cap of {MAX_LOGICAL}"
            )
        self.n = n
        self.w = _words_for(n)
        self.k = k
        self.n_gens = 0
        rows = 2 * k
        self.xs = np.zeros((rows, self.w), np.uint64)
        self.zs = np.zeros((rows, self.w), np.uint64)
        self.phases = np.zeros(rows, np.int64)
        self.register = np.zeros(1 << k, np.complex128)
        self.register[0] = 1.0
        self.rng = np.random.default_rng(seed)

    # -- construction -----------------------------------------------------------

    @classmethod
    def embed_encoding(
        cls, trees, register=None, seed: int = 1
    ) -> "HybridTableau":
        """Tableau stabilizing the concatenation defined by the given trees,
        one logical qubit per tree; the register holds the joint logical state."""
        trees = list(trees)
        k = len(trees)
        n = sum(t.leaf_count for t in trees)
        tab = cls(n, k, seed)
        gen_rows: list[tuple[list[int], ...]] = []

        def collect(node, start: int) -> int:
            if isinstance(node, Leaf):
                return start + 1
            spans = []
            cur = start
            for slot in node.slots:
                for child in slot:
                    nxt = collect(child, cur)
                    spans.append((cur, nxt))
                    cur = nxt
            for supp in GENERATOR_SUPPORTS:
                qubits: list[int] = []
                for pos in supp:
                    qubits.extend(range(*spans[pos]))
                gen_rows.append(qubits)
            return cur

        offset = 0
        block_ranges = []
        for tree in trees:
            end = collect(tree.root, offset)
            block_ranges.append((offset, end))
            offset = end

        n_gens = 2 * len(gen_rows)
        rows = n_gens + 2 * k
        tab.xs = np.zeros((rows, tab.w), np.uint64)
        tab.zs = np.zeros((rows, tab.w), np.uint64)
        tab.phases = np.zeros(rows, np.int64)
        tab.n_gens = n_gens
        for i, qubits in enumerate(gen_rows):
            _set_bits(tab.xs[2 * i], qubits)
            _set_bits(tab.zs[2 * i + 1], qubits)
        for j, (lo, hi) in enumerate(block_ranges):
            _set_bits(tab.xs[tab._xrow(j)], range(lo, hi))
            _set_bits(tab.zs[tab._zrow(j)], range(lo, hi))
        if register is not None:
            register = np.asarray(register, np.complex128)
            if register.shape != (1 << k,):
                raise TableauError("register dimension must be 2^k")
            if abs(np.linalg.norm(register) - 1.0) > 1e-10:
                raise TableauError("register must be normalized")
            tab.register = register.copy()
        return tab

    def copy(self) -> "HybridTableau":
        clone = object.__new__(HybridTableau)
        clone.n, clone.w, clone.k = self.n, self.w, self.k
        clone.n_gens = self.n_gens
        clone.xs = self.xs.copy()
        clone.zs = self.zs.copy()
        clone.phases = self.phases.copy()
        clone.register = self.register.copy()
        clone.rng = np.random.default_rng(self.rng.integers(1 << 63))
        return clone

    def _xrow(self, j: int) -> int:
        return self.n_gens + 2 * j

    def _zrow(self, j: int) -> int:
        return self.n_gens + 2 * j + 1

    def row_word(self, i: int) -> PauliWord:
        return PauliWord(self.n, self.xs[i].copy(), self.zs[i].copy(), int(self.phases[i]))

    def logical_x(self, j: int = 0) -> PauliWord:
        return self.row_word(self._xrow(j))

    def logical_z(self, j: int = 0) -> PauliWord:
        return self.row_word(self._zrow(j))

    # -- Clifford dynamics --------------------------------------------------------

    def apply_clifford(self, gate: str, *qubits: int):
        for q in qubits:
            if not 0 <= q < self.n:
                raise TableauError(f"qubit {q} out of range")
        if gate == "CNOT" and qubits[0] == qubits[1]:
            raise TableauError("control and target must differ")
        _conjugate_rows(self.xs, self.zs, self.phases, gate, qubits)

    def apply_plan(self, plan: RecoveryPlan):
        for gate, qubits in plan.gates:
            self.apply_clifford(gate, *qubits)

    # -- membership machinery --------------------------------------------------------

    def _anticommuting_rows(self, word: PauliWord, lo: int, hi: int) -> np.ndarray:
        a = kernels.parity_rows(self.xs[lo:hi], word.z)
        b = kernels.parity_rows(self.zs[lo:hi], word.x)
        return np.nonzero(a ^ b)[0] + lo

    def _solve_restricted(self, row_indices, columns, targets):
        """GF(2) solve machinery shared by the membership paths.

        Rows are the tableau rows in ``row_indices`` restricted to the qubit
        ``columns`` (x bits then z bits), augmented with an identity block.
        Returns (eliminated matrix, per-target (residue?, coefficient bits)).
        """
        nrows = len(row_indices)
        ncols = 2 * len(columns)
        bx = _unpack_rows(self.xs[row_indices], self.n)[:, columns]
        bz = _unpack_rows(self.zs[row_indices], self.n)[:, columns]
        bits = np.concatenate(
            [bx, bz, np.eye(nrows, dtype=np.uint8)], axis=1
        )
        mat = _pack_bit_matrix(bits)
        pivots = kernels.gf2_eliminate(mat, ncols)
        full_words = (ncols + 63) >> 6
        spare = ncols & 63
        results = []
        for target in targets:
            tx = _unpack_rows(target.x.reshape(1, -1), self.n)[0, columns]
            tz = _unpack_rows(target.z.reshape(1, -1), self.n)[0, columns]
            vec = _pack_bit_matrix(
                np.concatenate([tx, tz, np.zeros(nrows, np.uint8)]).reshape(1, -1)
            )[0]
            for r, col in enumerate(pivots):
                wq, bq = int(col) >> 6, np.uint64(int(col) & 63)
                if (vec[wq] >> bq) & np.uint64(1):
                    vec ^= mat[r]
            residue = vec[:full_words].copy()
            if spare:
                residue[-1] &= np.uint64((1 << spare) - 1)
            coeffs = [
                row_indices[i]
                for i in range(nrows)
                if (vec[(ncols + i) >> 6] >> np.uint64((ncols + i) & 63))
                & np.uint64(1)
            ]
            results.append((bool(residue.any()), coeffs))
        return mat, results

    def _decompose(self, word: PauliWord):
        """Write ``word`` as i^e * prod(selected rows, ascending).

        Returns (e, selected row indices) or None when not in the span.
        """
        rows = self.n_gens + 2 * self.k
        _, ((bad, selected),) = self._solve_restricted(
            list(range(rows)), list(range(self.n)), [word]
        )
        if bad:
            return None
        prod = PauliWord.identity(self.n)
        for i in selected:
            prod = prod.mul(self.row_word(i))
        if not np.array_equal(prod.x, word.x) or not np.array_equal(prod.z, word.z):
            raise TableauError("internal: decomposition lost bits")
        e = (word.phase - prod.phase) % 4
        return e, selected

    def _register_pauli(self, phase_exp: int, a_mask: int, b_mask: int) -> np.ndarray:
        c = self.register
        m = np.arange(len(c))
        signs = 1.0 - 2.0 * (np.bitwise_count(m & b_mask) & 1)
        out = np.empty_like(c)
        out[m ^ a_mask] = (1j ** phase_exp) * signs * c
        return out

    def _logical_masks(self, selected) -> tuple[int, int, list[int]]:
        a_mask = b_mask = 0
        touched = []
        for i in selected:
            if i < self.n_gens:
                continue
            j, kind = divmod(i - self.n_gens, 2)
            bit = 1 << (self.k - 1 - j)
            if kind == 0:
                a_mask |= bit
            else:
                b_mask |= bit
            if j not in touched:
                touched.append(j)
        return a_mask, b_mask, touched

    # -- measurement ------------------------------------------------------------------

    def expectation(self, word: PauliWord) -> complex:
        """<state| word |state> for any Pauli word."""
        if len(self._anticommuting_rows(word, 0, self.n_gens)):
            return 0.0
        decomp = self._decompose(word)
        if decomp is None:
            raise TableauError("word commutes with all generators but is not in span")
        e, selected = decomp
        a_mask, b_mask, touched = self._logical_masks(selected)
        if not touched:
            val = 1j ** e
            if val.imag:
                raise TableauError("non-Hermitian stabilizer decomposition")
            return complex(val.real)
        oc = self._register_pauli(e, a_mask, b_mask)
        return complex(np.vdot(self.register, oc))

    def measure_pauli(self, word: PauliWord, force: int | None = None) -> int:
        """Measure a Hermitian Pauli word; returns the outcome bit (0 for +1)."""
        if word.is_identity:
            raise TableauError("cannot measure the identity")
        anti = self._anticommuting_rows(word, 0, self.n_gens)
        if len(anti):
            return self._measure_random(word, int(anti[0]), force)
        decomp = self._decompose(word)
        if decomp is None:
            raise TableauError("word commutes with all generators but is not in span")
        e, selected = decomp
        a_mask, b_mask, touched = self._logical_masks(selected)
        if not touched:
            # stabilizer element: deterministic outcome
            if e not in (0, 2):
                raise TableauError("non-Hermitian stabilizer decomposition")
            outcome = e >> 1
            if force is not None and force != outcome:
                raise TableauError("forced outcome contradicts a stabilizer")
            return outcome
        return self._measure_logical(word, e, a_mask, b_mask, touched, force)

    def _measure_random(self, word: PauliWord, pivot: int, force: int | None) -> int:
        outcome = force if force is not None else int(self.rng.random() < 0.5)
        rows = self.n_gens + 2 * self.k
        px, pz = self.xs[pivot].copy(), self.zs[pivot].copy()
        pphase = int(self.phases[pivot])
        others = self._anticommuting_rows(word, 0, rows)
        others = others[others != pivot]
        if len(others):
            # row <- row * pivot, phases tracked exactly
            extra = kernels.parity_rows(self.zs[others], px).astype(np.int64)
            self.phases[others] = (self.phases[others] + pphase + 2 * extra) % 4
            self.xs[others] ^= px
            self.zs[others] ^= pz
        self.xs[pivot] = word.x
        self.zs[pivot] = word.z
        self.phases[pivot] = (word.phase + 2 * outcome) % 4
        return outcome

    def _measure_logical(
        self, word, e, a_mask, b_mask, touched, force: int | None
    ) -> int:
        oc = self._register_pauli(e, a_mask, b_mask)
        expect = np.vdot(self.register, oc)
        if abs(expect.imag) > 1e-9:
            raise TableauError("logical observable has complex expectation")
        p0 = (1.0 + expect.real) / 2.0
        if force is not None:
            outcome = force
        else:
            outcome = int(self.rng.random() >= p0)
        p = p0 if outcome == 0 else 1.0 - p0
        if p < 1e-12:
            raise TableauError("forced outcome has zero probability")
        sign = 1.0 if outcome == 0 else -1.0
        collapsed = (self.register + sign * oc) / (2.0 * np.sqrt(p))

        # retire the highest touched logical qubit into the stabilizer
        j_star = max(touched)
        d_row = None
        for row in (self._xrow(j_star), self._zrow(j_star)):
            if not self.row_word(row).commutes(word):
                d_row = row
                break
        if d_row is None:
            raise TableauError("internal: no anticommuting representative")
        d_word = self.row_word(d_row)
        d_triple = (
            0,
            (1 << (self.k - 1 - j_star)) if d_row == self._xrow(j_star) else 0,
            (1 << (self.k - 1 - j_star)) if d_row == self._zrow(j_star) else 0,
        )

        # register operators of the surviving representatives, old indexing
        triples: dict[int, tuple[int, int, int]] = {}
        for j in range(self.k):
            if j == j_star:
                continue
            for row, kind in ((self._xrow(j), 0), (self._zrow(j), 1)):
                bit = 1 << (self.k - 1 - j)
                triple = (0, bit if kind == 0 else 0, bit if kind == 1 else 0)
                if not self.row_word(row).commutes(word):
                    updated = self.row_word(row).mul(d_word)
                    self.xs[row] = updated.x
                    self.zs[row] = updated.z
                    self.phases[row] = updated.phase
                    triple = _triple_mul(triple, d_triple)
                triples[row] = triple

        # rebuild the register over the surviving logical qubits
        new_k = self.k - 1
        survivors = [j for j in range(self.k) if j != j_star]
        conds = [((e + 2 * outcome) % 4, a_mask, b_mask)]
        conds += [triples[self._zrow(j)] for j in survivors]
        v0 = _stabilized_vector(conds, self.k)
        new_register = np.zeros(1 << new_k, np.complex128)
        for m in range(1 << new_k):
            u = v0
            for pos, j in enumerate(survivors):
                if (m >> (new_k - 1 - pos)) & 1:
                    u = _apply_triple(triples[self._xrow(j)], u)
            new_register[m] = np.vdot(u, collapsed)
        norm = np.linalg.norm(new_register)
        if abs(norm - 1.0) > 1e-8:
            raise TableauError("internal: register rebase lost norm")
        new_register /= norm

        # drop the retired pair, append the measured word as a generator
        keep = [i for i in range(self.n_gens + 2 * self.k)
                if i not in (self._xrow(j_star), self._zrow(j_star))]
        xs = self.xs[keep]
        zs = self.zs[keep]
        phases = self.phases[keep]
        gen_x = word.x.reshape(1, -1)
        gen_z = word.z.reshape(1, -1)
        gen_p = np.array([(word.phase + 2 * outcome) % 4], np.int64)
        self.xs = np.concatenate([xs[: self.n_gens], gen_x, xs[self.n_gens :]])
        self.zs = np.concatenate([zs[: self.n_gens], gen_z, zs[self.n_gens :]])
        self.phases = np.concatenate([phases[: self.n_gens], gen_p, phases[self.n_gens :]])
        self.n_gens += 1
        self.k = new_k
        self.register = new_register
        return outcome

    # -- representatives and recovery ------------------------------------------------

    def find_logical_representative(self, kind: str, support, j: int = 0):
        """A representative of logical X/Z of qubit ``j`` supported inside
        ``support`` (logical word times stabilizer element), or None."""
        allowed = set(support)
        outside = [q for q in range(self.n) if q not in allowed]
        target_row = self._xrow(j) if kind == "X" else self._zrow(j)
        target = self.row_word(target_row)
        if not outside:
            return target
        _, ((bad, coeffs),) = self._solve_restricted(
            list(range(self.n_gens)), outside, [target]
        )
        if bad:
            return None
        rep = target
        for i in coeffs:
            rep = rep.mul(self.row_word(i))
        if any(q not in allowed for q in rep.support()):
            raise TableauError("internal: representative escaped the support")
        return rep

    def recoverable(self, support, j: int = 0) -> bool:
        return (
            self.find_logical_representative("X", support, j) is not None
            and self.find_logical_representative("Z", support, j) is not None
        )

    def leaks(self, support) -> bool:
        """True iff some nontrivial logical word has a representative inside
        ``support``: certified by GF(2) kernel analysis of the restriction."""
        allowed = set(support)
        outside = [q for q in range(self.n) if q not in allowed]
        rows = self.n_gens + 2 * self.k
        if not outside:
            return self.k > 0
        cols = 2 * len(outside)
        mat, _ = self._solve_restricted(list(range(rows)), outside, [])
        full_words = (cols + 63) >> 6
        spare = cols & 63
        for i in range(rows):
            residue = mat[i, :full_words].copy()
            if spare:
                residue[-1] &= np.uint64((1 << spare) - 1)
            if residue.any():
                continue
            for r in range(self.n_gens, rows):
                col = cols + r
                if (mat[i, col >> 6] >> np.uint64(col & 63)) & np.uint64(1):
                    return True
        return False

    def synthesize_recovery(self, support, j: int = 0) -> RecoveryPlan:
        """Clifford circuit on ``support`` after which single-qubit X/Z on the
        target leaf are exactly the logical representatives of qubit ``j``."""
        px = self.find_logical_representative("X", support, j)
        pz = self.find_logical_representative("Z", support, j)
        if px is None or pz is None:
            raise TableauError("subset is not recoverable: no supported representatives")
        gates: list[tuple[str, tuple[int, ...]]] = []

        def emit(gate: str, *qubits: int):
            nonlocal px, pz
            gates.append((gate, qubits))
            px = conjugate_word(px, gate, qubits)
            pz = conjugate_word(pz, gate, qubits)

        # 1. make the X-representative a pure X string
        for q in px.support():
            xb, zb = _get_bit(px.x, q), _get_bit(px.z, q)
            if xb and zb:
                emit("SDG", q)
            elif zb:
                emit("H", q)
        # 2. funnel it onto the lowest-index support qubit
        target = px.support()[0]
        for q in px.support():
            if q != target:
                emit("CNOT", target, q)
        if px.phase == 2:
            emit("Z", target)
        # 3. rotate the Z-representative to pure Z away from the target
        for q in pz.support():
            if q == target:
                continue
            xb, zb = _get_bit(pz.x, q), _get_bit(pz.z, q)
            if xb and zb:
                emit("SDG", q)
                emit("H", q)
            elif xb:
                emit("H", q)
        for q in pz.support():
            if q != target:
                emit("CNOT", q, target)
        # 4. clear any Y content at the target, then the sign
        if _get_bit(pz.x, target):
            emit("H", target)
            emit("S", target)
            emit("H", target)
        if pz.phase == 2:
            emit("X", target)

        want_x = PauliWord.x_on(self.n, [target])
        want_z = PauliWord.z_on(self.n, [target])
        if (
            not np.array_equal(px.x, want_x.x)
            or not np.array_equal(px.z, want_x.z)
            or px.phase != 0
            or not np.array_equal(pz.x, want_z.x)
            or not np.array_equal(pz.z, want_z.z)
            or pz.phase != 0
        ):
            raise TableauError("internal: reduction failed to reach X/Z on target")
        return RecoveryPlan(
            tuple(gates),
            target,
            self.find_logical_representative("X", support, j),
            self.find_logical_representative("Z", support, j),
        )

    # -- extraction --------------------------------------------------------------------

    def reduced_density(self, qubits) -> np.ndarray:
        """Exact reduced density matrix on the listed physical qubits, computed
        from 4^m Pauli expectations."""
        qubits = list(qubits)
        m = len(qubits)
        if m > 6:
            raise TableauError("expectation-based reduction capped at 6 qubits")
        paulis = {
            "I": np.eye(2, dtype=np.complex128),
            "X": np.array([[0, 1], [1, 0]], np.complex128),
            "Y": np.array([[0, -1j], [1j, 0]], np.complex128),
            "Z": np.array([[1, 0], [0, -1]], np.complex128),
        }
        rho = np.zeros((1 << m, 1 << m), np.complex128)
        letters = "IXYZ"
        for combo in range(4 ** m):
            word = PauliWord.identity(self.n)
            mat = np.array([[1.0 + 0j]])
            idx = combo
            for pos in range(m):
                letter = letters[(idx >> (2 * (m - 1 - pos))) & 3]
                mat = np.kron(mat, paulis[letter])
                if letter != "I":
                    word = word.mul(PauliWord.single(self.n, letter, qubits[pos]))
            val = self.expectation(word) if not word.is_identity else 1.0
            rho += complex(val) * mat
        return rho / (1 << m)

    # -- validation and dump ---------------------------------------------------------------

    def validate(self):
        rows = self.n_gens + 2 * self.k
        for i in range(rows):
            wi = self.row_word(i)
            wi.sign  # raises unless Hermitian
            for jj in range(i + 1, rows):
                wj = self.row_word(jj)
                anti = not wi.commutes(wj)
                paired = (
                    i >= self.n_gens
                    and jj == i + 1
                    and (i - self.n_gens) % 2 == 0
                )
                if anti != paired:
                    raise TableauError(f"rows {i},{jj} have wrong commutation")
        bits = np.zeros((self.n_gens, 2 * self.n), np.uint8)
        for i in range(self.n_gens):
            for q in _bits_of(self.xs[i], self.n):
                bits[i, q] = 1
            for q in _bits_of(self.zs[i], self.n):
                bits[i, self.n + q] = 1
        mat = _pack_bit_matrix(bits)
        pivots = kernels.gf2_eliminate(mat, 2 * self.n)
        if len(pivots) != self.n_gens:
            raise TableauError("generators are not independent")
        if abs(np.linalg.norm(self.register) - 1.0) > 1e-9:
            raise TableauError("register norm drifted")

    def dumps(self) -> str:
        lines = [self.row_word(i).to_string() for i in range(self.n_gens)]
        for j in range(self.k):
            lines.append(f"LX_{j} " + self.logical_x(j).to_string())
            lines.append(f"LZ_{j} " + self.logical_z(j).to_string())
        return "\n".join(lines) + "\n"


def _triple_mul(t1, t2):
    e1, a1, b1 = t1
    e2, a2, b2 = t2
    e = (e1 + e2 + 2 * ((b1 & a2).bit_count() & 1)) % 4
    return (e, a1 ^ a2, b1 ^ b2)


def _apply_triple(triple, vec: np.ndarray) -> np.ndarray:
    e, a, b = triple
    m = np.arange(len(vec))
    signs = 1.0 - 2.0 * (np.bitwise_count(m & b) & 1)
    out = np.empty_like(vec)
    out[m ^ a] = (1j ** e) * signs * vec
    return out


def _stabilized_vector(conds, k: int) -> np.ndarray:
    """The unique (up to phase) register vector fixed by all condition triples."""
    dim = 1 << k
    for seed in range(dim):
        v = np.zeros(dim, np.complex128)
        v[seed] = 1.0
        for cond in conds:
            v = (v + _apply_triple(cond, v)) / 2.0
        norm = np.linalg.norm(v)
        if norm > 1e-6:
            return v / norm
    raise TableauError("internal: no stabilized register vector found")
