"""Sharing and logical computation on shared secrets.

A session holds one or more logical wires (declared secrets plus pre-shared
tau ancillas), all encoded under identical copies of one scheme tree, in
either engine.  Logical Paulis, Hadamard, and CNOT act transversally on the
non-discarded leaves; the phase gate alternates S/S-dagger by encode depth;
the T gate consumes one tau ancilla by gate teleportation with a parity
readout and an SX correction.  Recovery synthesizes a Clifford plan from the
tree's canonical tableau, applies it, and reads the target leaves.

The session also tracks the plain-circuit state of the secret wires (two-by-two
matrix bookkeeping); reported fidelities compare the engine against it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .scheme import DISCARDED, SchemeTree, tree_authorized
from .sparse import MAX_QUBITS, SecretQubit, SparseState
from .tableau import HybridTableau, PauliWord, RecoveryPlan

TAU = np.array([1.0, np.exp(1j * np.pi / 4)], dtype=np.complex128) / np.sqrt(2.0)

_MATS = {
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
    "H": np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0),
    "S": np.array([[1, 0], [0, 1j]], dtype=np.complex128),
    "T": np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=np.complex128),
}


class ProtocolError(ValueError):
    """Protocol misuse: unauthorized sets, exhausted ancillas, bad wiring."""


@dataclass(frozen=True)
class MeasurementRecord:
    """Public transcript of one bitwise logical-Z readout."""

    wire: str
    leaf_outcomes: tuple[tuple[int, int], ...]  # (block-local leaf, bit)
    parity: int
    correction_applied: bool = False

    def __post_init__(self):
        want = 0
        for _, bit in self.leaf_outcomes:
            want ^= bit
        if want != self.parity:
            raise ProtocolError("parity must be the XOR of the recorded bits")


@dataclass(frozen=True)
class RecoveryResult:
    qubit: SecretQubit | None
    fidelity: float
    targets: tuple[int, ...]
    plans: tuple[RecoveryPlan, ...]


def _apply_1q(vec: np.ndarray, mat: np.ndarray, wire: int, k: int) -> np.ndarray:
    t = vec.reshape([2] * k)
    t = np.moveaxis(t, wire, -1)
    t = t @ mat.T
    return np.moveaxis(t, -1, wire).reshape(-1)


def _apply_cnot(vec: np.ndarray, cw: int, tw: int, k: int) -> np.ndarray:
    t = vec.reshape([2] * k).copy()
    idx0 = [slice(None)] * k
    idx1 = [slice(None)] * k
    idx0[cw], idx1[cw] = 1, 1
    idx0[tw], idx1[tw] = 0, 1
    t[tuple(idx0)], t[tuple(idx1)] = t[tuple(idx1)].copy(), t[tuple(idx0)].copy()
    return t.reshape(-1)


def _project_wire(vec: np.ndarray, wire: int, bit: int, k: int):
    t = vec.reshape([2] * k)
    t = np.moveaxis(t, wire, 0)[bit]
    return t.reshape(-1)


_CANONICAL_CACHE: dict[int, tuple[SchemeTree, HybridTableau]] = {}


def canonical_tableau(tree: SchemeTree) -> HybridTableau:
    """The fresh code tableau of a tree: the frame recovery plans come from."""
    hit = _CANONICAL_CACHE.get(id(tree))
    if hit is not None and hit[0] is tree:
        return hit[1]
    tab = HybridTableau.embed_encoding([tree])
    _CANONICAL_CACHE[id(tree)] = (tree, tab)
    return tab


class SharedSecret:
    """One protocol session: shared secrets plus tau ancillas under one tree."""

    def __init__(
        self,
        secrets: list[SecretQubit],
        tree: SchemeTree,
        ancillas: int = 0,
        engine: str = "auto",
        seed: int = 1,
    ):
        if not secrets:
            raise ProtocolError("at least one secret required")
        self.tree = tree
        self.block = tree.leaf_count
        self.n_secrets = len(secrets)
        self.ancillas = ancillas
        self.wires = [f"q{i}" for i in range(len(secrets))]
        self.originals = list(secrets)
        total = (len(secrets) + ancillas) * self.block
        if engine == "auto":
            engine = "sparse" if total <= MAX_QUBITS else "stabilizer"
        if engine not in ("sparse", "stabilizer"):
            raise ProtocolError(f"unknown engine {engine!r}")
        self.engine = engine
        self.rng = np.random.default_rng(seed)
        self.consumed_ancillas = 0
        self.measured: set[int] = set()
        self.records: list[MeasurementRecord] = []
        # plain-circuit bookkeeping over the secret wires
        self.expected = secrets[0].as_vector()
        for s in secrets[1:]:
            self.expected = np.kron(self.expected, s.as_vector())

        vectors = [s.as_vector() for s in secrets] + [TAU] * ancillas
        if engine == "sparse":
            if total > MAX_QUBITS:
                raise ProtocolError(
                    f"{total} leaves exceed the sparse-engine cap of "
                    f"{MAX_QUBITS}; use the stabilizer engine"
                )
            self.sparse: SparseState | None = self._build_sparse(vectors)
            self.tableau: HybridTableau | None = None
        else:
            reg = vectors[0]
            for v in vectors[1:]:
                reg = np.kron(reg, v)
            tab = HybridTableau.embed_encoding(
                [tree] * len(vectors), register=reg
            )
            tab.rng = self.rng
            self.sparse = None
            self.tableau = tab

    # -- construction -------------------------------------------------------------

    def _build_sparse(self, vectors) -> SparseState:
        state = None
        for vec in vectors:
            block = SparseState(1, [0, 1], vec, self.rng)
            self._encode_block(block, self.tree.root, 0)
            if state is None:
                state = block
            else:
                shift = np.uint64(state.qubit_count)
                keys = (state.keys[:, None] | (block.keys[None, :] << shift)).ravel()
                amps = (state.amps[:, None] * block.amps[None, :]).ravel()
                state = SparseState(
                    state.qubit_count + block.qubit_count, keys, amps, self.rng
                )
        return state

    def _encode_block(self, state: SparseState, node, pos: int) -> int:
        from .scheme import Leaf

        if isinstance(node, Leaf):
            return 1
        state.encode_steane(pos)
        width = 0
        for slot in node.slots:
            for child in slot:
                width += self._encode_block(state, child, pos + width)
        return width

    # -- wire helpers ----------------------------------------------------------------

    def _check_wire(self, wire: int):
        if not 0 <= wire < self.n_secrets:
            raise ProtocolError(f"wire q{wire} not declared")
        if wire in self.measured:
            raise ProtocolError(f"wire q{wire} was already measured")

    def _block_leaves(self, block_index: int):
        base = block_index * self.block
        return [base + leaf for leaf in self.tree.live_leaves]

    def _apply(self, gate: str, *qubits: int):
        if self.sparse is not None:
            self.sparse.apply_gate(gate, *qubits)
        else:
            self.tableau.apply_clifford(gate, *qubits)

    def _measure(self, qubit: int) -> int:
        if self.sparse is not None:
            return self.sparse.measure_z(qubit)
        return self.tableau.measure_pauli(PauliWord.single(self.tableau.n, "Z", qubit))

    # -- logical operations -------------------------------------------------------------

    def _transversal(self, gate: str, wire: int):
        for q in self._block_leaves(wire):
            self._apply(gate, q)

    def _depth_phase(self, wire: int, dagger: bool):
        base = wire * self.block
        for leaf in self.tree.live_leaves:
            _, depth = self.tree.layout[leaf]
            odd = depth % 2 == 1
            self._apply("SDG" if odd != dagger else "S", base + leaf)

    def logical_gate(self, gate: str, wire: int):
        """Transversal X, Z, or H on every non-discarded leaf of the wire."""
        if gate not in ("X", "Z", "H"):
            raise ProtocolError(f"{gate!r} is not a transversal single-wire gate")
        self._check_wire(wire)
        self._transversal(gate, wire)
        self.expected = _apply_1q(self.expected, _MATS[gate], wire, self.n_secrets)

    def logical_cnot(self, control: int, target: int):
        """Leafwise CNOT between two wires sharing the tree shape."""
        self._check_wire(control)
        self._check_wire(target)
        if control == target:
            raise ProtocolError("control and target wires must differ")
        for qc, qt in zip(self._block_leaves(control), self._block_leaves(target)):
            self._apply("CNOT", qc, qt)
        self.expected = _apply_cnot(self.expected, control, target, self.n_secrets)

    def logical_s(self, wire: int, dagger: bool = False):
        """Depth-alternating phase gate: odd-depth leaves get the conjugate."""
        self._check_wire(wire)
        self._depth_phase(wire, dagger)
        mat = _MATS["S"].conj() if dagger else _MATS["S"]
        self.expected = _apply_1q(self.expected, mat, wire, self.n_secrets)

    def logical_t(self, wire: int) -> MeasurementRecord:
        """Gate-teleported T using the next pre-shared tau ancilla: leafwise
        CNOT into the ancilla, leafwise CNOT back, bitwise Z readout of the
        ancilla, and an S.X correction when the parity is odd."""
        self._check_wire(wire)
        if self.consumed_ancillas >= self.ancillas:
            raise ProtocolError("ancilla budget exhausted: no tau state left")
        anc_block = self.n_secrets + self.consumed_ancillas
        self.consumed_ancillas += 1
        wire_leaves = self._block_leaves(wire)
        anc_leaves = self._block_leaves(anc_block)
        for qc, qt in zip(wire_leaves, anc_leaves):
            self._apply("CNOT", qc, qt)
        for qc, qt in zip(anc_leaves, wire_leaves):
            self._apply("CNOT", qc, qt)
        outcomes = []
        parity = 0
        for local, q in zip(self.tree.live_leaves, anc_leaves):
            bit = self._measure(q)
            outcomes.append((local, bit))
            parity ^= bit
        corrected = parity == 1
        if corrected:
            self._transversal("X", wire)
            self._depth_phase(wire, dagger=False)
        self.expected = _apply_1q(self.expected, _MATS["T"], wire, self.n_secrets)
        record = MeasurementRecord(
            wire=f"q{wire}",
            leaf_outcomes=tuple(outcomes),
            parity=parity,
            correction_applied=corrected,
        )
        self.records.append(record)
        return record

    def logical_measure_z(self, wire: int) -> MeasurementRecord:
        """Bitwise Z readout of every non-discarded leaf; the logical bit is
        the parity of the outcomes."""
        self._check_wire(wire)
        outcomes = []
        parity = 0
        for local, q in zip(self.tree.live_leaves, self._block_leaves(wire)):
            bit = self._measure(q)
            outcomes.append((local, bit))
            parity ^= bit
        self.measured.add(wire)
        projected = _project_wire(self.expected, wire, parity, self.n_secrets)
        norm = np.linalg.norm(projected)
        if norm < 1e-12:
            raise ProtocolError(
                "measured a branch the bookkeeping assigns zero probability"
            )
        # keep the measured wire as a classical |bit> factor
        if self.n_secrets == 1:
            vec = np.zeros(2, np.complex128)
            vec[parity] = 1.0
        else:
            t = np.zeros([2] * self.n_secrets, np.complex128)
            idx = [slice(None)] * self.n_secrets
            idx[wire] = parity
            t[tuple(idx)] = (projected / norm).reshape([2] * (self.n_secrets - 1))
            vec = t.reshape(-1)
        self.expected = vec
        record = MeasurementRecord(
            wire=f"q{wire}",
            leaf_outcomes=tuple(outcomes),
            parity=parity,
        )
        self.records.append(record)
        return record

    # -- recovery ----------------------------------------------------------------------

    def live_wires(self) -> list[int]:
        return [w for w in range(self.n_secrets) if w not in self.measured]

    def recover(self, players: int, wires=None, expect=None) -> RecoveryResult:
        """Move every requested wire onto one leaf owned by ``players`` and
        read the joint state; fidelity is against the tracked plain-circuit
        state unless ``expect`` is given."""
        if wires is None:
            wires = self.live_wires()
        wires = list(wires)
        if not wires or len(set(wires)) != len(wires):
            raise ProtocolError("recover needs a nonempty list of distinct wires")
        for w in wires:
            self._check_wire(w)
        canon = canonical_tableau(self.tree)
        support = list(self.tree.leaves_of(players))
        if not canon.recoverable(support):
            raise ProtocolError(
                f"subset {self.tree.structure.subset_name(players) if self.tree.structure else bin(players)} "
                "cannot recover: no supported logical representatives"
            )
        plans = []
        targets = []
        used: list[int] = []
        for w in wires:
            local_support = [q for q in support if q not in used]
            plan = canon.synthesize_recovery(local_support)
            used.append(plan.target)
            shifted = plan.shifted(w * self.block)
            plans.append(shifted)
            targets.append(shifted.target)
            for gate, qs in shifted.gates:
                self._apply(gate, *qs)

        if self.sparse is not None:
            rho = self.sparse.partial_trace(targets).to_dense()
            # partial_trace indexes targets[0] as the low bit; flip to wire-major
            rho = _bit_reverse_density(rho, len(targets))
        else:
            rho = self.tableau.reduced_density(targets)

        if expect is not None:
            vec = np.asarray(expect, dtype=np.complex128)
            if vec.size != rho.shape[0]:
                raise ProtocolError("expect has the wrong dimension")
        else:
            vec = _marginal_vector(self.expected, wires, self.n_secrets)
        fidelity = float(np.real(np.conj(vec) @ rho @ vec))
        qubit = None
        if len(wires) == 1:
            qubit = _principal_qubit(rho)
        return RecoveryResult(qubit, fidelity, tuple(targets), tuple(plans))


def _bit_reverse_density(rho: np.ndarray, m: int) -> np.ndarray:
    if m <= 1:
        return rho
    perm = [int(f"{i:0{m}b}"[::-1], 2) for i in range(1 << m)]
    return rho[np.ix_(perm, perm)]


def _marginal_vector(vec: np.ndarray, wires, k: int) -> np.ndarray:
    t = vec.reshape([2] * k)
    order = list(wires) + [w for w in range(k) if w not in wires]
    t = np.transpose(t, order).reshape(1 << len(wires), -1)
    # valid only when the dropped wires factor out
    u, s, _ = np.linalg.svd(t, full_matrices=False)
    if s[0] < 1 - 1e-9:
        raise ProtocolError("requested wires are entangled with the others")
    return u[:, 0] * s[0]


def _principal_qubit(rho: np.ndarray) -> SecretQubit:
    vals, vecs = np.linalg.eigh(rho)
    v = vecs[:, int(np.argmax(vals))]
    # fix the global phase so the leading component is real positive
    lead = v[np.argmax(np.abs(v))]
    v = v * np.conj(lead) / abs(lead)
    n = np.linalg.norm(v)
    return SecretQubit(complex(v[0] / n), complex(v[1] / n))


def share(
    secret: SecretQubit, tree: SchemeTree, engine: str = "auto", seed: int = 1
) -> SharedSecret:
    """Share one secret under a compiled tree."""
    return SharedSecret([secret], tree, ancillas=0, engine=engine, seed=seed)


def share_with_ancillas(
    secrets,
    tree: SchemeTree,
    ancillas: int,
    engine: str = "auto",
    seed: int = 1,
) -> SharedSecret:
    return SharedSecret(list(secrets), tree, ancillas=ancillas, engine=engine, seed=seed)


# -- circuit programs ------------------------------------------------------------------
#
#   secret q0 <re_alpha> <im_alpha> <re_beta> <im_beta>
#   ancilla t <count>
#   X q0 | Z q0 | H q0 | S q0 | T q0 | CNOT q0 q1 | MEASZ q0


@dataclass(frozen=True)
class CircuitProgram:
    secrets: tuple[tuple[str, SecretQubit], ...]
    ancilla_budget: int
    ops: tuple[tuple[str, tuple[int, ...]], ...]

    @property
    def t_count(self) -> int:
        return sum(1 for op, _ in self.ops if op == "T")


def parse_program(text: str) -> CircuitProgram:
    secrets: list[tuple[str, SecretQubit]] = []
    budget = 0
    ops: list[tuple[str, tuple[int, ...]]] = []
    index: dict[str, int] = {}
    gates_started = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        op = parts[0]
        if op == "secret":
            if gates_started:
                raise ProtocolError(f"line {lineno}: secret after gates")
            if len(parts) != 6:
                raise ProtocolError(
                    f"line {lineno}: expected 'secret <wire> re im re im'"
                )
            name = parts[1]
            if name in index:
                raise ProtocolError(f"line {lineno}: duplicate wire {name!r}")
            try:
                nums = [float(p) for p in parts[2:]]
            except ValueError:
                raise ProtocolError(f"line {lineno}: bad amplitude") from None
            index[name] = len(secrets)
            secrets.append(
                (name, SecretQubit(nums[0] + 1j * nums[1], nums[2] + 1j * nums[3]))
            )
        elif op == "ancilla":
            if len(parts) != 3 or parts[1] != "t":
                raise ProtocolError(f"line {lineno}: expected 'ancilla t <count>'")
            budget = int(parts[2])
        elif op in ("X", "Z", "H", "S", "T", "MEASZ"):
            gates_started = True
            if len(parts) != 2:
                raise ProtocolError(f"line {lineno}: {op} takes one wire")
            if parts[1] not in index:
                raise ProtocolError(f"line {lineno}: undeclared wire {parts[1]!r}")
            ops.append((op, (index[parts[1]],)))
        elif op == "CNOT":
            gates_started = True
            if len(parts) != 3:
                raise ProtocolError(f"line {lineno}: CNOT takes two wires")
            for name in parts[1:]:
                if name not in index:
                    raise ProtocolError(f"line {lineno}: undeclared wire {name!r}")
            ops.append(("CNOT", (index[parts[1]], index[parts[2]])))
        else:
            raise ProtocolError(f"line {lineno}: unknown statement {op!r}")
    if not secrets:
        raise ProtocolError("program declares no secrets")
    return CircuitProgram(tuple(secrets), budget, tuple(ops))


@dataclass(frozen=True)
class RunResult:
    session: SharedSecret
    records: tuple[MeasurementRecord, ...]
    measurements: tuple[tuple[str, int], ...]


def run_circuit(
    program: CircuitProgram, tree: SchemeTree, engine: str = "auto", seed: int = 1
) -> RunResult:
    """Execute a program on shared wires; rejects over-budget T counts before
    touching any state."""
    if program.t_count > program.ancilla_budget:
        raise ProtocolError(
            f"ancilla exhausted: program needs {program.t_count} T gates "
            f"but the budget is {program.ancilla_budget}"
        )
    session = SharedSecret(
        [q for _, q in program.secrets],
        tree,
        ancillas=program.ancilla_budget,
        engine=engine,
        seed=seed,
    )
    measurements = []
    for op, wires in program.ops:
        if op in ("X", "Z", "H"):
            session.logical_gate(op, wires[0])
        elif op == "S":
            session.logical_s(wires[0])
        elif op == "T":
            session.logical_t(wires[0])
        elif op == "CNOT":
            session.logical_cnot(*wires)
        elif op == "MEASZ":
            rec = session.logical_measure_z(wires[0])
            measurements.append((program.secrets[wires[0]][0], rec.parity))
    return RunResult(session, tuple(session.records), tuple(measurements))


# -- scheme verification -----------------------------------------------------------------


@dataclass(frozen=True)
class SubsetVerdict:
    subset: int
    name: str
    authorized: bool
    passed: bool
    detail: str


@dataclass(frozen=True)
class VerifyReport:
    tree_leaves: int
    engine: str
    rows: tuple[SubsetVerdict, ...]

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.rows)


def verify_scheme(
    tree: SchemeTree,
    secrets=None,
    subsets=None,
    seed: int = 1,
    tolerance: float = 1e-9,
    independence_tol: float = 1e-10,
) -> VerifyReport:
    """Per-subset check of the sharing contract: authorized subsets recover
    with unit fidelity, unauthorized subsets have no supported logical
    representative, and (at sparse scale) secret-independent reduced states."""
    rng = np.random.default_rng(seed)
    if secrets is None:
        secrets = [SecretQubit.random(rng) for _ in range(3)]
    n = tree.player_count
    if subsets is None:
        subsets = range(1 << n)
    engine = "sparse" if tree.leaf_count <= MAX_QUBITS else "stabilizer"
    canon = canonical_tableau(tree)
    labels = tree.structure.subset_name if tree.structure else None
    rows = []
    for s in subsets:
        name = labels(s) if labels else bin(s)
        authorized = tree_authorized(tree, s)
        leaves = list(tree.leaves_of(s))
        if authorized:
            ok = True
            detail = "recovered"
            for secret in secrets:
                session = share(secret, tree, engine=engine,
                                seed=int(rng.integers(1 << 62)))
                result = session.recover(s)
                if result.fidelity < 1 - tolerance:
                    ok = False
                    detail = f"fidelity {result.fidelity:.12f} below bound"
                    break
            rows.append(SubsetVerdict(s, name, True, ok, detail))
        else:
            ok = not canon.leaks(leaves)
            detail = "no logical representative"
            if not ok:
                detail = "leaks a logical representative"
            elif engine == "sparse" and 0 < len(leaves) <= 14:
                rhos = []
                for secret in secrets:
                    session = share(secret, tree, engine="sparse",
                                    seed=int(rng.integers(1 << 62)))
                    rhos.append(session.sparse.partial_trace(leaves))
                worst = max(
                    rhos[0].max_abs_diff(other) for other in rhos[1:]
                )
                if worst > independence_tol:
                    ok = False
                    detail = f"reduced states differ by {worst:.3e}"
                else:
                    detail = "independent reduced states"
            rows.append(SubsetVerdict(s, name, False, ok, detail))
    return VerifyReport(tree.leaf_count, engine, tuple(rows))


def transcript_distance(
    tree: SchemeTree,
    subset: int,
    secret_a: SecretQubit,
    secret_b: SecretQubit,
    trials: int = 10_000,
    seed: int = 1,
) -> float:
    """Total variation distance between the subset's view of the teleportation
    transcript under two different secrets."""
    leaves = set(tree.leaves_of(subset))

    def histogram(secret, offset):
        counts: dict[tuple[int, ...], int] = {}
        for trial in range(trials):
            session = share_with_ancillas(
                [secret], tree, ancillas=1, seed=offset + trial
            )
            record = session.logical_t(0)
            view = tuple(bit for leaf, bit in record.leaf_outcomes if leaf in leaves)
            counts[view] = counts.get(view, 0) + 1
        return counts

    ha = histogram(secret_a, seed)
    hb = histogram(secret_b, seed + trials)
    keys = set(ha) | set(hb)
    return 0.5 * sum(abs(ha.get(k, 0) - hb.get(k, 0)) / trials for k in keys)
