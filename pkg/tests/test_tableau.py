import numpy as np
import pytest

from steaneshare.scheme import Leaf, SchemeTree, build_23, build_omega
from steaneshare.sparse import SecretQubit, SparseState
from steaneshare.steane import CODEWORDS_0, word_to_int
from steaneshare.tableau import (
    HybridTableau,
    PauliWord,
    TableauError,
    conjugate_word,
)

from conftest import random_secret

T23 = build_23()
LEAF_TREE = SchemeTree.from_root(Leaf(0), ("A",), None)

# 0-based generator supports of the one-block code
GEN_SUPPORTS = [(0, 1, 2, 3), (0, 1, 4, 5), (0, 2, 4, 6)]


def shared(alpha, beta, seed=1):
    s = SparseState.from_secret(SecretQubit(alpha, beta), seed=seed)
    s.encode_steane(0)
    return s


def sparse_expectation(state: SparseState, word: PauliWord) -> complex:
    """Independent oracle: <psi|P|psi> computed term by term."""
    amps = {int(k): complex(a) for k, a in zip(state.keys, state.amps)}
    xmask = int(word.x[0])
    zmask = int(word.z[0])
    total = 0.0 + 0j
    for k, a in amps.items():
        phase = (1j ** word.phase) * ((-1) ** ((zmask & k).bit_count() & 1))
        partner = amps.get(k ^ xmask)
        if partner is not None:
            total += np.conj(partner) * phase * a
    return total


class TestPauliWord:
    def test_mul_y_convention(self):
        n = 1
        x = PauliWord.single(n, "X", 0)
        z = PauliWord.single(n, "Z", 0)
        y = PauliWord.single(n, "Y", 0)
        xz = x.mul(z)
        assert xz.phase == 0  # X*Z stored canonically
        assert y.phase == 1  # Y = i X Z
        zx = z.mul(x)
        assert zx.phase == 2  # Z*X = -XZ

    def test_commutation(self):
        x = PauliWord.single(2, "X", 0)
        z0 = PauliWord.single(2, "Z", 0)
        z1 = PauliWord.single(2, "Z", 1)
        assert not x.commutes(z0)
        assert x.commutes(z1)
        xx = PauliWord.x_on(2, [0, 1])
        zz = PauliWord.z_on(2, [0, 1])
        assert xx.commutes(zz)

    def test_sign_and_string(self):
        y = PauliWord.single(3, "Y", 1)
        assert y.sign == 1
        assert y.to_string() == "+IYI"
        my = y.copy()
        my.phase = (my.phase + 2) % 4
        assert my.sign == -1
        assert my.to_string() == "-IYI"


class TestConjugation:
    """Single-gate conjugation rules, checked against explicit matrices via
    the sparse engine."""

    @pytest.mark.parametrize("gate", ["X", "Z", "H", "S", "SDG"])
    @pytest.mark.parametrize("p", ["X", "Y", "Z"])
    def test_single_qubit_rules(self, gate, p):
        word = PauliWord.single(1, p, 0)
        out = conjugate_word(word, gate, (0,))
        rng = np.random.default_rng(11)
        for _ in range(4):
            a, b = random_secret(rng)
            s = SparseState.from_secret(SecretQubit(a, b))
            before = sparse_expectation(s, word)
            s.apply_1q(gate, 0)
            after = sparse_expectation(s, out)
            assert after == pytest.approx(before, abs=1e-12)

    @pytest.mark.parametrize("p", ["XI", "IX", "ZI", "IZ", "YY", "XZ", "ZX"])
    def test_cnot_rules(self, p):
        word = PauliWord.identity(2)
        for q, letter in enumerate(p):
            if letter != "I":
                word = word.mul(PauliWord.single(2, letter, q))
        out = conjugate_word(word, "CNOT", (0, 1))
        rng = np.random.default_rng(13)
        for _ in range(4):
            (a, b), (c, d) = random_secret(rng), random_secret(rng)
            s = SparseState(2, [0, 1, 2, 3],
                            np.kron([a, b], [c, d])[[0, 2, 1, 3]],
                            np.random.default_rng(0))
            before = sparse_expectation(s, word)
            s.apply_cnot(0, 1)
            after = sparse_expectation(s, out)
            assert after == pytest.approx(before, abs=1e-12)


class TestEmbedding:
    def test_single_block_generators(self):
        tab = HybridTableau.embed_encoding([T23])
        assert tab.n == 7
        assert tab.n_gens == 6
        got_x = set()
        got_z = set()
        for i in range(tab.n_gens):
            w = tab.row_word(i)
            supp = w.support()
            if w.x.any():
                got_x.add(supp)
            else:
                got_z.add(supp)
        assert got_x == set(GEN_SUPPORTS)
        assert got_z == set(GEN_SUPPORTS)
        tab.validate()

    def test_lifted_logicals(self):
        tab = HybridTableau.embed_encoding([T23])
        assert tab.logical_x().support() == tuple(range(7))
        assert not tab.logical_x().z.any()
        assert tab.logical_z().support() == tuple(range(7))
        assert not tab.logical_z().x.any()

    def test_generators_stabilize_codewords(self):
        # brute-force oracle: every generator fixes both logical codeword states
        tab = HybridTableau.embed_encoding([T23])
        for secret in ((1, 0), (0, 1)):
            s = shared(*secret)
            for i in range(tab.n_gens):
                assert sparse_expectation(s, tab.row_word(i)) == pytest.approx(1.0)

    def test_omega3_counts(self):
        tab = HybridTableau.embed_encoding([build_omega(3)])
        assert tab.n == 13
        assert tab.n_gens == 12
        tab.validate()

    def test_register_holds_secret(self):
        reg = np.array([0.0, 1.0], np.complex128)
        tab = HybridTableau.embed_encoding([build_omega(3)], register=reg)
        assert np.allclose(tab.register, reg)


class TestMeasure:
    def test_logical_z_deterministic_zero(self):
        tab = HybridTableau.embed_encoding([T23], register=[1, 0])
        out = tab.measure_pauli(tab.logical_z())
        assert out == 0
        assert tab.k == 0

    def test_logical_z_deterministic_one(self):
        tab = HybridTableau.embed_encoding([T23], register=[0, 1])
        assert tab.measure_pauli(tab.logical_z()) == 1

    def test_generator_word_is_case_a(self):
        tab = HybridTableau.embed_encoding([T23], register=[1, 0])
        g = tab.row_word(0)
        assert tab.measure_pauli(g) == 0
        neg = g.copy()
        neg.phase = (neg.phase + 2) % 4
        assert tab.measure_pauli(neg) == 1

    def test_single_qubit_z_is_uniform(self):
        # matches the sparse marginal: qubit 5 of a codeword state is fair
        hits = 0
        for seed in range(400):
            tab = HybridTableau.embed_encoding([T23], register=[1, 0], seed=seed)
            hits += tab.measure_pauli(PauliWord.single(7, "Z", 4))
        assert abs(hits / 400 - 0.5) < 0.1

    def test_bitwise_parity_reads_logical_value(self):
        for seed in range(50):
            tab = HybridTableau.embed_encoding([T23], register=[0, 1], seed=seed)
            bits = [tab.measure_pauli(PauliWord.single(7, "Z", q)) for q in range(7)]
            assert sum(bits) % 2 == 1

    def test_forced_outcome_respected(self):
        tab = HybridTableau.embed_encoding([T23], register=[1, 0], seed=0)
        out = tab.measure_pauli(PauliWord.single(7, "Z", 4), force=1)
        assert out == 1
        # the measured qubit now reads 1 deterministically
        assert tab.measure_pauli(PauliWord.single(7, "Z", 4)) == 1

    def test_measure_identity_rejected(self):
        tab = HybridTableau.embed_encoding([T23])
        with pytest.raises(TableauError):
            tab.measure_pauli(PauliWord.identity(7))


class TestBellCaseC:
    """Entangling two degenerate blocks exercises the register-rebasing path."""

    def build(self, seed=0):
        t = SchemeTree.from_root(Leaf(0), ("A",), None)
        tab = HybridTableau.embed_encoding([t, t], register=[1, 0, 0, 0], seed=seed)
        tab.apply_clifford("H", 0)
        tab.apply_clifford("CNOT", 0, 1)
        return tab

    @pytest.mark.parametrize("outcome", [0, 1])
    def test_collapse_correlates_partner(self, outcome):
        tab = self.build()
        got = tab.measure_pauli(PauliWord.single(2, "Z", 0), force=outcome)
        assert got == outcome
        assert tab.k == 1
        z1 = tab.expectation(PauliWord.single(2, "Z", 1))
        assert z1 == pytest.approx((-1.0) ** outcome)

    def test_outcome_distribution(self):
        hits = 0
        for seed in range(400):
            tab = self.build(seed)
            hits += tab.measure_pauli(PauliWord.single(2, "Z", 0))
        assert abs(hits / 400 - 0.5) < 0.1

    def test_expectation_matches_sparse(self):
        tab = self.build()
        s = SparseState(2, [0], [1.0], np.random.default_rng(0))
        s.apply_1q("H", 0)
        s.apply_cnot(0, 1)
        for kind, q in (("X", 0), ("Z", 0), ("X", 1), ("Z", 1)):
            w = PauliWord.single(2, kind, q)
            assert tab.expectation(w) == pytest.approx(sparse_expectation(s, w), abs=1e-12)
        xx = PauliWord.x_on(2, [0, 1])
        zz = PauliWord.z_on(2, [0, 1])
        assert tab.expectation(xx) == pytest.approx(1.0)
        assert tab.expectation(zz) == pytest.approx(1.0)


def xtype_coset():
    """All eight X-type words acting as the logical X on one block."""
    gens = [word_to_int(w) for w in ("1111000", "1100110", "1010101")]
    base = word_to_int("1111111")
    masks = []
    for c in range(8):
        m = base
        for i in range(3):
            if (c >> i) & 1:
                m ^= gens[i]
        masks.append(m)
    return masks


class TestRepresentatives:
    def test_x_rep_on_bc(self):
        tab = HybridTableau.embed_encoding([T23])
        rep = tab.find_logical_representative("X", [4, 5, 6])
        assert rep.support() == (4, 5, 6)
        assert not rep.z.any()
        # brute-force oracle over the coset
        want = [m for m in xtype_coset() if m & 0b0001111 == 0]
        assert [int(rep.x[0])] == want

    def test_x_rep_on_ab(self):
        tab = HybridTableau.embed_encoding([T23])
        rep = tab.find_logical_representative("X", [0, 1, 2, 3, 4])
        assert rep.support() == (0, 3, 4)

    def test_no_rep_on_single_qubit(self):
        tab = HybridTableau.embed_encoding([T23])
        assert tab.find_logical_representative("X", [4]) is None
        assert tab.find_logical_representative("Z", [4]) is None

    def test_oracle_agreement_all_subsets(self):
        tab = HybridTableau.embed_encoding([T23])
        coset = xtype_coset()
        for subset in range(1 << 7):
            allowed = [q for q in range(7) if (subset >> q) & 1]
            rep = tab.find_logical_representative("X", allowed)
            want = [m for m in coset if all(((m >> q) & 1) == 0 or q in allowed
                                            for q in range(7))]
            if rep is None:
                assert not want
            else:
                assert int(rep.x[0]) in want


class TestRecoverableLeaks:
    def test_23_shares(self):
        tab = HybridTableau.embed_encoding([T23])
        a, b, c = (0, 1, 2, 3), (4,), (5, 6)
        assert tab.recoverable(b + c)
        assert tab.recoverable(a + b)
        assert tab.recoverable(a + c)
        for solo in (a, b, c):
            assert not tab.recoverable(solo)
            assert not tab.leaks(solo)

    def test_maximal_split_and_no_partial_leak(self):
        tab = HybridTableau.embed_encoding([T23])
        for subset in range(1 << 7):
            qs = [q for q in range(7) if (subset >> q) & 1]
            comp = [q for q in range(7) if q not in qs]
            assert tab.recoverable(qs) != tab.recoverable(comp)
            assert tab.leaks(qs) == tab.recoverable(qs)


class TestSynthesis:
    @pytest.mark.parametrize(
        "support", [(4, 5, 6), (0, 1, 2, 3, 4), (0, 1, 2, 3, 5, 6), tuple(range(7))]
    )
    def test_plan_recovers_secret(self, support):
        tab = HybridTableau.embed_encoding([T23])
        plan = tab.synthesize_recovery(support)
        assert plan.target in support
        assert all(q in support for _, qs in plan.gates for q in qs)
        rng = np.random.default_rng(23)
        for _ in range(4):
            a, b = random_secret(rng)
            s = shared(a, b)
            for gate, qs in plan.gates:
                s.apply_gate(gate, *qs)
            rho = s.partial_trace([plan.target]).to_dense()
            vec = np.array([a, b])
            fid = float(np.real(np.conj(vec) @ rho @ vec))
            assert fid > 1 - 1e-9

    def test_unauthorized_rejected(self):
        tab = HybridTableau.embed_encoding([T23])
        with pytest.raises(TableauError, match="not recoverable"):
            tab.synthesize_recovery([0, 1, 2, 3])

    def test_plan_on_tableau_moves_logical(self):
        tab = HybridTableau.embed_encoding([T23], register=[0.6, 0.8])
        plan = tab.synthesize_recovery([4, 5, 6])
        tab.apply_plan(plan)
        rho = tab.reduced_density([plan.target])
        vec = np.array([0.6, 0.8])
        assert float(np.real(np.conj(vec) @ rho @ vec)) > 1 - 1e-9


class TestValidationAndDump:
    def test_validate_after_random_cliffords(self):
        rng = np.random.default_rng(31)
        tab = HybridTableau.embed_encoding([T23], register=[0.8, 0.6j])
        for _ in range(60):
            roll = rng.random()
            if roll < 0.3:
                q = int(rng.integers(7))
                t = int((q + 1 + rng.integers(6)) % 7)
                tab.apply_clifford("CNOT", q, t)
            else:
                g = ["X", "Z", "H", "S", "SDG"][rng.integers(5)]
                tab.apply_clifford(g, int(rng.integers(7)))
        tab.validate()

    def test_dump_format(self):
        tab = HybridTableau.embed_encoding([T23])
        lines = tab.dumps().splitlines()
        assert len(lines) == 8
        assert lines[0].startswith(("+", "-"))
        assert lines[6].startswith("LX_0 ")
        assert lines[7].startswith("LZ_0 ")
        assert "X" in lines[6] and "Z" in lines[7]

    def test_register_dim_guard(self):
        with pytest.raises(TableauError):
            HybridTableau.embed_encoding([T23], register=[1, 0, 0])
