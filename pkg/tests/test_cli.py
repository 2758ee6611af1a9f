import json

import pytest

from steaneshare.cli import main

S_23 = "players: A B C\nminimal: A B\nminimal: A C\nminimal: B C\n"
S_DISJOINT = "players: A B C D\nminimal: A B\nminimal: C D\n"
S_NOT_MAXIMAL = "players: A B C E\nminimal: A E\nminimal: B E\nminimal: A B C\n"
S_FIG5 = "players: A B C\nminimal: A B\nminimal: A C\n"
S_FIG9 = "players: A B C E\nminimal: A B C\nminimal: B E\nminimal: A E\n"
S_HUGE = "players: A B C D E F G\n" + "".join(
    f"minimal: {' '.join(c)}\n"
    for c in __import__("itertools").combinations("ABCDEFG", 4)
)


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestCheck:
    def test_example1_maximal(self, tmp_path, capsys):
        code = main(["check", write(tmp_path, "s.txt", S_23)])
        out = capsys.readouterr().out
        assert code == 0
        assert "admissible, maximal" in out
        assert "<AB, AC, BC>" in out

    def test_disjoint_rejected(self, tmp_path, capsys):
        code = main(["check", write(tmp_path, "s.txt", S_DISJOINT)])
        assert code == 1
        assert "disjoint" in capsys.readouterr().out

    def test_not_maximal(self, tmp_path, capsys):
        code = main(["check", write(tmp_path, "s.txt", S_NOT_MAXIMAL)])
        assert code == 0
        assert "not maximal" in capsys.readouterr().out

    def test_parse_error(self, tmp_path, capsys):
        code = main(["check", write(tmp_path, "s.txt", "minimal: A\n")])
        assert code == 2
        assert "line 1" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["check", str(tmp_path / "none.txt")]) == 2

    def test_json(self, tmp_path, capsys):
        main(["check", "--json", write(tmp_path, "s.txt", S_23)])
        data = json.loads(capsys.readouterr().out)
        assert data["maximal"] is True
        assert data["minimal_sets"] == ["AB", "AC", "BC"]


class TestCompile:
    def test_fig5_25_leaves(self, tmp_path, capsys):
        out = str(tmp_path / "t.txt")
        code = main(["compile", write(tmp_path, "s.txt", S_FIG5), "-o", out])
        assert code == 0
        assert "leaves: 25 (12 discarded)" in capsys.readouterr().out

    def test_23_seven_leaves(self, tmp_path, capsys):
        out = str(tmp_path / "t.txt")
        code = main(["compile", write(tmp_path, "s.txt", S_23), "-o", out])
        assert code == 0
        assert "leaves: 7 (0 discarded)" in capsys.readouterr().out

    def test_inadmissible(self, tmp_path):
        out = str(tmp_path / "t.txt")
        assert main(["compile", write(tmp_path, "s.txt", S_DISJOINT), "-o", out]) == 1

    def test_caps_exit3(self, tmp_path):
        out = str(tmp_path / "t.txt")
        assert main(["compile", write(tmp_path, "s.txt", S_HUGE), "-o", out]) == 3

    def test_deterministic_output(self, tmp_path, capsys):
        src = write(tmp_path, "s.txt", S_FIG9)
        out1, out2 = str(tmp_path / "a.txt"), str(tmp_path / "b.txt")
        main(["compile", src, "-o", out1])
        main(["compile", src, "-o", out2])
        capsys.readouterr()
        assert open(out1).read() == open(out2).read()


@pytest.fixture
def tree23(tmp_path):
    src = write(tmp_path, "s23.txt", S_23)
    out = str(tmp_path / "t23.txt")
    assert main(["compile", src, "-o", out]) == 0
    return out


class TestShareRecover:
    def test_share_dump_has_8_lines(self, tree23, tmp_path, capsys):
        out = str(tmp_path / "state.txt")
        code = main(["share", tree23, "--secret", "1", "0", "0", "0", "-o", out])
        assert code == 0
        assert "sparse engine" in capsys.readouterr().out
        lines = open(out).read().splitlines()
        assert len(lines) == 8

    def test_recover_round_trip(self, tree23, tmp_path, capsys):
        state = str(tmp_path / "state.txt")
        main(["share", tree23, "--secret", "0.6", "0", "0", "0.8", "-o", state])
        capsys.readouterr()
        code = main([
            "recover", tree23, state, "--set", "B,C",
            "--expect", "0.6", "0", "0", "0.8", "--json",
        ])
        out = capsys.readouterr().out
        assert code == 0
        data = json.loads(out)
        assert data["fidelity"] > 1 - 1e-9
        assert data["purity"] > 1 - 1e-9

    def test_recover_unauthorized(self, tree23, tmp_path, capsys):
        state = str(tmp_path / "state.txt")
        main(["share", tree23, "--secret", "1", "0", "0", "0", "-o", state])
        capsys.readouterr()
        code = main(["recover", tree23, state, "--set", "A"])
        assert code == 1
        assert "not authorized" in capsys.readouterr().err

    def test_share_deterministic(self, tree23, tmp_path, capsys):
        a, b = str(tmp_path / "a.txt"), str(tmp_path / "b.txt")
        main(["share", tree23, "--secret", "0.6", "0", "0.8", "0", "-o", a])
        main(["share", tree23, "--secret", "0.6", "0", "0.8", "0", "-o", b])
        capsys.readouterr()
        assert open(a).read() == open(b).read()

    def test_stabilizer_share_dump(self, tree23, tmp_path, capsys):
        out = str(tmp_path / "state.txt")
        code = main(["share", tree23, "--engine", "stabilizer",
                     "--secret", "1", "0", "0", "0", "-o", out])
        assert code == 0
        text = open(out).read()
        assert "LX_0 " in text
        assert "register 1 0" in text


class TestRun:
    def test_demo_circuit(self, tree23, tmp_path, capsys):
        circuit = write(
            tmp_path, "c.txt",
            "secret q0 1 0 0 0\nancilla t 1\nH q0\nT q0\nH q0\nMEASZ q0\n",
        )
        code = main(["run", circuit, "--tree", tree23, "--seed", "7", "--json"])
        assert code == 0
        data = json.loads(capsys.readouterr().out)
        assert data["measurements"]["q0"] in (0, 1)
        assert len(data["records"]) == 2  # teleport readout + final readout

    def test_budget_exhaustion(self, tree23, tmp_path, capsys):
        circuit = write(
            tmp_path, "c.txt",
            "secret q0 1 0 0 0\nancilla t 1\nT q0\nT q0\n",
        )
        code = main(["run", circuit, "--tree", tree23])
        assert code == 1
        assert "ancilla exhausted" in capsys.readouterr().err

    def test_run_deterministic(self, tree23, tmp_path, capsys):
        circuit = write(
            tmp_path, "c.txt",
            "secret q0 0 0 1 0\nancilla t 1\nH q0\nT q0\nMEASZ q0\n",
        )
        main(["run", circuit, "--tree", tree23, "--seed", "3"])
        first = capsys.readouterr().out
        main(["run", circuit, "--tree", tree23, "--seed", "3"])
        assert capsys.readouterr().out == first


class TestVerify:
    def test_tree23_all_pass(self, tree23, capsys):
        code = main(["verify", tree23, "--seed", "2"])
        out = capsys.readouterr().out
        assert code == 0
        assert "8/8 PASS" in out

    def test_fig9_16_of_16(self, tmp_path, capsys):
        src = write(tmp_path, "s.txt", S_FIG9)
        tree = str(tmp_path / "t.txt")
        main(["compile", src, "-o", tree])
        capsys.readouterr()
        code = main(["verify", tree, "--seed", "2"])
        out = capsys.readouterr().out
        assert code == 0
        assert "16/16 PASS" in out

    def test_sampled_subsets(self, tmp_path, capsys):
        src = write(tmp_path, "s.txt", S_FIG5)
        tree = str(tmp_path / "t.txt")
        main(["compile", src, "-o", tree])
        capsys.readouterr()
        code = main(["verify", tree, "--sample", "4", "--seed", "9", "--json"])
        data = json.loads(capsys.readouterr().out)
        assert code == 0
        assert len(data["rows"]) == 4


def test_version_line(capsys):
    assert main(["--version"]) == 0
    out = capsys.readouterr().out
    assert "steaneshare" in out and "kernels:" in out


def test_no_command_shows_help(capsys):
    assert main([]) == 2
