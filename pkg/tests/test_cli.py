import json

import pytest

from clocknet.cli import main
from clocknet.constructions import paper_matrix
from clocknet.linalg import parse_matrix


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def matrix_file(tmp_path):
    def write(name):
        path = tmp_path / f"{name}.txt"
        path.write_text(paper_matrix(name).to_text())
        return path

    return write


class TestMatrices:
    def test_gim(self, capsys):
        assert run(capsys, "gim", 4, 3)[1] == "1 1 1\n1 0 0\n0 1 0\n0 0 1\n"

    def test_gim_square(self, capsys):
        out = run(capsys, "gim", 5, 5)[1]
        assert parse_matrix(out).is_identity()

    def test_full_clock(self, capsys):
        out = run(capsys, "full-clock", 7, 2)[1].splitlines()
        assert len(out) == 9 and out[-2:] == ["1 0", "0 1"]

    def test_full_clock_csv(self, capsys):
        assert run(capsys, "full-clock", 2, 2, "--format", "csv")[1] == "1,0\n0,1\n1,0\n0,1\n"

    def test_bad_dimensions(self, capsys):
        code, _, err = run(capsys, "full-clock", 30, 43)
        assert code == 2 and "n >= r" in err


class TestValidate:
    def test_valid(self, capsys, matrix_file):
        code, out, _ = run(capsys, "validate", matrix_file("A7"), "1,3", 2)
        assert code == 0 and out.startswith("VALID\n")
        assert "ends in I_r: yes" in out

    def test_invalid(self, capsys, matrix_file):
        code, out, _ = run(capsys, "validate", matrix_file("A7"), "1,3", 3)
        assert code == 0 and out == "INVALID row 7\n"

    def test_universal(self, capsys, matrix_file):
        code, out, _ = run(capsys, "validate", matrix_file("M14"), "1,3", "--universal")
        assert code == 0 and out.startswith("VALID")

    def test_json(self, capsys, matrix_file):
        out = json.loads(run(capsys, "validate", matrix_file("B8"), "1,3", 3, "--format", "json")[1])
        assert out["verdict"] == "VALID" and out["solves"] is True
        assert set(out) >= {"command", "params", "verdict", "witness_path"}

    def test_missing_file(self, capsys, tmp_path):
        assert run(capsys, "validate", tmp_path / "nope.txt", "1,3", 2)[0] == 2

    def test_missing_modulus(self, capsys, matrix_file):
        assert run(capsys, "validate", matrix_file("A7"), "1,3")[0] == 2


class TestSolve:
    def test_exhaustive(self, capsys):
        code, out, _ = run(capsys, "solve", 11, "1,3", 2, "--method", "exhaustive")
        assert code == 0 and out == "UNSOLVABLE (exhaustive)\n"

    def test_solvable_with_witness(self, capsys, tmp_path):
        path = tmp_path / "w.txt"
        code, out, _ = run(capsys, "solve", 7, "1,3", 2, "--witness", path, "--format", "json")
        data = json.loads(out)
        assert code == 0 and data["verdict"] == "SOLVABLE" and data["witness_path"] == str(path)
        code, out, _ = run(capsys, "validate", path, "1,3", 2)
        assert out.startswith("VALID")

    def test_gcd(self, capsys):
        code, out, _ = run(capsys, "solve", 5, "2,4", 2, "--format", "json")
        data = json.loads(out)
        assert code == 0 and data["verdict"] == "UNSOLVABLE" and data["method"] == "gcd"

    def test_auto_escalates(self, capsys):
        assert run(capsys, "solve", 8, "1,3", 2)[1] == "UNSOLVABLE (exhaustive)\n"

    def test_linear_only(self, capsys):
        assert run(capsys, "solve", 7, "1,3", 3)[1] == "NOT-LINEARLY-SOLVABLE (linear)\n"
        assert run(capsys, "solve", 8, "1,3", 2, "--method", "linear")[1] == "NOT-LINEARLY-SOLVABLE (linear)\n"

    def test_exhaustive_out_of_range(self, capsys):
        assert run(capsys, "solve", 7, "1,3", 3, "--method", "exhaustive")[0] == 2

    def test_budget_exit(self, capsys):
        code, _, err = run(capsys, "solve", 12, "1,3", 3, "--budget", 10)
        assert code == 3 and "budget" in err

    def test_bad_offsets(self, capsys):
        assert run(capsys, "solve", 7, "1,x", 2)[0] == 2
        assert run(capsys, "solve", 2, "1,3", 2)[0] == 2


class TestTable:
    def test_fig4(self, capsys):
        out = run(capsys, "table", "1,3", "2,3", "4..12")[1]
        assert out == (
            "n,4,5,6,7,8,9,10,11,12\n"
            "s=2,✗,✗,✓,✓,✗,✓,✓,✗,✓\n"
            "s=3,✗,✗,✓,✗,✓,✓,✓,✓,✓\n"
        )

    def test_full_clock_row(self, capsys):
        out = run(capsys, "table", "1,2", "2", "2..10")[1].splitlines()
        assert out[1] == "s=2," + ",".join(["✓"] * 9)

    def test_empty_range(self, capsys):
        code, out, _ = run(capsys, "table", "1,3", "2", "5..4")
        assert code == 0 and out == ""

    def test_json(self, capsys):
        data = json.loads(run(capsys, "table", "1,3", "2", "6..8", "--format", "json")[1])
        assert data["verdict"] == {"2": [True, True, False]}


class TestFactorize:
    def test_24(self, capsys):
        out = run(capsys, "factorize", 24, "1,2")[1].splitlines()
        assert out[0] == "# n=24 R=1,2"
        assert len(out) == 26 and out[-1] == "VERIFIED-INTEGER (24 atomics)"

    def test_81(self, capsys):
        assert run(capsys, "factorize", 81, "1,3")[1].splitlines()[-1] == "VERIFIED-INTEGER (81 atomics)"

    def test_below_threshold(self, capsys):
        code, _, err = run(capsys, "factorize", 4, "1,3")
        assert code == 2 and "threshold 36" in err

    def test_multiple_of_r_needs_no_toggles(self, capsys):
        # P^3 = I, so length 3 is reachable with three shifts
        out = run(capsys, "factorize", 3, "1,3")[1].splitlines()
        assert out[1:4] == ["alpha_1=0 alpha_3=1"] * 3 and out[-1].startswith("VERIFIED-INTEGER")


class TestGraphs:
    def test_iso(self, capsys):
        assert run(capsys, "iso", 5, "1,3", "1,2", 2)[1] == "ISOMORPHIC\n"
        assert run(capsys, "iso", 11, "1,4", "1,3", 3)[1] == "ISOMORPHIC\n"
        assert run(capsys, "iso", 5, "1,3", "1,2", 3)[1] == "NOT-ISOMORPHIC-UNDER-MAP\n"

    def test_iso_non_invertible(self, capsys):
        code, out, _ = run(capsys, "iso", 6, "1", "1", 2)
        assert code == 0 and out.startswith("NOT-ISOMORPHIC-UNDER-MAP")

    def test_digraph(self, capsys):
        out = run(capsys, "digraph", 5, "1,3", "--identify")[1]
        assert out.startswith("digraph clock {") and out.count("->") == 10

    def test_network_dot(self, capsys):
        out = run(capsys, "digraph", 5, "1,3")[1]
        assert out.count("->") == 10 and "// intermediate" in out


class TestBounds:
    def test_solvable(self, capsys):
        assert run(capsys, "bounds", 7, "1,3", 2)[1] == "gn(G_N,2) = 3\nb(G_N,2) = 4\n"

    def test_unsolvable(self, capsys):
        assert run(capsys, "bounds", 11, "1,3", 2)[1].splitlines()[0] == "gn(G_N,2) < 3"

    def test_no_search(self, capsys):
        assert run(capsys, "bounds", 7, "1,3", 2, "--no-search")[1] == "gn(G_N,2) <= 3\nb(G_N,2) >= 4\n"


def test_n0(capsys):
    out = run(capsys, "n0", "1,3", "2,3")[1]
    assert "max over listed s: 12" in out and "all-s upper bound: 12" in out


def test_deterministic(capsys, tmp_path):
    outputs = []
    for _ in range(2):
        path = tmp_path / "w.txt"
        run(capsys, "solve", 9, "1,3", 3, "--witness", path, "--format", "json")
        outputs.append((capsys.readouterr(), path.read_bytes()))
        outputs.append(run(capsys, "table", "1,3", "2,3", "4..20")[1])
    assert outputs[0] == outputs[2] and outputs[1] == outputs[3]


def test_output_file(capsys, tmp_path):
    path = tmp_path / "table.csv"
    assert run(capsys, "table", "1,3", "2", "6..7", "-o", path) == (0, "", "")
    assert path.read_text() == "n,6,7\ns=2,✓,✓\n"


def test_format_not_supported(capsys):
    assert run(capsys, "iso", 5, "1,3", "1,2", 2, "--format", "dot")[0] == 2


def test_usage_error(capsys):
    assert run(capsys, "table")[0] == 2
