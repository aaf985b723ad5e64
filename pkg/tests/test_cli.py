import json

import pytest

from approxconvex.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_lines(stdout):
    return [json.loads(line) for line in stdout.strip().splitlines()]


class TestReports:
    def test_kappa_example(self, capsys):
        code, out, _ = run_cli(capsys, "kappa", "--n", "7")
        assert code == 0
        (rep,) = parse_lines(out)
        assert set(rep) == {"command", "params", "results", "pass", "elapsed_ms"}
        assert rep["command"] == "kappa"
        assert rep["results"] == {"lower": 3, "upper": 3, "formula": 3}
        assert rep["pass"] is True

    def test_euclid_set_example(self, capsys):
        code, out, _ = run_cli(capsys, "euclid-set", "--n", "16")
        assert code == 0
        (rep,) = parse_lines(out)
        assert rep["results"]["M"] == pytest.approx(13.589148804608305)
        assert rep["results"]["witness_distance"] == pytest.approx(4.0, abs=1e-9)
        assert rep["pass"] is True

    def test_tree_haus_example(self, capsys):
        code, out, _ = run_cli(capsys, "tree-haus", "--M", "2", "--N", "128")
        assert code == 0
        (rep,) = parse_lines(out)
        assert rep["results"]["bound"] == pytest.approx(3.5)
        assert rep["results"]["certified"] is True

    def test_determinism_modulo_timing(self, capsys):
        def snap():
            code, out, _ = run_cli(
                capsys, "entropy-defect", "--n", "4", "--samples", "500", "--seed", "7"
            )
            assert code == 0
            line = out.strip()
            rep = json.loads(line)
            del rep["elapsed_ms"]
            # Compare raw bytes up to the timing field for bit-stability.
            prefix = line.split(',"elapsed_ms"')[0]
            return rep, prefix

        first, praw1 = snap()
        second, praw2 = snap()
        assert first == second
        assert praw1 == praw2

    def test_seventeen_digit_floats(self, capsys):
        _, out, _ = run_cli(capsys, "kappa", "--n", "2")
        assert "1.6666666666666667" in out


class TestExitCodes:
    def test_pass_is_zero(self, capsys):
        code, _, _ = run_cli(capsys, "lowbound3", "--n", "100")
        assert code == 0

    def test_violation_without_check_still_zero(self, capsys):
        code, out, _ = run_cli(capsys, "l1-bound", "--n", "2", "--eps", "1")
        assert code == 0
        (rep,) = parse_lines(out)
        assert rep["pass"] is False

    def test_violation_with_check_is_two(self, capsys):
        code, _, _ = run_cli(capsys, "l1-bound", "--n", "2", "--eps", "1", "--paper-check")
        assert code == 2

    def test_usage_error_is_one(self, capsys):
        code, _, err = run_cli(capsys, "typep-bound", "--p", "2", "--d", "1")
        assert code == 1
        assert "d >= 2" in err

    def test_unknown_command(self, capsys):
        code, _, err = run_cli(capsys, "no-such-thing")
        assert code == 1
        assert "usage error" in err

    def test_missing_required(self, capsys):
        code, _, err = run_cli(capsys, "euclid-set")
        assert code == 1

    def test_bad_sweep(self, capsys):
        code, _, err = run_cli(capsys, "kappa", "--sweep", "5")
        assert code == 1


class TestFormats:
    def test_csv_sweep(self, capsys):
        code, out, _ = run_cli(capsys, "kappa", "--sweep", "1:4", "--format", "csv")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0].startswith("command,n,")
        assert len(lines) == 5
        assert lines[1].split(",")[0] == "kappa"

    def test_json_sweep_lines(self, capsys):
        code, out, _ = run_cli(capsys, "lowbound3", "--sweep", "20:24")
        assert code == 0
        reps = parse_lines(out)
        assert [r["params"]["n"] for r in reps] == [20, 21, 22, 23, 24]
        assert all(r["pass"] for r in reps)

    def test_sweep_rejected_elsewhere(self, capsys):
        code, _, err = run_cli(capsys, "euclid-set", "--n", "4", "--sweep", "1:2")
        assert code == 1


class TestEnvironment:
    def test_tol_env_override(self, capsys, monkeypatch):
        monkeypatch.setenv("APPROXCONVEX_TOL", "1e-6")
        code, out, _ = run_cli(capsys, "kappa", "--n", "3")
        assert code == 0
        (rep,) = parse_lines(out)
        assert rep["params"]["tol"] == pytest.approx(1e-6)

    def test_tol_flag_beats_env(self, capsys, monkeypatch):
        monkeypatch.setenv("APPROXCONVEX_TOL", "1e-6")
        code, out, _ = run_cli(capsys, "kappa", "--n", "3", "--tol", "1e-12")
        (rep,) = parse_lines(out)
        assert rep["params"]["tol"] == pytest.approx(1e-12)


class TestCommandSweepCoverage:
    @pytest.mark.parametrize(
        "argv",
        [
            ("entropy-defect", "--n", "3", "--samples", "300"),
            ("l1-bound", "--n", "64", "--eps", "0.5"),
            ("general-bound", "--n", "64", "--eps", "1", "--dist", "2.0"),
            ("lp-set", "--n", "3", "--p", "2", "--grid", "6"),
            ("simplex-face", "--n", "2", "--trials", "3"),
            ("best-subset", "--n", "2", "--trials", "2"),
            ("opt-entropy", "--n", "4"),
            ("typep-bound", "--p", "1.5", "--d", "3"),
            ("tree-norm", "--M", "2", "--samples", "4"),
            ("tree-jensen", "--M", "1", "--pairs", "4", "--level", "4"),
            ("tree-haus", "--M", "1", "--N", "32"),
        ],
    )
    def test_all_commands_pass(self, capsys, argv):
        code, out, _ = run_cli(capsys, *argv, "--paper-check")
        assert code == 0, out
        for rep in parse_lines(out):
            assert rep["pass"] is True
