import pathlib

import pytest

from hammcert.cli import format_record, main, parse_record

ZERO_PROBLEM = """\
[kernel]
name = focal
[gamma]
gamma1 = 1
gamma2 = t
dgamma1 = 0
dgamma2 = 1
[functionals]
h1 = U(1)
h2 = DU(0)
[nonlinearity]
f = u
[parameters]
lambda = 0
eta1 = 0
eta2 = 0
"""


@pytest.fixture()
def zero_problem(tmp_path) -> str:
    path = tmp_path / "empty.prob"
    path.write_text(ZERO_PROBLEM)
    return str(path)


def _variant(tmp_path, source: str, old: str, new: str, name: str = "variant.prob") -> str:
    text = pathlib.Path(source).read_text()
    assert old in text
    path = tmp_path / name
    path.write_text(text.replace(old, new))
    return str(path)


class TestRecordFormat:
    def test_round_trip(self):
        record = {
            "command": "certify-existence",
            "passed": True,
            "skipped": False,
            "r": 0.05,
            "value_branch": 0.7179376534313809,
            "n": 256,
            "label": "certified",
            "nothing": None,
        }
        assert parse_record(format_record(record)) == record

    def test_reads_commented_records(self):
        text = "# a=1\n# b=2.5\nnot a record line\n"
        assert parse_record(text) == {"a": 1, "b": 2.5}

    def test_format_is_stable(self):
        record = {"x": 1.5, "ok": True}
        text = format_record(record)
        assert text == "x=1.5\nok=true\n"
        assert format_record(parse_record(text)) == text


class TestCertifyExistence:
    def test_example1_passes(self, example1_path, tmp_path, capsys):
        out = tmp_path / "cert.rec"
        rc = main(["certify-existence", "--problem", example1_path,
                   "--r", "0.05", "--R", "1", "--out", str(out)])
        assert rc == 0
        stdout = capsys.readouterr().out
        assert "PASS (certified)" in stdout
        record = parse_record(out.read_text())
        assert record["verdict"] == "certified"
        assert record["passed"] is True
        assert record["value_branch"] == pytest.approx(0.7179376534313809, abs=1e-12)
        assert record["deriv_branch"] == pytest.approx(0.9055722765597317, abs=1e-12)
        assert record["idx0_value"] == 0.05
        assert record["K"] == 0.5 and record["Kstar"] == 1.0
        assert record["seed"] == 0

    def test_record_round_trips(self, example1_path, tmp_path):
        out = tmp_path / "cert.rec"
        main(["certify-existence", "--problem", example1_path,
              "--r", "0.05", "--R", "1", "--out", str(out)])
        text = out.read_text()
        assert format_record(parse_record(text)) == text

    def test_infeasible_point_fails(self, example1_path, tmp_path):
        doubled = _variant(tmp_path, example1_path, "lambda = 1/10", "lambda = 1/5")
        rc = main(["certify-existence", "--problem", doubled, "--r", "0.05", "--R", "1"])
        assert rc == 1

    def test_heuristic_when_no_declared_bounds(self, example1_path, tmp_path):
        nobounds = _variant(tmp_path, example1_path, "[bounds]", "[unused]")
        out = tmp_path / "cert.rec"
        rc = main(["certify-existence", "--problem", nobounds,
                   "--r", "0.04", "--R", "1", "--out", str(out)])
        assert rc == 0
        record = parse_record(out.read_text())
        assert record["verdict"] == "heuristic-pass"
        assert record["f_upper_R_rigor"] == "heuristic"

    def test_bad_radii_exit_2(self, example1_path):
        assert main(["certify-existence", "--problem", example1_path,
                     "--r", "1", "--R", "0.05"]) == 2

    def test_missing_file_exit_2(self):
        assert main(["certify-existence", "--problem", "no/such/file.prob",
                     "--r", "0.05", "--R", "1"]) == 2


class TestCertifyNonexistence:
    def test_example2_passes(self, example2_path, tmp_path, capsys):
        out = tmp_path / "cert.rec"
        rc = main(["certify-nonexistence", "--problem", example2_path, "--out", str(out)])
        assert rc == 0
        record = parse_record(out.read_text())
        assert record["lhs"] == pytest.approx(0.95, abs=1e-12)
        assert record["falsification"] == "consistent"
        assert "PASS" in capsys.readouterr().out

    def test_boundary_point_fails(self, example2_path, tmp_path):
        boundary = _variant(tmp_path, example2_path, "lambda = 1/3", "lambda = 2/3")
        boundary = _variant(tmp_path, boundary, "eta1 = 1/4", "eta1 = 0")
        boundary = _variant(tmp_path, boundary, "eta2 = 1/5", "eta2 = 0")
        assert main(["certify-nonexistence", "--problem", boundary]) == 1

    def test_falsified_witness(self, example1_path, tmp_path):
        # the exponential nonlinearity cannot satisfy f <= tau*u
        with_witness = _variant(tmp_path, example1_path, "[bounds]",
                                "[bounds]\ntau = 3\nxi1 = 1\nxi2 = 1")
        out = tmp_path / "cert.rec"
        rc = main(["certify-nonexistence", "--problem", with_witness, "--out", str(out)])
        assert rc == 1
        record = parse_record(out.read_text())
        assert record["verdict"] == "witness-falsified"
        assert record["counterexample_kind"] == "f-growth"

    def test_skip_falsification_recorded(self, example1_path, tmp_path):
        with_witness = _variant(tmp_path, example1_path, "[bounds]",
                                "[bounds]\ntau = 3\nxi1 = 1\nxi2 = 1")
        out = tmp_path / "cert.rec"
        rc = main(["certify-nonexistence", "--problem", with_witness,
                   "--skip-falsification", "--out", str(out)])
        record = parse_record(out.read_text())
        assert record["falsification"] == "skipped"
        assert rc in (0, 1)  # verdict comes from the inequality alone

    def test_no_witness_exit_2(self, example1_path):
        assert main(["certify-nonexistence", "--problem", example1_path]) == 2


class TestSolve:
    def test_zero_problem_converges_to_zero(self, zero_problem, tmp_path):
        out = tmp_path / "sol.csv"
        rc = main(["solve", "--problem", zero_problem, "--out", str(out)])
        assert rc == 0
        record = parse_record(out.read_text())
        assert record["found"] is True
        assert record["norm"] == 0.0
        rows = [line for line in out.read_text().splitlines()
                if line and not line.startswith("#")]
        assert rows[0] == "t,u,du"
        assert len(rows) == 1 + 256 + 1
        assert all(float(r.split(",")[1]) == 0.0 for r in rows[1:])

    def test_example1_with_annulus(self, example1_path, tmp_path):
        out = tmp_path / "sol.csv"
        rc = main(["solve", "--problem", example1_path, "--r", "0.05", "--R", "1",
                   "--starts", "4", "--out", str(out)])
        assert rc == 0
        record = parse_record(out.read_text())
        assert record["in_annulus"] is True
        assert record["residual"] <= 1e-10

    def test_annulus_without_solution_exits_1(self, example2_path):
        # only the trivial fixed point exists; requesting norm >= 0.05 must fail
        rc = main(["solve", "--problem", example2_path, "--r", "0.05", "--R", "1",
                   "--starts", "4"])
        assert rc == 1

    def test_r_without_R_is_usage_error(self, example1_path):
        assert main(["solve", "--problem", example1_path, "--r", "0.05"]) == 2


class TestValidate:
    def test_example_files_pass(self, example1_path, example2_path, capsys):
        assert main(["validate", "--problem", example1_path]) == 0
        assert main(["validate", "--problem", example2_path]) == 0
        assert "11/11 checks passed" in capsys.readouterr().out

    def test_sign_warning_exits_1(self, zero_problem, tmp_path, capsys):
        bad = _variant(tmp_path, zero_problem, "gamma2 = t", "gamma2 = -t")
        bad = _variant(tmp_path, bad, "dgamma2 = 1", "dgamma2 = -1")
        rc = main(["validate", "--problem", bad])
        assert rc == 1
        assert "WARN" in capsys.readouterr().out

    def test_derivative_mismatch_exits_2(self, zero_problem, tmp_path, capsys):
        bad = _variant(tmp_path, zero_problem, "dgamma2 = 1", "dgamma2 = 2")
        rc = main(["validate", "--problem", bad])
        assert rc == 2
        assert "gamma2" in capsys.readouterr().err


class TestSweepCommand:
    def test_example2_sweep(self, example2_path, tmp_path):
        out = tmp_path / "sweep.csv"
        rc = main(["sweep", "--problem", example2_path,
                   "--lambda", "0:1:4", "--eta1", "0:1:4", "--eta2", "0:1:4",
                   "--r", "0.05", "--R", "1", "--witness", "--out", str(out)])
        assert rc == 0
        text = out.read_text()
        record = parse_record(text)
        assert record["cells"] == 64
        assert record["conflict"] == 0
        rows = [line for line in text.splitlines() if line and not line.startswith("#")]
        assert rows[0].startswith("lambda,eta1,eta2,classification")
        assert len(rows) == 65
        first = rows[1].split(",")
        assert first[3] == "nonexistence"  # the origin

    def test_stdout_when_no_out(self, example2_path, capsys):
        rc = main(["sweep", "--problem", example2_path,
                   "--lambda", "0:0:1", "--eta1", "0:0:1", "--eta2", "0:0:1",
                   "--r", "0.05", "--R", "1"])
        assert rc == 0
        assert "lambda,eta1,eta2" in capsys.readouterr().out

    def test_bad_axis_exit_2(self, example2_path):
        assert main(["sweep", "--problem", example2_path, "--lambda", "0:1",
                     "--eta1", "0:1:2", "--eta2", "0:1:2",
                     "--r", "0.05", "--R", "1"]) == 2


class TestUsage:
    def test_no_command(self):
        assert main([]) == 2

    def test_unknown_command(self):
        assert main(["frobnicate"]) == 2

    def test_help_exits_zero(self):
        assert main(["--help"]) == 0
