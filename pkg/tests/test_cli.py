import json
import math

import pytest
from click.testing import CliRunner

from cylschur.cli import main
from cylschur.fredholm import f_alpha
from cylschur.kernels import ftb_kernel
from cylschur.measures import CylindricPlancherelParams


@pytest.fixture
def runner():
    return CliRunner()


def body(text):
    """Non-provenance lines of an output."""
    return [ln for ln in text.splitlines() if not ln.startswith("#")]


class TestFalpha:
    def test_tw_table(self, runner):
        res = runner.invoke(main, ["falpha", "--alpha", "inf", "--s-min", "-2", "--s-max", "0", "--s-step", "1"])
        assert res.exit_code == 0, res.output
        assert res.output.startswith("# ")
        lines = body(res.output)
        assert lines[0] == "s,F_alpha,est_error"
        rows = [ln.split(",") for ln in lines[1:]]
        assert [float(r[0]) for r in rows] == [-2.0, -1.0, 0.0]
        assert abs(float(rows[0][1]) - f_alpha(-2.0, math.inf)) < 1e-12

    def test_far_right_row(self, runner):
        res = runner.invoke(main, ["falpha", "--alpha", "1", "--s-min", "12", "--s-max", "12"])
        assert abs(float(body(res.output)[1].split(",")[1]) - 1) < 1e-5

    def test_gnuplot(self, runner, tmp_path):
        out = tmp_path / "f.csv"
        res = runner.invoke(main, ["falpha", "--s-min", "0", "--s-max", "0", "--out", str(out), "--gnuplot"])
        assert res.exit_code == 0
        assert out.read_text().startswith("# ")
        assert "plot" in (tmp_path / "f.csv.gp").read_text()
        assert runner.invoke(main, ["falpha", "--gnuplot"]).exit_code == 2

    def test_reproducible(self, runner, tmp_path):
        args = ["falpha", "--alpha", "2", "--s-min", "-1", "--s-max", "1"]
        a = runner.invoke(main, args + ["--out", str(tmp_path / "a")])
        b = runner.invoke(main, args + ["--out", str(tmp_path / "b")])
        assert a.exit_code == b.exit_code == 0
        assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()

    @pytest.mark.parametrize("alpha", ["0", "-1", "abc"])
    def test_bad_alpha(self, runner, alpha):
        assert runner.invoke(main, ["falpha", "--alpha", alpha]).exit_code == 2

    def test_domain_error_exit(self, runner):
        res = runner.invoke(main, ["falpha", "--s-min", "-20", "--s-max", "-20"])
        assert res.exit_code == 2 and "error" in res.output

    def test_nonconvergent_exit(self, runner):
        res = runner.invoke(main, ["falpha", "--alpha", "0.5", "--s-min", "-4", "--s-max", "-4", "--tol", "1e-16"])
        assert res.exit_code == 3


class TestKernel:
    def test_ftb(self, runner):
        res = runner.invoke(main, ["kernel", "--model", "ftb", "--u", "0.5", "--gamma", "1",
                                   "--lo", "-2.5", "--hi", "5.5"])
        assert res.exit_code == 0, res.output
        rows = [ln for ln in body(res.output) if ln and ln[0].isdigit()]
        assert len(rows) == 81
        # row format: slot, site, slot', site', value
        first = rows[0].split(",")
        assert first[1] == "-2.5" and first[3] == "-2.5"
        assert abs(float(first[4]) - ftb_kernel(CylindricPlancherelParams(0.5, 1.0), -2, -2)) < 1e-12

    def test_general_trivial_is_diagonal_fermi(self, runner):
        res = runner.invoke(main, ["kernel", "--model", "general", "--u", "0.4", "--points", "1:0.5,1:1.5"])
        assert res.exit_code == 0, res.output
        vals = {(r[1], r[3]): float(r[4]) for r in (ln.split(",") for ln in body(res.output)[1:])}
        assert abs(vals[("0.5", "0.5")] - 1 / (1 + 0.4 ** -0.5)) < 1e-12
        assert abs(vals[("0.5", "1.5")]) < 1e-12

    def test_strict_single_point(self, runner):
        res = runner.invoke(main, ["kernel", "--model", "strict", "--u", "0.25",
                                   "--specs", '[[{"alphas": [0.2]}, {"alphas": [0.2]}]]', "--points", "1:2"])
        assert res.exit_code == 0, res.output
        assert any(ln.startswith("1,2,1,-2,") for ln in body(res.output))

    def test_extended(self, runner):
        res = runner.invoke(main, ["kernel", "--model", "extended", "--beta", "0.5", "--theta", "2",
                                   "--points", "0:0.5,0.25:0.5"])
        assert res.exit_code == 0, res.output
        assert len(body(res.output)) == 5

    def test_usage_errors(self, runner):
        assert runner.invoke(main, ["kernel", "--model", "ftb"]).exit_code == 2
        assert runner.invoke(main, ["kernel", "--model", "general"]).exit_code == 2
        assert runner.invoke(main, ["kernel", "--model", "ftb", "--lo", "0", "--hi", "1.5"]).exit_code == 2
        assert runner.invoke(main, ["kernel", "--model", "general", "--points", "x"]).exit_code == 2
        assert runner.invoke(main, ["kernel", "--model", "bogus"]).exit_code == 2

    def test_misspelt_spec_key(self, runner):
        # "alpha" instead of "alphas" must not silently mean the trivial specialization
        res = runner.invoke(main, ["kernel", "--model", "general", "--specs", '[[{"alpha": [0.3]}, {}]]',
                                   "--points", "1:0.5"])
        assert res.exit_code == 2 and "unknown specialization keys" in res.output


class TestSample:
    def test_records(self, runner, tmp_path):
        out = tmp_path / "s.jsonl"
        res = runner.invoke(main, ["sample", "--u", "0.3", "--gamma", "0.5", "--n-samples", "1000",
                                   "--seed", "5", "--out", str(out)])
        assert res.exit_code == 0, res.output
        lines = body(out.read_text())
        assert len(lines) == 1000
        rec = json.loads(lines[0])
        assert set(rec) == {"partition", "charge", "window", "seed"}
        assert rec["seed"] == {"seed": 5, "counter": 0}

    def test_seed_reproducible(self, runner):
        args = ["sample", "--u", "0.3", "--gamma", "0.5", "--n-samples", "30", "--seed", "9"]
        assert runner.invoke(main, args).output == runner.invoke(main, args).output

    def test_small_parameters(self, runner):
        res = runner.invoke(main, ["sample", "--u", "0.0001", "--gamma", "0.05", "--n-samples", "100"])
        recs = [json.loads(ln) for ln in body(res.output)]
        assert sum(r["partition"] == [] for r in recs) >= 90


class TestVerify:
    def test_identities(self, runner, tmp_path):
        rep = tmp_path / "r.json"
        res = runner.invoke(main, ["verify", "--suite", "identities", "--report", str(rep)])
        assert res.exit_code == 0, res.output
        assert sum(ln.startswith("PASS") for ln in res.output.splitlines()) == 4
        data = json.loads("".join(body(rep.read_text())))
        assert [d["criterion"] for d in data] == [1, 2, 9, 11] and all(d["passed"] for d in data)

    def test_failure_exit(self, runner):
        res = runner.invoke(main, ["verify", "--suite", "identities", "--tol-scale", "1e-12"])
        assert res.exit_code == 1
        assert "FAIL" in res.output

    def test_bad_scale(self, runner):
        assert runner.invoke(main, ["verify", "--tol-scale", "0"]).exit_code == 2


class TestConfig:
    def test_file_values_and_flag_precedence(self, runner, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"falpha": {"alpha": "2", "s_min": 1.0, "s_max": 1.0}}))
        res = runner.invoke(main, ["--config", str(cfg), "falpha"])
        assert res.exit_code == 0, res.output
        assert abs(float(body(res.output)[1].split(",")[1]) - f_alpha(1.0, 2.0)) < 1e-12
        res = runner.invoke(main, ["--config", str(cfg), "falpha", "--s-min", "0", "--s-max", "0"])
        assert float(body(res.output)[1].split(",")[0]) == 0.0
        assert '"alpha": "2"' in res.output.splitlines()[0]

    def test_bad_config(self, runner, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text("[1, 2]")
        assert runner.invoke(main, ["--config", str(cfg), "falpha"]).exit_code == 2

    def test_version(self, runner):
        res = runner.invoke(main, ["--version"])
        assert res.exit_code == 0 and "cylschur" in res.output
