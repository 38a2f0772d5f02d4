"""
Integration tests for the qsim command line.
"""
import json
import math
import sys

import jsonschema
import pytest
from click.testing import CliRunner

import qsim.cli as qsim_cli
from qsim import __version__
from qsim.cli import cli, main
from qsim.reports import validate_report
from qsim.verification import AcceptanceReport, CriterionResult


@pytest.fixture
def runner():
    return CliRunner()


def invoke_to_file(runner, tmp_path, args, name="report.json"):
    out = tmp_path / name
    result = runner.invoke(cli, args + ["--out", str(out)])
    return result, out


def load(path):
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def test_version(runner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


def test_protect_example(runner, tmp_path):
    result, out = invoke_to_file(
        runner, tmp_path, ["protect", "--alpha", "0.7071", "--beta", "0.7071", "--p", "0.5", "--gamma-tau", "0"]
    )
    assert result.exit_code == 0
    data = load(out)
    assert data["command"] == "protect"
    assert data["metrics"]["success_path_prob"] == pytest.approx(0.5, abs=1e-12)
    assert data["parameters"]["p1_source"] == "optimal"


def test_bell_example(runner, tmp_path):
    result, out = invoke_to_file(
        runner, tmp_path, ["bell", "--amps", "0.5,-0.5,0.5,0.5", "--p", "0.6", "--gamma-tau", "0.5", "--mode", "paper"]
    )
    assert result.exit_code == 0
    data = load(out)
    assert data["mode"] == "paper"
    assert data["metrics"]["bell_fidelity_paper"] == pytest.approx(1.0, abs=1e-12)
    assert data["metrics"]["concurrence"] == pytest.approx(1.0, abs=1e-12)


def test_csv_output(runner, tmp_path):
    result, out = invoke_to_file(
        runner, tmp_path, ["protect", "--p", "0.6", "--r", "0.3", "--format", "csv"], name="report.csv"
    )
    assert result.exit_code == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "section,key,value"
    assert lines[1] == "command,command,protect"


def test_output_is_deterministic(runner, tmp_path):
    args = ["wstate", "--u", "0.6", "--p", "0.8", "--gamma-tau", "0.5"]
    first, a = invoke_to_file(runner, tmp_path, args, name="a.json")
    second, b = invoke_to_file(runner, tmp_path, args, name="b.json")
    assert first.exit_code == second.exit_code == 0
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize(
    "args",
    [
        ["protect", "--p", "1.5", "--gamma-tau", "0.5"],
        ["protect", "--p", "0.5", "--gamma-tau", "0.5", "--r", "0.2"],
        ["protect", "--alpha", "1", "--beta", "1", "--p", "0.5", "--gamma-tau", "0.5"],
        ["protect", "--p", "0.1", "--gamma-tau", "0"],
        ["bell", "--amps", "1,0,0,0", "--p", "0.6", "--gamma-tau", "0.5"],
        ["bell", "--amps", "0.5,0.5,0.5", "--p", "0.6", "--gamma-tau", "0.5"],
        ["wstate", "--u", "1.0", "--p", "0.8", "--gamma-tau", "0.5"],
        ["teleport", "--case", "Ib", "--x", "0.6", "--s", "0.8"],
    ],
)
def test_validation_errors_exit_1(runner, tmp_path, args):
    result, out = invoke_to_file(runner, tmp_path, args)
    assert result.exit_code == 1
    assert not out.exists()


def test_unknown_flag_exits_1(monkeypatch):
    monkeypatch.setattr(sys, "argv", ["qsim", "protect", "--bogus", "1"])
    with pytest.raises(SystemExit) as excinfo:
        main()
    assert excinfo.value.code == 1


def test_teleport_pairing_search(runner, tmp_path):
    result, out = invoke_to_file(
        runner, tmp_path, ["teleport", "--case", "Ia", "--x", "0.6", "--s", "0.8", "--pairing", "search"]
    )
    assert result.exit_code == 0
    data = load(out)
    assert len(data["outcomes"]) == 16
    assert len(data["metrics"]["pairing_search"]["rows"]) == 6
    assert data["metrics"]["pairing_search"]["reproduced"] is True


def test_protect_sweep(runner, tmp_path):
    result, out = invoke_to_file(
        runner, tmp_path, ["sweep", "--protocol", "protect", "--grid", "p=0.1:0.9:0.1,gamma_tau=0.5:0.5:1"]
    )
    assert result.exit_code == 0
    data = load(out)
    assert len(data["rows"]) == 9
    assert data["columns"][:3] == ["p", "gamma_tau", "status"]
    assert [row["p"] for row in data["rows"]] == pytest.approx([0.1 * k for k in range(1, 10)])
    for row in data["rows"]:
        if row["p"] >= (1 - row["p"]) * math.exp(-0.5):
            assert row["status"] == "OK"
            assert row["success_path_prob"] == pytest.approx((1 - row["p"]) * math.exp(-0.5), abs=1e-12)
        else:
            assert row["status"] == "INFEASIBLE"


def test_teleport_sweep_masks_undefined_points(runner, tmp_path):
    result, out = invoke_to_file(
        runner, tmp_path, ["sweep", "--protocol", "teleport", "--case", "Ib", "--grid", "x=0.2:0.6:0.2,s=0.5:0.9:0.2"]
    )
    assert result.exit_code == 0
    rows = load(out)["rows"]
    assert len(rows) == 9
    assert {row["status"] for row in rows} <= {"OK", "UNDEFINED"}
    assert [(row["x"], row["s"]) for row in rows[:2]] == [(0.2, 0.5), (0.2, 0.7)]


@pytest.mark.parametrize("grid", ["p=0.5:0.1:0.1", "p=0.1:0.5:0", "p=0.1:0.2:0.1,p=0.3:0.4:0.1", "p=0.1:0.2", "u=0.5:0.6:0.1"])
def test_bad_grids_exit_1(runner, tmp_path, grid):
    result, _ = invoke_to_file(runner, tmp_path, ["sweep", "--protocol", "protect", "--gamma-tau", "0.5", "--grid", grid])
    assert result.exit_code == 1


def _acceptance(passed):
    criterion = CriterionResult("1", "success probability", passed, 0.5, 0.5 if passed else 0.4, 1e-12)
    return AcceptanceReport(seed=3, criteria=[criterion], teleport_status={"Ia": "REPRODUCED"})


@pytest.mark.parametrize("passed, code", [(True, 0), (False, 2)])
def test_verify_exit_codes(runner, tmp_path, monkeypatch, passed, code):
    monkeypatch.setattr(qsim_cli, "run_acceptance", lambda seed, progress=None: _acceptance(passed))
    result, out = invoke_to_file(runner, tmp_path, ["verify", "--seed", "3"])
    assert result.exit_code == code
    data = load(out)
    assert data["passed"] is passed
    assert data["teleport_status"] == {"Ia": "REPRODUCED"}


def test_verify_csv_columns(runner, tmp_path, monkeypatch):
    monkeypatch.setattr(qsim_cli, "run_acceptance", lambda seed, progress=None: _acceptance(True))
    result, out = invoke_to_file(runner, tmp_path, ["verify", "--format", "csv"], name="verify.csv")
    assert result.exit_code == 0
    assert out.read_text(encoding="utf-8").splitlines()[0] == "id,description,passed,expected,actual,tolerance"


def test_out_of_domain_sweep_points_are_marked_invalid(runner, tmp_path):
    result, out = invoke_to_file(
        runner, tmp_path, ["sweep", "--protocol", "protect", "--gamma-tau", "0.5", "--grid", "p=0.9:1.3:0.2"]
    )
    assert result.exit_code == 0
    rows = load(out)["rows"]
    assert [row["status"] for row in rows] == ["OK", "INVALID", "INVALID"]
    assert rows[1]["success_path_prob"] is None


def test_fixed_parameter_errors_still_abort_a_sweep(runner, tmp_path):
    result, out = invoke_to_file(
        runner, tmp_path, ["sweep", "--protocol", "protect", "--gamma-tau", "-1", "--grid", "p=0.5:0.9:0.2"]
    )
    assert result.exit_code == 1
    assert not out.exists()


def test_seed_read_from_environment(runner, tmp_path, monkeypatch):
    seen = []

    def fake(seed, progress=None):
        seen.append(seed)
        return _acceptance(True)

    monkeypatch.setattr(qsim_cli, "run_acceptance", fake)
    result = runner.invoke(cli, ["verify", "--out", str(tmp_path / "v.json")], env={"QSIM_SEED": "0x2a"})
    assert result.exit_code == 0
    assert seen == [42]


def test_schema_failure_exits_1(runner, tmp_path, monkeypatch):
    def reject(data):
        raise jsonschema.ValidationError("not a report")

    monkeypatch.setattr(qsim_cli, "validate_report", reject)
    result, out = invoke_to_file(runner, tmp_path, ["protect", "--p", "0.6", "--r", "0.3"])
    assert result.exit_code == 1
    assert result.exception is None or isinstance(result.exception, SystemExit)
    assert not out.exists()


def test_verify_end_to_end(runner, tmp_path):
    result, out = invoke_to_file(runner, tmp_path, ["verify", "--seed", "0"])
    assert result.exit_code == 0, result.output
    data = load(out)
    validate_report(data)
    assert data["passed"] is True
    assert [c["id"] for c in data["criteria"]] == [str(i) for i in range(1, 12)]
    assert all(c["passed"] is True for c in data["criteria"])
