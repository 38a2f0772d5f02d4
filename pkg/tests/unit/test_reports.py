"""
Unit tests for report encoding and the JSON schema.
"""
import json
import math

import jsonschema
import numpy as np
import pytest
from hypothesis import given, strategies as st

from qsim.channels import protect_unknown_qubit
from qsim.protocols import NormalizationMode, bell_generate, teleport_case
from qsim.reports import (
    REPORT_CSV_COLUMNS,
    Discrepancy,
    dumps_csv,
    dumps_json,
    format_number,
    report_rows,
    report_to_dict,
    to_plain,
    validate_report,
    write_output,
)
from qsim.verification import AcceptanceReport, CriterionResult

SQRT_HALF = 1.0 / math.sqrt(2.0)


def test_to_plain_conversions():
    assert to_plain(np.float64(1.5)) == 1.5
    assert to_plain(np.int64(3)) == 3
    assert to_plain(np.bool_(True)) is True
    assert to_plain(complex(2, 0)) == 2.0
    assert to_plain(complex(1, -2)) == [1.0, -2.0]
    assert to_plain(NormalizationMode.PAPER) == "paper"
    assert to_plain(float("inf")) is None
    assert to_plain({"a": (1, 2)}) == {"a": [1, 2]}


def test_format_number():
    assert format_number(0.1) == "0.10000000000000001"
    assert format_number(None) == ""
    assert format_number(True) == "true"
    assert format_number([1, 2]) == "[1,2]"
    assert float(format_number(1 / 3)) == 1 / 3


def test_dumps_csv():
    assert dumps_csv(["a", "b"], [[1.5, "x"], [None, 2]]) == "a,b\n1.5,x\n,2\n"


def test_dumps_json_is_exact_and_rejects_nan():
    value = 0.1 + 0.2
    assert json.loads(dumps_json({"v": value}))["v"] == value
    with pytest.raises(ValueError):
        dumps_json({"v": float("nan")})


def test_write_output_creates_directories(tmp_path):
    target = tmp_path / "nested" / "out.json"
    write_output("{}\n", str(target))
    assert target.read_text(encoding="utf-8") == "{}\n"


def test_discrepancy_encoding():
    d = Discrepancy("bell.success_probability", "M1 probability is 1/2", "paper", 0.5, np.float64(0.4))
    assert d.to_dict()["actual"] == 0.4
    assert d.to_dict()["detail"] == ""


def test_protect_report_matches_schema():
    data = report_to_dict(protect_unknown_qubit(SQRT_HALF, SQRT_HALF, 0.6, 0.5))
    validate_report(data)
    assert data["mode"] is None
    assert len(data["branches"]) == 8
    assert data["metrics"]["target_fidelity"] == pytest.approx(1.0, abs=1e-12)


def test_bell_and_teleport_reports_match_schema():
    bell = report_to_dict(bell_generate(0.5, -0.5, 0.5, 0.5, p=0.6, gamma_tau=0.5))
    validate_report(bell)
    assert bell["mode"] == "paper"
    assert "final_paper" in bell["states"]
    teleport = report_to_dict(teleport_case("Ia", 0.6, 0.8))
    validate_report(teleport)
    assert len(teleport["outcomes"]) == 16


def test_schema_rejects_unknown_command():
    data = report_to_dict(protect_unknown_qubit(1.0, 0.0, 0.6, 0.5))
    data["command"] = "entangle"
    with pytest.raises(jsonschema.ValidationError):
        validate_report(data)


def test_report_rows():
    data = report_to_dict(protect_unknown_qubit(1.0, 0.0, 0.6, 0.5))
    rows = report_rows(data)
    assert rows[0] == ["command", "command", "protect"]
    assert all(len(row) == len(REPORT_CSV_COLUMNS) for row in rows)
    assert ["parameters", "p", "0.59999999999999998"] in rows


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_dumps_json_round_trips_every_double(value):
    assert json.loads(dumps_json({"v": value}))["v"] == value


def test_acceptance_report_with_numpy_scalars_matches_schema():
    worst = np.float64(3e-17)
    criterion = CriterionResult("8", "overlap", worst <= 1e-12, 0.0, worst, np.float64(1e-12))
    assert type(criterion.passed) is bool
    report = AcceptanceReport(seed=0, criteria=[criterion], teleport_status={"Ia": "REPRODUCED"})
    data = report.to_dict()
    validate_report(data)
    assert data["passed"] is True
    assert type(data["criteria"][0]["actual"]) is float
    assert json.loads(dumps_json(data))["criteria"][0]["passed"] is True
