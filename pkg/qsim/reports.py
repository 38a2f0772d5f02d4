"""
Structured protocol results and their JSON / CSV encodings.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from enum import Enum
from typing import TYPE_CHECKING, Any, Dict, Iterable, List, Optional, Sequence

import click
import jsonschema
import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .channels import TrajectoryBranch
    from .entanglement import EntanglementReport
    from .qstate import StateVector

logger = logging.getLogger(__name__)

SCHEMA_PATH = Path(__file__).parent / "schemas" / "report.schema.json"

# Column order of single-report CSV output.
REPORT_CSV_COLUMNS = ["section", "key", "value"]


@dataclass
class Discrepancy:
    """A published claim that the simulation does not reproduce."""

    claim: str
    description: str
    mode: str
    expected: Any
    actual: Any
    detail: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "claim": self.claim,
            "description": self.description,
            "mode": self.mode,
            "expected": to_plain(self.expected),
            "actual": to_plain(self.actual),
            "detail": self.detail,
        }


@dataclass
class ProtocolReport:
    """Result of one protocol run.

    Attributes:
        command: Name of the protocol that produced the report
        branches: Trajectory leaves in canonical path order
        final_state: Output state in the requested normalization mode
        target_fidelity: Fidelity of final_state to the protocol's target
        probabilities: Named probabilities (outcome, success, ...)
        entanglement: Entanglement diagnostics of final_state
        mode: Normalization mode the run used (None where it does not apply)
        parameters: Input parameters, including derived ones such as p1
        states: Named intermediate states
        metrics: Named scalar diagnostics that are not probabilities
        outcomes: Measurement-outcome rows (teleportation only)
        flags: Human-readable warnings about degenerate inputs
        discrepancies: Claims that failed under this run
    """

    command: str
    branches: List["TrajectoryBranch"] = field(default_factory=list)
    final_state: Optional["StateVector"] = None
    target_fidelity: Optional[float] = None
    probabilities: Dict[str, float] = field(default_factory=dict)
    entanglement: Optional["EntanglementReport"] = None
    mode: Any = None
    parameters: Dict[str, Any] = field(default_factory=dict)
    states: Dict[str, "StateVector"] = field(default_factory=dict)
    metrics: Dict[str, Any] = field(default_factory=dict)
    outcomes: List[Any] = field(default_factory=list)
    flags: List[str] = field(default_factory=list)
    discrepancies: List[Discrepancy] = field(default_factory=list)

    def leaf_probability_total(self) -> float:
        return float(sum(b.joint_prob for b in self.branches))


def to_plain(value: Any) -> Any:
    """Convert numpy scalars, complex numbers and enums to JSON-friendly values."""
    if value is None or isinstance(value, (bool, np.bool_, str)):
        return bool(value) if isinstance(value, np.bool_) else value
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, (complex, np.complexfloating)):
        z = complex(value)
        if z.imag == 0:
            return float(z.real)
        return [float(z.real), float(z.imag)]
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        x = float(value)
        return x if math.isfinite(x) else None
    return str(value)


def amplitudes_to_list(state: Optional["StateVector"]) -> Optional[List[List[float]]]:
    if state is None:
        return None
    return [[float(z.real), float(z.imag)] for z in state.amplitudes]


def branch_to_dict(branch: "TrajectoryBranch") -> Dict[str, Any]:
    return {
        "path": [label.value for label in branch.path],
        "joint_prob": float(branch.joint_prob),
        "conditional_prob": float(branch.conditional_prob),
        "amplitudes": amplitudes_to_list(branch.state),
    }


def report_to_dict(report: ProtocolReport) -> Dict[str, Any]:
    """Encode a report with the documented top-level keys."""
    metrics: Dict[str, Any] = {}
    if report.target_fidelity is not None:
        metrics["target_fidelity"] = float(report.target_fidelity)
    metrics.update({k: to_plain(v) for k, v in report.probabilities.items()})
    metrics.update({k: to_plain(v) for k, v in report.metrics.items()})
    if report.entanglement is not None:
        metrics.update(report.entanglement.to_dict())

    data: Dict[str, Any] = {
        "command": report.command,
        "parameters": {k: to_plain(v) for k, v in report.parameters.items()},
        "branches": [branch_to_dict(b) for b in report.branches],
        "metrics": metrics,
        "mode": to_plain(report.mode),
        "discrepancies": [d.to_dict() for d in report.discrepancies],
    }
    if report.final_state is not None:
        data["final_state"] = amplitudes_to_list(report.final_state)
    if report.states:
        data["states"] = {k: amplitudes_to_list(v) for k, v in report.states.items()}
    if report.outcomes:
        data["outcomes"] = [o.to_dict() for o in report.outcomes]
    if report.flags:
        data["flags"] = list(report.flags)
    return data


def load_schema() -> Dict[str, Any]:
    with open(SCHEMA_PATH, "r", encoding="utf-8") as f:
        return json.load(f)


def validate_report(data: Dict[str, Any]) -> None:
    """Validate an encoded report against the shipped JSON schema.

    Raises:
        jsonschema.ValidationError: If the document does not conform
    """
    jsonschema.validate(instance=data, schema=load_schema())


def dumps_json(data: Any) -> str:
    """Deterministic JSON text (float repr round-trips exactly)."""
    return json.dumps(data, indent=2, allow_nan=False) + "\n"


def format_number(value: Any) -> str:
    """Render a CSV cell; floats use 17 significant digits."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, (list, dict)):
        return json.dumps(value, separators=(",", ":"))
    return str(value)


def report_rows(data: Dict[str, Any]) -> List[List[str]]:
    """Flatten an encoded report into (section, key, value) rows."""
    rows = [["command", "command", data["command"]], ["mode", "mode", format_number(data["mode"])]]
    for key, value in data["parameters"].items():
        rows.append(["parameters", key, format_number(value)])
    for key, value in data["metrics"].items():
        rows.append(["metrics", key, format_number(value)])
    for branch in data["branches"]:
        rows.append(["branches", "/".join(branch["path"]), format_number(branch["joint_prob"])])
    for d in data["discrepancies"]:
        rows.append(["discrepancies", d["claim"], format_number(d["actual"])])
    return rows


def dumps_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(header))
    for row in rows:
        writer.writerow([cell if isinstance(cell, str) else format_number(cell) for cell in row])
    return buf.getvalue()


def write_output(text: str, path: Optional[str]) -> None:
    """Write text to path, or to stdout when path is None."""
    if path is None:
        click.echo(text, nl=False)
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    logger.info("wrote %s", target)
