"""
Numeric tolerances and run-time settings shared across qsim.
"""

import os
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from .exceptions import ValidationError

# Exact-algebra identities (norms, completeness, probabilities).
EXACT_TOL = 1e-12
# Quantities that pass through eigen/root computations.
SPECTRAL_TOL = 1e-9
# Squared norms below this mark an impossible branch.
NORM_FLOOR = 1e-24
# Fidelity to a computational basis state at or above which a residual is a bit.
BIT_THRESHOLD = 1.0 - 1e-9
# Wootters eigenvalues below this are treated as zero.
EIGEN_CLAMP = 1e-12

MAX_GRID_POINTS = 10**6
MAX_QUBITS = 10

SEED_ENV_VAR = "QSIM_SEED"
MAX_SEED = 2**64 - 1


def resolve_seed(seed: Optional[int] = None) -> int:
    """Pick the seed for randomized suites.

    An explicit seed wins, then the QSIM_SEED environment variable, then 0.

    Raises:
        ValidationError: If the seed is not a 64-bit unsigned integer
    """
    if seed is None:
        raw = os.environ.get(SEED_ENV_VAR)
        if raw is None or raw.strip() == "":
            return 0
        try:
            seed = int(raw.strip(), 0)
        except ValueError:
            raise ValidationError("seed", f"{SEED_ENV_VAR}={raw!r} is not an integer")
    if not 0 <= seed <= MAX_SEED:
        raise ValidationError("seed", f"{seed} is not a 64-bit unsigned integer")
    return int(seed)


def check_unit_interval(name: str, value: float, open_low: bool = False) -> float:
    """Ensure value lies in [0, 1] (or (0, 1] when open_low)."""
    value = float(value)
    if value != value or value > 1.0 or value < 0.0 or (open_low and value == 0.0):
        bounds = "(0, 1]" if open_low else "[0, 1]"
        raise ValidationError(name, f"{value} is outside {bounds}")
    return value


COMMANDS = ("protect", "bell", "wstate", "teleport", "sweep", "verify")
OUTPUT_FORMATS = ("json", "csv")


@dataclass
class RunConfig:
    """Everything one CLI invocation needs, validated before dispatch.

    Attributes:
        command: Subcommand name
        parameters: Command parameters keyed by their long option name
        mode: Normalization mode name ("paper" or "physical")
        seed: Seed for randomized suites
        output_format: "json" or "csv"
        output_path: File to write, None for stdout
    """

    command: str
    parameters: Dict[str, Any] = field(default_factory=dict)
    mode: str = "paper"
    seed: int = 0
    output_format: str = "json"
    output_path: Optional[str] = None

    @classmethod
    def from_cli(
        cls,
        command: str,
        parameters: Dict[str, Any],
        mode: str = "paper",
        seed: Optional[int] = None,
        output_format: str = "json",
        output_path: Optional[str] = None,
    ) -> "RunConfig":
        config = cls(
            command=command,
            parameters={k: v for k, v in parameters.items() if v is not None},
            mode=mode,
            seed=resolve_seed(seed),
            output_format=output_format,
            output_path=output_path,
        )
        config.validate()
        return config

    def validate(self) -> None:
        """Raises ValidationError naming the first parameter out of its domain."""
        if self.command not in COMMANDS:
            raise ValidationError("command", f"unknown command {self.command!r}")
        if self.output_format not in OUTPUT_FORMATS:
            raise ValidationError("format", f"{self.output_format!r} is not one of {', '.join(OUTPUT_FORMATS)}")
        if self.mode not in ("paper", "physical"):
            raise ValidationError("mode", f"{self.mode!r} is not paper or physical")
        for name in ("p", "r", "x", "s"):
            if name in self.parameters:
                check_unit_interval(name, self.parameters[name])
        if "p1" in self.parameters and self.parameters["p1"] != "auto":
            check_unit_interval("p1", self.parameters["p1"])
        gamma_tau = self.parameters.get("gamma_tau")
        if gamma_tau is not None and not float(gamma_tau) >= 0.0:
            raise ValidationError("gamma-tau", f"{gamma_tau} must be >= 0")
        if "gamma_tau" in self.parameters and "r" in self.parameters:
            raise ValidationError("gamma-tau", "--gamma-tau and --r are mutually exclusive")
