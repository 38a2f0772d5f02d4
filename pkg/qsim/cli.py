"""
qsim CLI - weak-measurement protection, entangled-state generation and
teleportation checks from the command line.
"""

import itertools
import logging
import math
import sys
from typing import Any, Callable, Dict, List, Optional, Tuple

import click
import jsonschema
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table
from tqdm import tqdm

from . import __version__
from .channels import protect_unknown_qubit
from .config import MAX_GRID_POINTS, SEED_ENV_VAR, RunConfig
from .exceptions import (
    InfeasibleParameterError,
    QSimError,
    UndefinedCaseError,
    ValidationError,
    VerificationFailure,
)
from .protocols import (
    TELEPORT_CASES,
    PairingChoice,
    bell_generate,
    search_pairings,
    teleport_case,
    w_generate,
)
from .reports import (
    REPORT_CSV_COLUMNS,
    ProtocolReport,
    dumps_csv,
    dumps_json,
    report_rows,
    report_to_dict,
    to_plain,
    validate_report,
    write_output,
)
from .verification import AcceptanceReport, run_acceptance

logger = logging.getLogger(__name__)
console = Console(stderr=True)

SQRT_HALF = 1.0 / math.sqrt(2.0)
DEFAULT_AMPS = "0.5,-0.5,0.5,0.5"
DEFAULT_CLONE_ANGLE = math.pi / 3
# Command-line amplitudes are rescaled when this close to unit squared norm.
AMPLITUDE_SLACK = 1e-3

SWEEP_PARAMETERS = {
    "protect": ("p", "gamma_tau", "r", "p1"),
    "bell": ("p", "gamma_tau", "r"),
    "wstate": ("clone_angle", "u", "p", "gamma_tau", "r"),
    "teleport": ("x", "s"),
}
SWEEP_COLUMNS = {
    "protect": ["success_path_prob", "total_success_prob", "p1", "target_fidelity"],
    "bell": ["target_fidelity", "m1_prob", "success_joint_prob", "concurrence", "p1"],
    "wstate": ["target_fidelity", "three_tangle_intermediate", "success_joint_prob", "p1"],
    "teleport": ["fidelity", "pairing", "assignment", "reproduced", "qubit_prob"],
}
VERIFY_CSV_COLUMNS = ["id", "description", "passed", "expected", "actual", "tolerance"]


def configure_logging(verbosity: int) -> None:
    """Route qsim log records through rich on stderr."""
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    root = logging.getLogger("qsim")
    for handler in list(root.handlers):
        if isinstance(handler, RichHandler):
            root.removeHandler(handler)
    root.addHandler(RichHandler(console=Console(stderr=True), show_path=False, markup=False))
    root.setLevel(level)


def parse_complex(text: Any, name: str) -> complex:
    """Accept '0.5', '-0.5+0.1j' or '0.5+0.1i'."""
    if isinstance(text, (int, float, complex)):
        return complex(text)
    try:
        return complex(str(text).replace(" ", "").replace("i", "j"))
    except ValueError:
        raise ValidationError(name, f"{text!r} is not a complex number")


def parse_amps(text: str) -> List[complex]:
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != 4:
        raise ValidationError("amps", f"expected four comma-separated amplitudes, got {len(parts)}")
    return [parse_complex(p, "amps") for p in parts]


def parse_p1(text: Optional[str]):
    if text is None or str(text).strip().lower() == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise ValidationError("p1", f"{text!r} is neither a number nor 'auto'")


class SeedType(click.ParamType):
    """Integer seed in decimal or 0x hex."""

    name = "seed"

    def convert(self, value, param, ctx):
        if isinstance(value, int):
            return value
        try:
            return int(str(value).strip(), 0)
        except ValueError:
            self.fail(f"{value!r} is not an integer", param, ctx)


def parse_grid(spec: str) -> List[Tuple[str, List[float]]]:
    """Parse 'name=start:stop:step,...' into inclusive value lists.

    Raises:
        ValidationError: On malformed or empty dimensions, or more than 10^6 points
    """
    dims: List[Tuple[str, List[float]]] = []
    for part in (p.strip() for p in spec.split(",")):
        name, sep, bounds = part.partition("=")
        name = name.strip().replace("-", "_")
        try:
            start, stop, step = (float(v) for v in bounds.split(":"))
        except ValueError:
            raise ValidationError("grid", f"{part!r} is not name=start:stop:step")
        if not sep or not name:
            raise ValidationError("grid", f"{part!r} is not name=start:stop:step")
        if any(name == seen for seen, _ in dims):
            raise ValidationError("grid", f"dimension {name!r} given twice")
        if step <= 0.0 or stop < start:
            raise ValidationError("grid", f"dimension {name!r} is empty")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        dims.append((name, [round(start + i * step, 12) for i in range(count)]))
    if math.prod(len(values) for _, values in dims) > MAX_GRID_POINTS:
        raise ValidationError("grid", f"more than {MAX_GRID_POINTS} grid points")
    return dims


def rescale_amplitudes(values: List[complex], name: str) -> List[complex]:
    norm_sq = sum(abs(z) ** 2 for z in values)
    if abs(norm_sq - 1.0) > AMPLITUDE_SLACK:
        raise ValidationError(name, f"squared norm {norm_sq:.6g} is not 1")
    if abs(norm_sq - 1.0) > 1e-10:
        logger.warning("%s rescaled from squared norm %.12g", name, norm_sq)
    scale = math.sqrt(norm_sq)
    return [z / scale for z in values]


def _require(parameters: Dict[str, Any], name: str) -> Any:
    if parameters.get(name) is None:
        raise ValidationError(name.replace("_", "-"), "is required")
    return parameters[name]


def _p1_override(parameters: Dict[str, Any]) -> Optional[float]:
    p1 = parameters.get("p1", "auto")
    return None if p1 == "auto" else float(p1)


def _protect_report(parameters: Dict[str, Any], mode: str) -> ProtocolReport:
    alpha, beta = rescale_amplitudes(
        [parse_complex(parameters.get(k, SQRT_HALF), k) for k in ("alpha", "beta")], "alpha, beta"
    )
    return protect_unknown_qubit(
        alpha,
        beta,
        _require(parameters, "p"),
        parameters.get("gamma_tau"),
        r=parameters.get("r"),
        p1=_p1_override(parameters),
    )


def _bell_report(parameters: Dict[str, Any], mode: str) -> ProtocolReport:
    amps = parameters.get("amps", DEFAULT_AMPS)
    amps = rescale_amplitudes(parse_amps(amps) if isinstance(amps, str) else list(amps), "amps")
    return bell_generate(*amps, _require(parameters, "p"), parameters.get("gamma_tau"), mode, r=parameters.get("r"))


def _wstate_report(parameters: Dict[str, Any], mode: str) -> ProtocolReport:
    return w_generate(
        parameters.get("clone_angle", DEFAULT_CLONE_ANGLE),
        parameters.get("u", SQRT_HALF),
        _require(parameters, "p"),
        parameters.get("gamma_tau"),
        mode,
        bool(parameters.get("ap_sigma_x", False)),
        r=parameters.get("r"),
    )


def _teleport_report(parameters: Dict[str, Any], mode: str) -> ProtocolReport:
    case = _require(parameters, "case")
    x, s = _require(parameters, "x"), _require(parameters, "s")
    pairing = PairingChoice(parameters.get("pairing", PairingChoice.P02_13.value))
    if pairing is not PairingChoice.SEARCH:
        return teleport_case(case, x, s, pairing, int(parameters.get("assignment", 0)))
    search = search_pairings(case, x, s)
    report = teleport_case(case, x, s, search.best.pairing, search.best.assignment)
    report.metrics["pairing_search"] = search.to_dict()
    return report


PROTOCOLS: Dict[str, Callable[[Dict[str, Any], str], ProtocolReport]] = {
    "protect": _protect_report,
    "bell": _bell_report,
    "wstate": _wstate_report,
    "teleport": _teleport_report,
}


def render_report(report: ProtocolReport, output_format: str) -> str:
    data = report_to_dict(report)
    validate_report(data)
    if output_format == "csv":
        return dumps_csv(REPORT_CSV_COLUMNS, report_rows(data))
    return dumps_json(data)


def _sweep_values(protocol: str, report: ProtocolReport) -> Dict[str, Any]:
    if protocol == "protect":
        values = dict(report.probabilities)
        values["p1"] = report.parameters["p1"]
        values["target_fidelity"] = report.target_fidelity
        return values
    if protocol == "bell":
        values = dict(report.probabilities)
        values.update(target_fidelity=report.target_fidelity, p1=report.parameters["p1"])
        values["concurrence"] = report.entanglement.concurrence
        return values
    if protocol == "wstate":
        mode = report.mode.value
        return {
            "target_fidelity": report.target_fidelity,
            "three_tangle_intermediate": report.metrics[f"three_tangle_intermediate_{mode}"],
            "success_joint_prob": report.probabilities["success_joint_prob"],
            "p1": report.parameters["p1"],
        }
    search = report.metrics.get("pairing_search")
    return {
        "fidelity": report.target_fidelity,
        "pairing": report.parameters["pairing"],
        "assignment": report.parameters["assignment"],
        "reproduced": search["reproduced"] if search else None,
        "qubit_prob": report.probabilities["qubit_prob"],
    }


def run_sweep(config: RunConfig) -> Tuple[List[str], List[Dict[str, Any]]]:
    """Evaluate a protocol on every grid point in row-major declared order."""
    fixed = dict(config.parameters)
    protocol = fixed.pop("protocol", None)
    if protocol not in SWEEP_PARAMETERS:
        raise ValidationError("protocol", f"{protocol!r} is not one of {', '.join(SWEEP_PARAMETERS)}")
    dims = parse_grid(_require(fixed, "grid"))
    fixed.pop("grid")
    for name, _ in dims:
        if name not in SWEEP_PARAMETERS[protocol]:
            raise ValidationError("grid", f"{name!r} cannot be swept for {protocol}")
    if protocol == "teleport":
        fixed.setdefault("pairing", PairingChoice.SEARCH.value)
    names = [name for name, _ in dims]

    columns = names + ["status"] + SWEEP_COLUMNS[protocol]
    rows = []
    points = list(itertools.product(*(values for _, values in dims)))
    for point in tqdm(points, desc=f"sweep {protocol}", unit="pt", disable=None, file=sys.stderr):
        parameters = {k: v for k, v in fixed.items() if v is not None}
        parameters.update(zip(names, point))
        row: Dict[str, Any] = dict(zip(names, point))
        try:
            report = PROTOCOLS[protocol](parameters, config.mode)
        except UndefinedCaseError as e:
            logger.debug("undefined at %s: %s", row, e)
            row["status"] = "UNDEFINED"
        except InfeasibleParameterError as e:
            logger.debug("infeasible at %s: %s", row, e)
            row["status"] = "INFEASIBLE"
        except ValidationError as e:
            if e.parameter not in names:
                raise
            logger.debug("out of domain at %s: %s", row, e)
            row["status"] = "INVALID"
        else:
            row["status"] = "OK"
            row.update(_sweep_values(protocol, report))
        rows.append({c: row.get(c) for c in columns})
    return columns, rows


def render_sweep(config: RunConfig, columns: List[str], rows: List[Dict[str, Any]]) -> str:
    if config.output_format == "csv":
        return dumps_csv(columns, ([to_plain(row[c]) for c in columns] for row in rows))
    data = {
        "command": "sweep",
        "parameters": to_plain(config.parameters),
        "mode": config.mode,
        "columns": columns,
        "rows": [{c: to_plain(row[c]) for c in columns} for row in rows],
        "discrepancies": [],
    }
    validate_report(data)
    return dumps_json(data)


def render_acceptance(report: AcceptanceReport, output_format: str) -> str:
    data = report.to_dict()
    validate_report(data)
    if output_format == "csv":
        return dumps_csv(VERIFY_CSV_COLUMNS, ([c[k] for k in VERIFY_CSV_COLUMNS] for c in data["criteria"]))
    return dumps_json(data)


def print_acceptance(report: AcceptanceReport) -> None:
    table = Table(title=f"Acceptance suite (seed {report.seed})", show_header=True)
    table.add_column("ID", style="cyan")
    table.add_column("Criterion", style="white")
    table.add_column("Status")
    table.add_column("Actual", style="yellow")
    for c in report.criteria:
        status = "[green]PASS[/green]" if c.passed else "[bold red]FAIL[/bold red]"
        table.add_row(c.id, c.description, status, str(to_plain(c.actual)))
    console.print(table)

    cases = Table(title="Teleportation cases", show_header=True)
    cases.add_column("Case", style="cyan")
    cases.add_column("Status", style="green")
    for case_id, status in report.teleport_status.items():
        cases.add_row(case_id, status)
    console.print(cases)

    if report.discrepancies:
        lines = [f"[bold]{d.claim}[/bold] ({d.mode}): {d.description}; got {to_plain(d.actual)}" for d in report.discrepancies]
        console.print(Panel("\n".join(lines), title="Discrepancy ledger", border_style="yellow"))


def run(config: RunConfig) -> int:
    """Execute a validated configuration and emit its report.

    Returns:
        Exit code: 0 on success, 1 on a validation error, 2 on a failed verification
    """
    try:
        if config.command == "verify":
            report = run_acceptance(config.seed, progress=lambda name: logger.info("running %s", name))
            print_acceptance(report)
            write_output(render_acceptance(report, config.output_format), config.output_path)
            if not report.passed:
                raise VerificationFailure(report.failed_ids)
        else:
            text = _render_command(config)
            write_output(text, config.output_path)
    except VerificationFailure as e:
        console.print(f"[bold red]Verification failed: {e}[/bold red]")
        return 2
    except QSimError as e:
        console.print(f"[bold red]Error: {e}[/bold red]")
        return 1
    except jsonschema.ValidationError as e:
        console.print(f"[bold red]Report failed schema validation at {list(e.absolute_path)}: {e.message}[/bold red]")
        return 1
    if config.output_path is not None:
        console.print(f"[bold green]Wrote {config.command} report to {config.output_path}[/bold green]")
    return 0


def _render_command(config: RunConfig) -> str:
    if config.command == "sweep":
        return render_sweep(config, *run_sweep(config))
    report = PROTOCOLS[config.command](config.parameters, config.mode)
    for flag in report.flags:
        logger.warning(flag)
    return render_report(report, config.output_format)


def _dispatch(ctx: click.Context, command: str, build: Callable[[], Dict[str, Any]], **options) -> None:
    try:
        config = RunConfig.from_cli(command, build(), **options)
    except QSimError as e:
        console.print(f"[bold red]Error: {e}[/bold red]")
        ctx.exit(1)
    ctx.exit(run(config))


def channel_options(f):
    f = click.option("--r", type=float, help="Damping magnitude 1 - exp(-gamma_tau); excludes --gamma-tau.")(f)
    f = click.option("--gamma-tau", "gamma_tau", type=float, help="Channel exposure Gamma*tau.")(f)
    f = click.option("--p", type=float, help="Pre-weak measurement strength in (0, 1].")(f)
    return f


def mode_option(f):
    return click.option(
        "--mode",
        type=click.Choice(["paper", "physical"]),
        default="paper",
        show_default=True,
        help="Branch renormalization convention.",
    )(f)


def output_options(f):
    f = click.option("--out", help="Write the report to this file instead of stdout.")(f)
    f = click.option(
        "--format", "output_format", type=click.Choice(["json", "csv"]), default="json", show_default=True
    )(f)
    f = click.option(
        "--seed", type=SeedType(), envvar=SEED_ENV_VAR, show_envvar=True, help="Seed for randomized suites."
    )(f)
    return f


@click.group()
@click.version_option(__version__, prog_name="qsim")
@click.option("-v", "--verbose", count=True, help="Log more (-v info, -vv debug).")
@click.pass_context
def cli(ctx, verbose):
    """qsim - weak-measurement protected entanglement and teleportation."""
    ctx.ensure_object(dict)
    configure_logging(verbose)


@cli.command()
@click.option("--alpha", default=str(SQRT_HALF), show_default=True, help="Amplitude of |0>.")
@click.option("--beta", default=str(SQRT_HALF), show_default=True, help="Amplitude of |1>.")
@channel_options
@click.option("--p1", default="auto", show_default=True, help="Post-weak strength, or 'auto' for the optimal one.")
@output_options
@click.pass_context
def protect(ctx, alpha, beta, p, gamma_tau, r, p1, seed, output_format, out):
    """Send ALPHA|0> + BETA|1> through damping with weak-measurement protection."""
    _dispatch(
        ctx,
        "protect",
        lambda: dict(
            alpha=parse_complex(alpha, "alpha"),
            beta=parse_complex(beta, "beta"),
            p=p,
            gamma_tau=gamma_tau,
            r=r,
            p1=parse_p1(p1),
        ),
        seed=seed,
        output_format=output_format,
        output_path=out,
    )


@cli.command()
@click.option("--amps", default=DEFAULT_AMPS, show_default=True, help="Amplitudes a,b,c,d of |00>,|01>,|10>,|11>.")
@channel_options
@mode_option
@output_options
@click.pass_context
def bell(ctx, amps, p, gamma_tau, r, mode, seed, output_format, out):
    """Share a Bell pair after sending one qubit through the damping channel."""
    _dispatch(
        ctx,
        "bell",
        lambda: dict(amps=parse_amps(amps), p=p, gamma_tau=gamma_tau, r=r),
        mode=mode,
        seed=seed,
        output_format=output_format,
        output_path=out,
    )


@cli.command()
@click.option("--clone-angle", "clone_angle", type=float, default=DEFAULT_CLONE_ANGLE, show_default=True)
@click.option("--u", type=float, default=SQRT_HALF, show_default=True, help="Non-maximal Hadamard parameter in (0, 1).")
@channel_options
@mode_option
@click.option("--ap-sigma-x/--no-ap-sigma-x", "ap_sigma_x", default=False, help="Finish with sigma_x on qubit A.")
@output_options
@click.pass_context
def wstate(ctx, clone_angle, u, p, gamma_tau, r, mode, ap_sigma_x, seed, output_format, out):
    """Generate a W-type state with the economical cloner and a protected channel."""
    _dispatch(
        ctx,
        "wstate",
        lambda: dict(clone_angle=clone_angle, u=u, p=p, gamma_tau=gamma_tau, r=r, ap_sigma_x=ap_sigma_x),
        mode=mode,
        seed=seed,
        output_format=output_format,
        output_path=out,
    )


@cli.command()
@click.option("--case", "case_id", type=click.Choice(list(TELEPORT_CASES)), required=True)
@click.option("--x", type=float, required=True, help="chi1 = x|0> + sqrt(1-x^2)|1>.")
@click.option("--s", type=float, required=True, help="Overlap <chi1|chi2>.")
@click.option(
    "--pairing",
    type=click.Choice([c.value for c in PairingChoice]),
    default=PairingChoice.P02_13.value,
    show_default=True,
)
@click.option("--assignment", type=click.IntRange(0, 1), default=0, show_default=True)
@output_options
@click.pass_context
def teleport(ctx, case_id, x, s, pairing, assignment, seed, output_format, out):
    """Teleport one of two non-orthogonal states through the W-type resource."""
    _dispatch(
        ctx,
        "teleport",
        lambda: dict(case=case_id, x=x, s=s, pairing=pairing, assignment=assignment),
        seed=seed,
        output_format=output_format,
        output_path=out,
    )


@cli.command()
@click.option("--protocol", type=click.Choice(list(SWEEP_PARAMETERS)), required=True)
@click.option("--grid", required=True, help="name=start:stop:step[,name=start:stop:step...]")
@click.option("--alpha")
@click.option("--beta")
@click.option("--amps")
@channel_options
@click.option("--p1")
@click.option("--clone-angle", "clone_angle", type=float)
@click.option("--u", type=float)
@click.option("--case", "case_id", type=click.Choice(list(TELEPORT_CASES)))
@click.option("--x", type=float)
@click.option("--s", type=float)
@click.option("--pairing", type=click.Choice([c.value for c in PairingChoice]))
@mode_option
@output_options
@click.pass_context
def sweep(
    ctx, protocol, grid, alpha, beta, amps, p, gamma_tau, r, p1, clone_angle, u, case_id, x, s, pairing, mode,
    seed, output_format, out,
):
    """Evaluate a protocol over a parameter grid, one row per point."""
    _dispatch(
        ctx,
        "sweep",
        lambda: dict(
            protocol=protocol,
            grid=grid,
            alpha=alpha,
            beta=beta,
            amps=amps,
            p=p,
            gamma_tau=gamma_tau,
            r=r,
            p1=None if p1 is None else parse_p1(p1),
            clone_angle=clone_angle,
            u=u,
            case=case_id,
            x=x,
            s=s,
            pairing=pairing,
        ),
        mode=mode,
        seed=seed,
        output_format=output_format,
        output_path=out,
    )


@cli.command()
@output_options
@click.pass_context
def verify(ctx, seed, output_format, out):
    """Run the full acceptance suite and print the discrepancy ledger."""
    _dispatch(ctx, "verify", dict, seed=seed, output_format=output_format, output_path=out)


def main():
    """Main entry point for the CLI."""
    try:
        code = cli.main(prog_name="qsim", standalone_mode=False, obj={})
    except click.ClickException as e:
        e.show()
        code = 1
    except click.exceptions.Abort:
        console.print("Aborted.")
        code = 1
    sys.exit(code if isinstance(code, int) else 0)


if __name__ == "__main__":
    main()
