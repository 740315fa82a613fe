"""
Main CLI entry point for Jubilee.

Usage:
    jubilee settle --theta 0.3 --theta 0.6
    jubilee verify [--negative-control]
    jubilee simulate --alphas 0,0.5,1 --draws 100000
    jubilee protocol --all-local --input 0.3 --input 0.6
    jubilee protocol --role creditor --index 1 --input 0.3
    jubilee example
"""

from __future__ import annotations

import json
import logging
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Any, NoReturn

import click
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.panel import Panel
from rich.table import Table

from jubilee import __version__
from jubilee.errors import (
    EXIT_BANKRUPT,
    EXIT_OK,
    EXIT_VERIFICATION_FAILED,
    ConfigError,
    DomainError,
    JubileeError,
)
from jubilee.io import atomic_write_text
from jubilee.models.schemas import Config

console = Console()
err_console = Console(stderr=True)


@dataclass
class AppContext:
    """State shared by every subcommand."""

    config: Config
    out: Path | None
    quiet: bool

    @property
    def output_path(self) -> Path | None:
        return self.out or self.config.output.path


def _configure_logging(quiet: bool) -> None:
    handler = RichHandler(console=err_console, show_path=False, show_time=False)
    logging.basicConfig(
        level=logging.WARNING if quiet else logging.INFO,
        format="%(message)s",
        handlers=[handler],
        force=True,
    )


def _fail(error: JubileeError) -> NoReturn:
    err_console.print(f"[red]Error:[/red] {escape(str(error))}", highlight=False)
    sys.exit(error.exit_code)


@contextmanager
def _exit_codes() -> Iterator[None]:
    """Map library exceptions to the documented exit codes."""
    try:
        yield
    except JubileeError as e:
        _fail(e)
    except ValidationError as e:
        _fail(DomainError(str(e)))


@click.group()
@click.version_option(version=__version__, prog_name="jubilee")
@click.option(
    "--config",
    "-c",
    "config_path",
    type=click.Path(path_type=Path),
    envvar="JUBILEE_CONFIG",
    default=None,
    help="JSON config file (or set JUBILEE_CONFIG)",
)
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Override every seed in the config")
@click.option(
    "--out",
    "-o",
    type=click.Path(path_type=Path),
    default=None,
    help="Output path (format inferred from extension: .json, .md)",
)
@click.option("--quiet", "-q", is_flag=True, help="Only print errors")
@click.pass_context
def cli(ctx: click.Context, config_path: Path | None, seed: int | None, out: Path | None, quiet: bool) -> None:
    """
    Jubilee - optimal debt-relief settlements between a debtor and its creditors.

    Run 'jubilee settle --help' for settlement options.
    """
    _configure_logging(quiet)
    console.quiet = quiet
    try:
        config = Config.load(config_path).with_seed(seed)
    except ConfigError as e:
        _fail(e)
    ctx.obj = AppContext(config=config, out=out, quiet=quiet)


def _banner(title: str) -> None:
    console.print(f"\n[bold]Jubilee {title}[/bold] v{__version__}\n")


def _infer_format(path: Path) -> str:
    """Infer output format from file extension."""
    return {
        ".json": "json",
        ".md": "markdown",
        ".markdown": "markdown",
    }.get(path.suffix.lower(), "text")


# ---------------------------------------------------------------------------
# settle
# ---------------------------------------------------------------------------


def _read_profile(theta: tuple[float, ...], theta_file: Path | None) -> tuple[float, ...]:
    if theta and theta_file:
        raise click.UsageError("give types with --theta or --theta-file, not both")
    if theta_file is not None:
        try:
            values = json.loads(theta_file.read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise click.UsageError(f"cannot read types from {theta_file}: {e}") from e
        if not isinstance(values, list) or not all(isinstance(v, (int, float)) for v in values):
            raise click.UsageError(f"{theta_file} must hold a JSON list of numbers")
        return tuple(float(v) for v in values)
    if not theta:
        raise click.UsageError("missing creditor types: pass --theta once per creditor")
    return theta


@cli.command()
@click.option("--theta", "-t", type=float, multiple=True, help="Reported type of the next creditor (repeat per creditor)")
@click.option(
    "--theta-file",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="JSON list of creditor types",
)
@click.pass_obj
def settle(app: AppContext, theta: tuple[float, ...], theta_file: Path | None) -> None:
    """
    Compute the settlement for reported creditor types.

    Exits 0 when the entity stays solvent and 3 when it goes bankrupt.

    Examples:

        jubilee settle --theta 0.3 --theta 0.6

        jubilee --config economy.json settle --theta-file types.json --out outcome.json
    """
    from jubilee.core.mechanism import TypeProfile
    from jubilee.core.mechanism import settle as run_settle
    from jubilee.render.markdown import render_outcome

    profile_values = _read_profile(theta, theta_file)
    _banner("Settlement")
    with _exit_codes():
        params = app.config.market.to_params()
        outcome = run_settle(params, TypeProfile.of(*profile_values))

    table = Table(title="Settlement" if outcome.solvent else "Bankruptcy")
    table.add_column("Creditor", style="cyan")
    table.add_column("Type", justify="right")
    table.add_column("Pivotal type", justify="right")
    table.add_column("Transfer", justify="right")
    table.add_column("Forgiveness", justify="right")
    for i, value in enumerate(profile_values):
        table.add_row(
            str(i + 1),
            f"{value:.6f}",
            f"{outcome.pivotal[i]:.6f}",
            f"{outcome.transfers[i]:.6f}",
            f"{outcome.forgiveness[i]:.6f}",
        )
    decision = "[green]solvent[/green]" if outcome.solvent else "[red]bankrupt[/red]"
    console.print(Panel(f"Decision: {decision}\nPer-creditor debt d = {params.d:.6g}", title="Summary", border_style="blue"))
    console.print(table)
    for flag in outcome.flags:
        console.print(f"[yellow]Flag:[/yellow] {flag}")

    path = app.output_path
    if path is not None:
        config_hash, seed = app.config.config_hash(), app.config.seed
        if _infer_format(path) == "markdown":
            content = render_outcome(outcome, params, config_hash=config_hash, seed=seed)
        else:
            document = {
                "config_hash": config_hash,
                "seed": seed,
                "profile": list(profile_values),
                "outcome": outcome.model_dump(mode="json"),
            }
            content = json.dumps(document, indent=2) + "\n"
        atomic_write_text(path, content)
        console.print(f"\n[green]Outcome saved to:[/green] {path}")

    sys.exit(EXIT_OK if outcome.solvent else EXIT_BANKRUPT)


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


@cli.command()
@click.option(
    "--negative-control",
    is_flag=True,
    help="Verify a transfer rule perturbed by the creditor's own report; must fail",
)
@click.pass_obj
def verify(app: AppContext, negative_control: bool) -> None:
    """
    Run the verification suite on the configured economy.

    Exits 4 when any check fails.

    Examples:

        jubilee verify

        jubilee verify --negative-control --out report.md
    """
    from jubilee.core.analysis import run_verification
    from jubilee.core.rules import OPTIMAL, PerturbedTransferRule

    config = app.config
    rule = PerturbedTransferRule(config.verification.negative_control_beta) if negative_control else OPTIMAL
    _banner("Verification")

    with _exit_codes(), console.status("[bold green]Running checks..."):
        params = config.market.to_params()
        report = run_verification(
            params, config.verification, config.quadrature, rule, config_hash=config.config_hash()
        )

    table = Table(title=f"Checks ({rule.name})")
    table.add_column("Check", style="cyan")
    table.add_column("Status")
    table.add_column("Value", justify="right")
    table.add_column("Tolerance", justify="right")
    styles = {"passed": "green", "failed": "red", "skipped": "dim"}
    for check in report.checks:
        style = styles[check.status.value]
        table.add_row(
            check.title, f"[{style}]{check.status}[/{style}]", f"{check.value:.3e}", f"{check.tolerance:.1e}"
        )
    console.print(table)
    console.print(
        f"\nDebtor utility V = {report.debtor_utility_v:.9f}, virtual surplus = {report.virtual_surplus:.9f}"
    )

    path = app.output_path
    if path is not None:
        fmt = _infer_format(path)
        if fmt == "markdown":
            report.to_markdown(path)
        elif fmt == "json":
            report.to_json(path)
        else:
            atomic_write_text(path, report.summary() + "\n")
        console.print(f"\n[green]Report saved to:[/green] {path}")

    if report.passed:
        console.print("\n[green]All checks passed.[/green]")
        sys.exit(EXIT_OK)
    console.print(f"\n[red]{len(report.failed_checks)} check(s) failed.[/red]")
    sys.exit(EXIT_VERIFICATION_FAILED)


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _parse_alphas(value: str | None) -> list[float] | None:
    if value is None:
        return None
    try:
        alphas = [float(part) for part in value.split(",") if part.strip()]
    except ValueError as e:
        raise click.BadParameter(f"expected comma-separated numbers, got {value!r}", param_hint="--alphas") from e
    if not alphas or any(a < 0.0 for a in alphas):
        raise click.BadParameter("need at least one non-negative revision weight", param_hint="--alphas")
    return alphas


@cli.command()
@click.option("--alphas", default=None, help="Comma-separated revision weights (default: from config)")
@click.option("--draws", type=click.IntRange(min=1), default=None, help="Profiles per weight (default: from config)")
@click.pass_obj
def simulate(app: AppContext, alphas: str | None, draws: int | None) -> None:
    """
    Monte Carlo comparative statics over the revision weight.

    Writes <out>.csv and <out>.json when an output path is given.

    Example:

        jubilee --seed 7 simulate --alphas 0,0.5,1 --draws 100000 --out sim
    """
    from jubilee.core.simulation import simulate as run_simulation
    from jubilee.core.simulation import write_table

    config = app.config
    weights = _parse_alphas(alphas) or config.simulation.alphas
    count = draws or config.simulation.draws
    _banner("Simulation")

    with _exit_codes(), console.status("[bold green]Simulating..."):
        params = config.market.to_params()
        table = run_simulation(params, weights, count, config.seed)

    view = Table(title=f"{count} draws per weight, seed {config.seed}")
    for column in ("alpha", "settlement_probability", "expected_forgiveness", "debtor_profit"):
        view.add_column(column, justify="right")
    for row in table.itertuples(index=False):
        view.add_row(
            f"{row.alpha:g}",
            f"{row.settlement_probability:.4f} ± {row.settlement_probability_se:.4f}",
            f"{row.expected_forgiveness:.6f} ± {row.expected_forgiveness_se:.6f}",
            f"{row.debtor_profit:.6f} ± {row.debtor_profit_se:.6f}",
        )
    console.print(view)

    path = app.output_path
    if path is not None:
        csv_path, json_path = write_table(
            table, path, config_hash=config.config_hash(), seed=config.seed, draws=count
        )
        console.print(f"\n[green]Tables saved to:[/green] {csv_path}, {json_path}")


# ---------------------------------------------------------------------------
# protocol
# ---------------------------------------------------------------------------


@cli.command()
@click.option(
    "--role",
    type=click.Choice(["creditor", "evaluator", "debtor"]),
    default=None,
    help="Role of this process in a TCP session",
)
@click.option("--index", type=click.IntRange(min=1), default=None, help="Creditor or evaluator index")
@click.option("--input", "inputs", type=float, multiple=True, help="Creditor type (twice with --all-local)")
@click.option("--all-local", is_flag=True, help="Run all five parties in this process")
@click.pass_obj
def protocol(
    app: AppContext, role: str | None, index: int | None, inputs: tuple[float, ...], all_local: bool
) -> None:
    """
    Settle without a trusted party.

    Examples:

        jubilee protocol --all-local --input 0.3 --input 0.6

        jubilee --config session.json protocol --role creditor --index 1 --input 0.3
    """
    if all_local == (role is not None):
        raise click.UsageError("choose either --all-local or --role")
    if all_local:
        _protocol_all_local(app, inputs)
    else:
        assert role is not None
        _protocol_party(app, role, index, inputs)


def _protocol_all_local(app: AppContext, inputs: tuple[float, ...]) -> None:
    from jubilee.core.mechanism import TypeProfile
    from jubilee.protocol.session import ideal_run, mpc_run

    if len(inputs) != 2:
        raise click.UsageError("--all-local needs --input for both creditors")
    config = app.config
    _banner("Protocol")
    with _exit_codes():
        params = config.market.to_params()
        profile = TypeProfile.of(*inputs)
        outcome, transcript = mpc_run(params, profile, config.protocol, config_hash=config.config_hash())
        ideal, _ = ideal_run(params, profile)

    table = Table(title=f"Session {transcript.session_id}")
    table.add_column("Creditor", style="cyan")
    table.add_column("Transfer", justify="right")
    table.add_column("Trusted party", justify="right")
    table.add_column("Forgiveness", justify="right")
    for i in range(2):
        table.add_row(
            str(i + 1), f"{outcome.transfers[i]:.6f}", f"{ideal.transfers[i]:.6f}", f"{outcome.forgiveness[i]:.6f}"
        )
    decision = "[green]solvent[/green]" if outcome.solvent else "[red]bankrupt[/red]"
    console.print(Panel(f"Decision: {decision}\nMessages: {len(transcript.messages)}", title="Outcome"))
    console.print(table)
    for note in transcript.leakage_notes:
        console.print(f"[yellow]Leakage:[/yellow] {note}")

    path = app.output_path
    if path is not None:
        transcript.save(path)
        console.print(f"\n[green]Transcript saved to:[/green] {path}")


def _protocol_party(app: AppContext, role: str, index: int | None, inputs: tuple[float, ...]) -> None:
    from jubilee.protocol.session import run_party

    if role == "debtor":
        if index is not None:
            raise click.UsageError("the debtor takes no --index")
        name = role
    elif index is None:
        raise click.UsageError(f"--role {role} needs --index")
    else:
        name = f"{role}-{index}"
    if role == "creditor" and len(inputs) != 1:
        raise click.UsageError("a creditor needs exactly one --input")
    if role != "creditor" and inputs:
        raise click.UsageError(f"--input is only for creditors, not {name}")

    settings = app.config.protocol
    if settings.transport != "tcp":
        settings = settings.model_copy(update={"transport": "tcp"})
    out_dir = app.output_path or Path(".")
    with _exit_codes():
        params = app.config.market.to_params()
        code = run_party(
            name,
            params,
            settings,
            out_dir,
            inputs[0] if inputs else None,
            config_hash=app.config.config_hash(),
        )
    if code == EXIT_OK:
        console.print(f"[green]{name} finished;[/green] transcript in {out_dir}")
    sys.exit(code)


# ---------------------------------------------------------------------------
# example
# ---------------------------------------------------------------------------


@cli.command()
@click.option("--samples", type=click.IntRange(min=1), default=1000, help="Random profiles for the comparison")
@click.pass_obj
def example(app: AppContext, samples: int) -> None:
    """
    Print the worked two-creditor example and compare its printed formulas.

    Uses the configured economy when it has two creditors with uniform
    types on [0, 1].
    """
    from jubilee.core.closedform import (
        TwoCreditorEconomy,
        cf_forgiveness,
        cf_investment_rule,
        cf_transfer,
        discrepancy_table,
    )

    _banner("Worked Example")
    with _exit_codes():
        economy = TwoCreditorEconomy.from_market(app.config.market.to_params())
        rows = discrepancy_table(economy, samples=samples, seed=app.config.seed)
        theta = (0.3, 0.6)
        solvent = cf_investment_rule(economy, *theta)

    info: dict[str, Any] = {
        "A": economy.A,
        "D": economy.D,
        "alpha": economy.alpha,
        "tau": economy.tau,
    }
    console.print(Panel("\n".join(f"{k} = {v:.6g}" for k, v in info.items()), title="Economy", border_style="blue"))
    if solvent:
        console.print(
            f"theta = {theta}: solvent, transfers "
            f"({cf_transfer(economy, 0, theta[1]):.6f}, {cf_transfer(economy, 1, theta[0]):.6f}), "
            f"forgiveness ({cf_forgiveness(economy, 0, theta[1]):.6f}, {cf_forgiveness(economy, 1, theta[0]):.6f})"
        )
    else:
        console.print(f"theta = {theta}: bankrupt")

    table = Table(title=f"Printed vs derived ({samples} profiles)")
    table.add_column("Quantity", style="cyan")
    table.add_column("Printed")
    table.add_column("Derived")
    table.add_column("Max deviation", justify="right")
    table.add_column("Disagreement", justify="right")
    for row in rows:
        table.add_row(
            row.quantity, row.printed, row.derived, f"{row.max_abs_deviation:.3e}", f"{row.disagreement_rate:.1%}"
        )
    console.print(table)

    path = app.output_path
    if path is not None:
        config_hash, seed = app.config.config_hash(), app.config.seed
        if _infer_format(path) == "markdown":
            from jubilee.render.markdown import render_discrepancies

            content = render_discrepancies(rows, config_hash=config_hash, seed=seed) + "\n"
        else:
            document = {
                "config_hash": config_hash,
                "seed": seed,
                "samples": samples,
                "rows": [r.model_dump(mode="json") for r in rows],
            }
            content = json.dumps(document, indent=2) + "\n"
        atomic_write_text(path, content)
        console.print(f"\n[green]Table saved to:[/green] {path}")


if __name__ == "__main__":
    cli()
