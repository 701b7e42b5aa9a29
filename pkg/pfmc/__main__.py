# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0
"""Main entry point into pfmc."""

from __future__ import annotations

import logging
import pathlib
import typing

import click
import jinja2
import yaml

import pfmc
from pfmc import oracles
from pfmc.cli import PfmcCli, parse_params
from pfmc.connectors import tables
from pfmc.data_model import InterfaceExtinct, InvariantViolation
from pfmc.physics import potential
from pfmc.runs import simulation, sweep, verification

logger = logging.getLogger(__name__)


@click.group()
@click.option(
    "--config",
    "config_io",
    type=click.File(mode="r", encoding="utf8"),
    envvar="PFMC_CONFIG",
)
@click.option(
    "--out",
    type=click.Path(file_okay=False, path_type=pathlib.Path),
    envvar="PFMC_OUT",
)
@click.option(
    "--workers", type=click.IntRange(min=1), envvar="PFMC_WORKERS"
)
@click.option(
    "--seed",
    type=int,
    envvar="PFMC_SEED",
    help="Reserved; the dynamics are deterministic.",
)
@click.option(
    "--param",
    "params",
    multiple=True,
    metavar="KEY=VALUE",
    help="Template parameter for configs ending in .j2.",
)
@click.option("--debug", is_flag=True, envvar="PFMC_DEBUG", default=False)
@click.version_option(
    version=pfmc.__version__,
    prog_name="pfmc",
    message="%(prog)s %(version)s",
)
@click.pass_context
def cli(
    ctx: click.core.Context,
    *,
    config_io: typing.TextIO | None,
    out: pathlib.Path | None,
    workers: int | None,
    seed: int | None,
    params: tuple[str, ...],
    debug: bool,
) -> None:
    """Simulate forced mean curvature flow with a phase field."""
    pfmc_cli = PfmcCli(debug, out, workers, seed, parse_params(params))
    pfmc_cli.setup_logger()
    try:
        if config_io is not None:
            pfmc_cli.load_config(config_io)
        else:
            pfmc_cli.apply_overrides()
    except (ValueError, yaml.YAMLError, jinja2.TemplateError) as error:
        pfmc_cli.fail_config(error)
    except OSError as error:
        pfmc_cli.fail("io-error", error)
    ctx.obj = pfmc_cli


@cli.command()
@click.pass_obj
def print_cli_state(pfmc_cli: PfmcCli) -> None:
    """Print the CLI State."""
    pfmc_cli.setup_logger()
    pfmc_cli.print_state()


def _simulate(pfmc_cli: PfmcCli) -> simulation.SimulationResult:
    try:
        built = simulation.build_simulation(pfmc_cli.config)
    except ValueError as error:
        pfmc_cli.fail_config(error)
    except OSError as error:
        pfmc_cli.fail("io-error", error)
    logger.info("Running %s", pfmc_cli.config_name)
    return simulation.run_simulation(built)


def _write(pfmc_cli: PfmcCli, result: simulation.SimulationResult) -> None:
    try:
        written = simulation.write_outputs(result, pfmc_cli.output)
    except OSError as error:
        pfmc_cli.fail("io-error", error)
    click.echo(f"Wrote {len(written)} files to {pfmc_cli.output}")


@cli.command()
@click.pass_obj
def run(pfmc_cli: PfmcCli) -> None:
    """Run the configured simulation and write its diagnostics."""
    result = _simulate(pfmc_cli)
    _write(pfmc_cli, result)
    if result.error is not None:
        pfmc_cli.fail("invariant-violation", result.error)


@cli.command()
@click.pass_obj
def verify(pfmc_cli: PfmcCli) -> None:
    """Run the simulation and check its invariants."""
    result = _simulate(pfmc_cli)
    _write(pfmc_cli, result)
    checks = verification.verify(result)
    for check in checks:
        click.echo(check.summary())
    try:
        tables.write_records(
            pfmc_cli.output / "verify.csv",
            verification.VERIFY_COLUMNS,
            checks,
        )
    except OSError as error:
        pfmc_cli.fail("io-error", error)
    failed = [check.check for check in checks if not check.passed]
    if result.error is not None:
        pfmc_cli.fail("invariant-violation", result.error)
    if failed:
        pfmc_cli.fail("check-failed", ",".join(failed))


@cli.command(name="sweep")
@click.option(
    "--eps",
    "eps_list",
    type=float,
    multiple=True,
    required=True,
    help="Interface width of one sweep point; repeat for more.",
)
@click.pass_obj
def sweep_command(pfmc_cli: PfmcCli, eps_list: tuple[float, ...]) -> None:
    """Repeat the run over several eps and check the trends."""
    try:
        result = sweep.run_sweep(
            pfmc_cli.config, list(eps_list), pfmc_cli.config.workers
        )
    except InvariantViolation as error:
        pfmc_cli.fail("invariant-violation", error)
    except ValueError as error:
        pfmc_cli.fail_config(error)
    try:
        sweep.write_sweep(result, pfmc_cli.output / "sweep.csv")
    except OSError as error:
        pfmc_cli.fail("io-error", error)
    for point, ratio in zip(result.points, result.ratios(), strict=True):
        line = (
            f"eps={point.eps:g} n={point.n} xi_l1={point.xi_l1:.6e} "
            f"l_term={point.l_term:.6e}"
        )
        if ratio is not None:
            line += f" l_ratio={ratio:.4f}"
        click.echo(line)
    if not result.passed:
        pfmc_cli.fail("sweep-failed", "; ".join(result.failures))


@cli.command()
@click.pass_obj
def oracle(pfmc_cli: PfmcCli) -> None:
    """Print the reference values for the configured run."""
    config = pfmc_cli.config
    p = potential.make_standard_potential()
    eps = config.interface.eps
    click.echo(f"sigma={p.sigma!r}")
    if eps != "auto":
        click.echo(f"front_energy_1d={oracles.front_energy_1d(p, eps)!r}")
        click.echo(
            f"front_discrepancy_1d={oracles.front_discrepancy_1d(p, eps)!r}"
        )
    forcing = config.forcing
    constant = forcing.preset in {"none", "constant"}
    if not constant:
        click.echo(f"# no closed form for preset {forcing.preset!r}")
        return
    d = config.grid.d
    velocity = forcing.velocity or [0.0] * d
    g = forcing.g if forcing.preset == "constant" else 0.0
    shape = config.shape
    t_end = config.time.t_end
    if shape.kind == "strip":
        normal = [0.0] * d
        normal[shape.axis] = 1.0
        speed = oracles.traveling_wave_speed(velocity, g, normal)
        click.echo(f"traveling_wave_speed={speed!r}")
    elif shape.kind == "sphere" and not any(velocity):
        click.echo(
            "extinction_time="
            f"{oracles.extinction_time(shape.radius, g, d)!r}"
        )
        try:
            radius = oracles.sphere_radius(shape.radius, g, d, t_end)
        except InterfaceExtinct:
            click.echo(f"sphere_radius(t={t_end!r})=extinct")
        else:
            click.echo(f"sphere_radius(t={t_end!r})={radius!r}")


if __name__ == "__main__":
    cli(obj={})
