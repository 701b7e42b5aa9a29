# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0
"""Tool for CLI work."""

from __future__ import annotations

import collections.abc as cabc
import logging
import pathlib
import typing

import click
import pydantic
import yaml

from pfmc.runs import run_config

logger = logging.getLogger(__name__)

REASONS = (
    "config-invalid",
    "invariant-violation",
    "io-error",
    "check-failed",
    "sweep-failed",
)


class PfmcCli:
    """Call Level Interface."""

    def __init__(
        self,
        debug: bool,
        output_directory: pathlib.Path | None = None,
        workers: int | None = None,
        seed: int | None = None,
        params: dict[str, typing.Any] | None = None,
    ) -> None:
        self.debug = debug
        self.output_directory = output_directory
        self.workers = workers
        self.seed = seed
        self.params = params or {}
        self.config = run_config.RunConfig()
        self.config_name = "<defaults>"

    def print_state(self) -> None:
        """Print the State of the cli tool."""
        click.echo("---------------------------------------")
        for attribute in sorted(vars(self)):
            if attribute.startswith("_") or attribute == "config":
                continue
            value = getattr(self, attribute)
            click.echo(f"{attribute}: '{value}'")
        click.echo("---------------------------------------")
        click.echo(run_config.render_config(self.config), nl=False)

    def setup_logger(self) -> None:
        """Set the logger in the right mood."""
        max_logging_level = logging.DEBUG if self.debug else logging.WARNING
        logging.basicConfig(
            level=max_logging_level,
            format="%(asctime)-15s - %(levelname)-8s %(message)s",
        )

    def load_config(self, config_io: typing.TextIO) -> None:
        """Read the run config and apply the command line overrides.

        - examples in /tests/data/*.yaml
        """
        if config_io.closed:
            raise RuntimeError("run config io stream is closed ")
        if not config_io.readable():
            raise RuntimeError("run config io stream is not readable")
        self.config_name = getattr(config_io, "name", "<stream>")
        self.config = run_config.read_config_file(config_io, self.params)
        self.apply_overrides()

    def apply_overrides(self) -> None:
        output = self.config.output
        if self.output_directory is not None:
            output = output.model_copy(
                update={"directory": self.output_directory}
            )
        workers = self.workers or self.config.workers
        self.config = self.config.model_copy(
            update={"output": output, "workers": workers}
        )
        if self.seed is not None:
            logger.debug("Seed %d is unused", self.seed)

    @property
    def output(self) -> pathlib.Path:
        return self.config.output.directory

    @staticmethod
    def fail(reason: str, detail: object) -> typing.NoReturn:
        """Print the machine readable reason line and exit non-zero."""
        assert reason in REASONS, reason
        text = " ".join(str(detail).split())
        logger.error("%s: %s", reason, text)
        click.echo(f"reason={reason} detail={text}", err=True)
        raise SystemExit(1)

    @classmethod
    def fail_config(cls, error: Exception) -> typing.NoReturn:
        if isinstance(error, pydantic.ValidationError):
            cls.fail(
                "config-invalid", run_config.format_validation_error(error)
            )
        cls.fail("config-invalid", error)


def parse_params(values: cabc.Iterable[str]) -> dict[str, typing.Any]:
    """Turn ``KEY=VALUE`` strings into template parameters.

    Values are parsed as YAML scalars, so numbers stay numbers.
    """
    params: dict[str, typing.Any] = {}
    for item in values:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise click.BadParameter(
                f"{item!r} is not of the form KEY=VALUE", param_hint="--param"
            )
        params[key.strip()] = yaml.safe_load(value)
    return params
