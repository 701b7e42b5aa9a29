# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0
"""Module with the run configuration models and their loader."""

from __future__ import annotations

import collections.abc as cabc
import logging
import pathlib
import typing as t

import jinja2
import pydantic
import yaml

__all__ = [
    "ForcingConfig",
    "ForcingSliceConfig",
    "GridConfig",
    "InterfaceConfig",
    "OutputConfig",
    "ProbeConfig",
    "RunConfig",
    "ShapeConfig",
    "TimeConfig",
    "ToleranceConfig",
    "format_validation_error",
    "parse_config",
    "read_config_file",
    "render_config",
]

logger = logging.getLogger(__name__)

Auto: t.TypeAlias = t.Literal["auto"]
PinMode: t.TypeAlias = t.Literal["eps_gamma"]
Preset: t.TypeAlias = t.Literal["none", "constant", "shear", "wave"]


class _Section(pydantic.BaseModel):
    model_config = pydantic.ConfigDict(extra="forbid")


class GridConfig(_Section):
    """The torus discretization.

    Without ``n`` the grid size follows from eps and ``h_ratio``.
    ``radii_per_octave`` sets how finely the density ratio samples
    ball radii.
    """

    d: t.Literal[2, 3] = 2
    n: int | None = None
    h_ratio: float = pydantic.Field(default=4.0, gt=0.0)
    radii_per_octave: int = pydantic.Field(default=4, ge=1)


class InterfaceConfig(_Section):
    """The interface width and the clamping parameters."""

    eps: float | Auto = 0.04
    gamma: float = pydantic.Field(default=0.25, gt=0.0, lt=0.5)
    candidates: list[float] = pydantic.Field(
        default_factory=lambda: [0.16, 0.08, 0.04, 0.02]
    )
    delta_clamp: float = pydantic.Field(default=1e-6, gt=0.0, lt=1.0)

    @pydantic.field_validator("eps")
    @classmethod
    def _positive_eps(cls, value: float | str) -> float | str:
        if isinstance(value, float) and value <= 0.0:
            raise ValueError("eps must be positive")
        return value


class TimeConfig(_Section):
    dt: float | Auto = "auto"
    scheme: t.Literal["explicit", "semi_implicit"] = "semi_implicit"
    t_end: float = pydantic.Field(default=0.01, ge=0.0)
    every: int = pydantic.Field(default=10, ge=1)


class ShapeConfig(_Section):
    """The initial ``+1`` region, see :class:`pfmc.physics.InitialShape`."""

    kind: t.Literal["sphere", "strip", "annulus", "two-spheres"] = "sphere"
    center: list[float] = pydantic.Field(default_factory=lambda: [0.5, 0.5])
    radius: float = 0.25
    inner_radius: float = 0.0
    second_center: list[float] | None = None
    bounds: tuple[float, float] = (0.25, 0.75)
    axis: int = 0
    steepness: float = pydantic.Field(default=1.0, gt=0.0)


class ForcingSliceConfig(_Section):
    """A closed-form forcing that applies from ``start`` onwards."""

    start: float = pydantic.Field(ge=0.0)
    preset: Preset = "constant"
    velocity: list[float] = pydantic.Field(default_factory=list)
    g: float = 0.0
    amplitude: float = 0.0


class ForcingConfig(_Section):
    """Transport and forcing fields before mollification.

    ``preset: snapshot`` reads the velocity components and ``g`` from
    snapshot files. ``pin_l`` replaces the computed clamping
    coefficient, either by a number or by ``eps_gamma`` for
    ``eps^-gamma``. ``slices`` make the forcing piecewise constant in
    time; the base preset applies until the first slice starts.
    """

    preset: t.Literal["none", "constant", "shear", "wave", "snapshot"] = (
        "none"
    )
    velocity: list[float] = pydantic.Field(default_factory=list)
    g: float = 0.0
    amplitude: float = 0.0
    mollify_delta: float | None = pydantic.Field(default=None, gt=0.0)
    pin_l: float | PinMode | None = None
    u_snapshots: list[pathlib.Path] = pydantic.Field(default_factory=list)
    g_snapshot: pathlib.Path | None = None
    slices: list[ForcingSliceConfig] = pydantic.Field(default_factory=list)

    @pydantic.model_validator(mode="after")
    def _snapshot_paths(self) -> ForcingConfig:
        if self.preset == "snapshot":
            if not self.u_snapshots and self.g_snapshot is None:
                raise ValueError(
                    "preset 'snapshot' needs u_snapshots or g_snapshot"
                )
        elif self.u_snapshots or self.g_snapshot is not None:
            raise ValueError("snapshot paths need preset 'snapshot'")
        return self


class ProbeConfig(_Section):
    """A monotonicity probe.

    ``y`` defaults to the shape center and ``s`` to ``t_end + 0.05``.
    """

    name: str | None = None
    y: list[float] | None = None
    s: float | None = None
    cutoff: bool = False
    images: int | None = pydantic.Field(default=None, ge=0)


class ToleranceConfig(_Section):
    """Constants of the checks run by ``verify``."""

    xi: float = pydantic.Field(default=0.01, ge=0.0)
    w: float = pydantic.Field(default=0.05, ge=0.0)
    energy: float = pydantic.Field(default=10.0, ge=0.0)
    energy_step: float = pydantic.Field(default=1e-8, ge=0.0)
    mono: float = pydantic.Field(default=1.0, ge=0.0)
    tail_constant: float = pydantic.Field(default=1.0, ge=0.0)
    density: float = pydantic.Field(default=1.5, ge=1.0)


class OutputConfig(_Section):
    directory: pathlib.Path = pathlib.Path("pfmc-out")
    snapshot_times: list[float] = pydantic.Field(default_factory=list)
    pgm: bool = False


class RunConfig(_Section):
    """The complete description of one run."""

    grid: GridConfig = pydantic.Field(default_factory=GridConfig)
    interface: InterfaceConfig = pydantic.Field(
        default_factory=InterfaceConfig
    )
    time: TimeConfig = pydantic.Field(default_factory=TimeConfig)
    shape: ShapeConfig = pydantic.Field(default_factory=ShapeConfig)
    forcing: ForcingConfig = pydantic.Field(default_factory=ForcingConfig)
    probes: list[ProbeConfig] = pydantic.Field(default_factory=list)
    tolerances: ToleranceConfig = pydantic.Field(
        default_factory=ToleranceConfig
    )
    output: OutputConfig = pydantic.Field(default_factory=OutputConfig)
    workers: int = pydantic.Field(default=1, ge=1)

    @pydantic.model_validator(mode="after")
    def _dimensions(self) -> RunConfig:
        d = self.grid.d
        if self.shape.kind != "strip" and len(self.shape.center) != d:
            raise ValueError(f"shape.center needs {d} coordinates")
        if self.forcing.velocity and len(self.forcing.velocity) != d:
            raise ValueError(f"forcing.velocity needs {d} components")
        for probe in self.probes:
            if probe.y is not None and len(probe.y) != d:
                raise ValueError(f"probe y needs {d} coordinates")
        return self

    def probe_names(self) -> list[str]:
        return [
            probe.name or f"p{index}"
            for index, probe in enumerate(self.probes)
        ]


def parse_config(content: cabc.Mapping[str, t.Any] | None) -> RunConfig:
    return RunConfig(**(content or {}))


def read_config_file(
    config: t.TextIO, params: cabc.Mapping[str, t.Any] | None = None
) -> RunConfig:
    """Read a yaml run configuration.

    Files ending in ``.j2`` are rendered as Jinja2 templates first, with
    ``params`` available as ``params``.
    """
    name = getattr(config, "name", "")
    if isinstance(name, str) and name.endswith(".j2"):
        template = jinja2.Template(
            config.read(), undefined=jinja2.StrictUndefined
        )
        config_content = yaml.safe_load(template.render(params=params or {}))
    else:
        config_content = yaml.safe_load(config)
    logger.debug("Loaded configuration %s", config_content)
    return parse_config(config_content)


def render_config(config: RunConfig) -> str:
    """Return yaml that :func:`read_config_file` parses back to ``config``."""
    return yaml.safe_dump(config.model_dump(mode="json"), sort_keys=False)


def format_validation_error(error: pydantic.ValidationError) -> str:
    """Return the dotted key path and message of every error."""
    messages = []
    for item in error.errors():
        path = ".".join(str(part) for part in item["loc"]) or "<root>"
        messages.append(f"{path}: {item['msg']}")
    return "; ".join(messages)
