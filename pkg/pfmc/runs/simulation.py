# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0
"""Build a run from its configuration, execute it and write the results."""

from __future__ import annotations

import collections.abc as cabc
import dataclasses
import logging
import math
import pathlib

import numpy as np

from pfmc.connectors import snapshots, tables
from pfmc.data_model import (
    DIAGNOSTICS_COLUMNS,
    MONOTONICITY_COLUMNS,
    DiagnosticsRecord,
    InterfaceExtinct,
    InvariantViolation,
    MonotonicityRecord,
    MonotonicityReport,
    SimState,
)
from pfmc.diagnostics import measures, monotonicity
from pfmc.numerics import solver
from pfmc.numerics.torus_grid import Field, TorusGrid, grid_size_for
from pfmc.physics import fields, potential
from pfmc.runs.run_config import ForcingConfig, RunConfig

__all__ = [
    "PROBE_LEAD",
    "Simulation",
    "SimulationResult",
    "build_forcing",
    "build_simulation",
    "resolve_eps",
    "run_simulation",
    "write_outputs",
]

logger = logging.getLogger(__name__)

PROBE_LEAD = 0.05
"""Default gap between the end of a run and the probe time ``s``."""
SNAPSHOT_SLACK = 1e-12


@dataclasses.dataclass(eq=False)
class Simulation:
    """Everything needed to execute one configured run."""

    config: RunConfig
    grid: TorusGrid
    shape: fields.InitialShape
    initial: SimState
    kernels: list[monotonicity.KernelSpec]
    diagnostics: measures.DiagnosticsProbe
    schedule: fields.ForcingSchedule | None = None

    @property
    def t_end(self) -> float:
        return self.config.time.t_end


@dataclasses.dataclass(eq=False)
class SimulationResult:
    """Records of a finished or aborted run."""

    simulation: Simulation
    final: SimState
    diagnostics: list[DiagnosticsRecord]
    monotonicity: dict[str, list[MonotonicityRecord]]
    reports: dict[str, MonotonicityReport]
    snapshots: list[tuple[int, float, Field]]
    error: InvariantViolation | None = None

    @property
    def aborted(self) -> bool:
        return self.error is not None


def _shape(config: RunConfig) -> fields.InitialShape:
    shape = config.shape
    return fields.InitialShape(
        kind=shape.kind,
        center=tuple(shape.center),
        radius=shape.radius,
        inner_radius=shape.inner_radius,
        second_center=(
            None if shape.second_center is None else tuple(shape.second_center)
        ),
        bounds=shape.bounds,
        axis=shape.axis,
        steepness=shape.steepness,
    )


def _snapshot_field(path: pathlib.Path, grid: TorusGrid) -> Field:
    snapshot = snapshots.read_snapshot(path)
    if (snapshot.d, snapshot.n) != (grid.d, grid.n):
        raise ValueError(
            f"Snapshot {path} has d={snapshot.d}, n={snapshot.n}; the run "
            f"needs d={grid.d}, n={grid.n}"
        )
    return snapshot.data


def _raw_fields(
    grid: TorusGrid,
    preset: str,
    forcing: ForcingConfig,
    velocity: cabc.Sequence[float],
    g: float,
    amplitude: float,
) -> tuple[Field, Field]:
    if preset != "snapshot":
        return fields.raw_forcing(grid, preset, velocity, g, amplitude)
    u = np.zeros((grid.d, *grid.shape), dtype=float)
    if forcing.u_snapshots:
        if len(forcing.u_snapshots) != grid.d:
            raise ValueError(
                f"forcing.u_snapshots needs {grid.d} files, got "
                f"{len(forcing.u_snapshots)}"
            )
        u = np.stack([_snapshot_field(p, grid) for p in forcing.u_snapshots])
    g_raw = grid.zeros()
    if forcing.g_snapshot is not None:
        g_raw = _snapshot_field(forcing.g_snapshot, grid)
    return u, g_raw


def build_forcing(
    grid: TorusGrid, config: RunConfig, eps: float
) -> tuple[fields.ForcingData, fields.ForcingSchedule | None]:
    """Mollify the configured forcing and apply the coefficient pin.

    Returns the forcing at time 0 and, if slices are configured, the
    schedule it belongs to.
    """
    forcing = config.forcing
    gamma = config.interface.gamma
    delta = forcing.mollify_delta or 2.0 * grid.h
    pin: float | None = None
    if forcing.pin_l == "eps_gamma":
        pin = eps**-gamma
    elif forcing.pin_l is not None:
        pin = float(forcing.pin_l)

    def mollified(
        preset: str, velocity: cabc.Sequence[float], g: float, amp: float
    ) -> fields.ForcingData:
        u_raw, g_raw = _raw_fields(grid, preset, forcing, velocity, g, amp)
        data = fields.mollify_forcing(grid, u_raw, g_raw, delta, gamma)
        return data.pinned(pin).compliant_at(eps)

    base = mollified(
        forcing.preset, forcing.velocity, forcing.g, forcing.amplitude
    )
    if not forcing.slices:
        _warn_noncompliant(base, eps)
        return base, None

    timeline = [
        (
            item.start,
            mollified(item.preset, item.velocity, item.g, item.amplitude),
        )
        for item in forcing.slices
    ]
    if all(start > 0.0 for start, _ in timeline):
        timeline.insert(0, (0.0, base))
    schedule = fields.ForcingSchedule.build(timeline)
    initial = schedule.at(0.0).compliant_at(eps)
    _warn_noncompliant(initial, eps)
    logger.info(
        "Forcing schedule with %d slices, L_max=%.4g",
        len(schedule.slices),
        schedule.L_max,
    )
    return initial, schedule


def _warn_noncompliant(data: fields.ForcingData, eps: float) -> None:
    if not data.compliant:
        logger.warning(
            "Clamping coefficient L=%.4g exceeds eps^-gamma=%.4g",
            data.L,
            eps**-data.gamma,
        )


def resolve_eps(config: RunConfig) -> float:
    """Return the configured eps or select one for the forcing.

    With ``eps: auto`` the forcing is mollified on the grid of the
    smallest candidate and :func:`pfmc.physics.select_epsilon` picks the
    largest compatible candidate.
    """
    eps = config.interface.eps
    if eps != "auto":
        return float(eps)
    candidates = sorted(config.interface.candidates, reverse=True)
    if not candidates:
        raise ValueError("interface.candidates is empty for eps: auto")
    n = config.grid.n or grid_size_for(candidates[-1], config.grid.h_ratio)
    grid = TorusGrid(config.grid.d, n, config.workers)
    data, _ = build_forcing(grid, config, candidates[-1])
    return fields.select_epsilon(data, config.interface.gamma, candidates)


def _dt(
    config: RunConfig,
    grid: TorusGrid,
    p: potential.PotentialSpec,
    eps: float,
) -> float:
    if config.time.dt != "auto":
        return float(config.time.dt)
    dt = solver.auto_dt(grid, p, eps, config.time.scheme)
    t_end = config.time.t_end
    if t_end > 0.0:
        dt = t_end / math.ceil(t_end / dt - 1e-9)
    return dt


def _kernels(
    config: RunConfig, shape: fields.InitialShape
) -> list[monotonicity.KernelSpec]:
    kernels = []
    for name, probe in zip(
        config.probe_names(), config.probes, strict=True
    ):
        y = tuple(probe.y) if probe.y is not None else shape.center
        s = probe.s if probe.s is not None else config.time.t_end + PROBE_LEAD
        if len(y) != config.grid.d:
            raise ValueError(f"Probe {name} needs {config.grid.d} coordinates")
        if not 0.0 < s <= monotonicity.MAX_HORIZON:
            raise ValueError(
                f"Probe {name}: s={s} must lie in (0, "
                f"{monotonicity.MAX_HORIZON:g}]"
            )
        kernels.append(
            monotonicity.KernelSpec(
                y=y, s=s, cutoff=probe.cutoff, K_images=probe.images, name=name
            )
        )
    return kernels


def build_simulation(config: RunConfig) -> Simulation:
    """Turn a configuration into an initial state and its hooks.

    Raises
    ------
    ValueError
        If the configuration describes an inadmissible run.
    """
    p = potential.make_standard_potential()
    eps = resolve_eps(config)
    n = config.grid.n or grid_size_for(eps, config.grid.h_ratio)
    grid = TorusGrid(config.grid.d, n, config.workers)
    prof = potential.profile(p, eps)
    shape = _shape(config)
    phi = fields.initial_phi(grid, shape, prof)
    forcing, schedule = build_forcing(grid, config, eps)
    state = solver.make_state(
        grid,
        phi,
        prof,
        forcing,
        dt=_dt(config, grid, p, eps),
        scheme=config.time.scheme,
        delta_clamp=config.interface.delta_clamp,
    )
    probe = measures.DiagnosticsProbe(
        center=shape.center if shape.kind == "sphere" else None,
        front_axis=shape.axis if shape.kind == "strip" else None,
        radii=measures.default_radii(grid, config.grid.radii_per_octave),
    )
    logger.info(
        "Built %dD run: n=%d, eps=%g, dt=%.4g, %s forcing",
        grid.d,
        grid.n,
        eps,
        state.dt,
        config.forcing.preset,
    )
    return Simulation(
        config=config,
        grid=grid,
        shape=shape,
        initial=state,
        kernels=_kernels(config, shape),
        diagnostics=probe,
        schedule=schedule,
    )


@dataclasses.dataclass(eq=False)
class _Recorder:
    """The combined run hook: probes, then snapshots, then diagnostics."""

    simulation: Simulation
    diagnostics: list[DiagnosticsRecord] = dataclasses.field(
        default_factory=list
    )
    monotonicity: dict[str, list[MonotonicityRecord]] = dataclasses.field(
        default_factory=dict
    )
    snapshots: list[tuple[int, float, Field]] = dataclasses.field(
        default_factory=list
    )
    pending: list[float] = dataclasses.field(default_factory=list)
    probes: list[monotonicity.MonotonicityProbe] = dataclasses.field(
        default_factory=list
    )

    def __post_init__(self) -> None:
        self.pending = sorted(self.simulation.config.output.snapshot_times)
        for kernel in self.simulation.kernels:
            self.probes.append(monotonicity.MonotonicityProbe(kernel))
            self.monotonicity[kernel.name] = []

    def __call__(self, state: SimState) -> None:
        for probe in self.probes:
            if state.t < probe.kernel.s:
                record = probe(state)
                if record is not None:
                    self.monotonicity[probe.kernel.name].append(record)
        while self.pending and state.t >= self.pending[0] - SNAPSHOT_SLACK:
            self.pending.pop(0)
            self.snapshots.append((state.step_count, state.t, state.phi))
        self.diagnostics.append(self.simulation.diagnostics(state))


def run_simulation(simulation: Simulation) -> SimulationResult:
    """Execute a built run.

    States at time 0 and at every hook are recorded when the time span is
    not empty. An invariant violation ends the run and is kept on the
    result together with everything recorded before it.
    """
    config = simulation.config
    recorder = _Recorder(simulation)
    state = simulation.initial
    error: InvariantViolation | None = None
    if simulation.t_end > state.t:
        try:
            recorder(state)
        except InterfaceExtinct as err:
            logger.warning("No interface at t=%.6g: %s", state.t, err)
            return _result(simulation, state, recorder)
        try:
            state, _ = solver.run(
                state,
                simulation.t_end,
                hooks=[recorder],
                every=config.time.every,
                schedule=simulation.schedule,
            )
        except InvariantViolation as err:
            logger.error("Run aborted: %s", err)
            error = err
    return _result(simulation, state, recorder, error)


def _result(
    simulation: Simulation,
    state: SimState,
    recorder: _Recorder,
    error: InvariantViolation | None = None,
) -> SimulationResult:
    config = simulation.config
    reports = {
        kernel.name: monotonicity.check_monotonicity(
            recorder.monotonicity[kernel.name],
            kernel,
            h=simulation.grid.h,
            dt=state.dt,
            d=simulation.grid.d,
            c_mono=config.tolerances.mono,
            tail_constant=config.tolerances.tail_constant,
        )
        for kernel in simulation.kernels
    }
    return SimulationResult(
        simulation=simulation,
        final=state,
        diagnostics=recorder.diagnostics,
        monotonicity=recorder.monotonicity,
        reports=reports,
        snapshots=recorder.snapshots,
        error=error,
    )


def write_outputs(
    result: SimulationResult, directory: pathlib.Path
) -> list[pathlib.Path]:
    """Write the diagnostics, probe tables, snapshots and images."""
    written = [
        tables.write_records(
            directory / "diag.csv", DIAGNOSTICS_COLUMNS, result.diagnostics
        )
    ]
    for name, report in result.reports.items():
        written.append(
            tables.write_records(
                directory / f"mono_{name}.csv",
                MONOTONICITY_COLUMNS,
                report.intervals,
            )
        )
    eps = result.final.eps
    for step, t, phi in result.snapshots:
        stem = directory / "snapshots" / f"phi_{step:08d}"
        written.append(
            snapshots.write_snapshot(stem.with_suffix(".pfmc"), phi, eps, t)
        )
        if result.simulation.config.output.pgm:
            written.append(
                snapshots.write_pgm(stem.with_suffix(".pgm"), phi)
            )
    logger.info("Wrote %d files to %s", len(written), directory)
    return written
