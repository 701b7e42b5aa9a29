# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0
"""Repeat a run over decreasing eps and check the limiting trends."""

from __future__ import annotations

import collections.abc as cabc
import concurrent.futures
import dataclasses
import itertools
import logging
import math
import pathlib

from pfmc.connectors import tables
from pfmc.data_model import as_row
from pfmc.runs import simulation
from pfmc.runs.run_config import RunConfig

__all__ = [
    "L_RATIO_SLACK",
    "SWEEP_COLUMNS",
    "SweepPoint",
    "SweepResult",
    "point_config",
    "run_point",
    "run_sweep",
    "write_sweep",
]

logger = logging.getLogger(__name__)

L_RATIO_SLACK = 0.9
"""Share of ``(eps_k / eps_k+1)^(1 - 2 gamma)`` a decay ratio must reach."""
SWEEP_COLUMNS = (
    "eps",
    "n",
    "h",
    "dt",
    "t",
    "xi_l1",
    "l_term",
    "mu_total",
    "l_ratio",
    "min_l_ratio",
)


@dataclasses.dataclass(frozen=True)
class SweepPoint:
    eps: float
    n: int
    h: float
    dt: float
    t: float
    xi_l1: float
    l_term: float
    mu_total: float


@dataclasses.dataclass(frozen=True)
class SweepResult:
    """The sweep points in order of decreasing eps and their verdict."""

    points: tuple[SweepPoint, ...]
    gamma: float
    failures: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.failures

    def ratios(self) -> list[float | None]:
        """Return ``l_term[k-1] / l_term[k]``, ``None`` for the first."""
        ratios: list[float | None] = [None]
        for coarse, fine in itertools.pairwise(self.points):
            ratios.append(
                coarse.l_term / fine.l_term if fine.l_term > 0 else math.inf
            )
        return ratios

    def min_ratios(self) -> list[float | None]:
        exponent = 1.0 - 2.0 * self.gamma
        bounds: list[float | None] = [None]
        for coarse, fine in itertools.pairwise(self.points):
            bounds.append(L_RATIO_SLACK * (coarse.eps / fine.eps) ** exponent)
        return bounds


def point_config(config: RunConfig, eps: float, workers: int) -> RunConfig:
    """Return the run at ``eps`` with the grid following ``h_ratio``."""
    return config.model_copy(
        update={
            "grid": config.grid.model_copy(update={"n": None}),
            "interface": config.interface.model_copy(update={"eps": eps}),
            "probes": [],
            "output": config.output.model_copy(
                update={"snapshot_times": [], "pgm": False}
            ),
            "workers": workers,
        }
    )


def run_point(config: RunConfig) -> SweepPoint:
    """Run one sweep point and measure it at the final time."""
    built = simulation.build_simulation(config)
    result = simulation.run_simulation(built)
    if result.error is not None:
        raise result.error
    if not result.diagnostics:
        raise ValueError("A sweep needs a positive t_end")
    last = result.diagnostics[-1]
    logger.info(
        "Sweep point eps=%g: xi_l1=%.4e l_term=%.4e",
        built.initial.eps,
        last.xi_l1,
        last.l_term,
    )
    return SweepPoint(
        eps=built.initial.eps,
        n=built.grid.n,
        h=built.grid.h,
        dt=built.initial.dt,
        t=last.t,
        xi_l1=last.xi_l1,
        l_term=last.l_term,
        mu_total=last.mu_total,
    )


def _trend_failures(
    points: cabc.Sequence[SweepPoint], gamma: float
) -> list[str]:
    failures: list[str] = []
    exponent = 1.0 - 2.0 * gamma
    track_l = any(point.l_term > 0.0 for point in points)
    if not track_l:
        logger.info("Clamping term vanishes; only xi_l1 is compared")
    for coarse, fine in itertools.pairwise(points):
        if not fine.xi_l1 < coarse.xi_l1:
            failures.append(
                f"xi_l1 does not decrease from eps={coarse.eps:g} "
                f"({coarse.xi_l1:.4e}) to eps={fine.eps:g} "
                f"({fine.xi_l1:.4e})"
            )
        if not track_l:
            continue
        if not fine.l_term < coarse.l_term:
            failures.append(
                f"l_term does not decrease from eps={coarse.eps:g} "
                f"to eps={fine.eps:g}"
            )
            continue
        ratio = coarse.l_term / fine.l_term
        bound = L_RATIO_SLACK * (coarse.eps / fine.eps) ** exponent
        if ratio < bound:
            failures.append(
                f"l_term ratio {ratio:.4g} below {bound:.4g} between "
                f"eps={coarse.eps:g} and eps={fine.eps:g}"
            )
    return failures


def run_sweep(
    config: RunConfig, eps_list: cabc.Sequence[float], workers: int = 1
) -> SweepResult:
    """Run every eps, coarsest first, in up to ``workers`` processes.

    Raises
    ------
    ValueError
        If the eps list is empty, has duplicates or non-positive values.
    """
    if not eps_list:
        raise ValueError("A sweep needs at least one eps")
    if any(eps <= 0.0 for eps in eps_list):
        raise ValueError(f"Sweep eps values must be positive: {eps_list}")
    ordered = sorted(set(eps_list), reverse=True)
    if len(ordered) != len(eps_list):
        raise ValueError(f"Sweep eps values repeat: {eps_list}")

    if workers > 1:
        configs = [point_config(config, eps, 1) for eps in ordered]
        with concurrent.futures.ProcessPoolExecutor(
            max_workers=min(workers, len(configs))
        ) as executor:
            points = list(executor.map(run_point, configs))
    else:
        configs = [
            point_config(config, eps, config.workers) for eps in ordered
        ]
        points = [run_point(item) for item in configs]

    gamma = config.interface.gamma
    if len(points) == 1:
        logger.warning("Sweep over a single eps shows no trend")
        return SweepResult(points=tuple(points), gamma=gamma)
    failures = _trend_failures(points, gamma)
    for failure in failures:
        logger.error("Sweep check failed: %s", failure)
    return SweepResult(
        points=tuple(points), gamma=gamma, failures=tuple(failures)
    )


def write_sweep(result: SweepResult, path: pathlib.Path) -> pathlib.Path:
    rows = []
    for point, ratio, bound in zip(
        result.points, result.ratios(), result.min_ratios(), strict=True
    ):
        row = as_row(point)
        row["l_ratio"] = "" if ratio is None else repr(ratio)
        row["min_l_ratio"] = "" if bound is None else repr(bound)
        rows.append(row)
    return tables.write_csv(path, SWEEP_COLUMNS, rows)
