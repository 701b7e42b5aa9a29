# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0
"""Module providing the rows written to the diagnostics tables."""

from __future__ import annotations

import dataclasses
import math
import typing as t

__all__ = [
    "DIAGNOSTICS_COLUMNS",
    "MONOTONICITY_COLUMNS",
    "DiagnosticsRecord",
    "MonotonicityInterval",
    "MonotonicityRecord",
    "MonotonicityReport",
    "as_row",
]


@dataclasses.dataclass(frozen=True)
class DiagnosticsRecord:
    """Scalars measured on one state.

    The first ten fields are the frozen diagnostics columns. Columns
    after ``phi_margin`` were appended later and keep their order too.
    """

    t: float
    mu_total: float
    xi_max: float
    xi_l1: float
    D_t: float
    dissipation: float
    f_l2: float
    w_max: float
    interface_radius: float | None
    phi_margin: float
    step: int = 0
    mu_tilde_total: float = math.nan
    phase_volume: float = math.nan
    l_term: float = math.nan
    velocity_residual: float = math.nan
    front_position: float | None = None
    dissipation_integral: float = 0.0
    forcing_integral: float = 0.0


@dataclasses.dataclass(frozen=True)
class MonotonicityRecord:
    """Heat-kernel weighted quantities of one state for one probe.

    ``rhs_density`` is ``(1/2 sigma) int rho |f|^2 W / eps`` and
    ``xi_term`` is ``(1 / (2 (s - t))) int rho d xi``; their sum bounds
    the time derivative of ``weighted_mu``. ``xi_abs_term`` is
    ``(1 / (s - t)) int rho |xi|``, exposed for inspection only.
    """

    t: float
    weighted_mu: float
    rhs_density: float
    xi_term: float
    xi_abs_term: float
    mu_half_ball: float


@dataclasses.dataclass(frozen=True)
class MonotonicityInterval:
    """The monotonicity inequality checked on one record interval."""

    t: float
    I: float  # noqa: E741
    rhs_integral: float
    margin: float
    passed: bool
    t_start: float
    tolerance: float
    sharp_rhs_integral: float


@dataclasses.dataclass(frozen=True)
class MonotonicityReport:
    """All intervals of one probe and the worst margin among them."""

    probe: str
    intervals: tuple[MonotonicityInterval, ...]

    @property
    def passed(self) -> bool:
        return all(interval.passed for interval in self.intervals)

    @property
    def worst_margin(self) -> float:
        if not self.intervals:
            return math.inf
        return min(interval.margin for interval in self.intervals)


DIAGNOSTICS_COLUMNS = tuple(
    field.name for field in dataclasses.fields(DiagnosticsRecord)
)
MONOTONICITY_COLUMNS = (
    "t",
    "I",
    "rhs_integral",
    "margin",
    "pass",
    "t_start",
    "tolerance",
    "sharp_rhs_integral",
)


def as_row(record: t.Any) -> dict[str, t.Any]:
    """Return a dataclass record as a CSV row.

    Missing values become empty cells and ``passed`` is renamed to
    ``pass``.
    """
    row: dict[str, t.Any] = {}
    for key, value in dataclasses.asdict(record).items():
        name = "pass" if key == "passed" else key
        if value is None:
            row[name] = ""
        elif isinstance(value, bool):
            row[name] = str(value).lower()
        elif isinstance(value, float):
            row[name] = repr(float(value))
        else:
            row[name] = value
    return row
