# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0
"""Module providing the SimState class."""

from __future__ import annotations

import dataclasses
import math
import typing as t

import numpy as np

from pfmc.physics.fields import DEFAULT_DELTA_CLAMP, ForcingData
from pfmc.physics.potential import ProfileSpec

if t.TYPE_CHECKING:
    from pfmc.numerics.torus_grid import Field, TorusGrid

__all__ = ["PHI_OVERSHOOT_TOL", "Scheme", "SimState"]

PHI_OVERSHOOT_TOL = 1e-12
"""Plateaus round to exactly +-1 in float64; only a real overshoot aborts."""

Scheme: t.TypeAlias = t.Literal["explicit", "semi_implicit"]


@dataclasses.dataclass(frozen=True, eq=False)
class SimState:
    """The phase field at one instant together with everything to advance it.

    ``dissipation_integral`` and ``forcing_integral`` accumulate the time
    integrals of ``int eps (lap phi - W'/eps^2)^2`` and
    ``int 2 |f|^2 W / eps`` with left-endpoint quadrature, one term per
    step. ``margins`` keeps the most recent values of ``1 - max|phi|``.
    """

    grid: TorusGrid
    phi: Field
    eps: float
    dt: float
    scheme: Scheme
    forcing: ForcingData
    profile: ProfileSpec
    t: float = 0.0
    step_count: int = 0
    delta_clamp: float = DEFAULT_DELTA_CLAMP
    dissipation_integral: float = 0.0
    forcing_integral: float = 0.0
    margins: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.phi.shape != self.grid.shape:
            raise ValueError(
                f"Field shape {self.phi.shape} does not match "
                f"{self.grid.shape}"
            )
        if not math.isclose(
            self.t, self.step_count * self.dt, rel_tol=1e-12, abs_tol=1e-15
        ):
            raise ValueError(
                f"Time {self.t} is not step_count * dt = "
                f"{self.step_count} * {self.dt}"
            )

    @property
    def phi_margin(self) -> float:
        return 1.0 - float(np.max(np.abs(self.phi)))

    @property
    def sigma(self) -> float:
        return self.profile.potential.sigma
