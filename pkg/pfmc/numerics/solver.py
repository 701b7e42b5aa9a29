# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0
"""Time stepping of the forced Allen-Cahn equation.

The equation, divided through by eps, reads::

    phi_t = lap phi - W'(phi) / eps^2
            - u . grad phi - (g + L r_delta(phi)) sqrt(2 W(phi)) / eps

The semi-implicit scheme treats the Laplacian implicitly through a
Fourier solve and everything else explicitly.
"""

from __future__ import annotations

import collections.abc as cabc
import dataclasses
import logging
import math
import typing as t

import numpy as np

from pfmc.data_model import (
    PHI_OVERSHOOT_TOL,
    InterfaceExtinct,
    InvariantViolation,
    Scheme,
    SimState,
)
from pfmc.numerics.torus_grid import Field, TorusGrid
from pfmc.physics.fields import (
    DEFAULT_DELTA_CLAMP,
    ForcingData,
    ForcingSchedule,
    clamped_r,
)
from pfmc.physics.potential import PotentialSpec, ProfileSpec

__all__ = [
    "DT_SAFETY",
    "SCHEMES",
    "Hook",
    "auto_dt",
    "make_state",
    "max_stable_dt",
    "rhs",
    "run",
    "step",
    "step_explicit",
    "step_semi_implicit",
]

logger = logging.getLogger(__name__)

SCHEMES: tuple[Scheme, ...] = ("explicit", "semi_implicit")
DT_SAFETY = 10.0
"""The automatic step is ``eps^2 / DT_SAFETY``."""
MARGIN_HISTORY = 8

Hook: t.TypeAlias = cabc.Callable[[SimState], t.Any]


@dataclasses.dataclass(frozen=True)
class _Terms:
    """The pieces of the right-hand side evaluated on one state."""

    laplacian: Field
    reaction: Field
    transport: Field

    @property
    def total(self) -> Field:
        return self.laplacian - self.reaction - self.transport

    @property
    def nondiffusive(self) -> Field:
        return -self.reaction - self.transport


def max_stable_dt(
    grid: TorusGrid, potential: PotentialSpec, eps: float, scheme: Scheme
) -> float:
    """Return the largest admissible time step of a scheme."""
    reaction = eps**2 / (2.0 * potential.max_abs_ddw)
    if scheme == "semi_implicit":
        return reaction
    if scheme == "explicit":
        return min(grid.h**2 / (4.0 * grid.d), reaction)
    raise ValueError(f"Unknown scheme {scheme!r}")


def auto_dt(
    grid: TorusGrid, potential: PotentialSpec, eps: float, scheme: Scheme
) -> float:
    """Return the default step ``eps^2 / 10`` capped by the scheme bound."""
    return min(eps**2 / DT_SAFETY, max_stable_dt(grid, potential, eps, scheme))


def make_state(
    grid: TorusGrid,
    phi: Field,
    profile: ProfileSpec,
    forcing: ForcingData,
    dt: float | None = None,
    scheme: Scheme = "semi_implicit",
    delta_clamp: float = DEFAULT_DELTA_CLAMP,
) -> SimState:
    """Validate the inputs of a run and return its initial state.

    Raises
    ------
    ValueError
        If the scheme is unknown, the step violates its bound, or the
        initial field is not finite or not strictly inside (-1, 1).
    """
    if scheme not in SCHEMES:
        raise ValueError(f"Unknown scheme {scheme!r}")
    potential = profile.potential
    bound = max_stable_dt(grid, potential, profile.eps, scheme)
    if dt is None:
        dt = auto_dt(grid, potential, profile.eps, scheme)
    if not 0.0 < dt <= bound * (1.0 + 1e-12):
        raise ValueError(
            f"Time step {dt:.6g} violates the {scheme} bound {bound:.6g}"
        )
    if not np.all(np.isfinite(phi)):
        raise ValueError("Initial field has non-finite entries")
    margin = 1.0 - float(np.max(np.abs(phi)))
    if margin <= 0.0:
        raise ValueError(f"Initial field leaves (-1, 1): margin {margin:.3e}")
    if forcing.u_eps.shape != (grid.d, *grid.shape):
        raise ValueError("Transport field does not live on the grid")
    if grid.h > profile.eps / 2:
        logger.warning(
            "Grid spacing %.4g under-resolves eps=%.4g", grid.h, profile.eps
        )
    return SimState(
        grid=grid,
        phi=np.array(phi, dtype=float),
        eps=profile.eps,
        dt=float(dt),
        scheme=scheme,
        forcing=forcing,
        profile=profile,
        delta_clamp=delta_clamp,
        margins=(margin,),
    )


def _terms(state: SimState) -> _Terms:
    grid, phi, eps = state.grid, state.phi, state.eps
    potential = state.profile.potential
    forcing = state.forcing
    root = np.sqrt(2.0 * np.maximum(potential.W(phi), 0.0)) / eps
    r = clamped_r(state.profile, phi, state.delta_clamp)
    transport = (forcing.g_eps + forcing.L * r) * root
    if np.any(forcing.u_eps):
        transport += np.sum(forcing.u_eps * grid.gradient(phi), axis=0)
    terms = _Terms(
        laplacian=grid.laplacian(phi),
        reaction=potential.dW(phi) / eps**2,
        transport=transport,
    )
    if not np.all(np.isfinite(terms.total)):
        location = tuple(
            int(i) for i in np.argwhere(~np.isfinite(terms.total))[0]
        )
        raise InvariantViolation(
            "Non-finite right-hand side",
            step=state.step_count,
            t=state.t,
            location=location,
            margins=state.margins,
        )
    return terms


def rhs(state: SimState) -> Field:
    """Return ``phi_t`` of the forced Allen-Cahn equation."""
    return _terms(state).total


def _advance(state: SimState, phi: Field, terms: _Terms) -> SimState:
    grid, eps = state.grid, state.eps
    step_count = state.step_count + 1
    if not np.all(np.isfinite(phi)):
        location = tuple(int(i) for i in np.argwhere(~np.isfinite(phi))[0])
        raise InvariantViolation(
            "Non-finite phase field",
            step=step_count,
            t=step_count * state.dt,
            location=location,
            margins=state.margins,
        )
    margin = 1.0 - float(np.max(np.abs(phi)))
    margins = (*state.margins, margin)[-MARGIN_HISTORY:]
    if margin < -PHI_OVERSHOOT_TOL:
        location = tuple(int(i) for i in np.argwhere(np.abs(phi) > 1.0)[0])
        raise InvariantViolation(
            "Phase field left [-1, 1]",
            step=step_count,
            t=step_count * state.dt,
            location=location,
            margins=margins,
        )

    dissipation = grid.integrate(eps * (terms.laplacian - terms.reaction) ** 2)
    forcing = grid.integrate(eps * terms.transport**2)
    return dataclasses.replace(
        state,
        phi=phi,
        t=step_count * state.dt,
        step_count=step_count,
        dissipation_integral=state.dissipation_integral
        + state.dt * dissipation,
        forcing_integral=state.forcing_integral + state.dt * forcing,
        margins=margins,
    )


def step_explicit(state: SimState) -> SimState:
    """Advance one forward-Euler step."""
    terms = _terms(state)
    return _advance(state, state.phi + state.dt * terms.total, terms)


def step_semi_implicit(state: SimState) -> SimState:
    """Advance one step with the diffusion treated implicitly."""
    terms = _terms(state)
    explicit_part = state.phi + state.dt * terms.nondiffusive
    phi = state.grid.helmholtz_solve(explicit_part, state.dt)
    return _advance(state, phi, terms)


def step(state: SimState) -> SimState:
    if state.scheme == "explicit":
        return step_explicit(state)
    return step_semi_implicit(state)


def step_count_for(state: SimState, t_end: float) -> int:
    """Return the number of steps needed to reach ``t_end``."""
    span = (t_end - state.t) / state.dt
    return max(math.ceil(span - 1e-9), 0)


def run(
    state: SimState,
    t_end: float,
    hooks: cabc.Sequence[Hook] = (),
    every: int = 1,
    schedule: ForcingSchedule | None = None,
) -> tuple[SimState, list[t.Any]]:
    """Advance ``state`` to ``t_end`` and collect the hook records.

    Hooks are called every ``every`` steps and after the final step. A
    hook returning ``None`` contributes no record. When a hook raises
    :class:`InterfaceExtinct` the run stops cleanly after that step.
    With a schedule the forcing is refreshed at the hook cadence.

    Raises
    ------
    ValueError
        If ``t_end`` lies before the current time or ``every < 1``.
    InvariantViolation
        If a step produces a non-finite field or leaves [-1, 1].
    """
    if t_end < state.t:
        raise ValueError(f"t_end={t_end} lies before t={state.t}")
    if every < 1:
        raise ValueError(f"Hook cadence must be positive, got {every}")

    total = step_count_for(state, t_end)
    records: list[t.Any] = []
    logger.info(
        "Advancing %d %s steps of dt=%.4g to t=%.6g",
        total,
        state.scheme,
        state.dt,
        t_end,
    )
    for index in range(1, total + 1):
        if schedule is not None and (index - 1) % every == 0:
            state = dataclasses.replace(state, forcing=schedule.at(state.t))
        state = step(state)
        if index % every and index != total:
            continue
        try:
            for hook in hooks:
                record = hook(state)
                if record is not None:
                    records.append(record)
        except InterfaceExtinct as err:
            logger.info("Stopping at t=%.6g: %s", state.t, err)
            break
    return state, records
