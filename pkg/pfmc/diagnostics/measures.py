# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0
"""Energy, discrepancy and geometric quantities of a phase-field state.

The pointwise ``|grad phi|^2`` of the energy and discrepancy densities
is the compact-stencil form of :meth:`TorusGrid.gradient_energy`, so
that the discrete energy decreases exactly along forcing-free
semi-implicit steps. Normals, curvature and transport use centered
differences.
"""

from __future__ import annotations

import collections.abc as cabc
import dataclasses
import logging
import math
import typing as t

import numpy as np

from pfmc.data_model import DiagnosticsRecord, InterfaceExtinct, SimState
from pfmc.numerics import solver
from pfmc.numerics.torus_grid import Field, TorusGrid
from pfmc.physics.fields import clamped_r

__all__ = [
    "BALL_VOLUMES",
    "RADII_PER_OCTAVE",
    "CurvatureVelocity",
    "DiagnosticsProbe",
    "curvature_velocity",
    "default_centers",
    "default_radii",
    "density_ratio",
    "discrepancy",
    "dissipation",
    "f_field",
    "f_l2",
    "front_position",
    "interface_radius",
    "l_term",
    "mu_density",
    "mu_tilde_total",
    "mu_total",
    "phase_volume",
    "velocity_residual",
    "w_field",
    "xi_density",
]

logger = logging.getLogger(__name__)

BALL_VOLUMES = {1: 2.0, 2: math.pi}
"""Volume of the unit ball of dimension ``d - 1``."""
CENTER_LATTICE = 16
RADII_PER_OCTAVE = 4
GRAD_THRESHOLD = 1e-6
"""The interface band is where ``|grad phi| > GRAD_THRESHOLD / eps``."""
INVERSE_CLIP = 1.0 - 1e-12


def _energy_parts(state: SimState) -> tuple[Field, Field]:
    gradient = 0.5 * state.eps * state.grid.gradient_energy(state.phi)
    well = state.profile.potential.W(state.phi) / state.eps
    return gradient, well


def mu_density(state: SimState) -> Field:
    """Return ``(eps |grad phi|^2 / 2 + W(phi) / eps) / sigma``."""
    gradient, well = _energy_parts(state)
    return (gradient + well) / state.sigma


def mu_total(state: SimState) -> float:
    return state.grid.integrate(mu_density(state))


def xi_density(state: SimState) -> Field:
    """Return ``(eps |grad phi|^2 / 2 - W(phi) / eps) / sigma``."""
    gradient, well = _energy_parts(state)
    return (gradient - well) / state.sigma


def discrepancy(state: SimState) -> tuple[float, float]:
    """Return the maximum and the L1 norm of the discrepancy density."""
    xi = xi_density(state)
    return float(np.max(xi)), state.grid.integrate(np.abs(xi))


def mu_tilde_total(state: SimState) -> float:
    """Return the total of ``(eps / sigma) |grad phi|^2 dx``."""
    energy = state.grid.gradient_energy(state.phi)
    return state.grid.integrate(state.eps * energy / state.sigma)


def phase_volume(state: SimState) -> float:
    """Return the volume of ``{phi > 0}``."""
    return float(np.count_nonzero(state.phi > 0.0) * state.grid.cell_volume)


def default_radii(
    grid: TorusGrid, per_octave: int = RADII_PER_OCTAVE
) -> list[float]:
    """Return the radii ``2^(-j / per_octave)`` from 1/2 down to ``2 / n``.

    ``per_octave = 1`` gives the plain dyadic radii.
    """
    if per_octave < 1:
        raise ValueError(f"Need a radius per octave, got {per_octave}")
    top = int(math.log2(grid.n // 2))
    return [
        2.0 ** (-j / per_octave)
        for j in range(per_octave, per_octave * top + 1)
    ]


def default_centers(grid: TorusGrid) -> list[tuple[int, ...]]:
    """Return the grid indices of a ``16^d`` lattice of ball centers."""
    stride = max(grid.n // CENTER_LATTICE, 1)
    axis = range(0, grid.n, stride)
    mesh = np.meshgrid(*([np.asarray(axis)] * grid.d), indexing="ij")
    flat = zip(*(m.ravel() for m in mesh), strict=True)
    return [tuple(int(i) for i in index) for index in flat]


def density_ratio(
    state: SimState,
    centers: cabc.Sequence[tuple[int, ...]] | None = None,
    radii: cabc.Sequence[float] | None = None,
) -> float:
    """Return ``D(t)``, the sampled maximal energy density ratio.

    ``D(t)`` is the maximum of 1, the total energy and
    ``mu(B_r(x)) / (omega_{d-1} r^{d-1})`` over the sampled centers
    (grid indices) and radii.

    Raises
    ------
    ValueError
        If either sample set is empty or a radius lies outside (0, 1/2].
    """
    grid = state.grid
    centers = default_centers(grid) if centers is None else centers
    radii = default_radii(grid) if radii is None else radii
    if not centers or not radii:
        raise ValueError("Density ratio needs centers and radii to sample")
    density = mu_density(state)
    omega = BALL_VOLUMES[grid.d - 1]
    index = tuple(np.asarray(centers).T)
    best = max(1.0, grid.integrate(density))
    for radius in radii:
        sums = grid.ball_sums(density, radius)
        scale = omega * radius ** (grid.d - 1)
        best = max(best, float(np.max(sums[index])) / scale)
    return best


def _inverse_profile(state: SimState) -> Field:
    clipped = np.clip(state.phi, -INVERSE_CLIP, INVERSE_CLIP)
    return np.asarray(state.profile.q_inv(clipped), dtype=float)


def f_field(state: SimState) -> Field:
    """Return ``f = -u . grad r - g - L r_delta(phi)`` pointwise."""
    forcing = state.forcing
    r_delta = clamped_r(state.profile, state.phi, state.delta_clamp)
    f = -forcing.g_eps - forcing.L * r_delta
    if np.any(forcing.u_eps):
        grad_r = state.grid.gradient(_inverse_profile(state))
        f = f - np.sum(forcing.u_eps * grad_r, axis=0)
    return f


def f_l2(state: SimState) -> float:
    """Return ``2 int |f|^2 W(phi) / eps``."""
    well = state.profile.potential.W(state.phi) / state.eps
    return state.grid.integrate(2.0 * f_field(state) ** 2 * well)


def l_term(state: SimState) -> float:
    """Return ``int (L r_delta(phi))^2 W(phi) / eps``."""
    r_delta = clamped_r(state.profile, state.phi, state.delta_clamp)
    well = state.profile.potential.W(state.phi) / state.eps
    return state.grid.integrate((state.forcing.L * r_delta) ** 2 * well)


def dissipation(state: SimState) -> float:
    """Return ``int eps (lap phi - W'(phi) / eps^2)^2``."""
    potential = state.profile.potential
    residual = state.grid.laplacian(state.phi)
    residual = residual - potential.dW(state.phi) / state.eps**2
    return state.grid.integrate(state.eps * residual**2)


def w_field(state: SimState) -> Field:
    """Return ``|grad r|^2 - 1`` for the inverse profile coordinate."""
    gradient = state.grid.gradient(_inverse_profile(state))
    return np.sum(gradient**2, axis=0) - 1.0


@dataclasses.dataclass(frozen=True, eq=False)
class CurvatureVelocity:
    """Approximate mean curvature, normal and normal velocity."""

    h_eps: Field
    nu_eps: Field
    v_eps: Field
    band: Field


def curvature_velocity(state: SimState) -> CurvatureVelocity:
    """Return ``h``, ``nu`` and ``v`` on the interface band, 0 elsewhere.

    ``phi_t`` is the right-hand side of the equation at the same
    instant.
    """
    grid, eps = state.grid, state.eps
    gradient = grid.gradient(state.phi)
    norm = np.sqrt(np.sum(gradient**2, axis=0))
    band = norm > GRAD_THRESHOLD / eps
    safe = np.where(band, norm, 1.0)
    nu = np.where(band, gradient / safe, 0.0)
    potential = state.profile.potential
    curvature = -grid.laplacian(state.phi) + potential.dW(state.phi) / eps**2
    h_eps = np.where(band, curvature / safe, 0.0) * nu
    v_eps = np.where(band, -solver.rhs(state) / safe, 0.0) * nu
    return CurvatureVelocity(h_eps=h_eps, nu_eps=nu, v_eps=v_eps, band=band)


def velocity_residual(state: SimState) -> float:
    """Return the energy-weighted RMS of ``v - (h + (u.nu) nu + g nu)``.

    The average runs over the interface band. The limit velocity law
    holds only as eps tends to zero, so this is reported, not asserted.
    """
    fields = curvature_velocity(state)
    forcing = state.forcing
    normal_speed = np.sum(forcing.u_eps * fields.nu_eps, axis=0)
    normal_speed = normal_speed + forcing.g_eps
    expected = fields.h_eps + normal_speed * fields.nu_eps
    mismatch = np.sum((fields.v_eps - expected) ** 2, axis=0)
    weight = np.where(fields.band, mu_density(state), 0.0)
    total = float(np.sum(weight))
    if total <= 0.0:
        return math.nan
    return math.sqrt(float(np.sum(weight * mismatch)) / total)


def _crossing(line: Field, start: int) -> float | None:
    """Return the distance in cells to the first sign change from start."""
    n = line.shape[0]
    for k in range(n // 2):
        here = line[(start + k) % n]
        there = line[(start + k + 1) % n]
        if here > 0.0 >= there:
            return k + here / (here - there)
    return None


def interface_radius(state: SimState, center: cabc.Sequence[float]) -> float:
    """Return the mean zero crossing distance along the axes through center.

    Raises
    ------
    InterfaceExtinct
        If ``phi`` is not positive at the center or a crossing is missing.
    """
    grid = state.grid
    index = grid.nearest_index(center)
    if state.phi[index] <= 0.0:
        raise InterfaceExtinct(f"No +1 phase at {tuple(center)}", state.t)
    distances: list[float] = []
    for axis in range(grid.d):
        selector: list[t.Any] = list(index)
        selector[axis] = slice(None)
        line = state.phi[tuple(selector)]
        offset = index[axis] * grid.h - center[axis]
        for direction in (1, -1):
            oriented = line if direction == 1 else line[::-1]
            start = index[axis]
            if direction == -1:
                start = grid.n - 1 - start
            cells = _crossing(oriented, start)
            if cells is None:
                raise InterfaceExtinct(
                    f"No zero crossing along axis {axis}", state.t
                )
            distances.append(cells * grid.h + direction * offset)
    return float(np.mean(distances))


def front_position(state: SimState, axis: int = 0) -> float:
    """Return where ``phi`` crosses zero upwards along ``axis``.

    The crossing is searched on the grid line through index 0 of the
    other axes and reported as a coordinate in [0, 1).

    Raises
    ------
    InterfaceExtinct
        If there is no upward crossing.
    """
    grid = state.grid
    selector: list[t.Any] = [0] * grid.d
    selector[axis] = slice(None)
    line = state.phi[tuple(selector)]
    ahead = np.roll(line, -1)
    upward = np.flatnonzero((line <= 0.0) & (ahead > 0.0))
    if upward.size == 0:
        raise InterfaceExtinct(f"No front along axis {axis}", state.t)
    i = int(upward[0])
    fraction = -line[i] / (ahead[i] - line[i])
    return float(((i + fraction) * grid.h) % 1.0)


@dataclasses.dataclass
class DiagnosticsProbe:
    """A run hook that measures one :class:`DiagnosticsRecord` per call.

    ``center`` enables the interface radius of a sphere, ``front_axis``
    the front position of a strip.
    """

    center: tuple[float, ...] | None = None
    front_axis: int | None = None
    centers: list[tuple[int, ...]] | None = None
    radii: list[float] | None = None

    def __call__(self, state: SimState) -> DiagnosticsRecord:
        xi_max, xi_l1 = discrepancy(state)
        radius = None
        if self.center is not None:
            radius = interface_radius(state, self.center)
        front = None
        if self.front_axis is not None:
            front = front_position(state, self.front_axis)
        record = DiagnosticsRecord(
            t=state.t,
            mu_total=mu_total(state),
            xi_max=xi_max,
            xi_l1=xi_l1,
            D_t=density_ratio(state, self.centers, self.radii),
            dissipation=dissipation(state),
            f_l2=f_l2(state),
            w_max=float(np.max(w_field(state))),
            interface_radius=radius,
            phi_margin=state.phi_margin,
            step=state.step_count,
            mu_tilde_total=mu_tilde_total(state),
            phase_volume=phase_volume(state),
            l_term=l_term(state),
            velocity_residual=velocity_residual(state),
            front_position=front,
            dissipation_integral=state.dissipation_integral,
            forcing_integral=state.forcing_integral,
        )
        logger.debug("Diagnostics %s", record)
        return record
