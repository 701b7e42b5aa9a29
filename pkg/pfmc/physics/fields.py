# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0
"""Initial data, transport and forcing fields, and the clamped profile."""

from __future__ import annotations

import bisect
import collections.abc as cabc
import dataclasses
import logging
import math
import typing as t

import numpy as np

from pfmc.numerics.torus_grid import Field, TorusGrid, minimum_image
from pfmc.physics.potential import ProfileSpec

__all__ = [
    "DEFAULT_DELTA_CLAMP",
    "FORCING_PRESETS",
    "ForcingData",
    "ForcingSchedule",
    "InitialShape",
    "bump_kernel",
    "clamped_r",
    "clearance",
    "initial_phi",
    "mollify_forcing",
    "raw_forcing",
    "select_epsilon",
    "signed_distance",
    "sup_gradient_norm",
]

logger = logging.getLogger(__name__)

DEFAULT_DELTA_CLAMP = 1e-6
CLEARANCE_WIDTHS = 4.0
CUT_WIDTHS = 10.0
HERMITE_SLOPE_LIMIT = 3.0
L_EPS_RTOL = 1e-12

ShapeKind: t.TypeAlias = t.Literal["sphere", "strip", "annulus", "two-spheres"]
FORCING_PRESETS = ("none", "constant", "shear", "wave", "snapshot")


@dataclasses.dataclass(frozen=True)
class InitialShape:
    """A region of the torus whose interior starts in the ``+1`` phase.

    ``radius`` is the sphere radius, the outer annulus radius or the
    common radius of two spheres. ``bounds`` and ``axis`` describe a
    strip. ``steepness`` multiplies the signed distance before the
    profile is applied; values above 1 build deliberately non-compliant
    data.
    """

    kind: ShapeKind
    center: tuple[float, ...] = (0.5, 0.5)
    radius: float = 0.25
    inner_radius: float = 0.0
    second_center: tuple[float, ...] | None = None
    bounds: tuple[float, float] = (0.25, 0.75)
    axis: int = 0
    steepness: float = 1.0


@dataclasses.dataclass(frozen=True, eq=False)
class ForcingData:
    """Mollified transport and forcing fields.

    ``L_eps`` is ``2 sup|grad u| + sup|grad g|``. ``L_pinned`` overrides
    the coefficient used by the equation, for instance to impose
    ``eps^-gamma`` in a sweep.
    """

    u_eps: Field
    g_eps: Field
    sup_grad_u: float
    sup_grad_g: float
    L_eps: float
    gamma: float
    delta_mollify: float
    L_pinned: float | None = None
    compliant: bool = False

    def __post_init__(self) -> None:
        expected = 2.0 * self.sup_grad_u + self.sup_grad_g
        if not math.isclose(
            self.L_eps, expected, rel_tol=L_EPS_RTOL, abs_tol=1e-300
        ):
            raise ValueError(
                f"L_eps={self.L_eps} differs from 2 sup|grad u| + "
                f"sup|grad g| = {expected}"
            )
        if not 0.0 < self.gamma < 0.5:
            raise ValueError(f"gamma must lie in (0, 1/2), got {self.gamma}")

    @property
    def L(self) -> float:
        """Return the coefficient of the clamping term in the equation."""
        return self.L_eps if self.L_pinned is None else self.L_pinned

    @property
    def is_trivial(self) -> bool:
        """Whether transport, forcing and the clamping term all vanish."""
        return (
            not np.any(self.u_eps) and not np.any(self.g_eps) and self.L == 0
        )

    def compliant_at(self, eps: float) -> ForcingData:
        """Return a copy flagged by whether ``L <= eps^-gamma``."""
        return dataclasses.replace(
            self, compliant=bool(self.L <= eps**-self.gamma)
        )

    def pinned(self, value: float | None) -> ForcingData:
        return dataclasses.replace(self, L_pinned=value)


@dataclasses.dataclass(frozen=True, eq=False)
class ForcingSchedule:
    """Piecewise constant forcing in time.

    Slice ``k`` applies from ``starts[k]`` until the next start. All
    slices share the largest clamping coefficient of the schedule.
    """

    starts: tuple[float, ...]
    slices: tuple[ForcingData, ...]

    def __post_init__(self) -> None:
        if not self.slices or len(self.starts) != len(self.slices):
            raise ValueError("A forcing schedule needs one start per slice")
        if any(b <= a for a, b in zip(self.starts, self.starts[1:])):
            raise ValueError("Forcing slice starts must strictly increase")

    @classmethod
    def build(
        cls, slices: cabc.Sequence[tuple[float, ForcingData]]
    ) -> ForcingSchedule:
        ordered = sorted(slices, key=lambda item: item[0])
        L_max = max(data.L for _, data in ordered)
        return cls(
            tuple(start for start, _ in ordered),
            tuple(data.pinned(L_max) for _, data in ordered),
        )

    @property
    def L_max(self) -> float:
        return max(data.L for data in self.slices)

    def at(self, t: float) -> ForcingData:
        index = bisect.bisect_right(self.starts, t) - 1
        return self.slices[max(index, 0)]


def clearance(shape: InitialShape) -> float:
    """Return the distance from the interface to the periodic seams.

    Raises
    ------
    ValueError
        If the shape parameters are inconsistent.
    """
    if shape.kind == "sphere":
        return min(shape.radius, 0.5 - shape.radius)
    if shape.kind == "annulus":
        if not 0.0 < shape.inner_radius < shape.radius:
            raise ValueError("An annulus needs 0 < inner_radius < radius")
        return min(
            0.5 * (shape.radius - shape.inner_radius),
            shape.inner_radius,
            0.5 - shape.radius,
        )
    if shape.kind == "strip":
        low, high = shape.bounds
        if not 0.0 <= low < high <= 1.0:
            raise ValueError(f"Invalid strip bounds {shape.bounds}")
        width = high - low
        return 0.5 * min(width, 1.0 - width)
    if shape.kind == "two-spheres":
        if shape.second_center is None:
            raise ValueError("Two spheres need a second center")
        offset = minimum_image(
            np.subtract(shape.second_center, shape.center)
        )
        gap = float(np.linalg.norm(offset)) - 2.0 * shape.radius
        return min(shape.radius, 0.5 - shape.radius, 0.5 * gap)
    raise ValueError(f"Unknown shape kind {shape.kind!r}")


def signed_distance(grid: TorusGrid, shape: InitialShape) -> Field:
    """Return the periodic signed distance, positive inside the shape."""
    if shape.kind == "sphere":
        return shape.radius - grid.distance_to(shape.center)
    if shape.kind == "annulus":
        rho = grid.distance_to(shape.center)
        return np.minimum(shape.radius - rho, rho - shape.inner_radius)
    if shape.kind == "strip":
        if not 0 <= shape.axis < grid.d:
            raise ValueError(f"Strip axis {shape.axis} outside the grid")
        x = grid.coordinates()[shape.axis]
        low, high = shape.bounds
        to_low = np.abs(minimum_image(x - low))
        to_high = np.abs(minimum_image(x - high))
        nearest = np.minimum(to_low, to_high)
        inside = (x >= low) & (x <= high)
        return np.where(inside, nearest, -nearest)
    if shape.kind == "two-spheres":
        assert shape.second_center is not None
        first = shape.radius - grid.distance_to(shape.center)
        second = shape.radius - grid.distance_to(shape.second_center)
        return np.maximum(first, second)
    raise ValueError(f"Unknown shape kind {shape.kind!r}")


def initial_phi(
    grid: TorusGrid, shape: InitialShape, p: ProfileSpec
) -> Field:
    """Return ``q^eps`` of the clamped signed distance of ``shape``.

    The distance is clamped at ``min(clearance, 10 eps)`` so the
    resulting inverse profile is 1-Lipschitz and ``|phi| < 1``.

    Raises
    ------
    ValueError
        If the shape comes closer than ``4 eps`` to a periodic seam.
    """
    if shape.kind != "strip" and len(shape.center) != grid.d:
        raise ValueError(
            f"Shape center {shape.center} does not have {grid.d} coordinates"
        )
    room = clearance(shape)
    if room < CLEARANCE_WIDTHS * p.eps:
        raise ValueError(
            f"Shape clearance {room:.4g} is below "
            f"{CLEARANCE_WIDTHS:g} eps = {CLEARANCE_WIDTHS * p.eps:.4g}"
        )
    r_cut = min(room, CUT_WIDTHS * p.eps)
    distance = np.clip(
        shape.steepness * signed_distance(grid, shape), -r_cut, r_cut
    )
    phi = np.asarray(p.q(distance), dtype=float)
    logger.debug(
        "Initial %s data with r_cut=%.4g, phase floor %.3e",
        shape.kind,
        r_cut,
        1.0 - float(np.max(np.abs(phi))),
    )
    return phi


def clamped_r(p: ProfileSpec, s: t.Any, delta: float) -> t.Any:
    """Evaluate the clamped inverse profile ``r^eps_delta``.

    On ``[-1 + delta, 1 - delta]`` this is ``q_inv``. For ``|s| >= 1``
    it is the constant ``q_inv(+-(1 - delta)) +- 1``. In between a cubic
    Hermite bridge matches value and slope at ``|s| = 1 - delta`` and has
    zero slope at ``|s| = 1``, which keeps the composite C1 and monotone.

    Raises
    ------
    ValueError
        Unless ``0 < delta < 1``.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    s_arr = np.asarray(s, dtype=float)
    a = 1.0 - delta
    out = np.asarray(p.q_inv(np.clip(s_arr, -a, a)), dtype=float).copy()

    for sign in (1.0, -1.0):
        r_a = float(p.q_inv(sign * a))
        slope = 1.0 / float(p.q_r(r_a))
        secant = 1.0 / delta
        if slope > HERMITE_SLOPE_LIMIT * secant:
            logger.warning(
                "Clamp bridge slope %.3g limited to %.3g for monotonicity",
                slope,
                HERMITE_SLOPE_LIMIT * secant,
            )
            slope = HERMITE_SLOPE_LIMIT * secant
        outer = sign * s_arr
        bridge = (outer > a) & (outer < 1.0)
        tau = (outer[bridge] - a) / delta
        h00 = 2 * tau**3 - 3 * tau**2 + 1
        h10 = tau**3 - 2 * tau**2 + tau
        h01 = -2 * tau**3 + 3 * tau**2
        value = h00 * r_a + h10 * delta * slope * sign
        value += h01 * (r_a + sign)
        out[bridge] = value
        out[outer >= 1.0] = r_a + sign
    if out.ndim == 0:
        return float(out)
    return out


def bump_kernel(grid: TorusGrid, delta: float) -> Field:
    """Return the unnormalized bump ``exp(-1 / (1 - |x/delta|^2))``.

    Raises
    ------
    ValueError
        If ``delta`` is below the grid spacing or above 1/2.
    """
    if delta < grid.h:
        raise ValueError(
            f"Mollifier radius {delta} is below the grid spacing {grid.h}"
        )
    if delta > 0.5:
        raise ValueError(f"Mollifier radius {delta} exceeds 1/2")
    ratio = grid.distance_to((0.0,) * grid.d) / delta
    kernel = grid.zeros()
    inside = ratio < 1.0
    kernel[inside] = np.exp(-1.0 / (1.0 - ratio[inside] ** 2))
    return kernel


def sup_gradient_norm(grid: TorusGrid, f: Field) -> float:
    """Return the grid maximum of ``|grad f|`` by centered differences.

    For vector fields the Frobenius norm of the Jacobian is used.
    """
    if f.ndim == grid.d:
        jacobian = grid.gradient(f)[np.newaxis]
    else:
        jacobian = np.stack([grid.gradient(component) for component in f])
    return float(np.sqrt(np.max(np.sum(jacobian**2, axis=(0, 1)))))


def mollify_forcing(
    grid: TorusGrid,
    u_raw: Field,
    g_raw: Field,
    delta: float,
    gamma: float = 0.25,
) -> ForcingData:
    """Convolve the raw fields with the bump and fill in ``L_eps``."""
    kernel = bump_kernel(grid, delta)
    u_eps = grid.periodic_convolve(u_raw, kernel)
    g_eps = grid.periodic_convolve(g_raw, kernel)
    sup_u = sup_gradient_norm(grid, u_eps)
    sup_g = sup_gradient_norm(grid, g_eps)
    return ForcingData(
        u_eps=u_eps,
        g_eps=g_eps,
        sup_grad_u=sup_u,
        sup_grad_g=sup_g,
        L_eps=2.0 * sup_u + sup_g,
        gamma=gamma,
        delta_mollify=delta,
    )


def select_epsilon(
    fd: ForcingData, gamma: float, eps_candidates: cabc.Sequence[float]
) -> float:
    """Return the largest candidate eps compatible with the forcing.

    A candidate is compatible when ``sup|grad u|``, ``sup|grad g|`` and
    ``L_eps`` are all bounded by ``eps^-gamma``.

    Raises
    ------
    ValueError
        If gamma or the candidates are invalid, or if no candidate is
        compatible. The message names the bounds violated by the smallest
        candidate.
    """
    if not 0.0 < gamma < 0.5:
        raise ValueError(f"gamma must lie in (0, 1/2), got {gamma}")
    if not eps_candidates:
        raise ValueError("No eps candidates given")
    if any(eps <= 0.0 for eps in eps_candidates):
        raise ValueError(f"eps candidates must be positive: {eps_candidates}")
    if any(b >= a for a, b in zip(eps_candidates, eps_candidates[1:])):
        raise ValueError(
            f"eps candidates must be strictly descending: {eps_candidates}"
        )

    quantities = {
        "sup_grad_u": fd.sup_grad_u,
        "sup_grad_g": fd.sup_grad_g,
        "L_eps": fd.L_eps,
    }
    violated: list[str] = []
    for eps in eps_candidates:
        bound = eps**-gamma
        violated = [
            f"{name}={value:.6g} > eps^-gamma={bound:.6g}"
            for name, value in quantities.items()
            if value > bound
        ]
        if not violated:
            logger.info("Selected eps=%g (bound %.6g)", eps, bound)
            return float(eps)
    raise ValueError(
        f"No eps candidate satisfies the forcing bounds; at "
        f"eps={eps_candidates[-1]:g}: {', '.join(violated)}"
    )


def raw_forcing(
    grid: TorusGrid,
    preset: str,
    velocity: cabc.Sequence[float] = (),
    g: float = 0.0,
    amplitude: float = 0.0,
) -> tuple[Field, Field]:
    """Return unmollified ``(u, g)`` fields of a closed-form preset.

    ``constant`` uses ``velocity`` and ``g``. ``shear`` adds
    ``amplitude * sin(2 pi x_2)`` to the first velocity component and
    ``wave`` adds ``amplitude * sin(2 pi x_1)`` to ``g``.
    """
    u = np.zeros((grid.d, *grid.shape), dtype=float)
    forcing = grid.zeros()
    if preset == "none":
        return u, forcing
    if preset not in FORCING_PRESETS or preset == "snapshot":
        raise ValueError(f"No closed-form forcing preset {preset!r}")
    if velocity:
        if len(velocity) != grid.d:
            raise ValueError(
                f"Velocity {tuple(velocity)} needs {grid.d} components"
            )
        u += np.asarray(velocity, dtype=float).reshape(
            (grid.d,) + (1,) * grid.d
        )
    forcing += g
    coords = grid.coordinates()
    if preset == "shear":
        u[0] += amplitude * np.sin(2.0 * np.pi * coords[1])
    elif preset == "wave":
        forcing += amplitude * np.sin(2.0 * np.pi * coords[0])
    return u, forcing
