# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0
"""Analytic and quadrature reference values.

Nothing here depends on the solver. ``FORCING_SIGN`` records how a
positive constant ``g`` moves a sphere: with ``phi -> +1`` inside, the
solver moves the interface along the inner normal, so the radius obeys
``dR/dt = -((d - 1) / R + g)``.
"""

from __future__ import annotations

import collections.abc as cabc
import math

import numpy as np
from scipy import integrate

from pfmc.data_model import InterfaceExtinct
from pfmc.physics.potential import PotentialSpec, profile

__all__ = [
    "FORCING_SIGN",
    "extinction_time",
    "front_discrepancy_1d",
    "front_energy_1d",
    "integrate_sphere_radius",
    "potential_integral_1d",
    "sphere_radius",
    "traveling_wave_speed",
]

FORCING_SIGN = 1.0
ODE_TOL = 1e-10
PROFILE_WIDTHS = 20.0
QUAD_TOL = 1e-13
UNIT_NORM_TOL = 1e-9


def traveling_wave_speed(
    u_const: cabc.Sequence[float], g_const: float, nu: cabc.Sequence[float]
) -> float:
    """Return the speed ``u . nu + g`` of a planar front with normal nu.

    Raises
    ------
    ValueError
        If ``nu`` is not a unit vector of the dimension of ``u_const``.
    """
    normal = np.asarray(nu, dtype=float)
    velocity = np.asarray(u_const, dtype=float)
    if velocity.shape != normal.shape:
        raise ValueError(f"u={tuple(u_const)} and nu={tuple(nu)} differ")
    if abs(float(np.linalg.norm(normal)) - 1.0) > UNIT_NORM_TOL:
        raise ValueError(f"nu={tuple(nu)} is not a unit vector")
    return float(velocity @ normal) + g_const


def _radius_rate(g_const: float, d: int) -> cabc.Callable[..., list[float]]:
    def rate(_t: float, radius: np.ndarray) -> list[float]:
        return [-((d - 1) / radius[0] + FORCING_SIGN * g_const)]

    return rate


def _check_sphere(R0: float, d: int) -> None:
    if R0 <= 0.0:
        raise ValueError(f"Initial radius must be positive, got {R0}")
    if d not in (2, 3):
        raise ValueError(f"Dimension must be 2 or 3, got {d}")


def integrate_sphere_radius(
    R0: float, g_const: float, d: int, t: float
) -> float:
    """Integrate the radius ODE of a sphere with an adaptive method.

    Raises
    ------
    InterfaceExtinct
        If the radius reaches zero before ``t``.
    """
    _check_sphere(R0, d)
    if t < 0.0:
        raise ValueError(f"Time must be nonnegative, got {t}")
    if t == 0.0:
        return R0
    t_extinct = extinction_time(R0, g_const, d)
    if t >= t_extinct:
        raise InterfaceExtinct(
            f"Sphere of radius {R0} collapses before t={t}", t_extinct
        )

    def collapse(_t: float, radius: np.ndarray) -> float:
        return float(radius[0]) - 1e-9 * R0

    collapse.terminal = True  # type: ignore[attr-defined]
    collapse.direction = -1  # type: ignore[attr-defined]
    solution = integrate.solve_ivp(
        _radius_rate(g_const, d),
        (0.0, t),
        [R0],
        method="DOP853",
        rtol=ODE_TOL,
        atol=ODE_TOL * R0,
        events=collapse,
    )
    if solution.status == 1:
        t_extinct = float(solution.t_events[0][0])
        raise InterfaceExtinct(
            f"Sphere of radius {R0} collapses before t={t}", t_extinct
        )
    if not solution.success:
        raise RuntimeError(f"Radius integration failed: {solution.message}")
    return float(solution.y[0, -1])


def extinction_time(R0: float, g_const: float, d: int) -> float:
    """Return when the sphere collapses, ``inf`` if it never does."""
    _check_sphere(R0, d)
    if g_const == 0.0:
        return R0**2 / (2.0 * (d - 1))
    if FORCING_SIGN * g_const < 0.0:
        equilibrium = (d - 1) / abs(g_const)
        if R0 >= equilibrium:
            return math.inf

    def elapsed(radius: float) -> float:
        return 1.0 / ((d - 1) / radius + FORCING_SIGN * g_const)

    value, _ = integrate.quad(elapsed, 0.0, R0, epsabs=QUAD_TOL, limit=200)
    return float(value)


def sphere_radius(R0: float, g_const: float, d: int, t: float) -> float:
    """Return the radius of a sphere under forced mean curvature flow.

    For ``g = 0`` the closed form ``sqrt(R0^2 - 2 (d - 1) t)`` is used.

    Raises
    ------
    InterfaceExtinct
        If the sphere collapses before ``t``.
    """
    _check_sphere(R0, d)
    if g_const != 0.0:
        return integrate_sphere_radius(R0, g_const, d, t)
    square = R0**2 - 2.0 * (d - 1) * t
    if square <= 0.0:
        raise InterfaceExtinct(
            f"Sphere of radius {R0} collapses before t={t}",
            extinction_time(R0, 0.0, d),
        )
    return math.sqrt(square)


def _profile_quad(
    p: PotentialSpec, eps: float, integrand: cabc.Callable[..., float]
) -> float:
    half_width = PROFILE_WIDTHS * eps
    value, _ = integrate.quad(
        integrand,
        -half_width,
        half_width,
        epsabs=QUAD_TOL,
        epsrel=1e-12,
        limit=400,
        points=[0.0],
    )
    return float(value)


def front_energy_1d(p: PotentialSpec, eps: float) -> float:
    """Return the energy of one 1-D profile; 1 up to quadrature error."""
    prof = profile(p, eps)

    def density(r: float) -> float:
        q = prof.q(r)
        return float(eps * prof.q_r(r) ** 2 / 2.0 + p.W(q) / eps)

    return _profile_quad(p, eps, density) / p.sigma


def front_discrepancy_1d(p: PotentialSpec, eps: float) -> float:
    """Return the discrepancy of one 1-D profile; 0 by equipartition."""
    prof = profile(p, eps)

    def density(r: float) -> float:
        q = prof.q(r)
        return float(eps * prof.q_r(r) ** 2 / 2.0 - p.W(q) / eps)

    return _profile_quad(p, eps, density) / p.sigma


def potential_integral_1d(p: PotentialSpec, eps: float) -> float:
    """Return ``int 2 W(q(r)) / eps dr``, which equals sigma."""
    prof = profile(p, eps)

    def density(r: float) -> float:
        return float(2.0 * p.W(prof.q(r)) / eps)

    return _profile_quad(p, eps, density)
