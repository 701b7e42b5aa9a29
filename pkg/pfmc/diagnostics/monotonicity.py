# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0
"""Backward heat kernel weights and the monotonicity inequality.

The kernel is ``(4 pi (s - t))^(-(d-1)/2) exp(-|x - y|^2 / (4 (s - t)))``
summed over the lattice images of ``y``. Because the image cube is a
product set, the sum factorizes into one-dimensional sums per axis.
"""

from __future__ import annotations

import collections.abc as cabc
import dataclasses
import itertools
import logging
import math

import numpy as np

from pfmc.data_model import (
    MonotonicityInterval,
    MonotonicityRecord,
    MonotonicityReport,
    SimState,
)
from pfmc.diagnostics import measures
from pfmc.numerics.torus_grid import Field, TorusGrid, minimum_image

__all__ = [
    "DEFAULT_C_MONO",
    "DEFAULT_TAIL_CONSTANT",
    "MAX_HORIZON",
    "KernelSpec",
    "MonotonicityProbe",
    "calibrate_tail_constant",
    "check_monotonicity",
    "eta",
    "eta_field",
    "image_count",
    "rho",
    "rho_field",
    "weighted_mu",
]

logger = logging.getLogger(__name__)

DEFAULT_C_MONO = 1.0
DEFAULT_TAIL_CONSTANT = 1.0
MAX_HORIZON = 2.0
"""Largest admissible ``s - t`` of a probe."""
MIN_SAMPLES_BEFORE_S = 8
ETA_INNER = 0.25
ETA_OUTER = 0.5
TAIL_RATE = 128.0


@dataclasses.dataclass(frozen=True)
class KernelSpec:
    """A probe point ``y`` and singular time ``s`` of the heat kernel.

    ``K_images`` fixes the truncation of the lattice image sum; ``None``
    picks ``ceil(1 + 6 sqrt(s - t))`` at each evaluation.
    """

    y: tuple[float, ...]
    s: float
    cutoff: bool = False
    K_images: int | None = None
    name: str = "probe"

    def images(self, t: float) -> int:
        if self.K_images is not None:
            return self.K_images
        return image_count(self.s - t)

    def lag(self, t: float) -> float:
        if not t < self.s:
            raise ValueError(f"Kernel time t={t} must precede s={self.s}")
        return self.s - t


def image_count(lag: float) -> int:
    """Return the image order that keeps the truncated tail below 1e-14."""
    return math.ceil(1.0 + 6.0 * math.sqrt(lag))


def _axis_sums(offsets: Field, lag: float, images: int) -> Field:
    shifts = np.arange(-images, images + 1, dtype=float)
    shifted = offsets[..., np.newaxis] + shifts
    return np.sum(np.exp(-(shifted**2) / (4.0 * lag)), axis=-1)


def rho(kernel: KernelSpec, x: cabc.Sequence[float], t: float) -> float:
    """Return the periodic backward heat kernel at one point.

    Raises
    ------
    ValueError
        If ``t >= s`` or ``x`` and ``y`` differ in dimension.
    """
    lag = kernel.lag(t)
    if len(x) != len(kernel.y):
        raise ValueError(f"Point {tuple(x)} does not match y={kernel.y}")
    d = len(kernel.y)
    images = kernel.images(t)
    value = (4.0 * math.pi * lag) ** (-(d - 1) / 2.0)
    for xi, yi in zip(x, kernel.y, strict=True):
        offset = np.asarray([minimum_image(xi - yi)])
        value *= float(_axis_sums(offset, lag, images)[0])
    return value


def rho_field(grid: TorusGrid, kernel: KernelSpec, t: float) -> Field:
    """Return the periodic backward heat kernel on every grid point."""
    lag = kernel.lag(t)
    if len(kernel.y) != grid.d:
        raise ValueError(f"Probe {kernel.y} does not have {grid.d} coords")
    images = kernel.images(t)
    axis = np.arange(grid.n, dtype=float) * grid.h
    field = np.full(grid.shape, (4.0 * math.pi * lag) ** (-(grid.d - 1) / 2))
    for index, yi in enumerate(kernel.y):
        factor = _axis_sums(minimum_image(axis - yi), lag, images)
        shape = [1] * grid.d
        shape[index] = grid.n
        field = field * factor.reshape(shape)
    return field


def _ramp(distance: Field) -> Field:
    tau = np.clip((distance - ETA_INNER) / (ETA_OUTER - ETA_INNER), 0.0, 1.0)
    return 1.0 - tau**3 * (10.0 - 15.0 * tau + 6.0 * tau**2)


def eta(x: cabc.Sequence[float], y: cabc.Sequence[float]) -> float:
    """Return the radial cutoff, 1 within 1/4 and 0 beyond 1/2 of y."""
    offset = minimum_image(np.subtract(x, y))
    return float(_ramp(np.asarray(np.linalg.norm(offset))))


def eta_field(grid: TorusGrid, y: cabc.Sequence[float]) -> Field:
    return _ramp(grid.distance_to(y))


def _weight(state: SimState, kernel: KernelSpec) -> Field:
    weight = rho_field(state.grid, kernel, state.t)
    if kernel.cutoff:
        weight = weight * eta_field(state.grid, kernel.y)
    return weight


def weighted_mu(state: SimState, kernel: KernelSpec) -> float:
    """Return ``int rho dmu``, with the cut-off kernel if requested."""
    density = measures.mu_density(state)
    return state.grid.integrate(_weight(state, kernel) * density)


@dataclasses.dataclass
class MonotonicityProbe:
    """A run hook that records the weighted energy of one probe."""

    kernel: KernelSpec

    def __call__(self, state: SimState) -> MonotonicityRecord | None:
        if state.t >= self.kernel.s:
            logger.warning(
                "Probe %s skipped at t=%.6g >= s=%.6g",
                self.kernel.name,
                state.t,
                self.kernel.s,
            )
            return None
        grid = state.grid
        lag = self.kernel.lag(state.t)
        weight = _weight(state, self.kernel)
        well = state.profile.potential.W(state.phi) / state.eps
        density = measures.mu_density(state)
        f = measures.f_field(state)
        xi = measures.xi_density(state)
        rhs_density = grid.integrate(weight * f**2 * well)
        return MonotonicityRecord(
            t=state.t,
            weighted_mu=grid.integrate(weight * density),
            rhs_density=rhs_density / (2.0 * state.sigma),
            xi_term=grid.integrate(weight * xi) / (2.0 * lag),
            xi_abs_term=grid.integrate(weight * np.abs(xi)) / lag,
            mu_half_ball=grid.ball_sum(density, self.kernel.y, ETA_OUTER),
        )


def _tail(kernel: KernelSpec, record: MonotonicityRecord) -> float:
    lag = kernel.s - record.t
    return math.exp(-1.0 / (TAIL_RATE * lag)) * record.mu_half_ball


def _validate(
    records: cabc.Sequence[MonotonicityRecord], kernel: KernelSpec
) -> None:
    times = [record.t for record in records]
    if any(b <= a for a, b in itertools.pairwise(times)):
        raise ValueError("Monotonicity record times must strictly increase")
    if times and times[-1] >= kernel.s:
        raise ValueError(f"Record at t={times[-1]} is not before s")
    if times and kernel.s - times[0] > MAX_HORIZON:
        raise ValueError(
            f"Probe horizon s - t = {kernel.s - times[0]:.4g} exceeds "
            f"{MAX_HORIZON:g}"
        )


def check_monotonicity(
    records: cabc.Sequence[MonotonicityRecord],
    kernel: KernelSpec,
    *,
    h: float,
    dt: float,
    d: int,
    c_mono: float = DEFAULT_C_MONO,
    tail_constant: float = DEFAULT_TAIL_CONSTANT,
) -> MonotonicityReport:
    """Check the monotonicity inequality on consecutive record pairs.

    For every interval ``[t_k, t_k+1]`` the increase of the weighted
    energy must not exceed the trapezoidal time integral of the
    right-hand side plus ``c_mono (h^2 + dt) (s - t_k)^(-(d+1)/2)``.
    With the cut-off kernel the tail term weighted by ``tail_constant``
    joins the right-hand side. A nonnegative margin passes.

    Raises
    ------
    ValueError
        If the record times do not strictly increase, reach ``s`` or
        start more than 2 before ``s``.
    """
    _validate(records, kernel)
    intervals: list[MonotonicityInterval] = []
    widest = 0.0
    for prev, cur in itertools.pairwise(records):
        span = cur.t - prev.t
        widest = max(widest, span)
        rhs_integral = 0.5 * span * (prev.rhs_density + cur.rhs_density)
        if kernel.cutoff:
            tails = _tail(kernel, prev) + _tail(kernel, cur)
            rhs_integral += tail_constant * 0.5 * span * tails
        sharp = rhs_integral + 0.5 * span * (prev.xi_term + cur.xi_term)
        tolerance = c_mono * (h**2 + dt)
        tolerance *= (kernel.s - prev.t) ** (-(d + 1) / 2.0)
        change = cur.weighted_mu - prev.weighted_mu
        margin = rhs_integral + tolerance - change
        intervals.append(
            MonotonicityInterval(
                t=cur.t,
                I=cur.weighted_mu,
                rhs_integral=rhs_integral,
                margin=margin,
                passed=bool(margin >= 0.0),
                t_start=prev.t,
                tolerance=tolerance,
                sharp_rhs_integral=sharp,
            )
        )
    if records and widest > 0.0:
        resolution = (kernel.s - records[-1].t) / widest
        if resolution < MIN_SAMPLES_BEFORE_S:
            logger.warning(
                "Probe %s: hook spacing %.3g resolves s - t only %.1f times",
                kernel.name,
                widest,
                resolution,
            )
    report = MonotonicityReport(probe=kernel.name, intervals=tuple(intervals))
    logger.info(
        "Probe %s: %d intervals, worst margin %.3e",
        kernel.name,
        len(intervals),
        report.worst_margin,
    )
    return report


def calibrate_tail_constant(
    records: cabc.Sequence[MonotonicityRecord], kernel: KernelSpec
) -> float:
    """Return the smallest tail constant that closes a cut-off run.

    Intended for forcing-free resolved runs: the excess of the weighted
    energy increase over the right-hand side is divided by the integral
    of the tail term, and the maximum ratio is returned.
    """
    if not kernel.cutoff:
        raise ValueError("Calibration needs a cut-off kernel")
    _validate(records, kernel)
    worst = 0.0
    for prev, cur in itertools.pairwise(records):
        span = cur.t - prev.t
        excess = cur.weighted_mu - prev.weighted_mu
        excess -= 0.5 * span * (prev.rhs_density + cur.rhs_density)
        tails = 0.5 * span * (_tail(kernel, prev) + _tail(kernel, cur))
        if excess > 0.0 and tails > 0.0:
            worst = max(worst, excess / tails)
    return worst
