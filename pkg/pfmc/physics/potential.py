# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0
"""Double-well potentials, their standing-wave profile and surface tension.

The standard quartic ``W(s) = (1 - s^2)^2 / 2`` is served by closed forms.
Any other double well is supported through a profile tabulated from the
separable ODE ``q_r = sqrt(2 W(q))`` and inverted monotonically.
"""

from __future__ import annotations

import collections.abc as cabc
import dataclasses
import logging
import math
import typing as t

import numpy as np
import numpy.typing as npt
from scipy import integrate, interpolate

__all__ = [
    "STANDARD_ALPHA2",
    "STANDARD_C_W",
    "PotentialSpec",
    "ProfileSpec",
    "check_assumptions",
    "compute_sigma",
    "make_potential",
    "make_standard_potential",
    "profile",
]

logger = logging.getLogger(__name__)

ArrayLike: t.TypeAlias = "float | npt.NDArray[np.float64]"
PotentialFunc: t.TypeAlias = cabc.Callable[[t.Any], t.Any]

STANDARD_ALPHA2 = 0.7
"""Any value in (1/sqrt(3), 1) satisfies the convexity assumption."""
STANDARD_C_W = 0.1003
"""Frozen bound of ``q_inv(s)^2 W(s)`` for the quartic (max is 0.10023)."""
Q_INV_CLIP = 1.0 - 1e-12
SAMPLE_COUNT = 4001
W4_SAMPLE_LIMIT = 1.0 - 1e-6
UNIT_PROFILE_HALF_WIDTH = 20.0
UNIT_PROFILE_STEP = 1e-3


@dataclasses.dataclass(frozen=True)
class UnitProfile:
    """Tabulated profile for ``eps = 1`` and its monotone inverse."""

    q: interpolate.CubicHermiteSpline
    q_inv: interpolate.CubicHermiteSpline
    r_min: float
    r_max: float
    s_min: float
    s_max: float


@dataclasses.dataclass(frozen=True)
class PotentialSpec:
    """A double-well potential together with its derived constants.

    ``W``, ``dW`` and ``ddW`` accept scalars as well as numpy arrays.
    """

    W: PotentialFunc
    dW: PotentialFunc
    ddW: PotentialFunc
    alpha1: float
    alpha2: float
    c_w: float
    sigma: float
    name: str = "custom"
    max_abs_ddw: float = math.nan
    unit_profile: UnitProfile | None = dataclasses.field(
        default=None, compare=False, repr=False
    )

    @property
    def is_standard(self) -> bool:
        return self.name == "standard"


@dataclasses.dataclass(frozen=True)
class ProfileSpec:
    """The standing wave ``q^eps`` of a potential at interface width eps.

    ``q`` maps a length ``r`` to a phase value in (-1, 1), ``q_r`` is its
    derivative with respect to ``r`` and ``q_inv`` maps a phase value
    back to a length.
    """

    q: cabc.Callable[[t.Any], t.Any]
    q_r: cabc.Callable[[t.Any], t.Any]
    q_inv: cabc.Callable[[t.Any], t.Any]
    eps: float
    potential: PotentialSpec = dataclasses.field(repr=False)


def _standard_w(s: ArrayLike) -> ArrayLike:
    return 0.5 * (1.0 - s**2) ** 2


def _standard_dw(s: ArrayLike) -> ArrayLike:
    return -2.0 * s * (1.0 - s**2)


def _standard_ddw(s: ArrayLike) -> ArrayLike:
    return 6.0 * s**2 - 2.0


def compute_sigma(potential: PotentialSpec | PotentialFunc) -> float:
    """Return the surface tension ``int_{-1}^{1} sqrt(2 W(s)) ds``.

    Parameters
    ----------
    potential
        Either a :class:`PotentialSpec` or the bare potential ``W``.

    Raises
    ------
    ValueError
        If ``W`` has a non-finite or a negative sample on [-1, 1].
    """
    w = potential.W if isinstance(potential, PotentialSpec) else potential
    samples = np.asarray(w(np.linspace(-1.0, 1.0, SAMPLE_COUNT)), dtype=float)
    if not np.all(np.isfinite(samples)):
        raise ValueError("The potential W is not finite on [-1, 1]")
    if np.any(samples < 0.0):
        raise ValueError("The potential W is negative on [-1, 1]")

    def _integrand(s: float) -> float:
        return math.sqrt(2.0 * max(float(w(s)), 0.0))

    value, abserr = integrate.quad(
        _integrand, -1.0, 1.0, epsabs=1e-13, epsrel=1e-13, limit=200
    )
    if abserr > 1e-10:
        logger.warning(
            "Surface tension quadrature error %.3e exceeds 1e-10", abserr
        )
    return float(value)


def make_standard_potential() -> PotentialSpec:
    """Return the quartic double well ``W(s) = (1 - s^2)^2 / 2``."""
    return PotentialSpec(
        W=_standard_w,
        dW=_standard_dw,
        ddW=_standard_ddw,
        alpha1=0.0,
        alpha2=STANDARD_ALPHA2,
        c_w=STANDARD_C_W,
        sigma=compute_sigma(_standard_w),
        name="standard",
        max_abs_ddw=4.0,
    )


def make_potential(
    W: PotentialFunc,
    dW: PotentialFunc,
    ddW: PotentialFunc,
    alpha1: float,
    alpha2: float,
    name: str = "custom",
) -> PotentialSpec:
    """Build a generic double well and tabulate its unit profile.

    ``c_w`` is the sampled maximum of ``q_inv(s)^2 W(s)`` and is not
    checked here; call :func:`check_assumptions` for that.
    """
    if not -1.0 < alpha1 < 1.0:
        raise ValueError(f"alpha1 must lie in (-1, 1), got {alpha1}")
    if not 0.0 < alpha2 < 1.0:
        raise ValueError(f"alpha2 must lie in (0, 1), got {alpha2}")

    sigma = compute_sigma(W)
    s = np.linspace(-1.0, 1.0, SAMPLE_COUNT)
    max_abs_ddw = float(np.max(np.abs(ddW(s))))
    unit = _tabulate_unit_profile(W) if sigma > 0.0 else None
    c_w = math.nan
    if unit is not None:
        inner = np.linspace(-W4_SAMPLE_LIMIT, W4_SAMPLE_LIMIT, SAMPLE_COUNT)
        r = _evaluate_unit_inverse(unit, inner)
        c_w = float(np.max(r**2 * W(inner)))

    return PotentialSpec(
        W=W,
        dW=dW,
        ddW=ddW,
        alpha1=alpha1,
        alpha2=alpha2,
        c_w=c_w,
        sigma=sigma,
        name=name,
        max_abs_ddw=max_abs_ddw,
        unit_profile=unit,
    )


def _tabulate_unit_profile(W: PotentialFunc) -> UnitProfile:
    def _speed(_r: float, q: npt.NDArray[np.float64]) -> list[float]:
        return [math.sqrt(2.0 * max(float(W(q[0])), 0.0))]

    halves: list[tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]] = []
    for end in (-UNIT_PROFILE_HALF_WIDTH, UNIT_PROFILE_HALF_WIDTH):
        count = round(UNIT_PROFILE_HALF_WIDTH / UNIT_PROFILE_STEP)
        r_eval = np.linspace(0.0, end, count + 1)
        solution = integrate.solve_ivp(
            _speed,
            (0.0, end),
            [0.0],
            method="DOP853",
            t_eval=r_eval,
            rtol=1e-12,
            atol=1e-12,
        )
        if not solution.success:
            raise ValueError(
                f"Profile integration failed: {solution.message}"
            )
        halves.append((solution.t, solution.y[0]))

    (r_neg, q_neg), (r_pos, q_pos) = halves
    r = np.concatenate([r_neg[:0:-1], r_pos])
    q = np.concatenate([q_neg[:0:-1], q_pos])
    dq = np.sqrt(2.0 * np.maximum(W(q), 0.0))
    q_spline = interpolate.CubicHermiteSpline(r, q, dq)

    increasing = np.concatenate([[True], np.diff(q) > 0.0]) & (dq > 0.0)
    increasing &= np.abs(q) < Q_INV_CLIP
    r_inv, q_inv, dq_inv = r[increasing], q[increasing], dq[increasing]
    keep = np.concatenate([[True], np.diff(q_inv) > 0.0])
    r_inv, q_inv, dq_inv = r_inv[keep], q_inv[keep], dq_inv[keep]
    inverse = interpolate.CubicHermiteSpline(q_inv, r_inv, 1.0 / dq_inv)
    return UnitProfile(
        q=q_spline,
        q_inv=inverse,
        r_min=float(r[0]),
        r_max=float(r[-1]),
        s_min=float(q_inv[0]),
        s_max=float(q_inv[-1]),
    )


def _evaluate_unit_inverse(unit: UnitProfile, s: t.Any) -> t.Any:
    clipped = np.clip(s, unit.s_min, unit.s_max)
    return unit.q_inv(clipped)


def profile(p: PotentialSpec, eps: float) -> ProfileSpec:
    """Return the standing-wave profile of ``p`` at interface width eps.

    Raises
    ------
    ValueError
        If ``eps`` is not positive or ``p`` has no profile.
    """
    if not eps > 0.0:
        raise ValueError(f"eps must be positive, got {eps}")

    if p.is_standard:

        def q(r: t.Any) -> t.Any:
            return np.tanh(np.divide(r, eps))

        def q_r(r: t.Any) -> t.Any:
            return (1.0 - np.tanh(np.divide(r, eps)) ** 2) / eps

        def q_inv(s: t.Any) -> t.Any:
            return eps * np.arctanh(np.clip(s, -Q_INV_CLIP, Q_INV_CLIP))

        return ProfileSpec(q=q, q_r=q_r, q_inv=q_inv, eps=eps, potential=p)

    unit = p.unit_profile
    if unit is None:
        raise ValueError(f"Potential {p.name!r} has no tabulated profile")

    def q_tab(r: t.Any) -> t.Any:
        scaled = np.clip(np.divide(r, eps), unit.r_min, unit.r_max)
        return unit.q(scaled)

    def q_r_tab(r: t.Any) -> t.Any:
        value = np.asarray(q_tab(r))
        return np.sqrt(2.0 * np.maximum(p.W(value), 0.0)) / eps

    def q_inv_tab(s: t.Any) -> t.Any:
        return eps * _evaluate_unit_inverse(unit, s)

    return ProfileSpec(
        q=q_tab, q_r=q_r_tab, q_inv=q_inv_tab, eps=eps, potential=p
    )


def check_assumptions(p: PotentialSpec) -> list[str]:
    """Return the names of the double-well assumptions ``p`` violates.

    The assumptions are checked on a sample grid of [-1, 1]:

    - ``w1``: ``W >= 0`` and ``W(+-1) = W'(+-1) = 0``,
    - ``w2``: ``W' > 0`` on (-1, alpha1) and ``W' < 0`` on (alpha1, 1),
    - ``w3``: ``W'' > 0`` for ``alpha2 <= |s| <= 1``,
    - ``w4``: ``q_inv(s)^2 W(s) <= c_w`` for ``|s| <= 1 - 1e-6``.
    """
    s = np.linspace(-1.0, 1.0, SAMPLE_COUNT)
    violated: list[str] = []
    w = np.asarray(p.W(s), dtype=float)
    dw_ends = np.asarray(p.dW(np.array([-1.0, 1.0])), dtype=float)
    w_ends = np.asarray(p.W(np.array([-1.0, 1.0])), dtype=float)
    if (
        np.any(w < 0.0)
        or np.any(np.abs(w_ends) > 1e-14)
        or np.any(np.abs(dw_ends) > 1e-14)
    ):
        violated.append("w1")

    interior = s[1:-1]
    dw = np.asarray(p.dW(interior), dtype=float)
    left = dw[interior < p.alpha1]
    right = dw[interior > p.alpha1]
    if np.any(left <= 0.0) or np.any(right >= 0.0):
        violated.append("w2")

    outer = s[np.abs(s) >= p.alpha2]
    if np.any(np.asarray(p.ddW(outer), dtype=float) <= 0.0):
        violated.append("w3")

    if p.sigma <= 0.0 or not math.isfinite(p.c_w):
        violated.append("w4")
    else:
        unit_eps = profile(p, 1.0)
        inner = np.linspace(-W4_SAMPLE_LIMIT, W4_SAMPLE_LIMIT, SAMPLE_COUNT)
        bound = np.asarray(unit_eps.q_inv(inner)) ** 2 * p.W(inner)
        if np.any(bound > p.c_w * (1.0 + 1e-9)):
            violated.append("w4")

    if violated:
        logger.debug("Potential %s violates %s", p.name, violated)
    return violated
