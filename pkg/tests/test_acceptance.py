# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0
"""Full-resolution runs against the analytic references.

These take minutes and only run with ``pytest -m slow``.
"""

from __future__ import annotations

import functools
import math

import numpy as np
import pytest

from pfmc import oracles
from pfmc.runs import run_config, simulation, sweep, verification

# pylint: disable-next=relative-beyond-top-level, useless-suppression
from .conftest import (  # type: ignore[import]
    TEST_ACCEPTANCE,
    TEST_CORRUPTED_CONFIG,
)

pytestmark = pytest.mark.slow

CIRCLE_RUNS = ("shrinking_circle", "forced_circle")
FRONT_RUNS = ("planar_front", "transport_front")


def load(name: str) -> run_config.RunConfig:
    with open(TEST_ACCEPTANCE / f"{name}.yaml", encoding="utf8") as f:
        return run_config.read_config_file(f)


@functools.cache
def finished(name: str, n: int | None = None) -> simulation.SimulationResult:
    config = load(name)
    if n is not None:
        config = config.model_copy(
            update={"grid": config.grid.model_copy(update={"n": n})}
        )
    result = simulation.run_simulation(simulation.build_simulation(config))
    assert result.error is None
    return result


def checks_of(name: str) -> dict[str, verification.CheckResult]:
    return {
        check.check: check for check in verification.verify(finished(name))
    }


@pytest.mark.parametrize(
    ("name", "expected"), [("planar_front", 0.2), ("transport_front", 0.3)]
)
def test_front_speed(name: str, expected: float):
    records = [r for r in finished(name).diagnostics if r.t >= 0.1]
    times = np.array([r.t for r in records])
    positions = np.unwrap(
        np.array([r.front_position for r in records]), period=1.0
    )

    speed, _ = np.polyfit(times, positions, 1)

    config = load(name)
    velocity = config.forcing.velocity or [0.0, 0.0]
    oracle = oracles.traveling_wave_speed(velocity, config.forcing.g, (1, 0))
    assert oracle == pytest.approx(expected)
    assert speed == pytest.approx(oracle, rel=0.02)


def test_shrinking_circle_radius():
    records = finished("shrinking_circle").diagnostics

    for record in records:
        exact = oracles.sphere_radius(0.25, 0.0, 2, record.t)
        if exact < 0.1:
            continue
        assert record.interface_radius == pytest.approx(exact, rel=0.03)


@pytest.mark.parametrize("name", FRONT_RUNS + CIRCLE_RUNS)
def test_discrepancy_and_gradient_bounds(name: str):
    checks = checks_of(name)

    assert checks["xi_nonpositive"].passed, checks["xi_nonpositive"]
    assert checks["w_bound"].passed, checks["w_bound"]
    assert checks["density_bound"].passed, checks["density_bound"]


def test_forced_energy_inequality():
    assert checks_of("forced_circle")["energy_inequality"].passed


def test_unforced_energy_is_monotone():
    assert checks_of("shrinking_circle")["energy_monotone"].passed


@pytest.mark.parametrize("name", CIRCLE_RUNS)
def test_monotonicity_probes(name: str):
    checks = checks_of(name)

    assert checks["monotonicity[center]"].passed
    assert checks["monotonicity[off_center]"].passed


@pytest.mark.parametrize("name", CIRCLE_RUNS)
def test_density_bound_is_stable_under_refinement(name: str):
    coarse = max(r.D_t for r in finished(name).diagnostics)
    fine = max(r.D_t for r in finished(name, 512).diagnostics)

    assert fine == pytest.approx(coarse, rel=0.1)


def test_steep_start_is_caught():
    with open(TEST_CORRUPTED_CONFIG, encoding="utf8") as f:
        config = run_config.read_config_file(f)
    result = simulation.run_simulation(simulation.build_simulation(config))
    state = result.simulation.initial
    scale = float(state.profile.potential.W(0.0)) / (state.sigma * state.eps)

    assert result.diagnostics[0].xi_max > 0.1 * scale
    checks = {c.check: c for c in verification.verify(result)}
    assert not checks["xi_nonpositive"].passed


def test_eps_sweep_trends():
    config = load("sweep")
    gamma = config.interface.gamma
    result = sweep.run_sweep(config, [0.0625, 0.03125, 0.015625])

    assert result.passed, result.failures
    xi = [point.xi_l1 for point in result.points]
    assert xi == sorted(xi, reverse=True)
    l_terms = [point.l_term for point in result.points]
    assert l_terms == sorted(l_terms, reverse=True)
    for ratio, bound in zip(
        result.ratios()[1:], result.min_ratios()[1:], strict=True
    ):
        assert ratio is not None and bound is not None
        assert bound > 1.0
        # The integrand lives in a band of width O(eps).
        assert bound <= ratio <= 1.3 * 2 ** (2 - 2 * gamma)
    assert math.isclose(result.points[-1].t, 0.01)
