# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0

from __future__ import annotations

import pathlib

import numpy as np
import pytest

from pfmc.data_model import SimState
from pfmc.numerics import solver
from pfmc.numerics.torus_grid import TorusGrid
from pfmc.physics import fields, potential

TEST_DATA_ROOT = pathlib.Path(__file__).parent / "data"
TEST_RUNS = TEST_DATA_ROOT / "runs"
TEST_CIRCLE_CONFIG = TEST_RUNS / "circle.yaml"
TEST_FORCED_CIRCLE_CONFIG = TEST_RUNS / "forced_circle.yaml"
TEST_STRIP_CONFIG = TEST_RUNS / "strip.yaml"
TEST_CORRUPTED_CONFIG = TEST_RUNS / "corrupted.yaml"
TEST_SWEEP_CONFIG = TEST_RUNS / "sweep.yaml"
TEST_TEMPLATE_CONFIG = TEST_RUNS / "circle.yaml.j2"
TEST_INVALID_CONFIG = TEST_RUNS / "invalid.yaml"
TEST_EMPTY_SPAN_CONFIG = TEST_RUNS / "empty_span.yaml"
TEST_ACCEPTANCE = TEST_DATA_ROOT / "acceptance"
TEST_EPS = 0.05
TEST_N = 64


def zero_forcing(grid: TorusGrid, g: float = 0.0) -> fields.ForcingData:
    """Return constant forcing ``g`` without transport."""
    return fields.ForcingData(
        u_eps=np.zeros((grid.d, *grid.shape)),
        g_eps=np.full(grid.shape, g),
        sup_grad_u=0.0,
        sup_grad_g=0.0,
        L_eps=0.0,
        gamma=0.25,
        delta_mollify=2.0 * grid.h,
    )


@pytest.fixture
def standard() -> potential.PotentialSpec:
    return potential.make_standard_potential()


@pytest.fixture
def grid() -> TorusGrid:
    return TorusGrid(2, TEST_N)


@pytest.fixture
def test_profile(
    standard: potential.PotentialSpec,
) -> potential.ProfileSpec:
    return potential.profile(standard, TEST_EPS)


@pytest.fixture
def circle_state(
    grid: TorusGrid, test_profile: potential.ProfileSpec
) -> SimState:
    shape = fields.InitialShape(kind="sphere", center=(0.5, 0.5), radius=0.25)
    phi = fields.initial_phi(grid, shape, test_profile)
    return solver.make_state(grid, phi, test_profile, zero_forcing(grid))


@pytest.fixture
def strip_state(
    grid: TorusGrid, test_profile: potential.ProfileSpec
) -> SimState:
    shape = fields.InitialShape(kind="strip", bounds=(0.25, 0.75))
    phi = fields.initial_phi(grid, shape, test_profile)
    return solver.make_state(grid, phi, test_profile, zero_forcing(grid))
