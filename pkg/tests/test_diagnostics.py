# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0

from __future__ import annotations

import dataclasses
import math

import numpy as np
import pytest

from pfmc.data_model import InterfaceExtinct, SimState
from pfmc.diagnostics import measures
from pfmc.numerics import solver
from pfmc.numerics.torus_grid import TorusGrid
from pfmc.physics import fields, potential

# pylint: disable-next=relative-beyond-top-level, useless-suppression
from .conftest import TEST_EPS, zero_forcing  # type: ignore[import]


@pytest.fixture
def zero_state(
    grid: TorusGrid, test_profile: potential.ProfileSpec
) -> SimState:
    return solver.make_state(
        grid, grid.zeros(), test_profile, zero_forcing(grid)
    )


class TestEnergy:
    @staticmethod
    def test_zero_field_density(zero_state: SimState):
        expected = 0.5 / (zero_state.sigma * TEST_EPS)

        np.testing.assert_allclose(measures.mu_density(zero_state), expected)
        np.testing.assert_allclose(measures.xi_density(zero_state), -expected)

    @staticmethod
    def test_density_splits_into_energy_and_discrepancy(
        circle_state: SimState,
    ):
        mu = measures.mu_density(circle_state)
        xi = measures.xi_density(circle_state)

        gradient = 0.5 * TEST_EPS * circle_state.grid.gradient_energy(
            circle_state.phi
        )
        np.testing.assert_allclose(
            mu + xi, 2 * gradient / circle_state.sigma, atol=1e-12
        )

    @staticmethod
    def test_two_fronts_have_unit_energy_each(strip_state: SimState):
        assert measures.mu_total(strip_state) == pytest.approx(2.0, abs=0.02)

    @staticmethod
    def test_energy_is_eps_independent(standard: potential.PotentialSpec):
        grid = TorusGrid(2, 128)
        shape = fields.InitialShape(kind="sphere", radius=0.25)
        totals = []
        for eps in (0.03, 0.06):
            prof = potential.profile(standard, eps)
            phi = fields.initial_phi(grid, shape, prof)
            state = solver.make_state(grid, phi, prof, zero_forcing(grid))
            totals.append(measures.mu_total(state))

        assert totals[0] == pytest.approx(2 * math.pi * 0.25, rel=0.02)
        assert totals[1] == pytest.approx(totals[0], rel=0.02)

    @staticmethod
    def test_profile_discrepancy_is_small(strip_state: SimState):
        scale = 0.5 / (strip_state.sigma * TEST_EPS)

        xi_max, xi_l1 = measures.discrepancy(strip_state)

        assert xi_max <= 0.05 * scale
        assert xi_l1 < 0.15

    @staticmethod
    def test_phase_volume(circle_state: SimState):
        assert measures.phase_volume(circle_state) == pytest.approx(
            math.pi * 0.25**2, rel=0.03
        )


class TestDensityRatio:
    @staticmethod
    def test_zero_density_gives_one(
        grid: TorusGrid, standard: potential.PotentialSpec
    ):
        flat = dataclasses.replace(
            standard, W=np.zeros_like, name="flat"
        )
        prof = dataclasses.replace(
            potential.profile(standard, TEST_EPS), potential=flat
        )
        state = solver.make_state(
            grid, np.full(grid.shape, 0.3), prof, zero_forcing(grid)
        )

        assert measures.density_ratio(state) == 1.0

    @staticmethod
    def test_flat_front_ball_ratio_is_about_one(strip_state: SimState):
        density = measures.mu_density(strip_state)
        radius = 0.125

        ball = strip_state.grid.ball_sum(density, (0.25, 0.5), radius)

        assert ball / (2 * radius) == pytest.approx(1.0, rel=0.1)

    @staticmethod
    def test_ratio_is_at_least_the_total_energy(strip_state: SimState):
        ratio = measures.density_ratio(strip_state, [(16, 32)], [0.125])

        assert ratio == pytest.approx(measures.mu_total(strip_state))

    @staticmethod
    def test_empty_samples_raise(strip_state: SimState):
        with pytest.raises(ValueError, match="centers and radii"):
            measures.density_ratio(strip_state, [], [0.1])

    @staticmethod
    @pytest.mark.parametrize(
        ("n", "per_octave", "expected"),
        [
            (4, 4, [0.5]),
            (64, 1, [0.5, 0.25, 0.125, 0.0625, 0.03125]),
            (8, 2, [0.5, 2**-1.5, 0.25]),
        ],
    )
    def test_default_radii(n: int, per_octave: int, expected: list[float]):
        radii = measures.default_radii(TorusGrid(2, n), per_octave)

        assert radii == pytest.approx(expected)

    @staticmethod
    def test_default_radii_need_one_per_octave(grid: TorusGrid):
        with pytest.raises(ValueError, match="per octave"):
            measures.default_radii(grid, 0)

    @staticmethod
    def test_smallest_grid_has_a_radius(
        test_profile: potential.ProfileSpec,
    ):
        small = TorusGrid(2, 4)
        state = solver.make_state(
            small, small.zeros(), test_profile, zero_forcing(small)
        )

        assert measures.density_ratio(state) >= 1.0

    @staticmethod
    def test_refined_radii_catch_the_enclosing_ball(circle_state: SimState):
        dyadic = measures.density_ratio(
            circle_state, radii=measures.default_radii(circle_state.grid, 1)
        )

        refined = measures.density_ratio(circle_state)

        assert refined > 2.2
        assert refined > 1.3 * dyadic
        assert refined < math.pi * 1.05


class TestForcingTerms:
    @staticmethod
    def test_no_forcing_no_f(circle_state: SimState):
        np.testing.assert_array_equal(measures.f_field(circle_state), 0.0)
        assert measures.f_l2(circle_state) == 0.0
        assert measures.l_term(circle_state) == 0.0

    @staticmethod
    def test_constant_forcing_matches_profile_quadrature(
        strip_state: SimState,
    ):
        g = 0.2
        forced = dataclasses.replace(
            strip_state, forcing=zero_forcing(strip_state.grid, g)
        )

        np.testing.assert_allclose(measures.f_field(forced), -g)
        expected = 2 * g**2 * forced.sigma
        assert measures.f_l2(forced) == pytest.approx(expected, rel=0.02)

    @staticmethod
    def test_pinned_coefficient_feeds_the_l_term(circle_state: SimState):
        pin = TEST_EPS**-0.25
        forced = dataclasses.replace(
            circle_state, forcing=circle_state.forcing.pinned(pin)
        )

        assert measures.l_term(forced) > 0.0
        assert measures.f_l2(forced) == pytest.approx(
            2 * measures.l_term(forced), rel=1e-12
        )


class TestProfileGeometry:
    @staticmethod
    def test_w_vanishes_on_the_profile(strip_state: SimState):
        w = measures.w_field(strip_state)

        band = np.abs(strip_state.phi) < 0.9
        assert np.max(np.abs(w[band])) <= 0.05

    @staticmethod
    def test_circle_curvature(circle_state: SimState):
        geometry = measures.curvature_velocity(circle_state)

        norm = np.sqrt(np.sum(geometry.h_eps**2, axis=0))
        level = np.abs(circle_state.phi) < 0.05
        np.testing.assert_allclose(norm[level], 4.0, rtol=0.1)

    @staticmethod
    def test_flat_front_has_no_curvature(strip_state: SimState):
        geometry = measures.curvature_velocity(strip_state)

        level = np.abs(strip_state.phi) < 0.2
        assert np.max(np.abs(geometry.h_eps[:, level])) <= 0.1 / TEST_EPS

    @staticmethod
    def test_velocity_follows_curvature(circle_state: SimState):
        assert measures.velocity_residual(circle_state) == pytest.approx(
            0.0, abs=1e-9
        )


class TestInterfaceTracking:
    @staticmethod
    def test_initial_radius(circle_state: SimState):
        radius = measures.interface_radius(circle_state, (0.5, 0.5))

        assert radius == pytest.approx(0.25, abs=circle_state.grid.h)

    @staticmethod
    def test_missing_phase_is_extinct(zero_state: SimState):
        negative = dataclasses.replace(zero_state, phi=zero_state.phi - 0.5)

        with pytest.raises(InterfaceExtinct):
            measures.interface_radius(negative, (0.5, 0.5))

    @staticmethod
    def test_front_position(strip_state: SimState):
        assert measures.front_position(strip_state) == pytest.approx(
            0.25, abs=1e-6
        )

    @staticmethod
    def test_probe_record(circle_state: SimState):
        probe = measures.DiagnosticsProbe(center=(0.5, 0.5))

        record = probe(circle_state)

        assert record.t == 0.0
        assert record.interface_radius == pytest.approx(0.25, abs=0.02)
        assert record.front_position is None
        assert record.D_t >= 1.0
        assert record.phi_margin > 0.0
        assert record.f_l2 == 0.0
