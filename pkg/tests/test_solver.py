# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0

from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from pfmc.data_model import InterfaceExtinct, InvariantViolation, SimState
from pfmc.diagnostics import measures
from pfmc.numerics import solver
from pfmc.numerics.torus_grid import TorusGrid
from pfmc.physics import fields, potential

# pylint: disable-next=relative-beyond-top-level, useless-suppression
from .conftest import TEST_EPS, zero_forcing  # type: ignore[import]


def constant_state(
    grid: TorusGrid, prof: potential.ProfileSpec, value: float, **kwargs
) -> SimState:
    phi = np.full(grid.shape, value)
    return solver.make_state(grid, phi, prof, zero_forcing(grid), **kwargs)


class TestMakeState:
    @staticmethod
    def test_auto_dt(grid: TorusGrid, test_profile: potential.ProfileSpec):
        state = constant_state(grid, test_profile, 0.0)

        assert state.dt == pytest.approx(TEST_EPS**2 / 10)
        assert state.scheme == "semi_implicit"

    @staticmethod
    def test_explicit_bound_includes_diffusion(
        grid: TorusGrid, standard: potential.PotentialSpec
    ):
        bound = solver.max_stable_dt(grid, standard, TEST_EPS, "explicit")

        assert bound == pytest.approx(grid.h**2 / 8)

    @staticmethod
    def test_step_above_bound_raises(
        grid: TorusGrid, test_profile: potential.ProfileSpec
    ):
        with pytest.raises(ValueError, match="violates"):
            constant_state(grid, test_profile, 0.0, dt=TEST_EPS**2)

    @staticmethod
    @pytest.mark.parametrize("value", [1.0, np.nan])
    def test_field_outside_the_open_interval_raises(
        grid: TorusGrid, test_profile: potential.ProfileSpec, value: float
    ):
        with pytest.raises(ValueError, match="Initial field"):
            constant_state(grid, test_profile, value)

    @staticmethod
    def test_unknown_scheme_raises(
        grid: TorusGrid, test_profile: potential.ProfileSpec
    ):
        with pytest.raises(ValueError, match="scheme"):
            constant_state(grid, test_profile, 0.0, scheme="implicit")


class TestRhs:
    @staticmethod
    def test_zero_field_is_stationary(
        grid: TorusGrid, test_profile: potential.ProfileSpec
    ):
        state = constant_state(grid, test_profile, 0.0)

        np.testing.assert_array_equal(solver.rhs(state), 0.0)

    @staticmethod
    def test_planar_profile_is_nearly_stationary(strip_state: SimState):
        scale = 1.0 / TEST_EPS**2

        residual = np.max(np.abs(solver.rhs(strip_state)))

        assert residual <= 0.1 * scale

    @staticmethod
    def test_constant_forcing_translates_the_profile(strip_state: SimState):
        g = 0.3
        forced = dataclasses.replace(
            strip_state, forcing=zero_forcing(strip_state.grid, g)
        )
        prof = strip_state.profile

        difference = solver.rhs(forced) - solver.rhs(strip_state)

        r = prof.q_inv(strip_state.phi)
        np.testing.assert_allclose(difference, -g * prof.q_r(r), atol=1e-9)


class TestSteps:
    @staticmethod
    def test_plateau_relaxes_monotonically(
        grid: TorusGrid, test_profile: potential.ProfileSpec
    ):
        state = constant_state(grid, test_profile, 1.0 - 1e-3)
        values = [state.phi[0, 0]]

        for _ in range(5):
            state = solver.step(state)
            values.append(state.phi[0, 0])

        assert values == sorted(values)
        assert values[-1] <= 1.0
        np.testing.assert_allclose(state.phi, state.phi[0, 0])

    @staticmethod
    def test_schemes_agree_to_second_order(
        circle_state: SimState, grid: TorusGrid
    ):
        dt = solver.max_stable_dt(
            grid, circle_state.profile.potential, TEST_EPS, "explicit"
        )
        state = dataclasses.replace(circle_state, dt=dt)

        explicit = solver.step_explicit(
            dataclasses.replace(state, scheme="explicit")
        )
        implicit = solver.step_semi_implicit(state)

        change = np.max(np.abs(explicit.phi - state.phi))
        assert np.max(np.abs(explicit.phi - implicit.phi)) <= 0.2 * change

    @staticmethod
    def test_step_advances_time_and_integrals(circle_state: SimState):
        state = solver.step(circle_state)

        assert state.step_count == 1
        assert state.t == pytest.approx(circle_state.dt)
        assert state.dissipation_integral > 0.0
        assert state.forcing_integral == 0.0
        assert len(state.margins) == 2

    @staticmethod
    def test_overshoot_aborts(
        grid: TorusGrid, test_profile: potential.ProfileSpec
    ):
        state = constant_state(grid, test_profile, 0.5)
        pushed = dataclasses.replace(
            state, forcing=zero_forcing(grid, -1e6)
        )

        with pytest.raises(InvariantViolation) as info:
            solver.step(pushed)

        assert info.value.step == 1
        assert info.value.margins[-1] < 0.0


class TestRun:
    @staticmethod
    def test_empty_span_records_nothing(circle_state: SimState):
        final, records = solver.run(
            circle_state, circle_state.t, hooks=[measures.mu_total]
        )

        assert final is circle_state
        assert records == []

    @staticmethod
    def test_large_cadence_records_final_state(circle_state: SimState):
        t_end = 3 * circle_state.dt

        final, records = solver.run(
            circle_state, t_end, hooks=[lambda s: s.t], every=100
        )

        assert final.step_count == 3
        assert records == [pytest.approx(t_end)]

    @staticmethod
    def test_energy_decreases_without_forcing(circle_state: SimState):
        _, energies = solver.run(
            circle_state,
            20 * circle_state.dt,
            hooks=[measures.mu_total],
            every=2,
        )

        assert len(energies) == 10
        assert all(b < a for a, b in zip(energies, energies[1:]))

    @staticmethod
    def test_extinct_hook_stops_the_run(circle_state: SimState):
        def hook(state: SimState) -> float:
            if state.step_count == 4:
                raise InterfaceExtinct("gone", state.t)
            return state.t

        final, records = solver.run(
            circle_state, 10 * circle_state.dt, hooks=[hook]
        )

        assert final.step_count == 4
        assert len(records) == 3

    @staticmethod
    def test_schedule_switches_the_forcing(circle_state: SimState):
        grid = circle_state.grid
        schedule = fields.ForcingSchedule.build(
            [(0.0, zero_forcing(grid)), (2.5e-4, zero_forcing(grid, 0.5))]
        )

        final, _ = solver.run(
            circle_state, 4 * circle_state.dt, schedule=schedule
        )

        assert final.forcing_integral > 0.0
        assert float(final.forcing.g_eps[0, 0]) == 0.5

    @staticmethod
    @pytest.mark.parametrize(("t_end", "every"), [(-1.0, 1), (1e-3, 0)])
    def test_invalid_arguments_raise(
        circle_state: SimState, t_end: float, every: int
    ):
        with pytest.raises(ValueError, match="t_end|cadence"):
            solver.run(circle_state, t_end, every=every)

    @staticmethod
    def test_trajectory_is_translation_equivariant(circle_state: SimState):
        grid = circle_state.grid
        shift = (7, -4)
        x, y = grid.coordinates()
        forcing = dataclasses.replace(
            zero_forcing(grid),
            u_eps=np.stack(
                [np.full(grid.shape, 0.3), 0.1 * np.sin(2 * np.pi * x)]
            ),
            g_eps=0.2 * np.cos(2 * np.pi * y),
        )
        moved_forcing = dataclasses.replace(
            forcing,
            u_eps=grid.translate(forcing.u_eps, shift),
            g_eps=grid.translate(forcing.g_eps, shift),
        )
        state = dataclasses.replace(circle_state, forcing=forcing)
        moved = dataclasses.replace(
            circle_state,
            phi=grid.translate(circle_state.phi, shift),
            forcing=moved_forcing,
        )

        final, _ = solver.run(state, 10 * state.dt)
        moved_final, _ = solver.run(moved, 10 * state.dt)

        np.testing.assert_allclose(
            moved_final.phi, grid.translate(final.phi, shift), atol=1e-12
        )
        assert moved_final.forcing_integral == pytest.approx(
            final.forcing_integral, rel=1e-12
        )

    @staticmethod
    def test_schemes_agree_on_the_circle_radius(circle_state: SimState):
        t_end = 0.01
        dt = t_end / 400
        radii = []
        for scheme in solver.SCHEMES:
            state = dataclasses.replace(circle_state, dt=dt, scheme=scheme)
            final, _ = solver.run(state, t_end)
            radii.append(measures.interface_radius(final, (0.5, 0.5)))

        explicit, semi_implicit = radii
        assert semi_implicit == pytest.approx(explicit, abs=1e-3)
        assert explicit < 0.25
