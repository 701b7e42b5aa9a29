# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0

from __future__ import annotations

import io

import pydantic
import pytest

from pfmc.diagnostics import measures
from pfmc.runs import run_config, simulation

# pylint: disable-next=relative-beyond-top-level, useless-suppression
from .conftest import (  # type: ignore[import]
    TEST_CIRCLE_CONFIG,
    TEST_INVALID_CONFIG,
    TEST_SWEEP_CONFIG,
    TEST_TEMPLATE_CONFIG,
)


class TestReadConfig:
    @staticmethod
    def test_read_circle_config():
        with open(TEST_CIRCLE_CONFIG, encoding="utf8") as f:
            config = run_config.read_config_file(f)

        assert config.grid.n == 128
        assert config.interface.eps == 0.05
        assert config.time.dt == "auto"
        assert config.shape.kind == "sphere"
        assert config.output.snapshot_times == [0.0, 0.005]
        assert config.probe_names() == ["center", "off_center"]

    @staticmethod
    def test_pin_mode_and_auto_grid():
        with open(TEST_SWEEP_CONFIG, encoding="utf8") as f:
            config = run_config.read_config_file(f)

        assert config.grid.n is None
        assert config.forcing.pin_l == "eps_gamma"

    @staticmethod
    def test_template_uses_params():
        with open(TEST_TEMPLATE_CONFIG, encoding="utf8") as f:
            config = run_config.read_config_file(f, {"t_end": 0.002})

        assert config.time.t_end == 0.002
        assert config.grid.n == 64

    @staticmethod
    def test_template_without_param_raises():
        with (
            open(TEST_TEMPLATE_CONFIG, encoding="utf8") as f,
            pytest.raises(Exception, match="t_end"),
        ):
            run_config.read_config_file(f)

    @staticmethod
    def test_empty_file_gives_defaults():
        config = run_config.read_config_file(io.StringIO(""))

        assert config == run_config.RunConfig()
        assert config.workers == 1

    @staticmethod
    def test_render_parses_back():
        with open(TEST_CIRCLE_CONFIG, encoding="utf8") as f:
            config = run_config.read_config_file(f)

        rendered = run_config.render_config(config)

        assert run_config.read_config_file(io.StringIO(rendered)) == config


class TestValidation:
    @staticmethod
    def test_unknown_key_reports_dotted_path():
        with (
            open(TEST_INVALID_CONFIG, encoding="utf8") as f,
            pytest.raises(pydantic.ValidationError) as info,
        ):
            run_config.read_config_file(f)

        message = run_config.format_validation_error(info.value)

        assert message.startswith("grid.nn: ")

    @staticmethod
    @pytest.mark.parametrize(
        ("content", "match"),
        [
            ({"interface": {"eps": -0.1}}, "eps must be positive"),
            ({"interface": {"gamma": 0.5}}, "interface.gamma"),
            ({"time": {"every": 0}}, "time.every"),
            ({"grid": {"d": 4}}, "grid.d"),
        ],
    )
    def test_field_constraints(content: dict, match: str):
        with pytest.raises(pydantic.ValidationError) as info:
            run_config.parse_config(content)

        assert match in run_config.format_validation_error(info.value)

    @staticmethod
    @pytest.mark.parametrize(
        ("content", "match"),
        [
            ({"grid": {"d": 3}}, "shape.center needs 3"),
            (
                {"forcing": {"preset": "constant", "velocity": [1.0]}},
                "forcing.velocity needs 2",
            ),
            ({"probes": [{"y": [0.5]}]}, "probe y needs 2"),
        ],
    )
    def test_dimension_mismatch(content: dict, match: str):
        with pytest.raises(pydantic.ValidationError, match=match):
            run_config.parse_config(content)

    @staticmethod
    def test_snapshot_paths_need_the_snapshot_preset():
        with pytest.raises(pydantic.ValidationError, match="need preset"):
            run_config.parse_config({"forcing": {"g_snapshot": "g.pfmc"}})
        with pytest.raises(pydantic.ValidationError, match="needs u_snap"):
            run_config.parse_config({"forcing": {"preset": "snapshot"}})


def test_probe_names_default_to_the_index():
    config = run_config.parse_config(
        {"probes": [{}, {"name": "edge"}, {"cutoff": True}]}
    )

    assert config.probe_names() == ["p0", "edge", "p2"]


class TestBuildSimulation:
    @staticmethod
    @pytest.mark.parametrize("per_octave", [1, 3])
    def test_density_radii_follow_the_grid_section(per_octave: int):
        with open(TEST_CIRCLE_CONFIG, encoding="utf8") as f:
            config = run_config.read_config_file(f)
        config.grid.radii_per_octave = per_octave

        built = simulation.build_simulation(config)

        assert built.diagnostics.radii == measures.default_radii(
            built.grid, per_octave
        )
        assert built.diagnostics.radii[0] == 0.5
