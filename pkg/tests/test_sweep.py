# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0

from __future__ import annotations

import pathlib

import pytest

from pfmc.connectors import tables
from pfmc.runs import run_config, sweep
from pfmc.runs.sweep import SweepPoint, SweepResult

# pylint: disable-next=relative-beyond-top-level, useless-suppression
from .conftest import (  # type: ignore[import]
    TEST_CIRCLE_CONFIG,
    TEST_SWEEP_CONFIG,
)


def point(eps: float, xi_l1: float, l_term: float) -> SweepPoint:
    return SweepPoint(
        eps=eps,
        n=int(4 / eps),
        h=eps / 4,
        dt=eps**2 / 10,
        t=0.01,
        xi_l1=xi_l1,
        l_term=l_term,
        mu_total=1.5,
    )


@pytest.fixture
def sweep_config() -> run_config.RunConfig:
    with open(TEST_SWEEP_CONFIG, encoding="utf8") as f:
        return run_config.read_config_file(f)


class TestTrends:
    @staticmethod
    def test_decaying_terms_pass():
        points = [point(0.16, 0.1, 0.4), point(0.08, 0.05, 0.2)]

        assert sweep._trend_failures(points, 0.25) == []

    @staticmethod
    def test_growing_discrepancy_fails():
        points = [point(0.16, 0.1, 0.0), point(0.08, 0.2, 0.0)]

        (failure,) = sweep._trend_failures(points, 0.25)

        assert failure.startswith("xi_l1 does not decrease from eps=0.16")

    @staticmethod
    def test_slow_clamping_decay_fails():
        points = [point(0.16, 0.1, 0.4), point(0.08, 0.05, 0.35)]

        (failure,) = sweep._trend_failures(points, 0.25)

        assert failure.startswith("l_term ratio 1.143 below 1.273")

    @staticmethod
    def test_ratios_and_their_bounds():
        result = SweepResult(
            points=(point(0.16, 0.1, 0.4), point(0.08, 0.05, 0.1)),
            gamma=0.25,
        )

        assert result.ratios() == [None, pytest.approx(4.0)]
        assert result.min_ratios() == [
            None,
            pytest.approx(sweep.L_RATIO_SLACK * 2**0.5),
        ]
        assert result.passed


class TestPointConfig:
    @staticmethod
    def test_point_follows_h_ratio():
        with open(TEST_CIRCLE_CONFIG, encoding="utf8") as f:
            config = run_config.read_config_file(f)

        point_config = sweep.point_config(config, 0.08, 3)

        assert point_config.grid.n is None
        assert point_config.interface.eps == 0.08
        assert point_config.probes == []
        assert point_config.output.snapshot_times == []
        assert not point_config.output.pgm
        assert point_config.workers == 3
        assert config.grid.n == 128


class TestRunSweep:
    @staticmethod
    @pytest.mark.parametrize(
        ("eps_list", "match"),
        [
            ([], "at least one"),
            ([0.1, -0.1], "positive"),
            ([0.1, 0.1], "repeat"),
        ],
    )
    def test_invalid_eps_lists_raise(
        sweep_config: run_config.RunConfig, eps_list: list[float], match: str
    ):
        with pytest.raises(ValueError, match=match):
            sweep.run_sweep(sweep_config, eps_list)

    @staticmethod
    def test_single_point_warns(
        sweep_config: run_config.RunConfig,
        caplog: pytest.LogCaptureFixture,
        tmp_path: pathlib.Path,
    ):
        with caplog.at_level("WARNING"):
            result = sweep.run_sweep(sweep_config, [0.0625])

        assert "Sweep over a single eps shows no trend" in caplog.text
        assert result.passed
        (only,) = result.points
        assert (only.eps, only.n) == (0.0625, 64)
        assert only.t == pytest.approx(0.002)
        assert only.l_term > 0.0

        path = sweep.write_sweep(result, tmp_path / "sweep.csv")

        (row,) = tables.read_csv(path)
        assert tuple(row) == sweep.SWEEP_COLUMNS
        assert row["l_ratio"] == ""
