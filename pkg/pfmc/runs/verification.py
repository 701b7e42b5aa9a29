# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0
"""The invariant checks run by ``pfmc verify``.

Every check reports ``margin = allowed - observed`` and passes iff the
margin is nonnegative.
"""

from __future__ import annotations

import collections.abc as cabc
import dataclasses
import itertools
import logging
import math

from pfmc.data_model import DiagnosticsRecord
from pfmc.runs.simulation import SimulationResult

__all__ = [
    "VERIFY_COLUMNS",
    "CheckResult",
    "check_density_bound",
    "check_energy_inequality",
    "check_energy_monotone",
    "check_w_bound",
    "check_xi_nonpositive",
    "verify",
]

logger = logging.getLogger(__name__)

VERIFY_COLUMNS = ("check", "pass", "margin", "allowed", "observed", "detail")


@dataclasses.dataclass(frozen=True)
class CheckResult:
    check: str
    passed: bool
    margin: float
    allowed: float = math.nan
    observed: float = math.nan
    detail: str = ""

    @classmethod
    def against(
        cls, check: str, allowed: float, observed: float, detail: str = ""
    ) -> CheckResult:
        margin = allowed - observed
        return cls(
            check=check,
            passed=bool(margin >= 0.0),
            margin=margin,
            allowed=allowed,
            observed=observed,
            detail=detail,
        )

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        line = f"{verdict} {self.check} margin={self.margin:.6e}"
        if self.detail:
            line += f" {self.detail}"
        return line


def _empty(check: str) -> CheckResult:
    return CheckResult(
        check=check, passed=True, margin=math.inf, detail="no records"
    )


def check_xi_nonpositive(
    records: cabc.Sequence[DiagnosticsRecord], scale: float, tol: float
) -> CheckResult:
    """Check ``xi_max <= tol * scale`` at every record.

    ``scale`` is ``W(0) / (sigma eps)``, the peak of the energy density
    of a profile.
    """
    if not records:
        return _empty("xi_nonpositive")
    worst = max(records, key=lambda record: record.xi_max)
    return CheckResult.against(
        "xi_nonpositive",
        tol * scale,
        worst.xi_max,
        f"t={worst.t:.6g}",
    )


def check_w_bound(
    records: cabc.Sequence[DiagnosticsRecord], tol: float
) -> CheckResult:
    if not records:
        return _empty("w_bound")
    worst = max(records, key=lambda record: record.w_max)
    return CheckResult.against("w_bound", tol, worst.w_max, f"t={worst.t:.6g}")


def check_energy_inequality(
    records: cabc.Sequence[DiagnosticsRecord],
    sigma: float,
    tolerance: float,
) -> CheckResult:
    """Check the energy inequality on every record interval.

    The residual of an interval is the energy change plus half the
    dissipated and minus half the forced integral, both divided by
    sigma. It must stay below ``tolerance``.
    """
    if len(records) < 2:  # noqa: PLR2004
        return _empty("energy_inequality")
    worst_residual = -math.inf
    worst_t = records[0].t
    for prev, cur in itertools.pairwise(records):
        residual = cur.mu_total - prev.mu_total
        residual += (
            (cur.dissipation_integral - prev.dissipation_integral)
            / (2.0 * sigma)
        )
        residual -= (
            (cur.forcing_integral - prev.forcing_integral) / (2.0 * sigma)
        )
        if residual > worst_residual:
            worst_residual, worst_t = residual, cur.t
    return CheckResult.against(
        "energy_inequality", tolerance, worst_residual, f"t={worst_t:.6g}"
    )


def check_energy_monotone(
    records: cabc.Sequence[DiagnosticsRecord], rtol: float
) -> CheckResult:
    """Check that the energy grows by at most ``rtol`` relative per step."""
    if len(records) < 2:  # noqa: PLR2004
        return _empty("energy_monotone")
    worst_margin = math.inf
    worst: tuple[float, float] = (math.inf, 0.0)
    worst_t = records[0].t
    for prev, cur in itertools.pairwise(records):
        steps = max(cur.step - prev.step, 1)
        allowed = rtol * steps * abs(prev.mu_total)
        growth = cur.mu_total - prev.mu_total
        if allowed - growth < worst_margin:
            worst_margin = allowed - growth
            worst = (allowed, growth)
            worst_t = cur.t
    return CheckResult.against(
        "energy_monotone", worst[0], worst[1], f"t={worst_t:.6g}"
    )


def check_density_bound(
    records: cabc.Sequence[DiagnosticsRecord], factor: float
) -> CheckResult:
    """Check ``D(t) <= factor * D(0)`` along the run."""
    if not records:
        return _empty("density_bound")
    worst = max(records, key=lambda record: record.D_t)
    return CheckResult.against(
        "density_bound",
        factor * records[0].D_t,
        worst.D_t,
        f"t={worst.t:.6g}",
    )


def verify(result: SimulationResult) -> list[CheckResult]:
    """Run every enabled check on a finished run."""
    simulation = result.simulation
    tolerances = simulation.config.tolerances
    state = simulation.initial
    grid = simulation.grid
    potential = state.profile.potential
    records = result.diagnostics

    checks: list[CheckResult] = []
    if result.error is not None:
        checks.append(
            CheckResult(
                check="invariants",
                passed=False,
                margin=min(result.error.margins, default=math.nan),
                detail=f"step={result.error.step}",
            )
        )
    scale = float(potential.W(0.0)) / (state.sigma * state.eps)
    checks.append(check_xi_nonpositive(records, scale, tolerances.xi))
    checks.append(check_w_bound(records, tolerances.w))
    mu0 = records[0].mu_total if records else 0.0
    energy_tolerance = tolerances.energy * (grid.h**2 + state.dt) * mu0
    checks.append(
        check_energy_inequality(records, state.sigma, energy_tolerance)
    )
    trivial = state.forcing.is_trivial and simulation.schedule is None
    if trivial:
        checks.append(check_energy_monotone(records, tolerances.energy_step))
    for name, report in result.reports.items():
        margin = report.worst_margin
        checks.append(
            CheckResult(
                check=f"monotonicity[{name}]",
                passed=report.passed,
                margin=margin,
                detail=f"intervals={len(report.intervals)}",
            )
        )
    checks.append(check_density_bound(records, tolerances.density))
    for check in checks:
        logger.info("%s", check.summary())
    return checks
