# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0
"""Errors raised while a phase-field run is advanced or measured."""

from __future__ import annotations

import collections.abc as cabc
import functools
import typing

__all__ = ["InterfaceExtinct", "InvariantViolation"]


class InvariantViolation(RuntimeError):
    """A hard invariant of the phase field broke during a run."""

    def __init__(
        self,
        message: str,
        *,
        step: int,
        t: float,
        location: tuple[int, ...] | None = None,
        margins: cabc.Sequence[float] = (),
    ) -> None:
        self.message = message
        self.step = step
        self.t = t
        self.location = location
        self.margins = tuple(margins)
        details = f"step={step} t={t:.6g}"
        if location is not None:
            details += f" at={location}"
        if self.margins:
            history = ", ".join(f"{m:.3e}" for m in self.margins)
            details += f" phi_margin history=[{history}]"
        super().__init__(f"{message} ({details})")

    def __reduce__(self) -> tuple[typing.Any, tuple[()]]:
        rebuild = functools.partial(
            InvariantViolation,
            self.message,
            step=self.step,
            t=self.t,
            location=self.location,
            margins=self.margins,
        )
        return rebuild, ()


class InterfaceExtinct(RuntimeError):
    """The tracked interface disappeared."""

    def __init__(self, message: str, t_extinct: float | None = None) -> None:
        self.t_extinct = t_extinct
        super().__init__(message)

    def __reduce__(self) -> tuple[typing.Any, tuple[str, float | None]]:
        return InterfaceExtinct, (str(self), self.t_extinct)
