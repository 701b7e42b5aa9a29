# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0
"""Uniform periodic grid on the flat torus ``[0, 1)^d``.

Fields are plain numpy arrays. A scalar field has the shape ``(n,) * d``,
a vector field carries its ``d`` components on a leading axis. All index
arithmetic wraps around on every axis.
"""

from __future__ import annotations

import collections.abc as cabc
import dataclasses
import functools
import logging
import typing as t

import numpy as np
import numpy.typing as npt
from scipy import fft

__all__ = ["Field", "TorusGrid", "grid_size_for", "minimum_image"]

logger = logging.getLogger(__name__)

Field: t.TypeAlias = npt.NDArray[np.float64]
Point: t.TypeAlias = cabc.Sequence[float]


def minimum_image(delta: t.Any) -> t.Any:
    """Wrap coordinate differences into ``[-1/2, 1/2)``."""
    return delta - np.floor(np.add(delta, 0.5))


@dataclasses.dataclass(frozen=True)
class TorusGrid:
    """A periodic grid with ``n`` cells per axis in ``d`` dimensions.

    Parameters
    ----------
    d
        The dimension, 2 or 3.
    n
        Cells per axis, a power of two.
    workers
        Worker threads handed to the FFT backend. The transforms are
        deterministic for a fixed worker count.
    """

    d: int
    n: int
    workers: int = 1

    def __post_init__(self) -> None:
        if self.d not in (2, 3):
            raise ValueError(f"Dimension must be 2 or 3, got {self.d}")
        if self.n < 4 or self.n & (self.n - 1):
            raise ValueError(
                f"Cells per axis must be a power of two >= 4, got {self.n}"
            )
        if self.workers < 1:
            raise ValueError(f"Need at least one worker, got {self.workers}")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def cell_volume(self) -> float:
        return self.h**self.d

    @property
    def spatial_axes(self) -> tuple[int, ...]:
        return tuple(range(-self.d, 0))

    def coordinates(self) -> tuple[Field, ...]:
        """Return the coordinate arrays ``x_i = index_i * h``."""
        return self._coordinates

    @functools.cached_property
    def _coordinates(self) -> tuple[Field, ...]:
        axis = np.arange(self.n, dtype=float) * self.h
        return tuple(np.meshgrid(*([axis] * self.d), indexing="ij"))

    def zeros(self) -> Field:
        return np.zeros(self.shape, dtype=float)

    def integrate(self, f: Field) -> float:
        """Return ``h^d * sum(f)`` over the whole torus."""
        return float(self.cell_volume * np.sum(f))

    def translate(self, f: Field, shift: cabc.Sequence[int]) -> Field:
        """Shift a field by a lattice vector given in cells."""
        return np.roll(f, tuple(shift), axis=self.spatial_axes[-len(shift) :])

    def laplacian(self, f: Field) -> Field:
        """Return the (2d+1)-point Laplacian of a scalar field."""
        out = -2.0 * self.d * f
        for axis in range(self.d):
            out = out + np.roll(f, 1, axis=axis) + np.roll(f, -1, axis=axis)
        return out / self.h**2

    def gradient(self, f: Field) -> Field:
        """Return the centered-difference gradient of a scalar field."""
        return np.stack(
            [
                (np.roll(f, -1, axis=axis) - np.roll(f, 1, axis=axis))
                / (2.0 * self.h)
                for axis in range(self.d)
            ]
        )

    def forward_gradient(self, f: Field) -> Field:
        return np.stack(
            [
                (np.roll(f, -1, axis=axis) - f) / self.h
                for axis in range(self.d)
            ]
        )

    def backward_gradient(self, f: Field) -> Field:
        return np.stack(
            [
                (f - np.roll(f, 1, axis=axis)) / self.h
                for axis in range(self.d)
            ]
        )

    def backward_divergence(self, v: Field) -> Field:
        """Return the backward-difference divergence of a vector field.

        Composed with :meth:`forward_gradient` it reproduces
        :meth:`laplacian`.
        """
        out = np.zeros(v.shape[1:], dtype=float)
        for axis in range(self.d):
            out += (v[axis] - np.roll(v[axis], 1, axis=axis)) / self.h
        return out

    def gradient_energy(self, f: Field) -> Field:
        """Return the compact pointwise ``|grad f|^2``.

        This is the mean of the squared forward and backward differences
        per axis. Its integral equals the Dirichlet form of
        :meth:`laplacian`.
        """
        forward = self.forward_gradient(f)
        backward = self.backward_gradient(f)
        return 0.5 * np.sum(forward**2 + backward**2, axis=0)

    @functools.cached_property
    def laplacian_symbol(self) -> Field:
        """Eigenvalues of ``-laplacian`` in the real-FFT layout."""
        freqs = [np.fft.fftfreq(self.n, d=self.h)] * (self.d - 1)
        freqs.append(np.fft.rfftfreq(self.n, d=self.h))
        symbol = np.zeros(tuple(len(k) for k in freqs), dtype=float)
        for axis, k in enumerate(freqs):
            shape = [1] * self.d
            shape[axis] = len(k)
            phase = 2.0 * np.pi * k * self.h
            one_d = (2.0 / self.h**2) * (1.0 - np.cos(phase))
            symbol = symbol + one_d.reshape(shape)
        return symbol

    def helmholtz_solve(self, f: Field, a: float) -> Field:
        """Solve ``(I - a * laplacian) v = f`` by Fourier diagonalization.

        Raises
        ------
        ValueError
            If ``a`` is not positive.
        """
        if not a > 0.0:
            raise ValueError(f"Helmholtz coefficient must be positive: {a}")
        spectrum = fft.rfftn(f, workers=self.workers)
        spectrum /= 1.0 + a * self.laplacian_symbol
        return fft.irfftn(spectrum, s=self.shape, workers=self.workers)

    def periodic_convolve(self, f: Field, kernel: Field) -> Field:
        """Circularly convolve a scalar or vector field with a kernel.

        The kernel is a scalar field whose index 0 is the zero
        displacement. It is normalized to unit sum before use.

        Raises
        ------
        ValueError
            If the kernel is negative somewhere, sums to zero or does not
            live on this grid.
        """
        if kernel.shape != self.shape:
            raise ValueError(
                f"Kernel shape {kernel.shape} does not match {self.shape}"
            )
        if np.any(kernel < 0.0):
            raise ValueError("Convolution kernel must be nonnegative")
        total = float(np.sum(kernel))
        if not total > 0.0:
            raise ValueError("Convolution kernel is identically zero")
        axes = self.spatial_axes
        kernel_hat = fft.rfftn(kernel / total, workers=self.workers)
        spectrum = fft.rfftn(f, axes=axes, workers=self.workers) * kernel_hat
        return fft.irfftn(
            spectrum, s=self.shape, axes=axes, workers=self.workers
        )

    def distance_to(self, center: Point) -> Field:
        """Return the minimum-image distance of every grid point."""
        self._check_point(center)
        squared = self.zeros()
        for coord, c in zip(self.coordinates(), center, strict=True):
            squared += minimum_image(coord - c) ** 2
        return np.sqrt(squared)

    def ball_sum(self, f: Field, center: Point, radius: float) -> float:
        """Return ``h^d`` times the sum of ``f`` over an open ball.

        Raises
        ------
        ValueError
            Unless ``0 < radius <= 1/2``.
        """
        self._check_radius(radius)
        mask = self.distance_to(center) < radius
        return float(self.cell_volume * np.sum(f[mask]))

    def ball_sums(self, f: Field, radius: float) -> Field:
        """Return :meth:`ball_sum` for a ball around every grid point."""
        self._check_radius(radius)
        indicator = (self.distance_to((0.0,) * self.d) < radius).astype(float)
        spectrum = fft.rfftn(f, workers=self.workers)
        spectrum *= fft.rfftn(indicator, workers=self.workers)
        sums = fft.irfftn(spectrum, s=self.shape, workers=self.workers)
        return self.cell_volume * sums

    def nearest_index(self, point: Point) -> tuple[int, ...]:
        self._check_point(point)
        return tuple(int(round(c * self.n)) % self.n for c in point)

    def _check_point(self, point: Point) -> None:
        if len(point) != self.d:
            raise ValueError(
                f"Point {tuple(point)} does not have {self.d} coordinates"
            )

    @staticmethod
    def _check_radius(radius: float) -> None:
        if not 0.0 < radius <= 0.5:
            raise ValueError(f"Ball radius must lie in (0, 1/2]: {radius}")


def grid_size_for(eps: float, h_ratio: float = 4.0) -> int:
    """Return the smallest power of two ``n`` with ``1/n <= eps/h_ratio``."""
    if not eps > 0.0 or not h_ratio > 0.0:
        raise ValueError(f"Need positive eps and h_ratio: {eps}, {h_ratio}")
    required = h_ratio / eps
    n = 4
    while n < required * (1.0 - 1e-12):
        n *= 2
    return n
