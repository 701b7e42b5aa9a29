# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0
"""Binary grid snapshots and PGM images of the ``phi > 0`` phase.

A snapshot holds one scalar field: a 32 byte little-endian header
(magic ``PFMC``, format version, ``d``, ``n``, ``eps``, ``t``) followed
by the ``n^d`` values as row-major float64.
"""

from __future__ import annotations

import dataclasses
import logging
import os
import pathlib

import numpy as np
import numpy.typing as npt

__all__ = [
    "HEADER",
    "MAGIC",
    "VERSION",
    "Snapshot",
    "read_snapshot",
    "write_pgm",
    "write_snapshot",
]

logger = logging.getLogger(__name__)

MAGIC = b"PFMC"
VERSION = 1
HEADER = np.dtype(
    [
        ("magic", "S4"),
        ("version", "<u4"),
        ("d", "<u4"),
        ("n", "<u4"),
        ("eps", "<f8"),
        ("t", "<f8"),
    ]
)
VALUES = np.dtype("<f8")
INSIDE = 255


@dataclasses.dataclass(frozen=True, eq=False)
class Snapshot:
    """A scalar field read back from disk."""

    d: int
    n: int
    eps: float
    t: float
    data: npt.NDArray[np.float64]


def write_snapshot(
    path: str | os.PathLike[str],
    field: npt.NDArray[np.float64],
    eps: float,
    t: float,
) -> pathlib.Path:
    """Write a scalar field of shape ``(n,) * d`` to ``path``."""
    d = field.ndim
    n = field.shape[0]
    if d not in (2, 3) or field.shape != (n,) * d:
        raise ValueError(f"Cannot store a field of shape {field.shape}")
    header = np.array([(MAGIC, VERSION, d, n, eps, t)], dtype=HEADER)
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as file:
        file.write(header.tobytes())
        file.write(np.ascontiguousarray(field, dtype=VALUES).tobytes())
    logger.debug("Wrote snapshot %s at t=%.6g", path, t)
    return path


def read_snapshot(path: str | os.PathLike[str]) -> Snapshot:
    """Read a snapshot written by :func:`write_snapshot`.

    Raises
    ------
    ValueError
        If the magic, version or payload size do not match.
    """
    raw = pathlib.Path(path).read_bytes()
    if len(raw) < HEADER.itemsize:
        raise ValueError(f"{path} is too short for a snapshot header")
    header = np.frombuffer(raw, dtype=HEADER, count=1)[0]
    if bytes(header["magic"]) != MAGIC:
        raise ValueError(f"{path} is not a snapshot file")
    if int(header["version"]) != VERSION:
        raise ValueError(
            f"{path} has unsupported version {int(header['version'])}"
        )
    d, n = int(header["d"]), int(header["n"])
    payload = raw[HEADER.itemsize :]
    if len(payload) != n**d * VALUES.itemsize:
        raise ValueError(
            f"{path} holds {len(payload)} bytes, expected "
            f"{n**d * VALUES.itemsize} for n={n}, d={d}"
        )
    data = np.frombuffer(payload, dtype=VALUES).reshape((n,) * d)
    return Snapshot(
        d=d,
        n=n,
        eps=float(header["eps"]),
        t=float(header["t"]),
        data=data.astype(np.float64),
    )


def write_pgm(
    path: str | os.PathLike[str], phi: npt.NDArray[np.float64]
) -> pathlib.Path:
    """Write a binary PGM image, 255 where ``phi > 0`` and 0 elsewhere.

    Three-dimensional fields are cut at the middle of the last axis.
    """
    if phi.ndim == 3:  # noqa: PLR2004
        phi = phi[..., phi.shape[-1] // 2]
    image = np.where(phi > 0.0, INSIDE, 0).astype(np.uint8)
    rows, columns = image.shape
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as file:
        file.write(f"P5\n{columns} {rows}\n{INSIDE}\n".encode("ascii"))
        file.write(image.tobytes())
    return path
