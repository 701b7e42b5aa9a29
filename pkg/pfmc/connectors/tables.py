# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0
"""CSV tables with a fixed column order."""

from __future__ import annotations

import collections.abc as cabc
import csv
import logging
import os
import pathlib
import typing as t

from pfmc.data_model import as_row

__all__ = ["read_csv", "write_csv", "write_records"]

logger = logging.getLogger(__name__)


def write_csv(
    path: str | os.PathLike[str],
    columns: cabc.Sequence[str],
    rows: cabc.Iterable[cabc.Mapping[str, t.Any]],
) -> pathlib.Path:
    """Write ``rows`` under a header of ``columns``.

    Without rows only the header is written. Keys missing from a row
    become empty cells; unknown keys raise ``ValueError``.
    """
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf8", newline="") as file:
        writer = csv.DictWriter(
            file, fieldnames=list(columns), restval="", lineterminator="\n"
        )
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
            count += 1
    logger.info("Wrote %d rows to %s", count, path)
    return path


def write_records(
    path: str | os.PathLike[str],
    columns: cabc.Sequence[str],
    records: cabc.Iterable[t.Any],
) -> pathlib.Path:
    """Write dataclass records as rows via :func:`as_row`."""
    return write_csv(path, columns, (as_row(record) for record in records))


def read_csv(path: str | os.PathLike[str]) -> list[dict[str, str]]:
    with pathlib.Path(path).open(encoding="utf8", newline="") as file:
        return list(csv.DictReader(file))
