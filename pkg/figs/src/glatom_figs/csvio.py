"""Readers for the simulator's '#'-commented CSV files."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class SpecError(Exception):
    """Figure spec or input file is unusable."""


@dataclass
class SeriesTable:
    comments: list[str]
    columns: list[str]
    data: np.ndarray  # (n_rows, n_columns)

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise SpecError(
                f"column {name!r} not in CSV header {self.columns}"
            )
        return self.data[:, self.columns.index(name)]


def read_series(path: str | Path) -> SeriesTable:
    lines = Path(path).read_text().splitlines()
    comments = [l for l in lines if l.startswith("#")]
    body = [l for l in lines if l and not l.startswith("#")]
    if not body:
        raise SpecError(f"{path}: no header row")
    columns = body[0].split(",")
    rows = body[1:]
    if not rows:
        raise SpecError(f"{path}: header only, no data rows")
    try:
        data = np.array([[float(v) for v in r.split(",")] for r in rows])
    except ValueError as exc:
        raise SpecError(f"{path}: non-numeric data row ({exc})") from exc
    if data.shape[1] != len(columns):
        raise SpecError(f"{path}: ragged rows")
    return SeriesTable(comments, columns, data)


def read_density(path: str | Path) -> tuple[np.ndarray, dict]:
    """Density matrix CSV plus its JSON sidecar (same stem)."""
    path = Path(path)
    rows = [
        l for l in path.read_text().splitlines() if l and not l.startswith("#")
    ]
    if not rows:
        raise SpecError(f"{path}: empty density matrix")
    grid = np.array([[float(v) for v in r.split(",")] for r in rows])
    sidecar = path.with_suffix(".json")
    if not sidecar.exists():
        raise SpecError(f"{path}: missing sidecar {sidecar.name}")
    meta = json.loads(sidecar.read_text())
    for key in ("tau", "x_min", "x_max", "y_min", "y_max"):
        if key not in meta:
            raise SpecError(f"{sidecar}: sidecar lacks {key!r}")
    return grid, meta
