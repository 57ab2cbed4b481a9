"""Data ingestion and interpoint distances."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial.distance import pdist, squareform

METRICS = ("euclidean", "manhattan")
_SCIPY_METRIC = {"euclidean": "euclidean", "manhattan": "cityblock"}


class DataError(ValueError):
    """Raised for unreadable or malformed input data."""


@dataclass(frozen=True)
class DataMatrix:
    """N observations by d real-valued features."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise DataError(f"data must be two-dimensional, got shape {values.shape}")
        if values.shape[0] < 2:
            raise DataError(f"need at least 2 observations, got {values.shape[0]}")
        if values.shape[1] < 1:
            raise DataError("need at least 1 feature")
        if not np.all(np.isfinite(values)):
            raise DataError("data contains NaN or infinite entries")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric N x N matrix of nonnegative interpoint distances."""

    entries: np.ndarray
    metric: str = "euclidean"

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float, copy=True)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DataError(f"distance matrix must be square, got shape {entries.shape}")
        if not np.all(np.isfinite(entries)) or np.any(entries < 0):
            raise DataError("distances must be finite and nonnegative")
        if not np.array_equal(entries, entries.T):
            raise DataError("distance matrix is not symmetric")
        if np.any(np.diag(entries) != 0):
            raise DataError("distance matrix has a nonzero diagonal")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def _read_rows(path: Path, has_header: bool):
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    rows = []
    width = None
    with path.open(newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if has_header and lineno == 1:
                continue
            if not row or all(not cell.strip() for cell in row):
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise DataError(
                    f"{path}: row {lineno} has {len(row)} columns, expected {width}"
                )
            rows.append((lineno, row))
    if not rows:
        raise DataError(f"{path}: no data rows")
    return rows


def _parse_cell(path, lineno, col, cell) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise DataError(
            f"{path}: row {lineno}, column {col}: cannot parse {cell!r} as a number"
        ) from None
    if not np.isfinite(value):
        raise DataError(f"{path}: row {lineno}, column {col}: non-finite value {cell!r}")
    return value


def load_csv(path, has_header: bool = False) -> DataMatrix:
    """Read a comma-separated numeric table, one observation per row.

    Errors name the offending row and column (both 1-based, counting the
    header line when present).
    """
    path = Path(path)
    values = [
        [_parse_cell(path, lineno, col, cell) for col, cell in enumerate(row, start=1)]
        for lineno, row in _read_rows(path, has_header)
    ]
    return DataMatrix(np.array(values, dtype=float))


def load_labeled_csv(path, label_column: int, has_header: bool = False):
    """Like :func:`load_csv`, but split off one column of class labels.

    ``label_column`` is 0-based; negative values count from the end. Labels
    are returned as strings, verbatim.
    """
    path = Path(path)
    rows = _read_rows(path, has_header)
    width = len(rows[0][1])
    if not -width <= label_column < width:
        raise DataError(f"{path}: label column {label_column} out of range for {width} columns")
    label_column %= width
    if width < 2:
        raise DataError(f"{path}: need at least one feature column besides the labels")
    values, labels = [], []
    for lineno, row in rows:
        labels.append(row[label_column].strip())
        values.append([
            _parse_cell(path, lineno, col, cell)
            for col, cell in enumerate(row, start=1)
            if col - 1 != label_column
        ])
    return DataMatrix(np.array(values, dtype=float)), labels


def pairwise_distances(data: DataMatrix, metric: str = "euclidean") -> DistanceMatrix:
    if metric not in _SCIPY_METRIC:
        raise ValueError(f"unknown metric {metric!r}; choose from {METRICS}")
    condensed = pdist(data.values, metric=_SCIPY_METRIC[metric])
    return DistanceMatrix(squareform(condensed), metric)
