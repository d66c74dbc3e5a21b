"""Dataset container, Euclidean neighbor search and CSV / id-file I/O."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from .exceptions import DataError

ID_COLUMN = "id"


@dataclass(frozen=True)
class Dataset:
    """An immutable N x M numeric table with attribute names and instance ids.

    Ids default to the 0-based row indices. When a file carries an ``id``
    column the ids are kept as strings.
    """

    values: np.ndarray
    attribute_names: tuple[str, ...]
    instance_ids: tuple[Hashable, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2:
            raise DataError(f"values must be 2-D, got shape {values.shape}")
        n, m = values.shape
        if n < 1 or m < 1:
            raise DataError(f"dataset needs at least one row and one column, got {values.shape}")
        if not np.all(np.isfinite(values)):
            row, col = np.argwhere(~np.isfinite(values))[0]
            raise DataError(f"non-finite value at row {row}, column {col}")
        names = tuple(str(a) for a in self.attribute_names)
        if len(names) != m:
            raise DataError(f"{len(names)} attribute names for {m} columns")
        ids = tuple(self.instance_ids)
        if len(ids) != n:
            raise DataError(f"{len(ids)} instance ids for {n} rows")
        index = {i: row for row, i in enumerate(ids)}
        if len(index) != n:
            raise DataError("instance ids are not unique")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "attribute_names", names)
        object.__setattr__(self, "instance_ids", ids)
        object.__setattr__(self, "_index", index)

    @classmethod
    def from_array(cls, values, attribute_names=None, instance_ids=None) -> "Dataset":
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if attribute_names is None:
            attribute_names = [f"a{m}" for m in range(values.shape[1])]
        if instance_ids is None:
            instance_ids = range(values.shape[0])
        return cls(values, tuple(attribute_names), tuple(instance_ids))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    def row(self, instance_id) -> int:
        try:
            return self._index[instance_id]
        except KeyError:
            raise DataError(f"unknown instance id {instance_id!r}") from None

    def rows(self, ids: Iterable) -> np.ndarray:
        return np.array([self.row(i) for i in ids], dtype=np.intp)

    def point(self, instance_id) -> np.ndarray:
        return self.values[self.row(instance_id)]

    def resolve_id(self, token: str):
        """Map a textual id (as read from a file) onto an instance id."""
        if token in self._index:
            return token
        try:
            as_int = int(token)
        except ValueError:
            raise DataError(f"unknown instance id {token!r}") from None
        if as_int in self._index:
            return as_int
        raise DataError(f"unknown instance id {token!r}")

    def with_columns(self, extra: np.ndarray, names: Sequence[str]) -> "Dataset":
        extra = np.asarray(extra, dtype=float).reshape(self.n, -1)
        return Dataset(
            np.hstack([self.values, extra]),
            self.attribute_names + tuple(names),
            self.instance_ids,
        )


@dataclass(frozen=True)
class NeighborList:
    query_id: Hashable
    entries: tuple[tuple[Hashable, float], ...]

    @property
    def ids(self) -> list:
        return [i for i, _ in self.entries]

    @property
    def distances(self) -> np.ndarray:
        return np.array([d for _, d in self.entries])


def distance(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.sum((a - b) ** 2)))


def distances_to(points: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Euclidean distance from every row of ``points`` to ``query``."""
    diff = points - query
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def nearest_rows(points: np.ndarray, rows: np.ndarray, query: np.ndarray, k: int):
    """Return (rows, distances) of the k nearest, ties broken by ascending row."""
    d = distances_to(points[rows], query)
    order = np.lexsort((rows, d))[:k]
    return rows[order], d[order]


def knn(dataset: Dataset, query, k: int, candidate_ids=None, query_id=None) -> NeighborList:
    """Exact k-nearest-neighbor scan over ``candidate_ids`` (all rows by default).

    The query itself is excluded when ``query_id`` names a candidate.
    """
    query = np.asarray(query, dtype=float)
    if query.shape != (dataset.m,):
        raise ValueError(f"query has shape {query.shape}, expected ({dataset.m},)")
    if candidate_ids is None:
        rows = np.arange(dataset.n)
    else:
        rows = np.unique(dataset.rows(candidate_ids))
    if query_id is not None:
        rows = rows[rows != dataset.row(query_id)]
    if k < 1:
        raise ValueError("k must be positive")
    if k > rows.size:
        raise ValueError(f"k={k} exceeds the {rows.size} available candidates")
    near, dist = nearest_rows(dataset.values, rows, query, k)
    ids = dataset.instance_ids
    return NeighborList(query_id, tuple((ids[r], float(d)) for r, d in zip(near, dist)))


def _parse_float(cell: str, line: int, column: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise DataError(f"cannot parse {cell!r} as a number at line {line}, column {column!r}") from None
    if not np.isfinite(value):
        raise DataError(f"non-finite value {cell!r} at line {line}, column {column!r}")
    return value


def load_dataset(path) -> Dataset:
    """Read a CSV with a header row. An ``id`` column, if present, supplies instance ids.

    Error messages give the 1-based file line (the header is line 1) and the
    column name.
    """
    if not os.path.exists(path):
        raise DataError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        id_col = header.index(ID_COLUMN) if ID_COLUMN in header else None
        names = [h for j, h in enumerate(header) if j != id_col]
        rows, ids = [], []
        for record in reader:
            line = reader.line_num
            if not record or all(not c.strip() for c in record):
                continue
            if len(record) != len(header):
                raise DataError(f"line {line} has {len(record)} cells, header has {len(header)}")
            values = []
            for j, cell in enumerate(record):
                if j == id_col:
                    ids.append(cell.strip())
                else:
                    values.append(_parse_float(cell.strip(), line, header[j]))
            rows.append(values)
    if not rows:
        raise DataError(f"{path} has no data rows")
    values = np.array(rows, dtype=float)
    return Dataset.from_array(values, names, ids if id_col is not None else None)


def save_dataset(dataset: Dataset, path, write_ids: bool = False) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        header = list(dataset.attribute_names)
        if write_ids:
            header = [ID_COLUMN] + header
        writer.writerow(header)
        for i, row in zip(dataset.instance_ids, dataset.values):
            cells = [repr(float(v)) for v in row]
            writer.writerow([i] + cells if write_ids else cells)


def read_id_file(path, dataset: Dataset) -> list:
    """One instance id per line; blank lines and ``#`` comments are skipped."""
    if not os.path.exists(path):
        raise DataError(f"no such file: {path}")
    ids = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            token = line.split("#", 1)[0].strip()
            if token:
                ids.append(dataset.resolve_id(token))
    return ids


def write_id_file(ids: Iterable, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i in ids:
            fh.write(f"{i}\n")
