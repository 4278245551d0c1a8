"""Loading, validation, normalization and splitting of datasets with missing cells.

Missing cells are represented as NaN inside a read-only float64 matrix. Every
object must keep at least one observed dimension; loaders and the MAR injector
enforce that invariant.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

MISSING = float("nan")


class DatasetError(ValueError):
    """Raised for malformed input files or invariant-violating tables."""


class DegenerateDataError(ValueError):
    """Raised when a dataset is too small or too uniform to cluster."""


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MissingDataset:
    """An N x d table of real values where NaN marks a missing cell.

    Object ids are the row positions 0..N-1. ``truth_labels`` is optional and
    never takes part in clustering; it only feeds evaluation.
    """

    cells: np.ndarray
    truth_labels: Optional[tuple] = None

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=np.float64)
        if cells.ndim != 2:
            raise DatasetError("cells must be a 2-D table")
        n, d = cells.shape
        if n < 1 or d < 1:
            raise DatasetError("empty dataset")
        if np.isinf(cells).any():
            raise DatasetError("observed values must be finite")
        fully_missing = np.isnan(cells).all(axis=1)
        if fully_missing.any():
            raise DatasetError(
                f"object {int(np.argmax(fully_missing))} has no observed dimension"
            )
        if self.truth_labels is not None and len(self.truth_labels) != n:
            raise DatasetError("truth_labels length must match object count")
        object.__setattr__(self, "cells", _freeze(cells.copy()))

    @property
    def object_count(self) -> int:
        return self.cells.shape[0]

    @property
    def dim_count(self) -> int:
        return self.cells.shape[1]

    @property
    def object_ids(self) -> range:
        return range(self.object_count)

    def missing_mask(self) -> np.ndarray:
        return np.isnan(self.cells)


@dataclass(frozen=True)
class DimensionView:
    """The single-dimensional dataset for one column: objects observed there.

    ``dim_index`` is 1-based. Entries are sorted ascending by value, ties by
    object id.
    """

    dim_index: int
    object_ids: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        ids = np.asarray(self.object_ids, dtype=np.int64)
        vals = np.asarray(self.values, dtype=np.float64)
        if ids.shape != vals.shape or ids.ndim != 1:
            raise DatasetError("object_ids and values must be parallel 1-D arrays")
        if len(np.unique(ids)) != len(ids):
            raise DatasetError("duplicate object id in dimension view")
        object.__setattr__(self, "object_ids", _freeze(ids.copy()))
        object.__setattr__(self, "values", _freeze(vals.copy()))

    def __len__(self) -> int:
        return len(self.object_ids)

    @property
    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.object_ids.tolist(), self.values.tolist()))


@dataclass(frozen=True)
class FullyObservedSet:
    """Objects with zero missing cells, with their (possibly moved) coordinates."""

    object_ids: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        ids = np.asarray(self.object_ids, dtype=np.int64)
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or len(ids) != len(pts):
            raise DatasetError("points must be M x d with one row per object id")
        if np.isnan(pts).any():
            raise DatasetError("fully observed points cannot contain missing cells")
        object.__setattr__(self, "object_ids", _freeze(ids.copy()))
        object.__setattr__(self, "points", _freeze(pts.copy()))

    def __len__(self) -> int:
        return len(self.object_ids)


def load_csv(
    path,
    missing_marker: str = "",
    label_column: Union[str, int, None] = None,
    has_header: bool = False,
) -> MissingDataset:
    """Parse an RFC-4180-style CSV into a MissingDataset.

    Cells equal to ``missing_marker`` (after trimming) become missing. A label
    column, named (requires a header) or 0-based positional, is diverted to
    ``truth_labels`` and excluded from the feature count.
    """
    with open(path, "r", newline="", encoding="utf-8-sig") as fh:
        rows = [row for row in csv.reader(fh)]
    # drop genuinely blank lines; a multi-field row of empty cells is data
    rows = [row for row in rows
            if row and not (len(row) == 1 and not row[0].strip())]
    if not rows:
        raise DatasetError("empty dataset")

    header = None
    if has_header:
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
        if not rows:
            raise DatasetError("empty dataset")

    label_idx: Optional[int] = None
    if label_column is not None:
        if isinstance(label_column, int):
            label_idx = label_column
        else:
            if header is None:
                raise DatasetError("label column given by name requires a header row")
            try:
                label_idx = header.index(label_column)
            except ValueError:
                raise DatasetError(f"label column {label_column!r} not in header") from None

    width = len(rows[0])
    if label_idx is not None and not (0 <= label_idx < width):
        raise DatasetError(f"label column index {label_idx} out of range")

    data: list[list[float]] = []
    labels: list[str] = []
    for rno, row in enumerate(rows, start=1):
        if len(row) != width:
            raise DatasetError(f"row {rno}: expected {width} columns, got {len(row)}")
        vec = []
        for cno, cell in enumerate(row):
            text = cell.strip()
            if cno == label_idx:
                labels.append(text)
                continue
            if text == missing_marker:
                vec.append(MISSING)
                continue
            try:
                vec.append(float(text))
            except ValueError:
                raise DatasetError(f"row {rno}, column {cno + 1}: cannot parse {cell!r}") from None
        data.append(vec)

    if not data or not data[0]:
        raise DatasetError("empty dataset")
    return MissingDataset(np.array(data, dtype=np.float64),
                          tuple(labels) if labels else None)


def normalize_min_max(ds: MissingDataset) -> MissingDataset:
    """Map each dimension's observed values onto [0, 1]; constant dims go to 0.

    Missing cells stay missing. Idempotent.
    """
    cells = np.array(ds.cells, dtype=np.float64)
    for j in range(ds.dim_count):
        col = cells[:, j]
        obs = ~np.isnan(col)
        if not obs.any():
            raise DatasetError(f"dimension {j + 1} has no observed value")
        lo, hi = col[obs].min(), col[obs].max()
        cells[obs, j] = 0.0 if hi == lo else (col[obs] - lo) / (hi - lo)
    return MissingDataset(cells, ds.truth_labels)


def fully_observed(ds: MissingDataset) -> FullyObservedSet:
    """The subset of objects with zero missing cells, original ids preserved."""
    mask = ~np.isnan(ds.cells).any(axis=1)
    ids = np.where(mask)[0]
    return FullyObservedSet(ids, ds.cells[mask])


def split_dimension(
    ds: MissingDataset,
    enhanced: Optional[FullyObservedSet],
    dim_index: int,
) -> DimensionView:
    """Build the single-dimensional view for 1-based ``dim_index``.

    Objects present in ``enhanced`` contribute their moved coordinate; the
    remaining observed objects keep the dataset value. Sorted by value, ties
    by object id.
    """
    if not 1 <= dim_index <= ds.dim_count:
        raise DatasetError(f"dim_index {dim_index} out of range 1..{ds.dim_count}")
    col = ds.cells[:, dim_index - 1]
    obs = ~np.isnan(col)
    ids = np.where(obs)[0]
    vals = col[obs].copy()
    if enhanced is not None and len(enhanced):
        pos = {int(o): k for k, o in enumerate(enhanced.object_ids)}
        for k, o in enumerate(ids):
            p = pos.get(int(o))
            if p is not None:
                vals[k] = enhanced.points[p, dim_index - 1]
    order = np.lexsort((ids, vals))
    return DimensionView(dim_index, ids[order], vals[order])


def inject_mar(ds: MissingDataset, rate: float, seed: int) -> MissingDataset:
    """Remove cells independently with probability ``rate``, keeping >= 1 per object.

    Requires a fully observed input. Objects that lose every cell get one
    uniformly chosen cell re-observed. Deterministic for a given seed.
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"rate must be in [0, 1), got {rate}")
    if np.isnan(ds.cells).any():
        raise ValueError("inject_mar requires a dataset with no missing cells")
    rng = np.random.default_rng(seed)
    mask = rng.random(ds.cells.shape) < rate
    for i in range(ds.object_count):
        if mask[i].all():
            mask[i, int(rng.integers(ds.dim_count))] = False
    cells = np.array(ds.cells)
    cells[mask] = MISSING
    return MissingDataset(cells, ds.truth_labels)


def write_labels_csv(path, assignments: dict[int, int]) -> None:
    """Write the `object_id,cluster_id` labels file."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["object_id", "cluster_id"])
        for oid in sorted(assignments):
            w.writerow([oid, assignments[oid]])


def read_labels_csv(path) -> dict[int, str]:
    """Read an `object_id,label` file; the header row is optional."""
    out: dict[int, str] = {}
    with open(path, "r", newline="", encoding="utf-8-sig") as fh:
        for rno, row in enumerate(csv.reader(fh), start=1):
            if not row or not any(c.strip() for c in row):
                continue
            if len(row) < 2:
                raise DatasetError(f"row {rno}: expected object_id,label")
            key = row[0].strip()
            if rno == 1 and not key.lstrip("-").isdigit():
                continue  # header row
            try:
                oid = int(key)
            except ValueError:
                raise DatasetError(f"row {rno}: bad object id {row[0]!r}") from None
            out[oid] = row[1].strip()
    if not out:
        raise DatasetError("empty labels file")
    return out
