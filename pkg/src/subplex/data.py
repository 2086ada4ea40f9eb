"""Attribution data model, tabular ingestion, and export of selections/aggregates.

Attribution values are kept exactly as parsed: no scaling, no absolute value,
no normalization. Any transformation is an explicit downstream operation.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import ParseError, RangeError, ValidationError

__all__ = [
    "AttributionMatrix",
    "GroupAggregate",
    "IngestConfig",
    "Selection",
    "export_group_aggregates",
    "export_selected_instances",
    "load_attributions",
    "load_attributions_json",
]


@dataclass(frozen=True)
class IngestConfig:
    """How to read a delimited attribution table.

    ``delimiter=None`` auto-detects comma vs. tab from the header line;
    anything more exotic must be configured explicitly.
    """

    id_column: str | None = None
    label_column: str | None = None
    delimiter: str | None = None


@dataclass(frozen=True)
class AttributionMatrix:
    """n x m table of per-instance, per-feature attribution weights.

    Immutable after construction; the value buffer is marked read-only so
    the matrix can be shared freely across threads and sessions.
    """

    instance_ids: tuple[str, ...]
    feature_names: tuple[str, ...]
    values: np.ndarray
    prior_labels: np.ndarray | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValidationError("values must be a 2-D matrix")
        n, m = values.shape
        if n < 1 or m < 1:
            raise ValidationError("attribution matrix needs at least one row and one column")
        if len(self.instance_ids) != n:
            raise ValidationError(f"{len(self.instance_ids)} ids for {n} rows")
        if len(self.feature_names) != m:
            raise ValidationError(f"{len(self.feature_names)} feature names for {m} columns")
        if len(set(self.instance_ids)) != n:
            raise ValidationError("instance ids must be unique")
        if len(set(self.feature_names)) != m:
            raise ValidationError("feature names must be unique")
        if not np.all(np.isfinite(values)):
            raise ValidationError("attribution values must be finite (no NaN/inf)")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        if self.prior_labels is not None:
            labels = np.asarray(self.prior_labels, dtype=np.int64)
            if labels.shape != (n,):
                raise ValidationError("prior_labels must have one entry per row")
            labels.flags.writeable = False
            object.__setattr__(self, "prior_labels", labels)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    def to_json_dict(self) -> dict:
        out = {
            "instance_ids": list(self.instance_ids),
            "feature_names": list(self.feature_names),
            "values": self.values.tolist(),
        }
        if self.prior_labels is not None:
            out["prior_labels"] = self.prior_labels.tolist()
        return out


@dataclass(frozen=True)
class Selection:
    """Strictly increasing row indices, the unit of highlighting everywhere."""

    indices: tuple[int, ...]

    @classmethod
    def from_iterable(cls, indices: Iterable[int], n: int) -> "Selection":
        """Normalize arbitrary index input: dedupe, sort, range-check against n rows."""
        seen = sorted(set(int(i) for i in indices))
        for i in seen:
            if i < 0 or i >= n:
                raise RangeError(f"selection index {i} outside [0, {n})")
        return cls(tuple(seen))

    @classmethod
    def everything(cls, n: int) -> "Selection":
        return cls(tuple(range(n)))

    def __len__(self) -> int:
        return len(self.indices)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.int64)


@dataclass(frozen=True)
class GroupAggregate:
    """Per-group instance count and mean attribution vector."""

    group_id: int
    size: int
    mean_attribution: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "group_id": int(self.group_id),
            "size": int(self.size),
            "mean_attribution": [float(v) for v in self.mean_attribution],
        }


def _detect_delimiter(header_line: str) -> str:
    if "\t" in header_line:
        return "\t"
    if "," in header_line:
        return ","
    if ";" in header_line or "|" in header_line:
        raise ParseError(
            "could not detect delimiter (expected comma or tab); configure one explicitly"
        )
    return ","  # single-column file: nothing to split


def _parse_cell(cell: str, row: int, column: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise ParseError(f"non-numeric value {cell!r} at data row {row}, column {column!r}") from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite value {cell!r} at data row {row}, column {column!r}")
    return value


def load_attributions(source: str | IO[str], config: IngestConfig | None = None) -> AttributionMatrix:
    """Parse a delimited attribution table (header row mandatory) into a matrix.

    ``source`` is either a text stream or the raw text itself. Row order is
    preserved. Without an id column, ids are "0", "1", ... in input order.
    """
    config = config or IngestConfig()
    stream = io.StringIO(source) if isinstance(source, str) else source
    first_line = stream.readline()
    if not first_line.strip():
        raise ParseError("empty input: a header row is mandatory")
    delimiter = config.delimiter or _detect_delimiter(first_line)
    header = next(csv.reader([first_line], delimiter=delimiter))
    header = [h.strip() for h in header]

    id_pos = None
    if config.id_column is not None:
        if config.id_column not in header:
            raise ValidationError(f"id column {config.id_column!r} not in header {header}")
        id_pos = header.index(config.id_column)
    label_pos = None
    if config.label_column is not None:
        if config.label_column not in header:
            raise ValidationError(f"label column {config.label_column!r} not in header {header}")
        label_pos = header.index(config.label_column)
        if label_pos == id_pos:
            raise ValidationError("id column and label column must differ")

    feature_pos = [i for i in range(len(header)) if i != id_pos and i != label_pos]
    feature_names = [header[i] for i in feature_pos]
    if not feature_names:
        raise ValidationError("no attribution columns left after id/label columns")

    ids: list[str] = []
    labels: list[int] = []
    rows: list[list[float]] = []
    reader = csv.reader(stream, delimiter=delimiter)
    for r, record in enumerate(reader):
        if not record or (len(record) == 1 and not record[0].strip()):
            continue  # trailing blank line
        if len(record) != len(header):
            raise ParseError(f"ragged row {r}: {len(record)} cells, header has {len(header)}")
        ids.append(record[id_pos].strip() if id_pos is not None else str(r))
        if label_pos is not None:
            cell = record[label_pos].strip()
            if not cell:
                raise ValidationError(f"empty prior-label cell at data row {r}; the column is all-or-nothing")
            try:
                labels.append(int(cell))
            except ValueError:
                raise ParseError(f"non-integer label {cell!r} at data row {r}") from None
        rows.append([_parse_cell(record[i], r, header[i]) for i in feature_pos])

    if not rows:
        raise ValidationError("no data rows")
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ValidationError(f"duplicate instance ids: {dupes[:5]}")

    return AttributionMatrix(
        instance_ids=tuple(ids),
        feature_names=tuple(feature_names),
        values=np.asarray(rows, dtype=np.float64),
        prior_labels=np.asarray(labels, dtype=np.int64) if labels else None,
    )


def load_attributions_json(payload: str | bytes | dict) -> AttributionMatrix:
    """Build a matrix from the JSON alternative:
    ``{"instance_ids": [...], "feature_names": [...], "values": [[...]]}``
    with an optional ``"prior_labels"`` list.
    """
    if not isinstance(payload, dict):
        try:
            payload = json.loads(payload)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from None
    for key in ("instance_ids", "feature_names", "values"):
        if key not in payload:
            raise ParseError(f"JSON payload missing key {key!r}")
    try:
        values = np.asarray(payload["values"], dtype=np.float64)
    except (TypeError, ValueError):
        raise ParseError("JSON 'values' is not a numeric matrix") from None
    labels = payload.get("prior_labels")
    return AttributionMatrix(
        instance_ids=tuple(str(i) for i in payload["instance_ids"]),
        feature_names=tuple(str(f) for f in payload["feature_names"]),
        values=values,
        prior_labels=np.asarray(labels, dtype=np.int64) if labels is not None else None,
    )


def export_selected_instances(
    matrix: AttributionMatrix, sel: Selection
) -> tuple[list[str], list[list]]:
    """Selected rows (id + all attribution values) in index order.

    Returns (header, rows); an empty selection gives the header alone.
    """
    header = ["id", *matrix.feature_names]
    rows: list[list] = []
    for i in sel.indices:
        if i >= matrix.n or i < 0:
            raise RangeError(f"selection index {i} outside [0, {matrix.n})")
        rows.append([matrix.instance_ids[i], *(float(v) for v in matrix.values[i])])
    return header, rows


def export_group_aggregates(matrix, partition, sel: Selection | None = None) -> list[GroupAggregate]:
    """One aggregate per partition group, intersected with ``sel`` (None = all rows).

    Empty intersections report size 0 and an all-zero mean by convention.
    """
    if partition.labels.shape[0] != matrix.n:
        raise ValidationError("partition does not cover this matrix")
    if sel is None:
        mask = np.ones(matrix.n, dtype=bool)
    else:
        mask = np.zeros(matrix.n, dtype=bool)
        idx = sel.as_array()
        if idx.size and (idx.min() < 0 or idx.max() >= matrix.n):
            raise RangeError("selection index outside matrix")
        mask[idx] = True

    aggregates = []
    for group in partition.groups:
        member_mask = (partition.labels == group.group_id) & mask
        size = int(member_mask.sum())
        if size == 0:
            mean = np.zeros(matrix.m)
        else:
            mean = matrix.values[member_mask].mean(axis=0)
        aggregates.append(GroupAggregate(group_id=group.group_id, size=size, mean_attribution=mean))
    return aggregates
