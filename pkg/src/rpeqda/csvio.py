"""CSV ingestion and export.

Grammar: UTF-8, comma-separated, optional single header line, label in one
designated column (first by default), all remaining columns decimal
floats, no quoting.  Lines starting with ``#`` are provenance comments and
are skipped on ingestion (exports use one to embed the tool version and
run configuration).  Blank or non-finite feature cells are rejected with
the offending line number; every data line must have the same number of
fields as the first.
"""

import csv
import math

import numpy as np

from .dataset import Dataset
from .errors import EmptyInput, InconsistentWidth, MissingValue, ParseError


def _data_lines(handle, has_header):
    header_pending = has_header
    for line_no, raw in enumerate(handle, start=1):
        if raw.startswith("#"):
            continue
        if raw.strip() == "":
            continue
        if header_pending:
            header_pending = False
            continue
        fields = next(csv.reader([raw]))
        yield line_no, fields


def ingest_csv(path, label_col: int = 0, has_header: bool = True) -> Dataset:
    """Parse a labeled CSV file into a Dataset.

    Line and column numbers in errors are 1-based physical positions
    (comments and the header count toward line numbers).
    """
    labels, rows = [], []
    width = None
    with open(path, encoding="utf-8", newline="") as handle:
        for line_no, fields in _data_lines(handle, has_header):
            if width is None:
                width = len(fields)
            elif len(fields) != width:
                raise InconsistentWidth(line_no)
            if label_col >= len(fields):
                raise ParseError(line_no, label_col + 1,
                                 f"line {line_no}: no label column {label_col + 1}")
            label = fields[label_col].strip()
            if label == "":
                raise MissingValue(line_no, label_col + 1,
                                   f"blank label at line {line_no}")
            labels.append(label)
            rows.append(_parse_floats(fields, line_no, skip_col=label_col))
    if not rows:
        raise EmptyInput(f"no data rows in {path}")
    return Dataset(np.asarray(rows, dtype=np.float64), tuple(labels))


def ingest_features_csv(path, has_header: bool = True) -> np.ndarray:
    """Parse an unlabeled CSV of pure feature rows into an (n, p) array."""
    rows = []
    width = None
    with open(path, encoding="utf-8", newline="") as handle:
        for line_no, fields in _data_lines(handle, has_header):
            if width is None:
                width = len(fields)
            elif len(fields) != width:
                raise InconsistentWidth(line_no)
            rows.append(_parse_floats(fields, line_no, skip_col=None))
    if not rows:
        raise EmptyInput(f"no data rows in {path}")
    return np.asarray(rows, dtype=np.float64)


def _parse_floats(fields, line_no, skip_col):
    values = []
    for col_no, cell in enumerate(fields, start=1):
        if skip_col is not None and col_no - 1 == skip_col:
            continue
        cell = cell.strip()
        if cell == "":
            raise MissingValue(line_no, col_no,
                               f"blank field at line {line_no}, column {col_no}")
        try:
            value = float(cell)
        except ValueError as exc:
            raise ParseError(line_no, col_no) from exc
        if not math.isfinite(value):
            raise MissingValue(line_no, col_no,
                               f"non-finite value at line {line_no}, column {col_no}")
        values.append(value)
    return values


def export_csv(dataset: Dataset, path, header: bool = True, meta: str = "") -> None:
    """Write a Dataset in the ingestion grammar (label first, 17
    significant digits so a round trip reproduces the floats exactly)."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        if meta:
            handle.write(f"# {meta}\n")
        if header:
            names = ",".join(f"f{j + 1}" for j in range(dataset.p))
            handle.write(f"label,{names}\n")
        for label, row in zip(dataset.labels, dataset.features):
            cells = ",".join(format(v, ".17g") for v in row)
            handle.write(f"{label},{cells}\n")
