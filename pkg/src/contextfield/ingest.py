"""Loading, validation, normalization and filtering of numeric tables."""

import csv
import io
import math
import re
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyDataset,
    MalformedClause,
    NonNumericCell,
    RaggedRow,
    UnknownAttribute,
)


@dataclass(frozen=True)
class Dataset:
    """A numeric table: n labelled rows by d named attributes, raw units."""

    attribute_names: list
    row_labels: list
    values: np.ndarray  # (n, d) float64

    def __post_init__(self):
        n, d = self.values.shape
        if n < 2 or d < 2:
            raise ValueError(f"dataset must be at least 2x2, got {n}x{d}")
        if len(self.attribute_names) != d or len(self.row_labels) != n:
            raise ValueError("label/name counts do not match value shape")
        if len(set(self.attribute_names)) != d:
            raise ValueError("attribute names must be unique")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("dataset values must be finite")

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def d(self):
        return self.values.shape[1]

    def column(self, name):
        return self.values[:, self.attribute_names.index(name)]


@dataclass(frozen=True)
class NormalizedDataset:
    """Per-attribute min-max normalization of a Dataset to [0, 1].

    ``mins`` and ``maxs`` keep the raw per-attribute ranges so raw values
    can be reconstructed.  Constant attributes map to 0.5 everywhere.
    """

    attribute_names: list
    row_labels: list
    values: np.ndarray
    mins: np.ndarray
    maxs: np.ndarray

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def d(self):
        return self.values.shape[1]

    def denormalize_column(self, k):
        lo, hi = self.mins[k], self.maxs[k]
        if hi == lo:
            return np.full(self.n, lo)
        return lo + self.values[:, k] * (hi - lo)


_COMPARATORS = {
    "<": np.less,
    ">": np.greater,
    "<=": np.less_equal,
    ">=": np.greater_equal,
}


@dataclass(frozen=True)
class RowPredicate:
    """Conjunction of (attribute, comparator, threshold) clauses in raw units."""

    clauses: tuple = field(default_factory=tuple)


def _parse_number(text):
    try:
        v = float(text)
    except ValueError:
        return None
    if not math.isfinite(v):
        return None
    return v


def load_csv(source, delimiter=",", label_column=None):
    """Parse delimited text into a Dataset.

    ``source`` may be a text stream, a byte stream, or a path.  The first
    row is the header.  At most one non-numeric column is allowed; it
    supplies the row labels (auto-detected unless ``label_column`` names
    it).  Duplicate labels get ``#2``, ``#3``, ... suffixes.
    """
    if isinstance(source, (str, bytes)) and "\n" not in str(source):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            return load_csv(fh, delimiter=delimiter, label_column=label_column)
    if isinstance(source, bytes):
        source = io.StringIO(source.decode("utf-8"))
    elif isinstance(source, str):
        source = io.StringIO(source)
    elif hasattr(source, "read") and isinstance(source.read(0), bytes):
        source = io.TextIOWrapper(source, encoding="utf-8")

    reader = csv.reader(source, delimiter=delimiter)
    rows = [row for row in reader if row]
    if not rows:
        raise EmptyDataset("input is empty")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if not body:
        raise EmptyDataset("input has a header but no data rows")

    ncol = len(header)
    for ridx, row in enumerate(body, start=1):
        if len(row) != ncol:
            raise RaggedRow(ridx, ncol, len(row))

    # Decide which column carries labels.
    if label_column is not None:
        if label_column not in header:
            raise UnknownAttribute(label_column, header)
        label_idx = header.index(label_column)
    else:
        # The label column is the single column with no numeric cells at
        # all; columns with a stray bad cell stay data columns so the
        # offending cell is reported precisely.
        label_idx = None
        for c in range(ncol):
            if all(_parse_number(row[c].strip()) is None for row in body):
                if label_idx is not None:
                    raise NonNumericCell(
                        1, header[c], "multiple non-numeric columns"
                    )
                label_idx = c

    attribute_names = [h for i, h in enumerate(header) if i != label_idx]
    if label_idx is not None:
        raw_labels = [row[label_idx].strip() for row in body]
    else:
        raw_labels = [f"row_{i}" for i in range(len(body))]

    # Deduplicate labels with suffixes.
    seen = {}
    labels = []
    for lab in raw_labels:
        if lab in seen:
            seen[lab] += 1
            labels.append(f"{lab}#{seen[lab]}")
        else:
            seen[lab] = 1
            labels.append(lab)

    values = np.empty((len(body), len(attribute_names)))
    for ridx, row in enumerate(body, start=1):
        cidx = 0
        for c in range(ncol):
            if c == label_idx:
                continue
            v = _parse_number(row[c].strip())
            if v is None:
                raise NonNumericCell(ridx, header[c], row[c].strip())
            values[ridx - 1, cidx] = v
            cidx += 1

    return Dataset(attribute_names, labels, values)


def normalize_minmax(ds):
    """Affine-map every attribute to [0, 1]; constant attributes go to 0.5."""
    mins = ds.values.min(axis=0)
    maxs = ds.values.max(axis=0)
    out = np.empty_like(ds.values)
    for k in range(ds.d):
        span = maxs[k] - mins[k]
        if span == 0.0:
            warnings.warn(
                f"attribute {ds.attribute_names[k]!r} is constant; "
                "normalizing to 0.5"
            )
            out[:, k] = 0.5
        else:
            out[:, k] = (ds.values[:, k] - mins[k]) / span
    return NormalizedDataset(
        list(ds.attribute_names), list(ds.row_labels), out, mins, maxs
    )


_CLAUSE_RE = re.compile(r"^\s*([^<>=\s]+)\s*(<=|>=|<|>)\s*(\S+)\s*$")


def parse_filter(expr, attribute_names=None):
    """Parse ``name op number`` clauses joined by commas into a RowPredicate.

    An empty expression yields the all-true predicate.  When
    ``attribute_names`` is given, unknown attributes are rejected.
    """
    expr = expr.strip()
    if not expr:
        return RowPredicate()
    clauses = []
    for part in expr.split(","):
        m = _CLAUSE_RE.match(part)
        if not m:
            raise MalformedClause(part.strip())
        name, op, num = m.group(1), m.group(2), m.group(3)
        threshold = _parse_number(num)
        if threshold is None:
            raise MalformedClause(part.strip())
        if attribute_names is not None and name not in attribute_names:
            raise UnknownAttribute(name, attribute_names)
        clauses.append((name, op, threshold))
    return RowPredicate(tuple(clauses))


def apply_filter(ds, predicate):
    """Boolean mask: True where a row satisfies every clause."""
    mask = np.ones(ds.n, dtype=bool)
    for name, op, threshold in predicate.clauses:
        if name not in ds.attribute_names:
            raise UnknownAttribute(name, ds.attribute_names)
        mask &= _COMPARATORS[op](ds.column(name), threshold)
    return mask
