"""In-memory dataset representation and CSV ingestion.

The response is an ordinal variable with contiguous labels 1..k; covariates
are stored as a dense float matrix.  Ordinal and binary covariates are kept
as ordered numerics, so split enumeration treats every covariate the same
way (only the ordering of values matters).
"""

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import IngestError

VARIABLE_KINDS = ("metric", "ordinal", "binary")


@dataclass(frozen=True)
class VariableSpec:
    """Description of one covariate column.

    ``column_index`` is the position of the variable inside ``Dataset.x``.
    """

    name: str
    kind: str
    column_index: int

    def __post_init__(self):
        if self.kind not in VARIABLE_KINDS:
            raise ValueError(f"unknown variable kind {self.kind!r}")


@dataclass(frozen=True)
class Dataset:
    """Validated regression problem: ordinal response plus covariate matrix.

    Immutable after construction; the arrays are marked read-only so the
    instance can be shared freely across workers.
    """

    y: np.ndarray
    x: np.ndarray
    specs: tuple

    def __post_init__(self):
        y = np.ascontiguousarray(self.y, dtype=np.int64)
        x = np.ascontiguousarray(self.x, dtype=np.float64)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "specs", tuple(self.specs))
        self._validate()
        y.setflags(write=False)
        x.setflags(write=False)

    def _validate(self):
        y, x, specs = self.y, self.x, self.specs
        if x.ndim != 2 or y.ndim != 1:
            raise IngestError("x must be 2-d and y 1-d")
        if len(y) != x.shape[0]:
            raise IngestError("y and x have different numbers of rows")
        if x.shape[1] < 1:
            raise IngestError("at least one covariate is required")
        if len(specs) != x.shape[1]:
            raise IngestError("number of specs does not match covariate columns")
        names = [s.name for s in specs]
        if len(set(names)) != len(names):
            raise IngestError("variable names must be unique")
        for j, s in enumerate(specs):
            if s.column_index != j:
                raise IngestError(f"spec {s.name!r} has column_index {s.column_index}, expected {j}")
        if not np.all(np.isfinite(x)):
            raise IngestError("covariate matrix contains non-finite values")
        k = int(y.max(initial=0))
        if k < 2:
            raise IngestError("response needs at least 2 categories")
        observed = np.unique(y)
        for r in range(1, k + 1):
            if r not in observed:
                raise IngestError(f"category {r} unobserved")
        if observed[0] < 1:
            raise IngestError("response labels must be in 1..k")
        if len(y) < 2 * k:
            raise IngestError(f"need n >= 2k observations (n={len(y)}, k={k})")
        for s in specs:
            col = np.unique(x[:, s.column_index])
            if s.kind == "binary" and len(col) != 2:
                raise IngestError(
                    f"binary variable {s.name!r} has {len(col)} distinct values"
                )
    @property
    def n(self):
        return self.x.shape[0]

    @property
    def p(self):
        return self.x.shape[1]

    @property
    def k(self):
        return int(self.y.max())

    def variable_names(self):
        return [s.name for s in self.specs]


def ingest_csv(path, response, specs):
    """Read a CSV file into a validated :class:`Dataset`.

    Parameters
    ----------
    path : str or Path
        UTF-8 CSV with a header row, comma delimited.
    response : str
        Name of the response column; values must be integers forming a
        contiguous 1..k set.
    specs : sequence of VariableSpec
        Covariates to load, matched to header columns by name.  Their
        ``column_index`` fields define the layout of ``Dataset.x``.

    Raises
    ------
    IngestError
        On missing values, non-numeric cells, non-contiguous labels, or
        any schema violation.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError("empty file")
        rows = list(reader)

    col_of = {name: i for i, name in enumerate(header)}
    if response not in col_of:
        raise IngestError(f"response column {response!r} not in header")
    ordered = sorted(specs, key=lambda s: s.column_index)
    for s in ordered:
        if s.name not in col_of:
            raise IngestError(f"covariate column {s.name!r} not in header")

    n = len(rows)
    y = np.empty(n, dtype=np.int64)
    x = np.empty((n, len(ordered)), dtype=np.float64)
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise IngestError(f"row {i + 1} has {len(row)} fields, expected {len(header)}", row=i + 1)
        cell = row[col_of[response]].strip()
        if cell == "":
            raise IngestError(f"missing value at row {i + 1}, column {response!r}", row=i + 1, column=response)
        try:
            label = float(cell)
        except ValueError:
            raise IngestError(f"non-numeric response {cell!r} at row {i + 1}", row=i + 1, column=response)
        if label != int(label):
            raise IngestError(f"non-integer response {cell!r} at row {i + 1}", row=i + 1, column=response)
        y[i] = int(label)
        for j, s in enumerate(ordered):
            cell = row[col_of[s.name]].strip()
            if cell == "":
                raise IngestError(f"missing value at row {i + 1}, column {s.name!r}", row=i + 1, column=s.name)
            try:
                x[i, j] = float(cell)
            except ValueError:
                raise IngestError(
                    f"non-numeric covariate {cell!r} at row {i + 1}, column {s.name!r}",
                    row=i + 1,
                    column=s.name,
                )
    d = Dataset(y=y, x=x, specs=tuple(ordered))
    counts = np.bincount(d.y, minlength=d.k + 1)[1:]
    sparse = np.flatnonzero(counts < 5) + 1
    if len(sparse):
        warnings.warn(
            f"sparse response categories (fewer than 5 observations): {list(sparse)}",
            UserWarning,
            stacklevel=2,
        )
    return d


def candidate_thresholds(d, j, rows):
    """Admissible split thresholds of variable ``j`` over a row subset.

    Returns the sorted distinct values of ``x[rows, j]`` with the maximum
    removed, so both children ``{x <= c}`` and ``{x > c}`` are nonempty on
    ``rows``.  A constant column yields an empty list.
    """
    rows = np.asarray(rows)
    if rows.size == 0:
        raise ValueError("rows must be nonempty")
    values = np.unique(d.x[rows, j])
    return values[:-1]
