"""Dataset representation: numeric matrix, explicit missingness mask, column roles.

Missing cells are tracked by a boolean mask instead of a sentinel value, so
the statistics never have to worry about NaN leaking into a sum.  The value
stored under a masked cell is an unspecified placeholder and is never read.
"""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataFormatError, DegenerateDataError

DEFAULT_NA_TOKENS = frozenset({"NA", "NaN", ""})


@dataclass(frozen=True)
class Dataset:
    """An n x d numeric matrix with an explicit observation mask.

    Attributes
    ----------
    values : (n, d) float array
        Cell values; entries where ``mask`` is False are placeholders.
    mask : (n, d) bool array
        True where the cell is observed.
    column_names : tuple of str
    """

    values: np.ndarray
    mask: np.ndarray
    column_names: tuple

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        mask = np.array(self.mask, dtype=bool)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError("values must be a non-empty 2-D matrix")
        if mask.shape != values.shape:
            raise ValueError("mask and values must have identical shape")
        names = tuple(str(c) for c in self.column_names)
        if len(names) != values.shape[1]:
            raise ValueError("column_names length must match column count")
        values.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "column_names", names)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def with_mask(self, mask: np.ndarray) -> "Dataset":
        """Copy of this dataset with a replacement mask."""
        return Dataset(self.values, mask, self.column_names)


@dataclass(frozen=True)
class ColumnRoles:
    """Partition of columns into fully observed and missingness-prone ones."""

    complete: tuple
    incomplete: tuple

    def __post_init__(self):
        object.__setattr__(self, "complete", tuple(int(i) for i in self.complete))
        object.__setattr__(self, "incomplete", tuple(int(i) for i in self.incomplete))

    @property
    def p(self) -> int:
        return len(self.complete)

    @property
    def q(self) -> int:
        return len(self.incomplete)

    def validate(self, ds: Dataset) -> None:
        """Check the roles against a dataset; raise if inconsistent."""
        seen = set(self.complete) | set(self.incomplete)
        if len(self.complete) + len(self.incomplete) != len(seen):
            raise ValueError("complete and incomplete column sets overlap")
        if seen != set(range(ds.d)):
            raise ValueError("roles must cover every column exactly once")
        if self.p < 1:
            raise DegenerateDataError(
                "the tests require at least one fully observed column"
            )
        for j in self.complete:
            if not ds.mask[:, j].all():
                raise ValueError(
                    f"column {ds.column_names[j]!r} is marked complete "
                    "but has missing cells"
                )


def infer_roles(ds: Dataset) -> ColumnRoles:
    """Complete columns are those with no missing cells; the rest are incomplete."""
    complete = [j for j in range(ds.d) if ds.mask[:, j].all()]
    incomplete = [j for j in range(ds.d) if j not in complete]
    return ColumnRoles(tuple(complete), tuple(incomplete))


def response_matrix(ds: Dataset, roles: ColumnRoles) -> np.ndarray:
    """0/1 indicator matrix for the incomplete columns, in roles order.

    Entry (i, v) is 1 iff row i of the v-th incomplete column is observed.
    """
    roles.validate(ds)
    if roles.q == 0:
        raise DegenerateDataError("no incomplete columns")
    return ds.mask[:, list(roles.incomplete)].astype(np.int8)


def _resolve_incomplete(names, incomplete) -> list:
    out = []
    for item in incomplete:
        if isinstance(item, (int, np.integer)):
            j = int(item)
            if not 0 <= j < len(names):
                raise ValueError(f"incomplete column index {j} out of range")
        else:
            try:
                j = names.index(item)
            except ValueError:
                raise ValueError(f"no column named {item!r}") from None
        out.append(j)
    return out


def load_csv(path, na_tokens=None, incomplete=None):
    """Read a rectangular CSV with a header row into a Dataset plus roles.

    Parameters
    ----------
    path : str or Path
    na_tokens : set of str, optional
        Cell strings treated as missing (exact, case-sensitive match).
        Defaults to {"NA", "NaN", ""}.
    incomplete : sequence of column names or indices, optional
        Explicit role override: these columns are treated as incomplete,
        all others as complete.  By default, columns containing at least
        one missing cell are incomplete.

    Returns
    -------
    (Dataset, ColumnRoles)

    Raises
    ------
    DataFormatError
        Ragged rows, a non-missing cell that does not parse as a finite
        number, or an entirely missing column.
    DegenerateDataError
        No complete columns remain.
    """
    tokens = DEFAULT_NA_TOKENS if na_tokens is None else frozenset(na_tokens)
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file, expected a header row") from None
        names = [h.strip() for h in header]
        d = len(names)
        values, mask = [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != d:
                raise DataFormatError(
                    f"{path}: line {lineno} has {len(row)} fields, expected {d}"
                )
            vrow = np.zeros(d)
            mrow = np.ones(d, dtype=bool)
            for j, cell in enumerate(row):
                if cell in tokens:
                    mrow[j] = False
                    continue
                try:
                    x = float(cell)
                except ValueError:
                    raise DataFormatError(
                        f"{path}: line {lineno}, column {names[j]!r}: "
                        f"cannot parse {cell!r} as a number"
                    ) from None
                if not np.isfinite(x):
                    raise DataFormatError(
                        f"{path}: line {lineno}, column {names[j]!r}: "
                        f"non-finite value {cell!r}"
                    )
                vrow[j] = x
            values.append(vrow)
            mask.append(mrow)
    if not values:
        raise DataFormatError(f"{path}: no data rows")
    ds = Dataset(np.asarray(values), np.asarray(mask), tuple(names))

    for j in range(ds.d):
        if not ds.mask[:, j].any():
            raise DataFormatError(
                f"{path}: column {names[j]!r} is entirely missing"
            )

    if incomplete is None:
        roles = infer_roles(ds)
    else:
        inc = sorted(set(_resolve_incomplete(names, incomplete)))
        comp = [j for j in range(ds.d) if j not in inc]
        roles = ColumnRoles(tuple(comp), tuple(inc))
    if roles.p < 1:
        raise DegenerateDataError(
            f"{path}: every column has missing values; "
            "the tests require at least one complete column"
        )
    roles.validate(ds)
    return ds, roles


def write_csv(ds: Dataset, path, na_token: str = "NA") -> None:
    """Write a dataset; masked cells become ``na_token``.

    Uses repr formatting so a load_csv round trip reproduces the observed
    values and the mask exactly.
    """
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(ds.column_names)
        for i in range(ds.n):
            writer.writerow(
                [
                    repr(float(ds.values[i, j])) if ds.mask[i, j] else na_token
                    for j in range(ds.d)
                ]
            )
