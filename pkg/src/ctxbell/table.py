"""EPRB data tables with measured cells and counterfactual gaps.

A table has one row per particle pair and one column per setting
(A, A', B, B').  Each cell is either a measured outcome (+1 / -1) or
unknown.  Internally the cells live in a read-only ``int8`` array where
0 marks an unknown cell, which keeps statistics over 10^6 runs cheap
while all reported frequencies stay exact ``Fraction`` objects.
"""
from __future__ import annotations

import csv
import enum
import io
import itertools
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Optional, Union

import numpy as np

__all__ = [
    "ValidationError",
    "Outcome",
    "Setting",
    "TableKind",
    "Run",
    "Table",
    "build_table",
    "completions_count",
    "iter_completions",
    "complete",
    "frequency",
    "unknown_fraction",
    "joint_frequency",
    "table_average",
    "table_correlation",
    "read_csv",
    "write_csv",
    "CSV_HEADER",
]

CSV_HEADER = ("run", "setting_left", "outcome_left", "setting_right", "outcome_right")


class ValidationError(ValueError):
    """Raised when input data violates a structural invariant."""


class Outcome(enum.IntEnum):
    PLUS = 1
    MINUS = -1

    @classmethod
    def parse(cls, value) -> "Outcome":
        if isinstance(value, str):
            s = value.strip()
            lookup = {"+": 1, "+1": 1, "1": 1, "-": -1, "-1": -1}
            if s not in lookup:
                raise ValidationError(f"unrecognised outcome {value!r}")
            return cls(lookup[s])
        try:
            return cls(int(value))
        except ValueError:
            raise ValidationError(f"outcome must be +1 or -1, got {value!r}") from None

    def __str__(self) -> str:
        return "+" if self is Outcome.PLUS else "-"


class Setting(enum.Enum):
    A = "A"
    A_PRIME = "A'"
    B = "B"
    B_PRIME = "B'"

    @property
    def side(self) -> str:
        return "left" if self in (Setting.A, Setting.A_PRIME) else "right"

    @property
    def index(self) -> int:
        return _SETTING_ORDER.index(self)

    @classmethod
    def parse(cls, value) -> "Setting":
        if isinstance(value, Setting):
            return value
        s = str(value).strip()
        key = s.upper().replace("_PRIME", "'").replace("PRIME", "'")
        for member in cls:
            if member.value == key:
                return member
        raise ValidationError(f"unknown setting {value!r}")

    def __str__(self) -> str:
        return self.value


_SETTING_ORDER = (Setting.A, Setting.A_PRIME, Setting.B, Setting.B_PRIME)
LEFT = (Setting.A, Setting.A_PRIME)
RIGHT = (Setting.B, Setting.B_PRIME)


class TableKind(enum.Enum):
    EXPERIMENTAL = "experimental"
    COMPLETE = "complete"


@dataclass(frozen=True)
class Run:
    """One row of a table; ``None`` marks an unknown cell."""

    index: int
    entries: tuple  # (A, A', B, B') as Optional[Outcome]

    def __getitem__(self, setting) -> Optional[Outcome]:
        return self.entries[Setting.parse(setting).index]

    @property
    def is_complete(self) -> bool:
        return all(e is not None for e in self.entries)


def _row_kind(cells: np.ndarray) -> TableKind:
    left_known = int(np.count_nonzero(cells[:2]))
    right_known = int(np.count_nonzero(cells[2:]))
    if left_known == 2 and right_known == 2:
        return TableKind.COMPLETE
    if left_known == 1 and right_known == 1:
        return TableKind.EXPERIMENTAL
    raise ValidationError(
        f"run needs exactly one known setting per side (or all four), "
        f"got {left_known} left and {right_known} right"
    )


class Table:
    """Immutable N x 4 table of outcomes.

    ``cells[nu, i]`` is +1, -1, or 0 (unknown) for run ``nu`` and setting
    ``Setting`` number ``i`` in the order A, A', B, B'.
    """

    __slots__ = ("_cells", "_kind")

    def __init__(self, cells, kind: Optional[TableKind] = None, *, validate: bool = True):
        arr = np.array(cells, dtype=np.int8, copy=True)
        if arr.ndim != 2 or arr.shape[1] != 4:
            raise ValidationError(f"cells must have shape (N, 4), got {arr.shape}")
        if arr.shape[0] == 0:
            raise ValidationError("a table needs at least one run")
        if validate:
            if not np.isin(arr, (-1, 0, 1)).all():
                raise ValidationError("cells must be +1, -1 or 0 (unknown)")
            inferred = self._infer_kind(arr)
            if kind is not None and kind is not inferred:
                raise ValidationError(f"rows describe a {inferred.value} table, not {kind.value}")
            kind = inferred
        elif kind is None:
            kind = self._infer_kind(arr)
        arr.flags.writeable = False
        self._cells = arr
        self._kind = kind

    @staticmethod
    def _infer_kind(arr: np.ndarray) -> TableKind:
        known = arr != 0
        left = known[:, :2].sum(axis=1)
        right = known[:, 2:].sum(axis=1)
        if ((left == 2) & (right == 2)).all():
            return TableKind.COMPLETE
        if ((left == 1) & (right == 1)).all():
            return TableKind.EXPERIMENTAL
        if ((left == 1) & (right == 1)).any() and ((left == 2) & (right == 2)).any():
            raise ValidationError("table mixes complete and experimental runs")
        bad = int(np.flatnonzero(~(((left == 1) & (right == 1)) | ((left == 2) & (right == 2))))[0])
        try:
            _row_kind(arr[bad])
        except ValidationError as exc:
            raise ValidationError(f"row {bad + 1}: {exc}") from None
        raise AssertionError("unreachable")  # pragma: no cover

    @classmethod
    def from_measurements(cls, left_setting, left_outcome, right_setting, right_outcome) -> "Table":
        """Build an experimental table from per-run measurement arrays.

        ``left_setting`` holds 0 for A and 1 for A'; ``right_setting`` holds
        0 for B and 1 for B'.  Outcomes are +1/-1.
        """
        ls = np.asarray(left_setting, dtype=np.intp)
        rs = np.asarray(right_setting, dtype=np.intp)
        lo = np.asarray(left_outcome, dtype=np.int8)
        ro = np.asarray(right_outcome, dtype=np.int8)
        n = ls.shape[0]
        if not (rs.shape[0] == lo.shape[0] == ro.shape[0] == n):
            raise ValidationError("measurement arrays differ in length")
        if not (np.isin(ls, (0, 1)).all() and np.isin(rs, (0, 1)).all()):
            raise ValidationError("setting indices must be 0 or 1")
        if not (np.isin(lo, (-1, 1)).all() and np.isin(ro, (-1, 1)).all()):
            raise ValidationError("outcomes must be +1 or -1")
        cells = np.zeros((n, 4), dtype=np.int8)
        rows = np.arange(n)
        cells[rows, ls] = lo
        cells[rows, 2 + rs] = ro
        return cls(cells, TableKind.EXPERIMENTAL, validate=False)

    @property
    def cells(self) -> np.ndarray:
        return self._cells

    @property
    def kind(self) -> TableKind:
        return self._kind

    @property
    def n_runs(self) -> int:
        return int(self._cells.shape[0])

    def __len__(self) -> int:
        return self.n_runs

    def __getitem__(self, index: int) -> Run:
        if not -self.n_runs <= index < self.n_runs:
            raise IndexError(f"run index {index} out of range for N={self.n_runs}")
        index %= self.n_runs
        row = self._cells[index]
        return Run(index, tuple(None if v == 0 else Outcome(int(v)) for v in row))

    @property
    def runs(self) -> Iterator[Run]:
        return (self[i] for i in range(self.n_runs))

    def column(self, setting) -> np.ndarray:
        return self._cells[:, Setting.parse(setting).index]

    def count(self, setting, outcome) -> int:
        return int(np.count_nonzero(self.column(setting) == int(Outcome.parse(outcome))))

    def unknown_count(self, setting) -> int:
        return int(np.count_nonzero(self.column(setting) == 0))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Table):
            return NotImplemented
        return self._kind is other._kind and np.array_equal(self._cells, other._cells)

    def __hash__(self) -> int:
        return hash((self._kind, self._cells.tobytes()))

    def __repr__(self) -> str:
        return f"Table(N={self.n_runs}, kind={self._kind.value})"

    def pretty(self) -> str:
        lines = ["run  A  A' B  B'"]
        for i, row in enumerate(self._cells, start=1):
            cells = " ".join({1: "+ ", -1: "- ", 0: "? "}[int(v)] for v in row)
            lines.append(f"{i:<4} {cells}")
        return "\n".join(lines)


RowSpec = Mapping[Union[str, Setting], Union[int, str, Outcome]]


def build_table(rows: Iterable[RowSpec]) -> Table:
    """Build a table from per-run ``{setting: outcome}`` mappings.

    Settings missing from a row become unknown cells.  The table kind is
    inferred: all rows naming all four settings give a complete table,
    all rows naming one setting per side give an experimental one.
    """
    rows = list(rows)
    if not rows:
        raise ValidationError("empty row list")
    cells = np.zeros((len(rows), 4), dtype=np.int8)
    for nu, row in enumerate(rows):
        for key, value in row.items():
            cells[nu, Setting.parse(key).index] = int(Outcome.parse(value))
        try:
            _row_kind(cells[nu])
        except ValidationError as exc:
            raise ValidationError(f"row {nu + 1}: {exc}") from None
    return Table(cells)


def completions_count(t: Table) -> int:
    return 2 ** int(np.count_nonzero(t.cells == 0))


def _unknown_cells(t: Table) -> list:
    rows, cols = np.nonzero(t.cells == 0)
    return [(int(r), _SETTING_ORDER[int(c)]) for r, c in zip(rows, cols)]


def complete(t: Table, assignment: Mapping) -> Table:
    """Fill every unknown cell of ``t`` from ``assignment``.

    ``assignment`` maps ``(run_index, setting)`` to an outcome and must
    cover exactly the unknown cells.
    """
    cells = t.cells.copy()
    seen = set()
    for (run, setting), value in assignment.items():
        setting = Setting.parse(setting)
        if not 0 <= run < t.n_runs:
            raise ValidationError(f"run index {run} out of range")
        if cells[run, setting.index] != 0 and (run, setting) not in seen:
            raise ValidationError(f"cell ({run}, {setting}) is already known")
        cells[run, setting.index] = int(Outcome.parse(value))
        seen.add((run, setting))
    missing = [cell for cell in _unknown_cells(t) if cell not in seen]
    if missing:
        raise ValidationError(f"assignment misses {len(missing)} unknown cell(s), e.g. {missing[0]}")
    return Table(cells, TableKind.COMPLETE)


def iter_completions(t: Table) -> Iterator[Table]:
    """Yield every completion of ``t`` (2 ** #unknown of them)."""
    gaps = _unknown_cells(t)
    for values in itertools.product((1, -1), repeat=len(gaps)):
        yield complete(t, dict(zip(gaps, values)))


def frequency(t: Table, c, j) -> Fraction:
    return Fraction(t.count(c, j), t.n_runs)


def unknown_fraction(t: Table, c) -> Fraction:
    return Fraction(t.unknown_count(c), t.n_runs)


def _opposite(c, c2) -> tuple:
    c, c2 = Setting.parse(c), Setting.parse(c2)
    if c.side == c2.side:
        raise ValidationError(f"{c} and {c2} are on the same side")
    return c, c2


def joint_count(t: Table, c, j, c2, k) -> int:
    c, c2 = _opposite(c, c2)
    hit = (t.column(c) == int(Outcome.parse(j))) & (t.column(c2) == int(Outcome.parse(k)))
    return int(np.count_nonzero(hit))


def joint_frequency(t: Table, c, j, c2, k) -> Fraction:
    return Fraction(joint_count(t, c, j, c2, k), t.n_runs)


def table_average(t: Table, c) -> Fraction:
    return frequency(t, c, 1) - frequency(t, c, -1)


def table_correlation(t: Table, c, c2) -> Fraction:
    # Standard normalisation: no extra 1/N prefactor, so a complete
    # all-equal table has correlation exactly 1.
    c, c2 = _opposite(c, c2)
    product = t.column(c).astype(np.int64) * t.column(c2).astype(np.int64)
    return Fraction(int(product.sum()), t.n_runs)


def read_csv(source) -> Table:
    """Read an experimental table from the runs CSV format.

    Lines starting with ``#`` are metadata and skipped.  Rows are placed
    in file order; the ``run`` column must be strictly increasing.
    """
    if isinstance(source, (str, Path)):
        with open(source, newline="") as fh:
            return read_csv(fh)
    lines = (line for line in source if line.strip() and not line.startswith("#"))
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise ValidationError("CSV has no header") from None
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise ValidationError(f"unexpected CSV header {header!r}; expected {','.join(CSV_HEADER)}")
    ls, lo, rs, ro = [], [], [], []
    last_run = None
    for lineno, rec in enumerate(reader, start=2):
        if len(rec) != 5:
            raise ValidationError(f"line {lineno}: expected 5 fields, got {len(rec)}")
        try:
            run = int(rec[0])
        except ValueError:
            raise ValidationError(f"line {lineno}: bad run index {rec[0]!r}") from None
        if last_run is not None and run <= last_run:
            raise ValidationError(f"line {lineno}: run indices must increase")
        last_run = run
        left, right = Setting.parse(rec[1]), Setting.parse(rec[3])
        if left.side != "left" or right.side != "right":
            raise ValidationError(f"line {lineno}: setting_left must be A/A', setting_right B/B'")
        ls.append(LEFT.index(left))
        rs.append(RIGHT.index(right))
        lo.append(int(Outcome.parse(rec[2])))
        ro.append(int(Outcome.parse(rec[4])))
    if not ls:
        raise ValidationError("CSV contains no runs")
    return Table.from_measurements(ls, lo, rs, ro)


def format_csv(t: Table, metadata: Optional[Mapping[str, object]] = None) -> str:
    if t.kind is not TableKind.EXPERIMENTAL:
        raise ValidationError("only experimental tables have a runs CSV form")
    cells = t.cells
    known = cells != 0
    li = np.where(known[:, 0], 0, 1)
    ri = np.where(known[:, 2], 2, 3)
    rows = np.arange(t.n_runs)
    lo = cells[rows, li]
    ro = cells[rows, ri]
    names = np.array([s.value for s in _SETTING_ORDER])
    signs = np.array(["-1", "", "+1"])
    buf = io.StringIO()
    for key, value in (metadata or {}).items():
        buf.write(f"# {key}={value}\n")
    buf.write(",".join(CSV_HEADER) + "\n")
    lnames, rnames = names[li].tolist(), names[ri].tolist()
    lout, rout = signs[lo + 1].tolist(), signs[ro + 1].tolist()
    body = [f"{i + 1},{lnames[i]},{lout[i]},{rnames[i]},{rout[i]}" for i in range(t.n_runs)]
    buf.write("\n".join(body))
    buf.write("\n")
    return buf.getvalue()


def write_csv(t: Table, dest, metadata: Optional[Mapping[str, object]] = None) -> None:
    text = format_csv(t, metadata)
    if isinstance(dest, (str, Path)):
        with open(dest, "w", newline="") as fh:
            fh.write(text)
    else:
        dest.write(text)
