"""Loading and validation of the 64 x 9 human response-percentage table.

File format (UTF-8, comma-delimited, ``.`` decimals)::

    code,Aac,Eac,Iac,Oac,Aca,Eca,Ica,Oca,NVC[,p1,p2]
    AA1,90,0,5,0,1,0,1,0,3,Aab,Abc
    ...

Optional ``p1``/``p2`` columns (quantifier + subject + object, e.g. ``Eba``)
override the default figure convention for that row.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .syllogism import (
    RESPONSES,
    Premise,
    Syllogism,
    SyllogismError,
    canonical_codes,
    encode_all,
    parse_code,
)

ROW_SUM_MIN = 97.0
ROW_SUM_MAX = 103.0
HEADER = ("code",) + RESPONSES
PREMISE_COLUMNS = ("p1", "p2")


class DataError(ValueError):
    """Human data violates a value constraint (sums, signs, zero rows)."""


class SchemaError(DataError):
    """Missing/duplicate codes or columns."""


class ParseError(DataError):
    """A cell could not be parsed."""


@dataclass(frozen=True)
class HumanMatrix:
    codes: tuple[str, ...]
    percentages: np.ndarray
    syllogisms: tuple[Syllogism, ...]
    source: str = ""

    def __post_init__(self):
        self.percentages.setflags(write=False)

    @property
    def row_sums(self) -> np.ndarray:
        return self.percentages.sum(axis=1)

    @property
    def features(self) -> np.ndarray:
        return encode_all(list(self.syllogisms))

    def __eq__(self, other):
        if not isinstance(other, HumanMatrix):
            return NotImplemented
        return (
            self.codes == other.codes
            and self.syllogisms == other.syllogisms
            and np.array_equal(self.percentages, other.percentages)
        )


@dataclass
class ValidationSummary:
    n_rows: int
    row_sum_min: float
    row_sum_max: float
    zero_cells: int
    column_totals: dict[str, float]
    needs_renormalization: list[str] = field(default_factory=list)
    issues: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def lines(self) -> list[str]:
        out = []
        if self.ok:
            out.append(f"{self.n_rows} rows OK")
        else:
            out.append(f"{self.n_rows} rows, {len(self.issues)} problem(s)")
            out.extend(f"  error: {msg}" for msg in self.issues)
        out.append(f"row sums: min {self.row_sum_min:.4g}, max {self.row_sum_max:.4g}")
        out.append(f"zero cells: {self.zero_cells}")
        if self.needs_renormalization:
            out.append(f"rows renormalized (sum != 100): {len(self.needs_renormalization)}")
        out.append(
            "column totals: "
            + ", ".join(f"{k}={v:.4g}" for k, v in self.column_totals.items())
        )
        return out


def read_table(path) -> HumanMatrix:
    """Parse the file into canonical row order without value checks.

    Schema and parse problems raise here; value problems (signs, sums) are
    left for :func:`validate_report`.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        missing = [col for col in HEADER if col not in header]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
        has_premises = all(col in header for col in PREMISE_COLUMNS)
        idx = {col: header.index(col) for col in header}

        rows: dict[str, tuple[list[float], Syllogism]] = {}
        for lineno, raw in enumerate(reader, start=2):
            if not raw or all(not c.strip() for c in raw):
                continue
            if len(raw) < len(header):
                raise ParseError(f"{path}:{lineno}: expected {len(header)} cells, got {len(raw)}")
            code = raw[idx["code"]].strip()
            try:
                syl = parse_code(code)
            except SyllogismError as exc:
                raise SchemaError(f"{path}:{lineno}: {exc}") from None
            if code in rows:
                raise SchemaError(f"{path}:{lineno}: duplicate code {code}")
            values = []
            for col in RESPONSES:
                cell = raw[idx[col]].strip()
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ParseError(
                        f"{path}:{lineno}: row {code}, column {col}: non-numeric value {cell!r}"
                    ) from None
            if not all(np.isfinite(values)):
                raise ParseError(f"{path}:{lineno}: row {code}: non-finite value")
            if has_premises and raw[idx["p1"]].strip():
                try:
                    syl = syl.with_premises(
                        Premise.parse(raw[idx["p1"]]), Premise.parse(raw[idx["p2"]])
                    )
                except SyllogismError as exc:
                    raise SchemaError(f"{path}:{lineno}: {exc}") from None
            rows[code] = (values, syl)

    codes = canonical_codes()
    absent = [c for c in codes if c not in rows]
    if absent:
        raise SchemaError(f"{path}: missing row(s) {', '.join(absent)}")
    return HumanMatrix(
        codes=tuple(codes),
        percentages=np.array([rows[c][0] for c in codes], dtype=float),
        syllogisms=tuple(rows[c][1] for c in codes),
        source=str(path),
    )


def validate_report(m: HumanMatrix) -> ValidationSummary:
    pct = m.percentages
    sums = pct.sum(axis=1)
    issues = []
    for i, j in zip(*np.nonzero(pct < 0)):
        issues.append(f"row {m.codes[i]}, column {RESPONSES[j]}: negative value {pct[i, j]:g}")
    for i, s in enumerate(sums):
        if not ROW_SUM_MIN <= s <= ROW_SUM_MAX:
            issues.append(
                f"row {m.codes[i]}: sum {s:g} outside [{ROW_SUM_MIN:g}, {ROW_SUM_MAX:g}]"
            )
    return ValidationSummary(
        n_rows=len(m.codes),
        row_sum_min=float(sums.min()),
        row_sum_max=float(sums.max()),
        zero_cells=int((pct == 0).sum()),
        column_totals={r: float(t) for r, t in zip(RESPONSES, pct.sum(axis=0))},
        needs_renormalization=[c for c, s in zip(m.codes, sums) if s != 100.0],
        issues=issues,
    )


def load_table(path) -> HumanMatrix:
    m = read_table(path)
    summary = validate_report(m)
    if not summary.ok:
        raise DataError(f"{path}: " + "; ".join(summary.issues))
    return m


def write_table(m: HumanMatrix, path, premises: bool = False) -> None:
    header = list(HEADER) + (list(PREMISE_COLUMNS) if premises else [])
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for code, syl, row in zip(m.codes, m.syllogisms, m.percentages):
            cells = [code] + [repr(float(v)) for v in row]
            if premises:
                cells += [syl.premise1.format(), syl.premise2.format()]
            w.writerow(cells)


def normalize_rows(rows) -> np.ndarray:
    rows = np.asarray(rows, dtype=float)
    totals = rows.sum(axis=-1, keepdims=True)
    if np.any(totals <= 0):
        raise DataError("cannot normalize an all-zero row")
    return rows / totals


def to_targets(m: HumanMatrix) -> np.ndarray:
    """(64, 9) target distributions: percentages / 100, renormalized to sum 1."""
    return normalize_rows(m.percentages / 100.0)
