"""Probe-station and qubit CSV ingestion, export and outlier rejection."""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass, fields, replace

import numpy as np

from ..errors import ParseError

MEASUREMENT_COLUMNS = (
    "chip_id", "die_row", "die_col", "x_mm", "y_mm",
    "design_width_nm", "design_length_nm", "resistance_ohm", "status",
)
QUBIT_COLUMNS = ("chip_id", "qubit_id", "f01_ghz", "t1_us", "t2star_us")
STATUSES = ("ok", "open", "short", "rejected")


@dataclass(frozen=True)
class MeasurementRecord:
    chip_id: str
    die_row: int
    die_col: int
    x_mm: float
    y_mm: float
    design_width_nm: float
    design_length_nm: float
    resistance_ohm: float
    status: str = "ok"

    @property
    def design(self):
        return f"{self.design_width_nm:g}x{self.design_length_nm:g}"

    @property
    def area_um2(self):
        return self.design_width_nm * self.design_length_nm * 1e-6


@dataclass(frozen=True)
class QubitRecord:
    chip_id: str
    qubit_id: str
    f01_ghz: float
    t1_us: float
    t2star_us: float


@dataclass(frozen=True)
class OutlierPolicy:
    short_threshold_ohm: float = 100.0
    open_threshold_ohm: float = 1e6
    mad_k: float = 5.0

    def __post_init__(self):
        if min(self.short_threshold_ohm, self.open_threshold_ohm, self.mad_k) <= 0:
            raise ValueError("outlier policy thresholds must be positive")

    def describe(self):
        return (f"short if R < {self.short_threshold_ohm:g} ohm; open if R > {self.open_threshold_ohm:g} ohm; "
                f"then reject |R - median| > {self.mad_k:g} * MAD per design group "
                "(MAD filter skipped when MAD = 0)")


def _text(source):
    if hasattr(source, "read"):
        return source.read()
    return source


def _rows(text, columns):
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("missing header row", line=1) from None
    header = [h.strip() for h in header]
    if tuple(header) != columns:
        missing = [c for c in columns if c not in header]
        extra = [c for c in header if c not in columns]
        detail = []
        if missing:
            detail.append(f"missing column(s) {', '.join(missing)}")
        if extra:
            detail.append(f"unexpected column(s) {', '.join(extra)}")
        if not detail:
            detail.append("columns out of order")
        raise ParseError(f"header must be {','.join(columns)}: {'; '.join(detail)}", line=1)
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(columns):
            raise ParseError(f"expected {len(columns)} fields, got {len(row)}", line=lineno)
        yield lineno, dict(zip(columns, (c.strip() for c in row)))


def _num(row, col, lineno, kind=float):
    try:
        v = kind(row[col])
    except ValueError:
        raise ParseError(f"non-numeric value {row[col]!r}", line=lineno, column=col) from None
    if kind is float and not math.isfinite(v):
        raise ParseError(f"non-finite value {row[col]!r}", line=lineno, column=col)
    return v


def ingest_measurements(source):
    """Parse a measurements CSV (text or file object) into records."""
    out, seen = [], {}
    for lineno, row in _rows(_text(source), MEASUREMENT_COLUMNS):
        status = row["status"]
        if status not in STATUSES:
            raise ParseError(f"unknown status {status!r}", line=lineno, column="status")
        rec = MeasurementRecord(
            chip_id=row["chip_id"],
            die_row=_num(row, "die_row", lineno, int),
            die_col=_num(row, "die_col", lineno, int),
            x_mm=_num(row, "x_mm", lineno),
            y_mm=_num(row, "y_mm", lineno),
            design_width_nm=_num(row, "design_width_nm", lineno),
            design_length_nm=_num(row, "design_length_nm", lineno),
            resistance_ohm=_num(row, "resistance_ohm", lineno),
            status=status,
        )
        if status == "ok" and not rec.resistance_ohm > 0:
            raise ParseError("resistance must be > 0 for status ok", line=lineno, column="resistance_ohm")
        key = (rec.chip_id, rec.die_row, rec.die_col, rec.design_width_nm, rec.design_length_nm)
        if key in seen:
            raise ParseError(f"duplicate (chip, die, design) key, first seen on line {seen[key]}", line=lineno)
        seen[key] = lineno
        out.append(rec)
    return out


def ingest_qubits(source):
    out = []
    for lineno, row in _rows(_text(source), QUBIT_COLUMNS):
        rec = QubitRecord(
            chip_id=row["chip_id"],
            qubit_id=row["qubit_id"],
            f01_ghz=_num(row, "f01_ghz", lineno),
            t1_us=_num(row, "t1_us", lineno),
            t2star_us=_num(row, "t2star_us", lineno),
        )
        for col in ("f01_ghz", "t1_us", "t2star_us"):
            if not getattr(rec, col) > 0:
                raise ParseError("value must be > 0", line=lineno, column=col)
        out.append(rec)
    return out


def _fmt(v):
    if isinstance(v, float):
        return str(int(v)) if v.is_integer() and abs(v) < 1e15 else repr(v)
    return str(v)


def _export(records, columns):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in records:
        w.writerow([_fmt(getattr(r, c)) for c in columns])
    return buf.getvalue()


def export_measurements(records):
    return _export(records, MEASUREMENT_COLUMNS)


def export_qubits(records):
    return _export(records, QUBIT_COLUMNS)


@dataclass
class OutlierReport:
    policy: str
    input_count: int
    kept_count: int
    short_count: int
    open_count: int
    mad_rejected_count: int
    preflagged_count: int

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def reject_outliers(records, policy: OutlierPolicy | None = None):
    """Split records into (kept, rejected, report).

    Records already flagged in the file stay rejected. Remaining ones are
    classified short/open by threshold, then filtered per design
    group by the median/MAD rule.
    """
    policy = policy or OutlierPolicy()
    rejected, candidates = [], []
    n_short = n_open = n_pre = 0
    for r in records:
        if r.status != "ok":
            rejected.append(r)
            n_pre += 1
        elif r.resistance_ohm < policy.short_threshold_ohm:
            rejected.append(replace(r, status="short"))
            n_short += 1
        elif r.resistance_ohm > policy.open_threshold_ohm:
            rejected.append(replace(r, status="open"))
            n_open += 1
        else:
            candidates.append(r)

    groups = defaultdict(list)
    for r in candidates:
        groups[r.design].append(r)
    kept, n_mad = [], 0
    for members in groups.values():
        res = np.array([m.resistance_ohm for m in members])
        med = np.median(res)
        mad = np.median(np.abs(res - med))
        for m, val in zip(members, res):
            if mad > 0 and abs(val - med) > policy.mad_k * mad:
                rejected.append(replace(m, status="rejected"))
                n_mad += 1
            else:
                kept.append(m)
    report = OutlierReport(policy.describe(), len(records), len(kept), n_short, n_open, n_mad, n_pre)
    return kept, rejected, report
