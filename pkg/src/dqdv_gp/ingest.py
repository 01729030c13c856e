"""Charging-log ingestion: CSV parsing, CC-segment extraction, coulomb
counting, and Q(V) cleaning.

Column contract: named columns ``time_s, current_a, voltage_v`` with an
optional ``cycle`` column.  Gzip-compressed files are accepted by
extension.
"""

from __future__ import annotations

import csv
import gzip
import io
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import isotonic_regression

from .errors import (
    EmptyLog,
    MalformedHeader,
    NoChargeSegments,
    NonMonotonicTime,
    TooFewPoints,
)

__all__ = [
    "CsvSpec",
    "ChargeLog",
    "CCSegment",
    "QVCurve",
    "parse_log",
    "write_log",
    "extract_cc_charge",
    "coulomb_count",
    "clean_qv",
    "write_qv_csv",
]

V_MIN_DEFAULT = 2.75
V_MAX_DEFAULT = 4.2
SECONDS_PER_HOUR = 3600.0


@dataclass(frozen=True)
class CsvSpec:
    time_col: str = "time_s"
    current_col: str = "current_a"
    voltage_col: str = "voltage_v"
    cycle_col: str = "cycle"
    delimiter: str = ","


@dataclass(frozen=True)
class ChargeLog:
    """Time-stamped current/voltage samples, optionally tagged with a cycle
    index; metadata carries free-form condition labels."""

    t: np.ndarray
    i: np.ndarray
    v: np.ndarray
    cycle: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)
    rejected_rows: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "t", np.asarray(self.t, dtype=float))
        object.__setattr__(self, "i", np.asarray(self.i, dtype=float))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))
        if self.cycle is not None:
            object.__setattr__(self, "cycle", np.asarray(self.cycle, dtype=int))

    def __len__(self):
        return len(self.t)


@dataclass(frozen=True)
class CCSegment:
    """One constant-current charge run (indices into the source log)."""

    t: np.ndarray
    i: np.ndarray
    v: np.ndarray
    cycle: int
    start: int
    end: int  # exclusive


@dataclass(frozen=True)
class QVCurve:
    """Monotone (voltage, cumulative charge) pairs for one CC charge."""

    v: np.ndarray
    q: np.ndarray
    cycle: int
    start: int
    end: int
    over_capacity: bool = False

    def __post_init__(self):
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))

    def __len__(self):
        return len(self.v)


def _open_text(source, mode="rt"):
    if hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        return io.StringIO(data)
    if str(source).endswith(".gz"):
        return gzip.open(source, mode, encoding="utf-8")
    return open(source, mode, encoding="utf-8")


def parse_log(source, spec: CsvSpec = CsvSpec()) -> ChargeLog:
    """Parse a charging-log CSV into a validated ChargeLog.

    Rows with non-finite or unparseable fields are skipped and reported in
    ``rejected_rows`` (1-based data-row indices).  Raises MalformedHeader,
    NonMonotonicTime (first offending row), or EmptyLog.
    """
    with _open_text(source) as fh:
        reader = csv.reader(fh, delimiter=spec.delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyLog("file has no header row")
        header = [h.strip() for h in header]
        required = [spec.time_col, spec.current_col, spec.voltage_col]
        missing = [c for c in required if c not in header]
        if missing:
            raise MalformedHeader(f"missing required columns: {missing}")
        it = header.index(spec.time_col)
        ii = header.index(spec.current_col)
        iv = header.index(spec.voltage_col)
        ic = header.index(spec.cycle_col) if spec.cycle_col in header else None

        t, i_, v, cyc, rejected = [], [], [], [], []
        last_t = {}
        for row_num, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                tv = float(row[it])
                iv_ = float(row[ii])
                vv = float(row[iv])
                cv = int(row[ic]) if ic is not None else 0
            except (ValueError, IndexError):
                rejected.append(row_num)
                continue
            if not (np.isfinite(tv) and np.isfinite(iv_) and np.isfinite(vv)):
                rejected.append(row_num)
                continue
            if cv in last_t and tv <= last_t[cv]:
                raise NonMonotonicTime(row_num)
            last_t[cv] = tv
            t.append(tv)
            i_.append(iv_)
            v.append(vv)
            cyc.append(cv)

    if not t:
        raise EmptyLog("no valid samples")
    return ChargeLog(
        t=np.array(t),
        i=np.array(i_),
        v=np.array(v),
        cycle=np.array(cyc) if ic is not None else None,
        rejected_rows=tuple(rejected),
    )


def write_log(log: ChargeLog, dest, spec: CsvSpec = CsvSpec()):
    """Write a ChargeLog back out in the standard CSV schema."""
    own = not hasattr(dest, "write")
    fh = open(dest, "w", newline="", encoding="utf-8") if own else dest
    try:
        writer = csv.writer(fh, delimiter=spec.delimiter)
        cols = [spec.time_col, spec.current_col, spec.voltage_col]
        if log.cycle is not None:
            cols.append(spec.cycle_col)
        writer.writerow(cols)
        for idx in range(len(log)):
            row = [repr(float(log.t[idx])), repr(float(log.i[idx])), repr(float(log.v[idx]))]
            if log.cycle is not None:
                row.append(str(int(log.cycle[idx])))
            writer.writerow(row)
    finally:
        if own:
            fh.close()


MIN_SEGMENT_SAMPLES = 10


def extract_cc_charge(log: ChargeLog, tol: float = 0.02) -> list[CCSegment]:
    """Find maximal constant-current charge runs.

    A run has I > 0 throughout, every sample within ``tol`` of the run-median
    current, and at least 10 samples.  Runs never cross cycle boundaries;
    cycle labels come from the cycle column when present, else run ordinal.
    """
    if len(log) == 0:
        raise NoChargeSegments("empty log")
    cyc = log.cycle if log.cycle is not None else np.zeros(len(log), dtype=int)

    # candidate runs: consecutive I > 0 within one cycle label
    positive = log.i > 0
    boundaries = [0]
    for idx in range(1, len(log)):
        if positive[idx] != positive[idx - 1] or cyc[idx] != cyc[idx - 1]:
            boundaries.append(idx)
    boundaries.append(len(log))

    segments = []
    for a, b in zip(boundaries[:-1], boundaries[1:]):
        if not positive[a]:
            continue
        med = float(np.median(log.i[a:b]))
        ok = np.abs(log.i[a:b] - med) <= tol * med
        # maximal sub-runs of in-tolerance samples
        start = None
        for off, flag in enumerate(list(ok) + [False]):
            if flag and start is None:
                start = off
            elif not flag and start is not None:
                lo, hi = a + start, a + off
                if hi - lo >= MIN_SEGMENT_SAMPLES:
                    segments.append((lo, hi))
                start = None

    if not segments:
        raise NoChargeSegments("no constant-current charge run found")

    out = []
    for ordinal, (lo, hi) in enumerate(segments, start=1):
        label = int(cyc[lo]) if log.cycle is not None else ordinal
        out.append(
            CCSegment(
                t=log.t[lo:hi], i=log.i[lo:hi], v=log.v[lo:hi],
                cycle=label, start=lo, end=hi,
            )
        )
    return out


def coulomb_count(segment: CCSegment, capacity_ah: float | None = None) -> QVCurve:
    """Integrate current over time (trapezoid) into cumulative charge in Ah.

    Flags the curve when total charge exceeds 1.5x the nominal capacity.
    """
    dt = np.diff(segment.t)
    inc = 0.5 * (segment.i[1:] + segment.i[:-1]) * dt / SECONDS_PER_HOUR
    q = np.concatenate([[0.0], np.cumsum(inc)])
    over = bool(capacity_ah is not None and q[-1] > 1.5 * capacity_ah)
    return QVCurve(
        v=segment.v, q=q, cycle=segment.cycle,
        start=segment.start, end=segment.end, over_capacity=over,
    )


DUPLICATE_V_EPS = 1e-4  # 0.1 mV, below 16-bit cycler quantization at 4.2 V


def clean_qv(
    curve: QVCurve,
    max_points: int = 500,
    vmin: float = V_MIN_DEFAULT,
    vmax: float = V_MAX_DEFAULT,
) -> QVCurve:
    """Produce a strictly monotone Q(V) map ready for GP training.

    Sorts by voltage, merges near-duplicate voltages (within 0.1 mV) by
    averaging charge, restricts to [vmin, vmax], enforces non-decreasing q
    (isotonic projection, which averages out local inversions instead of
    ratcheting them upward), and downsamples uniformly in V to at most
    ``max_points`` keeping the endpoints.  Charge is re-zeroed at the first
    kept sample.
    """
    if len(curve) < 4:
        raise TooFewPoints(f"curve has only {len(curve)} points")

    order = np.argsort(curve.v, kind="stable")
    v = curve.v[order]
    q = curve.q[order]

    # average q (and v) over near-duplicate groups; quantized bins keep each
    # group no wider than the threshold even on very dense curves
    bins = np.floor((v - v[0]) / DUPLICATE_V_EPS).astype(np.int64)
    _, group = np.unique(bins, return_inverse=True)
    counts = np.bincount(group)
    v = np.bincount(group, weights=v) / counts
    q = np.bincount(group, weights=q) / counts

    mask = (v >= vmin) & (v <= vmax)
    v, q = v[mask], q[mask]
    if len(v) < 4:
        raise TooFewPoints("fewer than 4 points inside the voltage cutoffs")

    if np.any(np.diff(q) < 0):
        q = isotonic_regression(q).x
    q = q - q[0]

    if len(v) > max_points:
        targets = np.linspace(v[0], v[-1], max_points)
        idx = np.unique(np.searchsorted(v, targets).clip(0, len(v) - 1))
        idx[0], idx[-1] = 0, len(v) - 1
        v, q = v[idx], q[idx]

    if len(v) < 4:
        raise TooFewPoints("fewer than 4 points after downsampling")
    return QVCurve(
        v=v, q=q, cycle=curve.cycle, start=curve.start, end=curve.end,
        over_capacity=curve.over_capacity,
    )


def write_qv_csv(curve: QVCurve, dest):
    """Export a cleaned curve as ``voltage_v, charge_ah``."""
    own = not hasattr(dest, "write")
    fh = open(dest, "w", newline="", encoding="utf-8") if own else dest
    try:
        writer = csv.writer(fh)
        writer.writerow(["voltage_v", "charge_ah"])
        for vv, qq in zip(curve.v, curve.q):
            writer.writerow([repr(float(vv)), repr(float(qq))])
    finally:
        if own:
            fh.close()
