"""CSV formats for matrices, traces, reports and spectra.

Matrix files::

    # default_hint=0          <- state files only
    query,h1,h2,h3
    q1,3.5,,>4.0
    q2,9.0,6.25,

A cell is a latency in seconds, empty (unobserved) or ``>bound`` (censored).
Ground-truth files hold latencies only. Floats are written with ``repr`` so
every value reads back bit-for-bit. All writes are atomic.
"""
from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import ParseError, ShapeError
from .matrix_core import CENSORED, COMPLETE, GroundTruthMatrix, WorkloadState

TRACE_HEADER = ["step", "explore_seconds", "workload_latency_seconds", "n_complete", "n_censored"]
REPORT_HEADER = ["policy", "budget_seconds", "mean_latency_seconds", "stddev_seconds"]
SPECTRUM_HEADER = ["index", "singular_value"]
DEFAULT_HINT_TAG = "# default_hint="


def _fmt(x) -> str:
    return repr(float(x))


def atomic_write_text(path, text: str):
    """Write ``text`` to a temp file next to ``path`` and rename it into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def _render(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def _parse_float(text, line, column, what="latency", allow_zero=False):
    try:
        value = float(text)
    except ValueError:
        raise ParseError(line, column, f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise ParseError(line, column, f"{what} must be finite, got {text!r}")
    if value < 0 or (value == 0 and not allow_zero):
        raise ParseError(line, column, f"{what} must be {'>=' if allow_zero else '>'} 0, got {text!r}")
    return value


def parse_matrix(text: str):
    """Parse matrix CSV text; see :func:`read_matrix`."""
    default_hint = None
    reader = csv.reader(io.StringIO(text))
    header = None
    qids, status_rows, value_rows = [], [], []
    for row in reader:
        line = reader.line_num
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if row[0].startswith("#"):
            tag = ",".join(row).strip()
            if tag.startswith(DEFAULT_HINT_TAG):
                try:
                    default_hint = int(tag[len(DEFAULT_HINT_TAG):])
                except ValueError:
                    raise ParseError(line, 1, f"bad default_hint comment: {tag!r}") from None
            continue
        if header is None:
            if row[0].strip() != "query":
                raise ParseError(line, 1, f"first header cell must be 'query', got {row[0]!r}")
            if len(row) < 2:
                raise ShapeError(line, "header names no hints")
            header = [c.strip() for c in row[1:]]
            continue
        if len(row) != len(header) + 1:
            raise ShapeError(line, f"expected {len(header) + 1} cells, got {len(row)}")
        qids.append(row[0].strip())
        st, vals = [], []
        for col, cell in enumerate(row[1:], start=2):
            cell = cell.strip()
            if not cell:
                st.append(0)
                vals.append(0.0)
            elif cell.startswith(">"):
                st.append(CENSORED)
                vals.append(_parse_float(cell[1:], line, col, "censoring bound"))
            else:
                st.append(COMPLETE)
                vals.append(_parse_float(cell, line, col))
        status_rows.append(st)
        value_rows.append(vals)

    if header is None:
        raise ShapeError(0, "no header row")
    if not qids:
        raise ShapeError(reader.line_num, "no data rows")
    status = np.array(status_rows, dtype=np.int8)
    values = np.array(value_rows, dtype=np.float64)
    if default_hint is None and np.all(status == COMPLETE):
        return GroundTruthMatrix(values, qids, header)
    if default_hint is not None and not 0 <= default_hint < len(header):
        raise ParseError(1, 1, f"default_hint {default_hint} out of range for {len(header)} hints")
    return WorkloadState(status, values, default_hint or 0, qids, header)


def read_matrix(path):
    """Read a matrix file.

    Returns a :class:`WorkloadState` when the file carries a ``default_hint``
    comment or any empty/censored cell, else a :class:`GroundTruthMatrix`.
    """
    return parse_matrix(Path(path).read_text(encoding="utf-8"))


def read_grid(path):
    """Read a dense non-negative grid (a completed estimate or a cost matrix).

    Returns ``(values, query_ids, hint_labels)``. Zeros are allowed; empty and
    censored cells are not.
    """
    reader = csv.reader(io.StringIO(Path(path).read_text(encoding="utf-8")))
    header, qids, rows = None, [], []
    for row in reader:
        line = reader.line_num
        if not row or row[0].startswith("#"):
            continue
        if header is None:
            if row[0].strip() != "query":
                raise ParseError(line, 1, f"first header cell must be 'query', got {row[0]!r}")
            header = [c.strip() for c in row[1:]]
            continue
        if len(row) != len(header) + 1:
            raise ShapeError(line, f"expected {len(header) + 1} cells, got {len(row)}")
        qids.append(row[0].strip())
        rows.append([_parse_float(c.strip(), line, col, "value", allow_zero=True) for col, c in enumerate(row[1:], 2)])
    if header is None or not rows:
        raise ShapeError(reader.line_num, "no header or no data rows")
    return np.array(rows, dtype=np.float64), qids, header


def read_truth(path) -> GroundTruthMatrix:
    obj = read_matrix(path)
    if not isinstance(obj, GroundTruthMatrix):
        raise ValueError(f"{path}: ground-truth file contains unobserved or censored cells")
    return obj


def read_state(path, default_hint=None) -> WorkloadState:
    """Read a state file; a fully observed file becomes an all-complete state."""
    obj = read_matrix(path)
    if isinstance(obj, GroundTruthMatrix):
        n, k = obj.shape
        obj = WorkloadState(np.full((n, k), COMPLETE), obj.values, default_hint or 0, obj.query_ids, obj.hint_labels)
    elif default_hint is not None:
        obj.default_hint = default_hint
    return obj


def format_matrix(obj) -> str:
    rows = []
    if isinstance(obj, WorkloadState):
        rows.append([f"{DEFAULT_HINT_TAG}{obj.default_hint}"])
        cells = []
        for st_row, v_row in zip(obj.status, obj.values):
            cells.append([
                _fmt(v) if s == COMPLETE else (">" + _fmt(v) if s == CENSORED else "")
                for s, v in zip(st_row, v_row)
            ])
    elif isinstance(obj, GroundTruthMatrix):
        cells = [[_fmt(v) for v in row] for row in obj.values]
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    rows.append(["query", *obj.hint_labels])
    rows.extend([q, *c] for q, c in zip(obj.query_ids, cells))
    return _render(rows)


def write_matrix(obj, path):
    atomic_write_text(path, format_matrix(obj))


def write_grid(values, path, query_ids=None, hint_labels=None):
    """Write a dense grid (e.g. a completed estimate) without positivity checks."""
    values = np.asarray(values, dtype=np.float64)
    n, k = values.shape
    query_ids = query_ids or [f"q{i + 1}" for i in range(n)]
    hint_labels = hint_labels or [f"h{j + 1}" for j in range(k)]
    rows = [["query", *hint_labels]]
    rows.extend([q, *map(_fmt, row)] for q, row in zip(query_ids, values))
    atomic_write_text(path, _render(rows))


def format_trace(trace) -> str:
    rows = [TRACE_HEADER]
    for step, p in enumerate(trace.points):
        rows.append([step, _fmt(p.explore_seconds), _fmt(p.workload_latency), p.n_complete, p.n_censored])
    return _render(rows)


def write_trace(trace, path):
    atomic_write_text(path, format_trace(trace))


def read_trace(path):
    """Trace rows as a list of dicts with typed values."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != TRACE_HEADER:
            raise ParseError(1, 1, f"trace header must be {TRACE_HEADER}, got {header}")
        out = []
        for row in reader:
            if len(row) != len(TRACE_HEADER):
                raise ShapeError(reader.line_num, f"expected {len(TRACE_HEADER)} cells, got {len(row)}")
            out.append({
                "step": int(row[0]),
                "explore_seconds": float(row[1]),
                "workload_latency_seconds": float(row[2]),
                "n_complete": int(row[3]),
                "n_censored": int(row[4]),
            })
    return out


def format_report(table) -> str:
    rows = [REPORT_HEADER]
    for r in table:
        rows.append([r.policy, "" if r.budget is None else _fmt(r.budget), _fmt(r.mean), _fmt(r.stddev)])
    return _render(rows)


def write_report(table, path):
    atomic_write_text(path, format_report(table))


def read_report(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != REPORT_HEADER:
            raise ParseError(1, 1, f"report header must be {REPORT_HEADER}, got {reader.fieldnames}")
        return list(reader)


def format_spectrum(spectrum) -> str:
    return _render([SPECTRUM_HEADER, *([i + 1, _fmt(s)] for i, s in enumerate(spectrum))])


def write_spectrum(spectrum, path):
    atomic_write_text(path, format_spectrum(spectrum))


def read_spectrum(path) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SPECTRUM_HEADER:
            raise ParseError(1, 1, f"spectrum header must be {SPECTRUM_HEADER}, got {header}")
        return np.array([float(row[1]) for row in reader])
