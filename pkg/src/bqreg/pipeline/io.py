"""CSV ingestion with calendar alignment, and CSV writers.

Input files have a header row whose first column is ``date`` (ISO-8601),
followed by real-valued columns. Empty cells mark missing observations.
Sources observed on different calendars (7-day crypto series, 5-day
market series) are aligned on the union of their dates; a missing run is
forward-filled only when it spans no more calendar days than the column's
fill limit, otherwise its rows are dropped.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DegenerateSampleError, MissingColumnError, ParseError, UsageError
from ..model import Dataset
from .transforms import _log

MAX_FILL_DAYS = 5


@dataclass(frozen=True)
class ColumnSchema:
    """How one dataset column is read.

    ``header`` defaults to ``name``; ``source`` (file name or stem) is only
    needed when several files carry the same header. ``transform`` is
    ``none``, ``log``, or ``auto`` (log when the column is strictly positive).
    """

    name: str
    header: str | None = None
    source: str | None = None
    transform: str = "none"
    fill_limit: int = 0

    def __post_init__(self):
        if self.transform not in ("none", "log", "auto"):
            raise UsageError(f"column {self.name!r}: unknown transform {self.transform!r}")
        if not 0 <= self.fill_limit <= MAX_FILL_DAYS:
            raise UsageError(f"column {self.name!r}: fill limit must be in [0, {MAX_FILL_DAYS}]")


def _read(path):
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(path, 1, "", "empty file") from None
        if not header or header[0] != "date":
            raise ParseError(path, 1, header[0] if header else "", "first column must be 'date'")
        if len(set(header)) != len(header):
            raise ParseError(path, 1, "", "duplicate column headers")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(path, lineno, "", f"expected {len(header)} fields, got {len(row)}")
            rows.append((lineno, row))
    return header, rows


def _parse_file(path, wanted):
    """Parse the requested headers of one file into {header: {date: value}}."""
    header, rows = _read(path)
    pos = {h: header.index(h) for h in wanted}
    out = {h: {} for h in wanted}
    seen = set()
    for lineno, row in rows:
        try:
            day = dt.date.fromisoformat(row[0].strip())
        except ValueError:
            raise ParseError(path, lineno, "date", f"unparseable date {row[0]!r}") from None
        if day in seen:
            raise ParseError(path, lineno, "date", f"duplicate date {day}")
        seen.add(day)
        for h, j in pos.items():
            cell = row[j].strip()
            if not cell:
                continue
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(path, lineno, h, f"unparseable value {cell!r}") from None
            if not np.isfinite(v):
                raise ParseError(path, lineno, h, f"non-finite value {cell!r}")
            out[h][day] = v
    return out


def _headers(path):
    return _read(path)[0]


def _locate(schema, paths, headers):
    header = schema.header or schema.name
    if schema.source is not None:
        matches = [p for p in paths if Path(p).name == schema.source or Path(p).stem == schema.source]
        if not matches:
            raise UsageError(f"column {schema.name!r}: no input file named {schema.source!r}")
        if header not in headers[matches[0]]:
            raise MissingColumnError(header, str(matches[0]))
        return matches[0], header
    matches = [p for p in paths if header in headers[p][1:]]
    if not matches:
        raise MissingColumnError(header, "input files")
    if len(matches) > 1:
        raise UsageError(f"column {header!r} appears in several files; set its source")
    return matches[0], header


def fill_gaps(dates, values, limit):
    """Forward-fill missing runs spanning at most ``limit`` calendar days."""
    values = values.copy()
    if limit <= 0:
        return values
    ordinal = dates.astype("int64")
    obs = np.flatnonzero(np.isfinite(values))
    for a, b in zip(obs, np.r_[obs[1:], values.size]):
        if b - a <= 1:
            continue
        end = ordinal[b] if b < values.size else ordinal[-1] + 1
        if end - ordinal[a] - 1 <= limit:
            values[a + 1:b] = values[a]
    return values


def load_csv(paths, schemas):
    """Load, align and clean the columns described by ``schemas``."""
    paths = [Path(p) for p in paths]
    for p in paths:
        if not p.is_file():
            raise DegenerateSampleError(f"input file {p} does not exist")
    headers = {p: _headers(p) for p in paths}
    wanted = {}
    located = []
    for s in schemas:
        path, header = _locate(s, paths, headers)
        wanted.setdefault(path, []).append(header)
        located.append((s, path, header))
    parsed = {p: _parse_file(p, sorted(set(hs))) for p, hs in wanted.items()}

    all_days = sorted({d for p in parsed.values() for col in p.values() for d in col})
    if not all_days:
        raise DegenerateSampleError("input files contain no observations")
    dates = np.array(all_days, dtype="datetime64[D]")
    index = {d: i for i, d in enumerate(all_days)}

    columns = {}
    for s, path, header in located:
        values = np.full(dates.size, np.nan)
        for d, v in parsed[path][header].items():
            values[index[d]] = v
        columns[s.name] = fill_gaps(dates, values, s.fill_limit)

    keep = np.ones(dates.size, dtype=bool)
    for v in columns.values():
        keep &= np.isfinite(v)
    if not keep.any():
        raise DegenerateSampleError("no dates left after joining the input files")
    dates = dates[keep]
    for s in schemas:
        v = columns[s.name][keep]
        if s.transform == "log" or (s.transform == "auto" and np.all(v > 0)):
            v = _log(v, s.name, dates)
        columns[s.name] = v
    return Dataset(dates, columns)


def format_float(v):
    return "" if not np.isfinite(v) else repr(float(v))


def write_csv(dataset, path):
    """Write ``dataset`` so that :func:`load_csv` reproduces it exactly."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", *dataset.names])
        for i, d in enumerate(dataset.dates):
            w.writerow([str(d), *(format_float(dataset.columns[k][i]) for k in dataset.names)])


def write_chain_csv(chain, path):
    """One row per retained draw; header is the coefficient names plus sigma."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*chain.regressor_names, "sigma"])
        for b, s in zip(chain.beta_draws, chain.sigma_draws):
            w.writerow([*(repr(float(v)) for v in b), repr(float(s))])
