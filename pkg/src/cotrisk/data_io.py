"""CSV ingestion, calendar rolling windows and fit persistence."""

import calendar
import csv
import datetime as dt
import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidArgument, ParseError
from .smooth_quantile import CenterOutwardFit
from .transport import Sample

FORMAT_VERSION = 1
DATE_NAMES = ("date", "Date", "DATE", "time", "timestamp")


@dataclass(frozen=True)
class TimeSeriesTable:
    values: np.ndarray
    columns: tuple
    dates: Optional[tuple] = None
    name: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[1] != len(self.columns):
            raise InvalidArgument("values must be (n, len(columns))", module="io_cli")
        if self.dates is not None:
            if len(self.dates) != v.shape[0]:
                raise InvalidArgument("dates and values differ in length", module="io_cli")
            for a, b in zip(self.dates[:-1], self.dates[1:]):
                if not a < b:
                    raise InvalidArgument(f"dates must be strictly increasing ({a} then {b})",
                                          module="io_cli")
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def d(self):
        return self.values.shape[1]


def _parse_date(text, line):
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError:
        raise ParseError(f"line {line}: cannot parse date {text!r}", line=line) from None


def _parse_float(text, line, column):
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"line {line}: column {column!r} is not a number: {text!r}",
                         line=line, column=column) from None


def load_csv(path, date_column=None, name=None):
    """Read a CSV with a header row into a :class:`TimeSeriesTable`.

    If ``date_column`` is not given, a column called ``date`` (any common
    casing) is used when present. Every other column must be numeric.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or all(not h.strip() for h in header):
            raise ParseError(f"{path}: missing header row", line=1)
        header = [h.strip() for h in header]
        if date_column is None:
            date_column = next((h for h in header if h in DATE_NAMES), None)
        elif date_column not in header:
            raise ParseError(f"{path}: no column named {date_column!r}", line=1)
        di = header.index(date_column) if date_column is not None else None
        cols = [h for i, h in enumerate(header) if i != di]
        if not cols:
            raise ParseError(f"{path}: no numeric columns", line=1)
        dates, rows = [], []
        for rec in reader:
            line = reader.line_num
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise ParseError(f"line {line}: expected {len(header)} fields, got {len(rec)}",
                                 line=line)
            if di is not None:
                dates.append(_parse_date(rec[di], line))
            rows.append([_parse_float(c, line, h)
                         for i, (c, h) in enumerate(zip(rec, header)) if i != di])
    values = np.array(rows, dtype=float).reshape(len(rows), len(cols))
    try:
        return TimeSeriesTable(values, tuple(cols), tuple(dates) if di is not None else None,
                               name or str(path))
    except InvalidArgument as exc:
        raise ParseError(f"{path}: {exc}") from None


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])


def log_returns(table):
    """``log(p_t / p_{t-1})``; the first date is dropped."""
    v = table.values
    if table.n < 2:
        raise InvalidArgument("need at least two prices", module="io_cli")
    if np.any(v <= 0):
        raise InvalidArgument("prices must be positive for log-returns", module="io_cli")
    dates = table.dates[1:] if table.dates is not None else None
    return TimeSeriesTable(np.diff(np.log(v), axis=0), table.columns, dates, table.name)


def _month_index(day):
    return day.year * 12 + day.month - 1


def _label(index):
    return f"{index % 12 + 1:02d}-{index // 12}"


def rolling_windows(table, window_months, step_months=1):
    """Trailing calendar windows labelled ``MM-YYYY`` by their last month.

    A window holds every row dated in its ``window_months`` months. The first
    label is the first month with a full window behind it, counting the month
    of the first observation as full. A final month counts only if a later
    month has data or the last row falls on its last calendar day.
    """
    if table.dates is None:
        raise InvalidArgument("rolling windows need a date column", module="io_cli")
    if window_months < 1 or step_months < 1:
        raise InvalidArgument("window and step must be >= 1 month", module="io_cli")
    if table.n == 0:
        return []
    months = np.array([_month_index(d) for d in table.dates])
    last = table.dates[-1]
    end = months[-1]
    if last.day != calendar.monthrange(last.year, last.month)[1]:
        end -= 1
    out = []
    for stop in range(months[0] + window_months - 1, end + 1, step_months):
        mask = (months > stop - window_months) & (months <= stop)
        out.append((_label(stop), Sample(table.values[mask])))
    return out


def input_digest(x):
    arr = np.ascontiguousarray(np.asarray(x, dtype="<f8"))
    return "sha256:" + hashlib.sha256(arr.tobytes()).hexdigest()


def _hex(a):
    return [float(v).hex() for v in np.asarray(a, dtype=float).ravel()]


def _unhex(values, shape):
    return np.array([float.fromhex(v) for v in values], dtype=float).reshape(shape)


@dataclass(frozen=True)
class FitArchive:
    """A fit plus provenance, stored as JSON with hexadecimal doubles."""

    fit: CenterOutwardFit
    provenance: dict = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    def to_dict(self):
        f = self.fit
        delta = f.delta if np.isfinite(f.delta) else None
        return {
            "format_version": self.format_version,
            "n": f.n, "d": f.d, "m": f.m,
            "xi_log": float(f.xi_log).hex(),
            "delta": None if delta is None else float(delta).hex(),
            "grid_kind": f.grid_kind,
            "grid_seeds": [list(s) for s in f.grid_seeds],
            "u": _hex(f.u), "x": _hex(f.x), "lambda": _hex(f.lam),
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, data):
        version = data.get("format_version")
        if version != FORMAT_VERSION:
            raise ParseError(f"unsupported archive format_version {version!r}")
        try:
            n, d = int(data["n"]), int(data["d"])
            fit = CenterOutwardFit(
                u=_unhex(data["u"], (n, d)), x=_unhex(data["x"], (n, d)),
                lam=_unhex(data["lambda"], (n,)),
                delta=np.inf if data["delta"] is None else float.fromhex(data["delta"]),
                xi_log=float.fromhex(data["xi_log"]), m=int(data["m"]),
                grid_kind=data.get("grid_kind"),
                grid_seeds=tuple(tuple(s) for s in data.get("grid_seeds", ())),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise ParseError(f"malformed fit archive: {exc}") from None
        return cls(fit, data.get("provenance", {}), version)

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: not valid JSON ({exc.msg})", line=exc.lineno) from None
        return cls.from_dict(data)
