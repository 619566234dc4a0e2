"""OHLC bar ingestion: Yahoo-style CSV parsing, validation, fetching, windowing."""

from __future__ import annotations

import csv
import datetime as dt
import io
import logging
import math
import socket
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

from .errors import (
    DataError,
    EmptyWindowError,
    FetchTimeout,
    HTTPStatusError,
    NetworkError,
    NotFoundError,
    ParseError,
)

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("Date", "Open", "High", "Low", "Close", "Adj Close", "Volume")
REQUIRED_COLUMNS = ("Date", "Open", "High", "Low", "Close")
PRICE_FIELDS = ("open", "high", "low", "close")
NULL_SENTINEL = "null"


@dataclass(frozen=True)
class Bar:
    """One trading day. Prices are not checked here; see :func:`validate_series`."""

    date: dt.date
    open: float
    high: float
    low: float
    close: float
    volume: Optional[int] = None


@dataclass(frozen=True)
class ValidationIssue:
    row: int
    field: str
    description: str
    severity: str = "warning"

    def to_dict(self) -> dict:
        return {
            "row": self.row,
            "field": self.field,
            "description": self.description,
            "severity": self.severity,
        }


@dataclass(frozen=True)
class BarSeries:
    """Date-ordered bars for one symbol.

    ``notes`` carries issues found while parsing (dropped "null" rows); they
    are surfaced again by :func:`validate_series`.
    """

    symbol: str
    bars: tuple[Bar, ...]
    notes: tuple[ValidationIssue, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "bars", tuple(self.bars))
        if not self.bars:
            raise DataError(f"{self.symbol}: bar series is empty")
        for prev, cur in zip(self.bars, self.bars[1:]):
            if cur.date <= prev.date:
                raise DataError(
                    f"{self.symbol}: dates not strictly increasing at {cur.date}"
                )

    def __len__(self) -> int:
        return len(self.bars)

    def __iter__(self):
        return iter(self.bars)

    def __getitem__(self, i):
        return self.bars[i]

    @cached_property
    def dates(self) -> tuple[dt.date, ...]:
        return tuple(b.date for b in self.bars)

    @cached_property
    def closes(self) -> np.ndarray:
        return _frozen_array(b.close for b in self.bars)

    @cached_property
    def highs(self) -> np.ndarray:
        return _frozen_array(b.high for b in self.bars)

    @cached_property
    def lows(self) -> np.ndarray:
        return _frozen_array(b.low for b in self.bars)

    @cached_property
    def opens(self) -> np.ndarray:
        return _frozen_array(b.open for b in self.bars)

    @property
    def first_date(self) -> dt.date:
        return self.bars[0].date

    @property
    def last_date(self) -> dt.date:
        return self.bars[-1].date


def _frozen_array(values: Iterable[float]) -> np.ndarray:
    arr = np.fromiter(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ValidationReport:
    symbol: str
    issues: tuple[ValidationIssue, ...]
    rows_checked: int

    @property
    def errors(self) -> tuple[ValidationIssue, ...]:
        return tuple(i for i in self.issues if i.severity == "error")

    @property
    def warnings(self) -> tuple[ValidationIssue, ...]:
        return tuple(i for i in self.issues if i.severity == "warning")

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        return {
            "symbol": self.symbol,
            "rows_checked": self.rows_checked,
            "issues": [i.to_dict() for i in self.issues],
        }

    def format_text(self) -> str:
        lines = [
            f"{self.symbol}: {self.rows_checked} rows checked, "
            f"{len(self.errors)} error(s), {len(self.warnings)} warning(s)"
        ]
        for i in self.issues:
            lines.append(f"  [{i.severity}] row {i.row} {i.field}: {i.description}")
        return "\n".join(lines)


# --------------------------------------------------------------------------
# parsing


def _parse_number(raw: str, row: int, name: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ParseError(f"line {row}: cannot parse {name}={raw!r} as a number") from None
    if not math.isfinite(value):
        raise ParseError(f"line {row}: {name}={raw!r} is not finite")
    return value


def _parse_volume(raw: str, row: int) -> Optional[int]:
    raw = raw.strip()
    if not raw or raw == NULL_SENTINEL:
        return None
    value = _parse_number(raw, row, "Volume")
    return int(value) if value.is_integer() else value


def parse_csv(text: Union[str, bytes, io.TextIOBase], symbol: str) -> BarSeries:
    """Parse a Yahoo historical CSV document into a :class:`BarSeries`.

    Rows come back sorted by date whatever their order in the file. Rows
    carrying the literal ``null`` in a price column are dropped and recorded
    as warnings in ``BarSeries.notes``. ``Adj Close`` is read past and
    discarded.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    if not isinstance(text, str):
        text = text.read()
    text = text.lstrip("﻿")

    reader = csv.reader(io.StringIO(text))
    header = None
    for header in reader:
        if any(cell.strip() for cell in header):
            break
    else:
        raise ParseError(f"{symbol}: no header row")

    columns = {name.strip().lower(): pos for pos, name in enumerate(header)}
    missing = [c for c in REQUIRED_COLUMNS if c.lower() not in columns]
    if missing:
        raise ParseError(f"{symbol}: missing required column(s): {', '.join(missing)}")
    pos = {c: columns.get(c.lower()) for c in CSV_COLUMNS}

    bars: list[Bar] = []
    notes: list[ValidationIssue] = []
    seen: dict[dt.date, int] = {}
    for cells in reader:
        if not any(cell.strip() for cell in cells):
            continue
        row = reader.line_num
        if len(cells) < len(header):
            raise ParseError(f"line {row}: expected {len(header)} fields, got {len(cells)}")

        def cell(name):
            return cells[pos[name]].strip()

        try:
            date = dt.date.fromisoformat(cell("Date"))
        except ValueError:
            raise ParseError(f"line {row}: cannot parse date {cell('Date')!r}") from None
        if date in seen:
            raise ParseError(f"line {row}: duplicate date {date} (first seen on line {seen[date]})")
        seen[date] = row

        null_fields = [c for c in REQUIRED_COLUMNS[1:] if cell(c) == NULL_SENTINEL]
        if null_fields:
            notes.append(
                ValidationIssue(row, null_fields[0].lower(), f"null price on {date}; row dropped")
            )
            logger.warning("%s: dropping line %d (%s): null price", symbol, row, date)
            continue

        prices = {c.lower(): _parse_number(cell(c), row, c) for c in REQUIRED_COLUMNS[1:]}
        volume = _parse_volume(cell("Volume"), row) if pos["Volume"] is not None else None
        bars.append(Bar(date=date, volume=volume, **prices))

    if not bars:
        raise ParseError(f"{symbol}: no data rows")
    bars.sort(key=lambda b: b.date)
    return BarSeries(symbol, tuple(bars), tuple(notes))


def _format_price(value: float) -> str:
    return repr(float(value))


def serialize_csv(series: BarSeries) -> str:
    """Write ``series`` in the Yahoo layout that :func:`parse_csv` reads.

    Floats use the shortest round-trip representation, so parsing the output
    reproduces every bar exactly. ``Adj Close`` repeats the close.
    """
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for b in series.bars:
        writer.writerow(
            [
                b.date.isoformat(),
                _format_price(b.open),
                _format_price(b.high),
                _format_price(b.low),
                _format_price(b.close),
                _format_price(b.close),
                "" if b.volume is None else str(b.volume),
            ]
        )
    return out.getvalue()


# --------------------------------------------------------------------------
# validation


def validate_series(series: BarSeries, strict: bool = False) -> ValidationReport:
    """Check every bar against the OHLC invariants.

    Findings are errors under ``strict`` and warnings otherwise. Parse-time
    notes (dropped null rows) are always warnings. ``row`` on bar findings
    is the 1-based bar position in date order.
    """
    severity = "error" if strict else "warning"
    issues = list(series.notes)
    for row, b in enumerate(series.bars, start=1):
        found: list[tuple[str, str]] = []
        for name in PRICE_FIELDS:
            value = getattr(b, name)
            if not math.isfinite(value):
                found.append((name, "non-finite price"))
            elif value <= 0:
                found.append((name, "non-positive price"))
        if b.high < b.close:
            found.append(("high", "high < close"))
        if b.high < b.open:
            found.append(("high", "high < open"))
        if b.low > b.close:
            found.append(("low", "low > close"))
        if b.low > b.open:
            found.append(("low", "low > open"))
        if b.low > b.high:
            found.append(("low", "low > high"))
        if b.volume is not None and b.volume < 0:
            found.append(("volume", "negative volume"))
        issues.extend(ValidationIssue(row, f, f"{d} on {b.date}", severity) for f, d in found)
    return ValidationReport(series.symbol, tuple(issues), len(series))


# --------------------------------------------------------------------------
# retrieval


def is_url(source: str) -> bool:
    return urllib.parse.urlsplit(str(source)).scheme in ("http", "https")


def fetch_csv(url: str, timeout: float = 10.0) -> str:
    """Return the body of ``url`` as text.

    Raises NotFoundError on 404, HTTPStatusError on other non-200 statuses,
    FetchTimeout when the server is too slow, and NetworkError otherwise.
    """
    if not is_url(url):
        raise ValueError(f"not an http(s) URL: {url!r}")
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            status = resp.status
            body = resp.read()
    except urllib.error.HTTPError as exc:
        if exc.code == 404:
            raise NotFoundError(url, 404, str(exc.reason)) from exc
        raise HTTPStatusError(url, exc.code, str(exc.reason)) from exc
    except urllib.error.URLError as exc:
        if isinstance(exc.reason, (socket.timeout, TimeoutError)):
            raise FetchTimeout(f"{url}: timed out after {timeout}s") from exc
        raise NetworkError(f"{url}: {exc.reason}") from exc
    except (socket.timeout, TimeoutError) as exc:
        raise FetchTimeout(f"{url}: timed out after {timeout}s") from exc
    except OSError as exc:
        raise NetworkError(f"{url}: {exc}") from exc
    if status != 200:
        raise HTTPStatusError(url, status)
    return body.decode("utf-8")


def read_source(source: Union[str, Path], timeout: float = 10.0) -> str:
    """Read CSV text from a local path or an http(s) URL."""
    if is_url(str(source)):
        return fetch_csv(str(source), timeout=timeout)
    path = Path(source)
    try:
        return path.read_bytes().decode("utf-8")
    except FileNotFoundError:
        raise DataError(f"input file not found: {path}") from None
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not valid UTF-8 ({exc})") from None


def load_series(source: Union[str, Path], symbol: Optional[str] = None) -> BarSeries:
    if symbol is None:
        symbol = Path(urllib.parse.urlsplit(str(source)).path).stem or "UNKNOWN"
    return parse_csv(read_source(source), symbol)


# --------------------------------------------------------------------------
# windowing


def slice_by_date(series: BarSeries, start: dt.date, end: dt.date) -> BarSeries:
    """Bars with ``start <= date <= end``. An empty selection is an error."""
    if start > end:
        raise ValueError(f"window start {start} is after end {end}")
    bars = tuple(b for b in series.bars if start <= b.date <= end)
    if not bars:
        raise EmptyWindowError(
            f"{series.symbol}: no bars between {start} and {end} "
            f"(data covers {series.first_date} to {series.last_date})"
        )
    return BarSeries(series.symbol, bars, series.notes)
