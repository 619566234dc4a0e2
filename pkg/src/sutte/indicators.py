"""Baseline indicators over closing prices: SMA, EMA and the MACD line."""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import DataError, InsufficientDataError, ParseError
from .market_data import BarSeries


@dataclass(frozen=True, eq=False)
class IndicatorSeries:
    """A named series aligned to bar indices.

    Bar indices are 1-based. ``values[i]`` belongs to bar ``valid_from + i``
    and the series always runs through the last bar of its source.
    """

    name: str
    values: np.ndarray
    valid_from: int
    dates: tuple[dt.date, ...]
    params: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "params", dict(self.params))
        if self.valid_from < 1:
            raise DataError(f"{self.name}: valid_from must be >= 1, got {self.valid_from}")
        if len(self.dates) != len(values):
            raise DataError(f"{self.name}: {len(values)} values but {len(self.dates)} dates")
        if not np.all(np.isfinite(values)):
            raise DataError(f"{self.name}: non-finite value")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def last_index(self) -> int:
        return self.valid_from + len(self.values) - 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.valid_from, self.last_index + 1)

    def covers(self, k: int) -> bool:
        return self.valid_from <= k <= self.last_index

    def at(self, k: int) -> float:
        if not self.covers(k):
            raise IndexError(
                f"{self.name}: bar index {k} outside [{self.valid_from}, {self.last_index}]"
            )
        return float(self.values[k - self.valid_from])

    def date_at(self, k: int) -> dt.date:
        self.at(k)
        return self.dates[k - self.valid_from]

    def points(self):
        """Yield ``(bar index, date, value)`` triples."""
        for i, (d, v) in enumerate(zip(self.dates, self.values)):
            yield self.valid_from + i, d, float(v)

    # serialization -------------------------------------------------------

    def to_csv(self, header: Optional[str] = None) -> str:
        out = io.StringIO()
        if header:
            out.write(f"# {header}\n")
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["index", "date", "value"])
        for k, d, v in self.points():
            writer.writerow([k, d.isoformat(), format_number(v)])
        return out.getvalue()

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "params": dict(self.params),
            "valid_from": self.valid_from,
            "points": [{"date": d.isoformat(), "value": v} for _, d, v in self.points()],
        }

    def to_json(self, meta: Optional[Mapping] = None) -> str:
        record = self.to_dict()
        if meta is not None:
            record = {"meta": dict(meta), **record}
        return json.dumps(record, indent=1) + "\n"

    @classmethod
    def from_csv(cls, text: str, name: str, params: Optional[Mapping[str, int]] = None):
        lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
        rows = list(csv.DictReader(lines))
        if not rows:
            raise ParseError(f"{name}: no indicator rows")
        indices = [int(r["index"]) for r in rows]
        if indices != list(range(indices[0], indices[0] + len(indices))):
            raise ParseError(f"{name}: indices are not contiguous")
        return cls(
            name=name,
            values=[float(r["value"]) for r in rows],
            valid_from=indices[0],
            dates=[dt.date.fromisoformat(r["date"]) for r in rows],
            params=params or {},
        )

    @classmethod
    def from_dict(cls, record: Mapping):
        points = record["points"]
        return cls(
            name=record["name"],
            values=[p["value"] for p in points],
            valid_from=int(record["valid_from"]),
            dates=[dt.date.fromisoformat(p["date"]) for p in points],
            params=record.get("params", {}),
        )


def format_number(value: float) -> str:
    """Shortest string that parses back to exactly ``value``."""
    return repr(float(value))


def _tail_dates(series: BarSeries, valid_from: int) -> tuple[dt.date, ...]:
    return series.dates[valid_from - 1 :]


def _check_window(n: int, what: str = "window") -> None:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"{what} must be an integer >= 1, got {n!r}")


def rolling_mean(values: Sequence[float], n: int) -> np.ndarray:
    """Sliding mean of width ``n``; one output per full window.

    The running sum is Neumaier-compensated so drift stays bounded on long
    inputs, and each mean is clamped to its window's range (a property the
    exact mean always has), which keeps constant inputs exact.
    """
    _check_window(n)
    x = [float(v) for v in values]
    if len(x) < n:
        raise InsufficientDataError(f"need {n} values, got {len(x)}")

    out = np.empty(len(x) - n + 1)
    total = comp = 0.0
    lo_q: deque[int] = deque()
    hi_q: deque[int] = deque()

    def add(v: float) -> None:
        nonlocal total, comp
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t

    for i, v in enumerate(x):
        add(v)
        if i >= n:
            add(-x[i - n])
        while lo_q and x[lo_q[-1]] >= v:
            lo_q.pop()
        lo_q.append(i)
        while hi_q and x[hi_q[-1]] <= v:
            hi_q.pop()
        hi_q.append(i)
        if lo_q[0] <= i - n:
            lo_q.popleft()
        if hi_q[0] <= i - n:
            hi_q.popleft()
        if i >= n - 1:
            mean = (total + comp) / n
            out[i - n + 1] = min(max(mean, x[lo_q[0]]), x[hi_q[0]])
    return out


def sma(series: BarSeries, n: int = 5) -> IndicatorSeries:
    """Simple moving average of the last ``n`` closes, defined from bar ``n``."""
    _check_window(n)
    if len(series) < n:
        raise InsufficientDataError(f"SMA({n}) needs {n} bars, {series.symbol} has {len(series)}")
    return IndicatorSeries(
        name=f"SMA({n})",
        values=rolling_mean(series.closes, n),
        valid_from=n,
        dates=_tail_dates(series, n),
        params={"n": n},
    )


def ema_values(values: Sequence[float], n: int) -> np.ndarray:
    """EMA with smoothing ``2 / (n + 1)``, seeded with the first value."""
    _check_window(n)
    if len(values) == 0:
        raise InsufficientDataError("EMA of an empty sequence")
    alpha = 2.0 / (n + 1)
    out = np.empty(len(values))
    prev = float(values[0])
    out[0] = prev
    for i in range(1, len(values)):
        # same recursion as alpha*c + (1 - alpha)*prev, but a constant input
        # is an exact fixed point in this form
        prev = prev + alpha * (float(values[i]) - prev)
        out[i] = prev
    return out


def ema(series: BarSeries, n: int) -> IndicatorSeries:
    return IndicatorSeries(
        name=f"EMA({n})",
        values=ema_values(series.closes, n),
        valid_from=1,
        dates=series.dates,
        params={"n": n},
    )


def macd(series: BarSeries, short_n: int = 12, long_n: int = 26) -> IndicatorSeries:
    """MACD line: EMA(short_n) of close minus EMA(long_n) of close.

    No signal line; both EMAs seed at bar 1 so the line does too.
    """
    _check_window(short_n, "short window")
    _check_window(long_n, "long window")
    if short_n >= long_n:
        raise ValueError(f"MACD short window ({short_n}) must be below long window ({long_n})")
    fast = ema_values(series.closes, short_n)
    slow = ema_values(series.closes, long_n)
    return IndicatorSeries(
        name=f"MACD({short_n},{long_n})",
        values=fast - slow,
        valid_from=1,
        dates=series.dates,
        params={"short_n": short_n, "long_n": long_n},
    )

