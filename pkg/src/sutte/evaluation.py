"""Forecast pairing, MAD / MSE / MAPE, and side-by-side method comparison."""

from __future__ import annotations

import datetime as dt
import json
import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .errors import InsufficientDataError
from .indicators import IndicatorSeries, macd, sma
from .market_data import BarSeries
from .sutte_indicator import SUTTE_PRED, sutte_pred

MACD_NOTE = "MACD line scored directly against price; errors reflect level mismatch"


@dataclass(frozen=True, eq=False)
class PairedSeries:
    """Realized closes matched with forecasts made ``horizon`` bars earlier.

    ``indices`` are the 1-based target bars t; the forecast for t was the
    indicator value at t - horizon.
    """

    indices: np.ndarray
    actual: np.ndarray
    predicted: np.ndarray
    dates: tuple[dt.date, ...]
    horizon: int = 1
    skipped_zero_actuals: int = 0

    def __post_init__(self):
        for name in ("indices", "actual", "predicted"):
            arr = np.array(getattr(self, name), dtype=int if name == "indices" else float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "dates", tuple(self.dates))
        n = len(self.indices)
        if not (len(self.actual) == len(self.predicted) == len(self.dates) == n):
            raise ValueError("paired arrays differ in length")

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def pairs(self) -> list[tuple[int, float, float]]:
        return [(int(t), float(y), float(f)) for t, y, f in zip(self.indices, self.actual, self.predicted)]

    def restrict(self, targets: Iterable[int]) -> "PairedSeries":
        keep = np.isin(self.indices, np.fromiter(targets, dtype=int))
        return PairedSeries(
            indices=self.indices[keep],
            actual=self.actual[keep],
            predicted=self.predicted[keep],
            dates=tuple(d for d, k in zip(self.dates, keep) if k),
            horizon=self.horizon,
            skipped_zero_actuals=self.skipped_zero_actuals,
        )


def align_forecast(ind: IndicatorSeries, series: BarSeries, horizon: int = 1) -> PairedSeries:
    """Pair ``ind`` at bar k with the close at bar k + horizon.

    Targets with a zero close are left out and counted.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if ind.last_index > len(series):
        raise InsufficientDataError(
            f"{ind.name} runs to bar {ind.last_index} but {series.symbol} has {len(series)} bars"
        )
    first = ind.valid_from + horizon
    last = len(series)
    if first > last:
        raise InsufficientDataError(
            f"{ind.name} with horizon {horizon}: no target bars left in {series.symbol}"
        )
    targets = np.arange(first, last + 1)
    actual = series.closes[targets - 1]
    predicted = ind.values[targets - horizon - ind.valid_from]
    nonzero = actual != 0
    kept = targets[nonzero]
    if len(kept) == 0:
        raise InsufficientDataError(f"{ind.name}: every target close is zero")
    return PairedSeries(
        indices=kept,
        actual=actual[nonzero],
        predicted=predicted[nonzero],
        dates=tuple(series.dates[t - 1] for t in kept),
        horizon=horizon,
        skipped_zero_actuals=int((~nonzero).sum()),
    )


def _require_pairs(p: PairedSeries) -> None:
    if len(p) == 0:
        raise InsufficientDataError("no forecast/actual pairs to score")


# fsum is correctly rounded, so each metric is exactly independent of pair order


def mad(p: PairedSeries) -> float:
    """Mean absolute deviation between actual and predicted."""
    _require_pairs(p)
    return math.fsum(abs(y - f) for y, f in zip(p.actual.tolist(), p.predicted.tolist())) / len(p)


def mse(p: PairedSeries) -> float:
    _require_pairs(p)
    return math.fsum((y - f) ** 2 for y, f in zip(p.actual.tolist(), p.predicted.tolist())) / len(p)


def mape(p: PairedSeries) -> float:
    """Mean absolute percentage error, in percent."""
    _require_pairs(p)
    terms = (abs((y - f) / y) for y, f in zip(p.actual.tolist(), p.predicted.tolist()))
    return math.fsum(terms) / len(p) * 100


# --------------------------------------------------------------------------
# methods


_SPEC_RE = re.compile(r"^\s*([A-Za-z-]+)\s*(?:\(\s*([\d\s,]*)\))?\s*$")


@dataclass(frozen=True)
class MethodSpec:
    """One forecasting method: ``SUTTE-PRED``, ``SMA(n)`` or ``MACD(short,long)``."""

    kind: str
    params: tuple[int, ...] = ()

    @classmethod
    def parse(cls, text: Union[str, "MethodSpec"], sma_window: int = 5,
              macd_windows: tuple[int, int] = (12, 26)) -> "MethodSpec":
        if isinstance(text, MethodSpec):
            return text
        m = _SPEC_RE.match(text)
        if not m:
            raise ValueError(f"unrecognized method {text!r}")
        kind = m.group(1).upper()
        args = tuple(int(a) for a in (m.group(2) or "").replace(" ", "").split(",") if a)
        if kind in ("SUTTE", SUTTE_PRED):
            if args:
                raise ValueError("SUTTE-PRED takes no parameters")
            return cls(SUTTE_PRED)
        if kind == "SMA":
            args = args or (sma_window,)
            if len(args) != 1:
                raise ValueError(f"SMA takes one window, got {text!r}")
            return cls("SMA", args)
        if kind == "MACD":
            args = args or tuple(macd_windows)
            if len(args) != 2:
                raise ValueError(f"MACD takes two windows, got {text!r}")
            return cls("MACD", args)
        raise ValueError(f"unknown method {kind!r}; expected SUTTE-PRED, SMA or MACD")

    @property
    def label(self) -> str:
        if not self.params:
            return self.kind
        return f"{self.kind}({','.join(map(str, self.params))})"

    @property
    def param_map(self) -> dict[str, int]:
        if self.kind == "SMA":
            return {"n": self.params[0]}
        if self.kind == "MACD":
            return {"short_n": self.params[0], "long_n": self.params[1]}
        return {}

    def compute(self, series: BarSeries) -> IndicatorSeries:
        if self.kind == SUTTE_PRED:
            return sutte_pred(series)
        if self.kind == "SMA":
            return sma(series, self.params[0])
        return macd(series, *self.params)


@dataclass(frozen=True)
class EvaluationReport:
    method: str
    params: Mapping[str, int]
    mad: float
    mse: float
    mape: float
    n: int
    horizon: int
    date_range: tuple[dt.date, dt.date]
    skipped_zero_actuals: int = 0
    note: Optional[str] = None

    def to_dict(self) -> dict:
        out = {
            "method": self.method,
            "params": dict(self.params),
            "mse": self.mse,
            "mad": self.mad,
            "mape": self.mape,
            "n": self.n,
            "horizon": self.horizon,
            "date_range": [d.isoformat() for d in self.date_range],
            "skipped_zero_actuals": self.skipped_zero_actuals,
        }
        if self.note:
            out["note"] = self.note
        return out


def score(method: str, p: PairedSeries, params: Optional[Mapping[str, int]] = None,
          note: Optional[str] = None) -> EvaluationReport:
    _require_pairs(p)
    return EvaluationReport(
        method=method,
        params=dict(params or {}),
        mad=mad(p),
        mse=mse(p),
        mape=mape(p),
        n=len(p),
        horizon=p.horizon,
        date_range=(p.dates[0], p.dates[-1]),
        skipped_zero_actuals=p.skipped_zero_actuals,
        note=note,
    )


def compare_methods(
    series: BarSeries,
    methods: Sequence[Union[str, MethodSpec]] = ("SUTTE-PRED", "SMA(5)", "MACD(12,26)"),
    horizon: int = 1,
) -> list[EvaluationReport]:
    """Score each method over the target bars that all of them can forecast.

    Reports come back in the order given and share the same ``n``.
    """
    specs = [MethodSpec.parse(m) for m in methods]
    if not specs:
        raise ValueError("no methods requested")
    paired = {}
    for spec in specs:
        ind = spec.compute(series)
        paired[spec] = align_forecast(ind, series, horizon)
    common = set.intersection(*(set(p.indices.tolist()) for p in paired.values()))
    if not common:
        raise InsufficientDataError(
            f"{series.symbol}: methods {', '.join(s.label for s in specs)} share no target bars"
        )
    return [
        score(
            spec.label,
            paired[spec].restrict(sorted(common)),
            spec.param_map,
            MACD_NOTE if spec.kind == "MACD" else None,
        )
        for spec in specs
    ]


def reports_to_json(reports: Sequence[EvaluationReport], meta: Optional[Mapping] = None) -> str:
    payload: dict = {"reports": [r.to_dict() for r in reports]}
    if meta is not None:
        payload = {"meta": dict(meta), **payload}
    return json.dumps(payload, indent=1) + "\n"


def format_table(reports: Sequence[EvaluationReport]) -> str:
    """Aligned text table: Indicator | MSE | MAD | MAPE | n."""
    head = ("Indicator", "MSE", "MAD", "MAPE", "n")
    rows = [
        (r.method, f"{r.mse:.3f}", f"{r.mad:.3f}", f"{r.mape:.3f}", str(r.n)) for r in reports
    ]
    widths = [max(len(row[i]) for row in [head, *rows]) for i in range(len(head))]

    def fmt(row):
        cells = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        return " | ".join(cells)

    rule = "-+-".join("-" * w for w in widths)
    return "\n".join([fmt(head), rule, *(fmt(r) for r in rows)]) + "\n"
