"""SUTTE%L, SUTTE%H and SUTTE-PRED.

For bar k (k >= 2), with close C, previous close C', low L and high H::

    SUTTE%L    = (C + C')/2 + (C - L)
    SUTTE%H    = (C + C')/2 + (H - C)
    SUTTE-PRED = (SUTTE%L + SUTTE%H)/2

SUTTE-PRED at bar k is used as the forecast of the next close. Bars are
taken verbatim, so OHLC-inconsistent input still produces numbers.
"""

from __future__ import annotations

import numpy as np

from .errors import InsufficientDataError
from .indicators import IndicatorSeries
from .market_data import BarSeries

SUTTE_L = "SUTTE%L"
SUTTE_H = "SUTTE%H"
SUTTE_PRED = "SUTTE-PRED"


def _require_two(series: BarSeries, name: str) -> None:
    if len(series) < 2:
        raise InsufficientDataError(
            f"{name} needs at least 2 bars, {series.symbol} has {len(series)}"
        )


def _midpoint(series: BarSeries) -> np.ndarray:
    c = series.closes
    return (c[1:] + c[:-1]) / 2


def _wrap(series: BarSeries, name: str, values: np.ndarray) -> IndicatorSeries:
    return IndicatorSeries(name=name, values=values, valid_from=2, dates=series.dates[1:])


def sutte_l_values(series: BarSeries) -> np.ndarray:
    _require_two(series, SUTTE_L)
    return _midpoint(series) + (series.closes[1:] - series.lows[1:])


def sutte_h_values(series: BarSeries) -> np.ndarray:
    _require_two(series, SUTTE_H)
    return _midpoint(series) + (series.highs[1:] - series.closes[1:])


def sutte_l(series: BarSeries) -> IndicatorSeries:
    return _wrap(series, SUTTE_L, sutte_l_values(series))


def sutte_h(series: BarSeries) -> IndicatorSeries:
    return _wrap(series, SUTTE_H, sutte_h_values(series))


def sutte_pred(series: BarSeries) -> IndicatorSeries:
    """Mean of the two Sutte curves, computed from them so the identity is exact."""
    _require_two(series, SUTTE_PRED)
    return _wrap(series, SUTTE_PRED, (sutte_l_values(series) + sutte_h_values(series)) / 2)


def sutte_all(series: BarSeries) -> tuple[IndicatorSeries, IndicatorSeries, IndicatorSeries]:
    """``(SUTTE%L, SUTTE%H, SUTTE-PRED)`` in one pass."""
    _require_two(series, f"{SUTTE_L}, {SUTTE_H} and {SUTTE_PRED}")
    low = sutte_l_values(series)
    high = sutte_h_values(series)
    return (
        _wrap(series, SUTTE_L, low),
        _wrap(series, SUTTE_H, high),
        _wrap(series, SUTTE_PRED, (low + high) / 2),
    )
