"""Sutte Indicator toolkit for daily OHLC stock bars.

Computes SUTTE%L / SUTTE%H / SUTTE-PRED alongside SMA and MACD baselines,
turns L/H crossovers into buy/sell signals, and scores one-step-ahead
forecasts with MAD, MSE and MAPE.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DataError,
    EmptyWindowError,
    FetchError,
    FetchTimeout,
    HTTPStatusError,
    InsufficientDataError,
    IntegrityError,
    NetworkError,
    NotFoundError,
    ParseError,
    SutteError,
)
from .evaluation import (  # noqa: E402
    EvaluationReport,
    MethodSpec,
    PairedSeries,
    align_forecast,
    compare_methods,
    format_table,
    mad,
    mape,
    mse,
)
from .indicators import IndicatorSeries, ema, macd, sma  # noqa: E402
from .market_data import (  # noqa: E402
    Bar,
    BarSeries,
    ValidationIssue,
    ValidationReport,
    fetch_csv,
    load_series,
    parse_csv,
    serialize_csv,
    slice_by_date,
    validate_series,
)
from .signals import Regime, SignalEvent, SignalKind, detect_crossovers, regime_at  # noqa: E402
from .sutte_indicator import sutte_all, sutte_h, sutte_l, sutte_pred  # noqa: E402

__all__ = [
    "Bar", "BarSeries", "ValidationIssue", "ValidationReport",
    "parse_csv", "serialize_csv", "validate_series", "fetch_csv", "load_series", "slice_by_date",
    "IndicatorSeries", "sma", "ema", "macd",
    "sutte_l", "sutte_h", "sutte_pred", "sutte_all",
    "SignalEvent", "SignalKind", "Regime", "detect_crossovers", "regime_at",
    "PairedSeries", "EvaluationReport", "MethodSpec",
    "align_forecast", "mad", "mse", "mape", "compare_methods", "format_table",
    "SutteError", "DataError", "ParseError", "EmptyWindowError", "InsufficientDataError",
    "IntegrityError", "FetchError", "NetworkError", "FetchTimeout", "HTTPStatusError",
    "NotFoundError",
]
