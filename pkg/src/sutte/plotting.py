"""Static chart export: close price with the three Sutte curves and signal markers."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.dates as mdates  # noqa: E402
import matplotlib.pyplot as plt  # noqa: E402

from .indicators import IndicatorSeries, format_number  # noqa: E402
from .market_data import BarSeries  # noqa: E402
from .signals import SignalEvent, SignalKind  # noqa: E402

# element ids written into the SVG; tests count them
SERIES_GID = {
    "Close": "series-close",
    "SUTTE%L": "series-sutte-l",
    "SUTTE%H": "series-sutte-h",
    "SUTTE-PRED": "series-sutte-pred",
}
SIGNAL_GID_PREFIX = "signal-"

STYLE = {
    "Close": dict(color="0.2", lw=1.4),
    "SUTTE%L": dict(color="tab:green", lw=1.0),
    "SUTTE%H": dict(color="tab:red", lw=1.0),
    "SUTTE-PRED": dict(color="tab:blue", lw=1.0, ls="--"),
}

RC = {
    "svg.hashsalt": "sutte",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
}


def render_chart(
    series: BarSeries,
    curves: Sequence[IndicatorSeries],
    events: Sequence[SignalEvent],
    path: Union[str, Path],
    title: Optional[str] = None,
    figsize: tuple[float, float] = (10.0, 5.0),
) -> Path:
    """Write the chart to ``path``; format follows the suffix (svg, pdf, png).

    Every polyline and marker carries a stable gid so the SVG can be
    inspected. SVG output is byte-stable across runs.
    """
    path = Path(path)
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=figsize)
        try:
            line = ax.plot(series.dates, series.closes, label="Close", **STYLE["Close"])[0]
            line.set_gid(SERIES_GID["Close"])
            for curve in curves:
                line = ax.plot(curve.dates, curve.values, label=curve.name,
                               **STYLE.get(curve.name, {}))[0]
                line.set_gid(SERIES_GID.get(curve.name, f"series-{curve.name.lower()}"))
            for i, e in enumerate(events):
                buy = e.kind is SignalKind.BUY
                marker = ax.plot(
                    [e.date], [e.l_value if buy else e.h_value],
                    marker="^" if buy else "v",
                    color="tab:green" if buy else "tab:red",
                    markersize=8, linestyle="none",
                )[0]
                marker.set_gid(f"{SIGNAL_GID_PREFIX}{i}-{e.kind.value.lower()}")

            locator = mdates.AutoDateLocator()
            ax.xaxis.set_major_locator(locator)
            ax.xaxis.set_major_formatter(mdates.ConciseDateFormatter(locator))
            ax.set_ylabel("price")
            ax.set_title(title or f"{series.symbol}: Sutte Indicator")
            ax.legend(loc="upper left", frameon=False)
            fig.tight_layout()
            metadata = {"Date": None} if path.suffix.lower() in (".svg", ".pdf") else None
            fig.savefig(path, metadata=metadata)
        finally:
            plt.close(fig)
    return path


def long_format_csv(
    series: BarSeries,
    curves: Sequence[IndicatorSeries],
    events: Sequence[SignalEvent] = (),
    header: Optional[str] = None,
) -> str:
    """Tidy ``date,series,value`` rows for external plotting tools.

    Signals appear as rows named ``signal:Buy`` / ``signal:Sell`` whose value
    is the Sutte curve level the marker sits on.
    """
    out = io.StringIO()
    if header:
        out.write(f"# {header}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["date", "series", "value"])
    for d, c in zip(series.dates, series.closes):
        writer.writerow([d.isoformat(), "Close", format_number(c)])
    for curve in curves:
        for _, d, v in curve.points():
            writer.writerow([d.isoformat(), curve.name, format_number(v)])
    for e in events:
        level = e.l_value if e.kind is SignalKind.BUY else e.h_value
        writer.writerow([e.date.isoformat(), f"signal:{e.kind.value}", format_number(level)])
    return out.getvalue()
