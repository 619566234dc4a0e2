"""Buy/sell events from SUTTE%L / SUTTE%H crossovers."""

from __future__ import annotations

import csv
import datetime as dt
import enum
import io
import json
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import IntegrityError
from .indicators import IndicatorSeries, format_number
from .sutte_indicator import SUTTE_H, SUTTE_L


class SignalKind(str, enum.Enum):
    BUY = "Buy"
    SELL = "Sell"


class Regime(str, enum.Enum):
    BULLISH = "Bullish"
    BEARISH = "Bearish"
    NEUTRAL = "Neutral"


@dataclass(frozen=True)
class SignalEvent:
    bar_index: int
    date: dt.date
    kind: SignalKind
    l_value: float
    h_value: float

    def to_dict(self) -> dict:
        return {
            "bar_index": self.bar_index,
            "date": self.date.isoformat(),
            "kind": self.kind.value,
            "sutte_l": self.l_value,
            "sutte_h": self.h_value,
        }


def _check_pair(l: IndicatorSeries, h: IndicatorSeries) -> None:
    if l.name != SUTTE_L or h.name != SUTTE_H:
        raise IntegrityError(f"expected ({SUTTE_L}, {SUTTE_H}), got ({l.name}, {h.name})")
    if l.valid_from != h.valid_from or len(l) != len(h):
        raise IntegrityError(
            f"{SUTTE_L} covers bars {l.valid_from}..{l.last_index} but "
            f"{SUTTE_H} covers {h.valid_from}..{h.last_index}"
        )
    if l.dates != h.dates:
        raise IntegrityError(f"{SUTTE_L} and {SUTTE_H} carry different dates")


def crossover_events(
    diff: Sequence[float], min_duration: int = 0
) -> list[tuple[int, SignalKind]]:
    """Positions (0-based) and kinds of crossings in the sign of ``diff``.

    ``diff`` is L minus H. Zeros never fire and never reset the regime: a
    run of ties followed by the opposite strict sign fires on the first
    strict bar. The opening regime produces no event. With ``min_duration``
    > 0 a crossing must hold (no strict reversal) for that many further bars
    and is reported on the first strict bar at or past that point.
    """
    if min_duration < 0:
        raise ValueError("min_duration must be >= 0")
    events: list[tuple[int, SignalKind]] = []
    state = 0
    pending_since: Optional[int] = None
    for i, d in enumerate(map(float, diff)):
        s = (d > 0) - (d < 0)
        if state == 0:
            state = s
            continue
        if s == state:
            pending_since = None
            continue
        if s == 0:
            continue
        if pending_since is None:
            pending_since = i
        if i - pending_since >= min_duration:
            events.append((i, SignalKind.BUY if s > 0 else SignalKind.SELL))
            state = s
            pending_since = None
    return events


def detect_crossovers(
    l: IndicatorSeries, h: IndicatorSeries, min_duration: int = 0
) -> list[SignalEvent]:
    """Buy when SUTTE%L moves above SUTTE%H, Sell when it moves below.

    An event at bar k depends only on values at or before k.
    """
    _check_pair(l, h)
    diff = np.asarray(l.values) - np.asarray(h.values)
    return [
        SignalEvent(
            bar_index=l.valid_from + i,
            date=l.dates[i],
            kind=kind,
            l_value=float(l.values[i]),
            h_value=float(h.values[i]),
        )
        for i, kind in crossover_events(diff, min_duration)
    ]


def regime_at(l: IndicatorSeries, h: IndicatorSeries, k: int) -> Regime:
    lv, hv = l.at(k), h.at(k)
    if lv > hv:
        return Regime.BULLISH
    if hv > lv:
        return Regime.BEARISH
    return Regime.NEUTRAL


def signals_to_csv(events: Sequence[SignalEvent], header: Optional[str] = None) -> str:
    out = io.StringIO()
    if header:
        out.write(f"# {header}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["date", "kind", "sutte_l", "sutte_h"])
    for e in events:
        writer.writerow(
            [e.date.isoformat(), e.kind.value, format_number(e.l_value), format_number(e.h_value)]
        )
    return out.getvalue()


def signals_to_json(events: Sequence[SignalEvent], meta: Optional[Mapping] = None) -> str:
    payload: object = [e.to_dict() for e in events]
    if meta is not None:
        payload = {"meta": dict(meta), "signals": payload}
    return json.dumps(payload, indent=1) + "\n"


def summarize(events: Sequence[SignalEvent]) -> str:
    buys = sum(e.kind is SignalKind.BUY for e in events)
    sells = len(events) - buys
    text = f"{len(events)} signal(s): {buys} buy, {sells} sell"
    if events:
        text += f"; first {events[0].date} ({events[0].kind.value}), last {events[-1].date} ({events[-1].kind.value})"
    return text
