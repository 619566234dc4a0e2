import datetime as dt
from pathlib import Path

import pytest

from sutte.market_data import Bar, BarSeries, parse_csv

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

_acceptance: list[tuple[str, str]] = []


def make_series(rows, symbol="TEST", start=dt.date(2016, 1, 4)):
    """Build a BarSeries from (open, high, low, close) tuples on consecutive days."""
    bars = [
        Bar(start + dt.timedelta(days=i), float(o), float(h), float(lo), float(c))
        for i, (o, h, lo, c) in enumerate(rows)
    ]
    return BarSeries(symbol, tuple(bars))


def closes_series(closes, symbol="TEST"):
    return make_series([(c, c, c, c) for c in closes], symbol)


@pytest.fixture
def sample_path():
    return FIXTURES / "sample60.csv"


@pytest.fixture
def sample(sample_path):
    return parse_csv(sample_path.read_text(), "AALI")


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _acceptance.append((report.nodeid.split("::", 1)[1], report.outcome.upper()))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{outcome:<8} {name}")
