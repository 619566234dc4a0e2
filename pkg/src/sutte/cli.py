"""``sutte`` command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data or validation error,
3 network error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .config import RunConfig, UsageError, build_config, read_config_file, split_methods
from .config import parse_date, parse_windows
from .errors import DataError, FetchError, IntegrityError
from .evaluation import MethodSpec, compare_methods, format_table, reports_to_json
from .indicators import IndicatorSeries, macd, sma
from .market_data import (
    BarSeries,
    ValidationReport,
    parse_csv,
    read_source,
    slice_by_date,
    validate_series,
)
from .signals import detect_crossovers, signals_to_csv, signals_to_json, summarize
from .sutte_indicator import SUTTE_H, SUTTE_L, SUTTE_PRED, sutte_all

logger = logging.getLogger("sutte")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NETWORK = 0, 1, 2, 3
COMMANDS = ("fetch", "validate", "indicators", "signals", "evaluate", "plot")


class ValidationFailed(DataError):
    def __init__(self, report: ValidationReport):
        super().__init__(f"{report.symbol}: {len(report.errors)} validation error(s) under strict mode")
        self.report = report


def _slug(name: str) -> str:
    return {
        SUTTE_L: "sutte_l",
        SUTTE_H: "sutte_h",
        SUTTE_PRED: "sutte_pred",
    }.get(name) or name.lower().replace("(", "_").replace(")", "").replace(",", "_")


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


class Pipeline:
    """Shared state for one invocation: loaded bars, headers, artifact paths."""

    def __init__(self, config: RunConfig, out=sys.stdout):
        self.config = config
        self.out = out
        self.root = Path(config.output_dir)
        self._raw_text: Optional[str] = None
        self._full: Optional[BarSeries] = None
        self._series: Optional[BarSeries] = None
        self.report: Optional[ValidationReport] = None

    # paths ---------------------------------------------------------------

    @property
    def raw_path(self) -> Path:
        return self.root / "raw" / f"{self.config.symbol}.csv"

    def indicator_path(self, name: str) -> Path:
        return self.root / "indicators" / f"{self.config.symbol}.{_slug(name)}.{self.config.output_format}"

    # loading -------------------------------------------------------------

    def raw_text(self) -> str:
        if self._raw_text is None:
            if self.config.input:
                self._raw_text = read_source(self.config.input, timeout=self.config.timeout)
            elif self.raw_path.exists():
                logger.info("using cached raw data %s", self.raw_path)
                self._raw_text = self.raw_path.read_text(encoding="utf-8")
            else:
                raise UsageError(f"no --input given and no cached data at {self.raw_path}")
        return self._raw_text

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.raw_text().encode("utf-8")).hexdigest()

    @property
    def header(self) -> str:
        return self.config.header(self.digest)

    @property
    def meta(self) -> dict:
        fingerprint, echoed = self.config.fingerprint(self.digest)
        return {"tool": f"sutte {__version__}", "config_hash": fingerprint, "config": echoed}

    def check(self) -> ValidationReport:
        full = self._full = parse_csv(self.raw_text(), self.config.symbol)
        self.report = validate_series(full, strict=self.config.strict_validation)
        for issue in self.report.warnings:
            logger.warning("%s row %d %s: %s", full.symbol, issue.row, issue.field, issue.description)
        return self.report

    def series(self) -> BarSeries:
        """Parsed, validated and windowed bars. Raises before anything is written."""
        if self._series is None:
            if self.report is None:
                self.check()
            full = self._full
            if not self.report.ok:
                raise ValidationFailed(self.report)
            c = self.config
            if c.start or c.end:
                full = slice_by_date(full, c.start or full.first_date, c.end or full.last_date)
            self._series = full
        return self._series

    def persist_raw(self) -> Path:
        text = self.raw_text()
        if not (self.raw_path.exists() and self.raw_path.read_text(encoding="utf-8") == text):
            _write(self.raw_path, text)
        return self.raw_path

    # indicators ----------------------------------------------------------

    def compute_indicators(self) -> dict[str, IndicatorSeries]:
        s = self.series()
        c = self.config
        low, high, pred = sutte_all(s)
        return {
            low.name: low,
            high.name: high,
            pred.name: pred,
            f"SMA({c.sma_window})": sma(s, c.sma_window),
            "MACD({},{})".format(*c.macd_windows): macd(s, *c.macd_windows),
        }

    def _indicator_names(self) -> list[str]:
        c = self.config
        return [SUTTE_L, SUTTE_H, SUTTE_PRED, f"SMA({c.sma_window})", "MACD({},{})".format(*c.macd_windows)]

    def _cached_hash(self, path: Path) -> Optional[str]:
        if not path.exists():
            return None
        text = path.read_text(encoding="utf-8")
        if self.config.output_format == "json":
            try:
                return json.loads(text).get("meta", {}).get("config_hash")
            except (json.JSONDecodeError, AttributeError):
                return ""
        first = text.split("\n", 1)[0]
        for token in first.split():
            if token.startswith("config="):
                return token[len("config="):]
        return ""

    def _load_indicator(self, path: Path, name: str) -> IndicatorSeries:
        text = path.read_text(encoding="utf-8")
        if self.config.output_format == "json":
            return IndicatorSeries.from_dict(json.loads(text))
        c = self.config
        params = {}
        if name.startswith("SMA"):
            params = {"n": c.sma_window}
        elif name.startswith("MACD"):
            params = {"short_n": c.macd_windows[0], "long_n": c.macd_windows[1]}
        return IndicatorSeries.from_csv(text, name, params)

    def indicators(self) -> dict[str, IndicatorSeries]:
        """Reuse cached indicator files written under the same config, else recompute.

        Files from a mixture of configs are an integrity error rather than
        something to patch over.
        """
        current, _ = self.config.fingerprint(self.digest)
        names = self._indicator_names()
        hashes = {n: self._cached_hash(self.indicator_path(n)) for n in names}
        present = {n: h for n, h in hashes.items() if h is not None}
        matching = [n for n, h in present.items() if h == current]
        if matching and len(matching) != len(present):
            stale = sorted(set(present) - set(matching))
            raise IntegrityError(
                f"cached indicator files come from different runs: {', '.join(stale)} "
                f"do not match config {current}; remove {self.root / 'indicators'} and rerun"
            )
        self.series()
        if len(matching) == len(names):
            logger.info("reusing cached indicators (config %s)", current)
            return {n: self._load_indicator(self.indicator_path(n), n) for n in names}
        computed = self.compute_indicators()
        for ind in computed.values():
            self._write_indicator(ind)
        return computed

    def _write_indicator(self, ind: IndicatorSeries) -> Path:
        path = self.indicator_path(ind.name)
        if self.config.output_format == "json":
            return _write(path, ind.to_json(self.meta))
        return _write(path, ind.to_csv(self.header))

    def signals(self):
        inds = self.indicators()
        events = detect_crossovers(inds[SUTTE_L], inds[SUTTE_H], self.config.min_duration)
        fmt = self.config.output_format
        path = self.root / "signals" / f"{self.config.symbol}.{fmt}"
        if fmt == "json":
            _write(path, signals_to_json(events, self.meta))
        else:
            _write(path, signals_to_csv(events, self.header))
        return inds, events, path


# --------------------------------------------------------------------------
# commands


def _print_report(p: Pipeline, report: ValidationReport) -> None:
    print(report.format_text(), file=p.out)
    payload = {"meta": p.meta, **report.to_dict()}
    _write(p.root / "raw" / f"{p.config.symbol}.validation.json", json.dumps(payload, indent=1) + "\n")


def cmd_fetch(p: Pipeline) -> int:
    report = p.check()
    p.persist_raw()
    _print_report(p, report)
    if not report.ok:
        logger.error("strict validation failed for %s", p.config.symbol)
        return EXIT_DATA
    p.series()
    print(f"raw data stored at {p.raw_path}", file=p.out)
    return EXIT_OK


def cmd_validate(p: Pipeline) -> int:
    report = p.check()
    _print_report(p, report)
    return EXIT_OK if report.ok else EXIT_DATA


def cmd_indicators(p: Pipeline) -> int:
    p.series()
    p.persist_raw()
    inds = p.indicators()
    for name, ind in inds.items():
        print(f"{name:<12} bars {ind.valid_from}..{ind.last_index} -> {p.indicator_path(name)}", file=p.out)
    return EXIT_OK


def cmd_signals(p: Pipeline) -> int:
    p.series()
    p.persist_raw()
    _, events, path = p.signals()
    print(summarize(events), file=p.out)
    print(f"signals written to {path}", file=p.out)
    return EXIT_OK


def cmd_evaluate(p: Pipeline) -> int:
    c = p.config
    series = p.series()
    specs = [MethodSpec.parse(m, c.sma_window, c.macd_windows) for m in c.methods]
    reports = compare_methods(series, specs, c.horizon)
    p.persist_raw()
    p.indicators()
    table = format_table(reports)
    print(table, end="", file=p.out)
    _write(p.root / "reports" / f"{c.symbol}.json", reports_to_json(reports, p.meta))
    _write(p.root / "reports" / f"{c.symbol}.txt", f"# {p.header}\n{table}")
    return EXIT_OK


def cmd_plot(p: Pipeline) -> int:
    from .plotting import long_format_csv, render_chart

    series = p.series()
    p.persist_raw()
    inds, events, _ = p.signals()
    curves = [inds[SUTTE_L], inds[SUTTE_H], inds[SUTTE_PRED]]
    fig_dir = p.root / "figures"
    fig_dir.mkdir(parents=True, exist_ok=True)
    svg = render_chart(series, curves, events, fig_dir / f"{p.config.symbol}.svg")
    long_csv = _write(fig_dir / f"{p.config.symbol}.long.csv", long_format_csv(series, curves, events, p.header))
    print(f"chart written to {svg}", file=p.out)
    print(f"plot data written to {long_csv}", file=p.out)
    return EXIT_OK


HANDLERS = {
    "fetch": cmd_fetch,
    "validate": cmd_validate,
    "indicators": cmd_indicators,
    "signals": cmd_signals,
    "evaluate": cmd_evaluate,
    "plot": cmd_plot,
}


# --------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="flat key = value file with RunConfig fields")
    common.add_argument("--input", help="CSV path or http(s) URL")
    common.add_argument("--symbol", help="ticker used to name artifacts")
    common.add_argument("--start", type=parse_date, help="first date (inclusive)")
    common.add_argument("--end", type=parse_date, help="last date (inclusive)")
    common.add_argument("--sma-window", dest="sma_window", type=int)
    common.add_argument("--macd", dest="macd_windows", type=parse_windows, metavar="S,L")
    common.add_argument("--horizon", type=int)
    common.add_argument("--strict", dest="strict_validation", action="store_true", default=None)
    common.add_argument("--format", dest="output_format", choices=("csv", "json"))
    common.add_argument("--out", dest="output_dir", type=Path, help="artifact directory")
    common.add_argument("--methods", type=split_methods,
                        help="comma list for evaluate, e.g. SUTTE-PRED,SMA(5),MACD(12,26)")
    common.add_argument("--min-duration", dest="min_duration", type=int,
                        help="bars a crossing must hold before it signals (default 0)")
    common.add_argument("--timeout", type=float, help="network timeout in seconds")
    common.add_argument("-v", "--verbose", action="store_true", default=None)

    parser = _Parser(prog="sutte", description="Sutte Indicator analysis of daily OHLC bars.")
    parser.add_argument("--version", action="version", version=f"sutte {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    helps = {
        "fetch": "store the raw CSV and print a validation report",
        "validate": "print a validation report",
        "indicators": "write SUTTE%%L, SUTTE%%H, SUTTE-PRED, SMA and MACD series",
        "signals": "write buy/sell crossover events",
        "evaluate": "print and store the MAD/MSE/MAPE comparison",
        "plot": "write an SVG chart and a long-format CSV",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"sutte: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)

    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config", "verbose")}
    try:
        file_values = read_config_file(args.config) if args.config else {}
        config = build_config(file_values, flags)
        return HANDLERS[args.command](Pipeline(config, out))
    except ValidationFailed as exc:
        print(exc.report.format_text(), file=sys.stderr)
        print(f"sutte: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DataError as exc:
        print(f"sutte: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FetchError as exc:
        print(f"sutte: network error: {exc}", file=sys.stderr)
        return EXIT_NETWORK
    except ValueError as exc:
        print(f"sutte: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
