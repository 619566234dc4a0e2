"""Run configuration for the command-line pipeline."""

from __future__ import annotations

import configparser
import datetime as dt
import hashlib
import json
import os
import re
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping, Optional

from . import __version__

CACHE_ENV = "SUTTE_CACHE_DIR"
DEFAULT_OUTPUT_DIR = ".sutte_cache"
DEFAULT_METHODS = ("SUTTE-PRED", "SMA", "MACD")
FORMATS = ("csv", "json")


class UsageError(ValueError):
    """Bad command-line or config-file values."""


def default_output_dir() -> Path:
    return Path(os.environ.get(CACHE_ENV) or DEFAULT_OUTPUT_DIR)


def split_methods(text: str) -> tuple[str, ...]:
    """Split ``"SUTTE-PRED,SMA(5),MACD(12,26)"`` on commas outside parentheses."""
    parts = re.findall(r"[^,()]+(?:\([^)]*\))?", text)
    return tuple(p.strip() for p in parts if p.strip())


def parse_windows(text: str) -> tuple[int, int]:
    try:
        short, long = (int(x) for x in str(text).split(","))
    except ValueError:
        raise UsageError(f"expected two comma-separated integers, got {text!r}") from None
    return short, long


def parse_date(text: str) -> dt.date:
    try:
        return dt.date.fromisoformat(str(text).strip())
    except ValueError:
        raise UsageError(f"not an ISO date: {text!r}") from None


def parse_flag(text: str) -> bool:
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off", ""):
        return False
    raise UsageError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class RunConfig:
    input: Optional[str] = None
    symbol: Optional[str] = None
    start: Optional[dt.date] = None
    end: Optional[dt.date] = None
    sma_window: int = 5
    macd_windows: tuple[int, int] = (12, 26)
    horizon: int = 1
    strict_validation: bool = False
    output_dir: Path = field(default_factory=default_output_dir)
    output_format: str = "csv"
    methods: tuple[str, ...] = DEFAULT_METHODS
    min_duration: int = 0
    timeout: float = 10.0

    def validate(self) -> "RunConfig":
        if not self.symbol:
            raise UsageError("a symbol is required (--symbol)")
        if not re.fullmatch(r"[A-Za-z0-9_.^=-]+", self.symbol):
            raise UsageError(f"symbol {self.symbol!r} contains unsupported characters")
        if self.sma_window < 1:
            raise UsageError("sma_window must be >= 1")
        short, long = self.macd_windows
        if short < 1 or long < 1 or short >= long:
            raise UsageError(f"MACD windows must satisfy 1 <= short < long, got {short},{long}")
        if self.horizon < 1:
            raise UsageError("horizon must be >= 1")
        if self.min_duration < 0:
            raise UsageError("min_duration must be >= 0")
        if self.output_format not in FORMATS:
            raise UsageError(f"output_format must be one of {FORMATS}")
        if self.start and self.end and self.start > self.end:
            raise UsageError(f"start {self.start} is after end {self.end}")
        if not self.methods:
            raise UsageError("no evaluation methods given")
        return self

    def content_params(self) -> dict[str, Any]:
        """Settings that change computed artifacts (paths and formats excluded)."""
        return {
            "symbol": self.symbol,
            "start": self.start.isoformat() if self.start else None,
            "end": self.end.isoformat() if self.end else None,
            "sma_window": self.sma_window,
            "macd_windows": list(self.macd_windows),
            "horizon": self.horizon,
            "strict_validation": self.strict_validation,
            "min_duration": self.min_duration,
        }

    def fingerprint(self, input_digest: str) -> tuple[str, dict[str, Any]]:
        """``(hash, echoed settings)`` for artifact headers."""
        echoed = {**self.content_params(), "input_sha256": input_digest}
        canon = json.dumps(echoed, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16], echoed

    def header(self, input_digest: str) -> str:
        digest, echoed = self.fingerprint(input_digest)
        return f"sutte {__version__} config={digest} " + json.dumps(
            echoed, sort_keys=True, separators=(",", ":")
        )

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["output_dir"] = str(self.output_dir)
        d["start"] = self.start.isoformat() if self.start else None
        d["end"] = self.end.isoformat() if self.end else None
        return d


_CONVERTERS = {
    "input": str,
    "symbol": str,
    "start": parse_date,
    "end": parse_date,
    "sma_window": int,
    "macd_windows": parse_windows,
    "horizon": int,
    "strict_validation": parse_flag,
    "output_dir": Path,
    "output_format": lambda s: str(s).strip().lower(),
    "methods": split_methods,
    "min_duration": int,
    "timeout": float,
}


def coerce(values: Mapping[str, Any]) -> dict[str, Any]:
    """Convert raw strings to typed RunConfig fields; unknown keys are errors."""
    names = {f.name for f in fields(RunConfig)}
    out: dict[str, Any] = {}
    for key, raw in values.items():
        key = key.strip().replace("-", "_")
        if key == "date_window":
            start, _, end = str(raw).partition(",")
            out["start"], out["end"] = parse_date(start), parse_date(end)
            continue
        if key not in names:
            raise UsageError(f"unknown config key {key!r}")
        if isinstance(raw, str):
            try:
                raw = _CONVERTERS[key](raw.strip())
            except UsageError:
                raise
            except ValueError as exc:
                raise UsageError(f"bad value for {key}: {exc}") from None
        out[key] = raw
    return out


def read_config_file(path: Path) -> dict[str, Any]:
    """Read a flat ``key = value`` file (``#`` comments allowed)."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise UsageError(f"{path}: {exc}") from None
    return coerce(dict(parser["run"]))


def build_config(file_values: Mapping[str, Any], flag_values: Mapping[str, Any]) -> RunConfig:
    """Flags override file values, which override defaults."""
    merged = {**file_values, **{k: v for k, v in flag_values.items() if v is not None}}
    return replace(RunConfig(), **merged).validate()
