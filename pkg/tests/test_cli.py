import io
import json
import re
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from conftest import FIXTURES
from sutte.cli import main
from sutte.config import RunConfig, UsageError, build_config, read_config_file, split_methods

SVG_NS = "{http://www.w3.org/2000/svg}"


def run(*args, out_dir=None, input="sample60.csv", symbol="AALI"):
    argv = list(args)
    if input is not None:
        argv += ["--input", input if "://" in input else str(FIXTURES / input)]
    if symbol is not None:
        argv += ["--symbol", symbol]
    if out_dir is not None:
        argv += ["--out", str(out_dir)]
    buf = io.StringIO()
    code = main(argv, out=buf)
    return code, buf.getvalue()


class TestFetch:
    def test_lenient(self, tmp_path):
        code, text = run("fetch", out_dir=tmp_path)
        assert code == 0
        assert (tmp_path / "raw" / "AALI.csv").read_bytes() == (FIXTURES / "sample60.csv").read_bytes()
        report = json.loads((tmp_path / "raw" / "AALI.validation.json").read_text())
        assert report["rows_checked"] == 60 and report["issues"] == []
        assert "60 rows checked" in text

    def test_strict_rejects_inconsistent(self, tmp_path, capsys):
        code, _ = run("fetch", "--strict", out_dir=tmp_path, input="inconsistent.csv")
        assert code == 2
        report = json.loads((tmp_path / "raw" / "AALI.validation.json").read_text())
        assert {i["severity"] for i in report["issues"]} == {"error"}

    def test_lenient_warns_on_inconsistent(self, tmp_path, capsys):
        code, text = run("fetch", out_dir=tmp_path, input="inconsistent.csv")
        assert code == 0
        assert "[warning] row 5 high: high < close" in text

    def test_null_rows(self, tmp_path):
        code, text = run("fetch", out_dir=tmp_path, input="with_null.csv")
        assert code == 0
        assert "11 rows checked" in text and "row dropped" in text

    def test_unreachable(self, tmp_path, capsys):
        code, _ = run("fetch", "--timeout", "2", out_dir=tmp_path, input="http://127.0.0.1:9/x.csv")
        assert code == 3
        assert "network error" in capsys.readouterr().err
        assert not (tmp_path / "raw").exists()

    def test_missing_file(self, tmp_path):
        code, _ = run("fetch", out_dir=tmp_path, input="nope.csv")
        assert code == 2


class TestValidate:
    def test_exit_codes(self, tmp_path):
        assert run("validate", out_dir=tmp_path, input="inconsistent.csv")[0] == 0
        assert run("validate", "--strict", out_dir=tmp_path, input="inconsistent.csv")[0] == 2
        assert not (tmp_path / "raw" / "AALI.csv").exists()


class TestUsage:
    @pytest.mark.parametrize(
        "argv",
        [
            ["indicators", "--input", "x.csv"],  # no symbol
            ["bogus"],
            ["indicators", "--symbol", "A", "--macd", "26,12"],
            ["indicators", "--symbol", "A", "--macd", "12"],
            ["indicators", "--symbol", "A", "--start", "20160101"],
            ["indicators", "--symbol", "A", "--sma-window", "0"],
            ["indicators", "--symbol", "A", "--horizon", "0"],
            ["indicators", "--symbol", "A", "--format", "xml"],
            ["indicators", "--symbol", "A/B"],
            [],
        ],
    )
    def test_exit_one(self, argv, tmp_path, capsys):
        assert main(argv + ["--out", str(tmp_path)] if argv else argv, out=io.StringIO()) == 1

    def test_no_input_no_cache(self, tmp_path, capsys):
        assert run("indicators", out_dir=tmp_path, input=None)[0] == 1

    def test_bad_method(self, tmp_path, capsys):
        assert run("evaluate", "--methods", "RSI", out_dir=tmp_path)[0] == 1

    def test_help(self, capsys):
        assert main(["--help"]) == 0
        assert "indicators" in capsys.readouterr().out


class TestIndicators:
    def test_files(self, tmp_path):
        code, _ = run("indicators", out_dir=tmp_path)
        assert code == 0
        files = sorted(p.name for p in (tmp_path / "indicators").iterdir())
        assert files == [
            "AALI.macd_12_26.csv",
            "AALI.sma_5.csv",
            "AALI.sutte_h.csv",
            "AALI.sutte_l.csv",
            "AALI.sutte_pred.csv",
        ]
        for slug in ("sutte_l", "sutte_h", "sutte_pred"):
            lines = (tmp_path / "indicators" / f"AALI.{slug}.csv").read_text().splitlines()
            assert lines[0].startswith("# sutte 0.1.0 config=")
            assert lines[1] == "index,date,value"
            assert lines[2].startswith("2,2016-06-02,")
            assert len(lines) == 2 + 59

    def test_one_bar(self, tmp_path, capsys):
        code, _ = run("indicators", out_dir=tmp_path, input="one_bar.csv")
        assert code == 2
        assert "SUTTE" in capsys.readouterr().err
        assert not (tmp_path / "indicators").exists()

    def test_rerun_identical(self, tmp_path):
        run("indicators", out_dir=tmp_path)
        first = {p.name: p.read_bytes() for p in (tmp_path / "indicators").iterdir()}
        for p in (tmp_path / "indicators").iterdir():
            p.unlink()
        run("indicators", out_dir=tmp_path)
        assert first == {p.name: p.read_bytes() for p in (tmp_path / "indicators").iterdir()}

    def test_json_format(self, tmp_path):
        assert run("indicators", "--format", "json", out_dir=tmp_path)[0] == 0
        record = json.loads((tmp_path / "indicators" / "AALI.sma_5.json").read_text())
        assert record["valid_from"] == 5 and record["params"] == {"n": 5}
        assert len(record["meta"]["config_hash"]) == 16
        assert record["meta"]["config"]["sma_window"] == 5

    def test_window_changes_hash(self, tmp_path):
        run("indicators", out_dir=tmp_path)
        a = (tmp_path / "indicators" / "AALI.sutte_l.csv").read_text()
        run("indicators", "--start", "2016-07-01", out_dir=tmp_path)
        b = (tmp_path / "indicators" / "AALI.sutte_l.csv").read_text()
        assert a.splitlines()[0] != b.splitlines()[0]
        assert b.splitlines()[2].startswith("2,2016-07-04,")


class TestSignals:
    def test_engineered_single_buy(self, tmp_path):
        code, text = run("signals", out_dir=tmp_path, input="one_cross.csv", symbol="X")
        assert code == 0
        rows = (tmp_path / "signals" / "X.csv").read_text().splitlines()
        assert rows[1:] == ["date,kind,sutte_l,sutte_h", "2016-03-09,Buy,106.0,102.0"]
        assert "1 signal(s): 1 buy, 0 sell" in text

    def test_monotone(self, tmp_path):
        code, text = run("signals", out_dir=tmp_path, input="monotone.csv", symbol="X")
        assert code == 0
        assert text.startswith("0 signal(s)")
        assert len((tmp_path / "signals" / "X.csv").read_text().splitlines()) == 2

    def test_reuses_matching_cache(self, tmp_path):
        run("indicators", out_dir=tmp_path)
        path = tmp_path / "indicators" / "AALI.sutte_l.csv"
        before = path.stat().st_mtime_ns
        assert run("signals", out_dir=tmp_path)[0] == 0
        assert path.stat().st_mtime_ns == before

    def test_stale_cache_recomputed(self, tmp_path):
        run("indicators", out_dir=tmp_path)
        assert run("signals", "--sma-window", "10", out_dir=tmp_path)[0] == 0
        head = (tmp_path / "indicators" / "AALI.sutte_l.csv").read_text().splitlines()[0]
        assert '"sma_window":10' in head

    def test_mixed_cache_is_integrity_error(self, tmp_path, capsys):
        run("indicators", out_dir=tmp_path)
        path = tmp_path / "indicators" / "AALI.sutte_h.csv"
        text = path.read_text()
        path.write_text(re.sub(r"config=\w+", "config=0000000000000000", text, count=1))
        assert run("signals", out_dir=tmp_path)[0] == 2
        assert "different runs" in capsys.readouterr().err

    def test_min_duration_flag(self, tmp_path):
        _, text0 = run("signals", out_dir=tmp_path)
        _, text3 = run("signals", "--min-duration", "3", out_dir=tmp_path)
        n0 = int(text0.split()[0])
        n3 = int(text3.split()[0])
        assert n3 < n0

    def test_json(self, tmp_path):
        run("signals", "--format", "json", out_dir=tmp_path, input="one_cross.csv", symbol="X")
        payload = json.loads((tmp_path / "signals" / "X.json").read_text())
        assert [s["kind"] for s in payload["signals"]] == ["Buy"]


class TestEvaluate:
    def test_three_rows(self, tmp_path):
        code, text = run("evaluate", out_dir=tmp_path)
        assert code == 0
        rows = text.splitlines()[2:]
        assert [r.split("|")[0].strip() for r in rows] == ["SUTTE-PRED", "SMA(5)", "MACD(12,26)"]
        assert {r.split("|")[-1].strip() for r in rows} == {"55"}
        payload = json.loads((tmp_path / "reports" / "AALI.json").read_text())
        assert len(payload["reports"]) == 3
        assert (tmp_path / "reports" / "AALI.txt").read_text().endswith(text)

    def test_constant(self, tmp_path):
        code, text = run("evaluate", out_dir=tmp_path, input="constant.csv", symbol="C")
        assert code == 0
        rows = {r.split("|")[0].strip(): [c.strip() for c in r.split("|")[1:4]] for r in text.splitlines()[2:]}
        assert rows["SUTTE-PRED"] == rows["SMA(5)"] == ["0.000"] * 3
        assert rows["MACD(12,26)"][2] == "100.000"

    def test_only_sutte(self, tmp_path):
        code, text = run("evaluate", "--methods", "SUTTE", out_dir=tmp_path)
        assert code == 0
        assert len(text.splitlines()) == 3

    def test_custom_windows(self, tmp_path):
        code, text = run("evaluate", "--sma-window", "3", "--macd", "5,10", "--horizon", "2", out_dir=tmp_path)
        assert code == 0
        assert "SMA(3)" in text and "MACD(5,10)" in text
        payload = json.loads((tmp_path / "reports" / "AALI.json").read_text())
        assert {r["horizon"] for r in payload["reports"]} == {2}

    def test_insufficient(self, tmp_path, capsys):
        assert run("evaluate", out_dir=tmp_path, input="one_bar.csv")[0] == 2


class TestPlot:
    def test_chart(self, tmp_path):
        code, _ = run("plot", out_dir=tmp_path)
        assert code == 0
        svg = tmp_path / "figures" / "AALI.svg"
        root = ET.parse(svg).getroot()
        groups = {g.get("id"): g for g in root.iter(f"{SVG_NS}g") if g.get("id")}
        series = [k for k in groups if k.startswith("series-")]
        assert sorted(series) == ["series-close", "series-sutte-h", "series-sutte-l", "series-sutte-pred"]
        for k in series:
            assert len(list(groups[k].iter(f"{SVG_NS}path"))) == 1
        n_signals = len((tmp_path / "signals" / "AALI.csv").read_text().splitlines()) - 2
        markers = [k for k in groups if k.startswith("signal-")]
        assert len(markers) == n_signals == 29
        assert all(len(list(groups[k].iter(f"{SVG_NS}use"))) == 1 for k in markers)
        long_rows = (tmp_path / "figures" / "AALI.long.csv").read_text().splitlines()
        assert long_rows[1] == "date,series,value"
        assert len(long_rows) == 2 + 60 + 3 * 59 + 29

    def test_no_signals(self, tmp_path):
        assert run("plot", out_dir=tmp_path, input="monotone.csv", symbol="M")[0] == 0
        root = ET.parse(tmp_path / "figures" / "M.svg").getroot()
        assert not [g for g in root.iter(f"{SVG_NS}g") if (g.get("id") or "").startswith("signal-")]

    def test_empty_window_writes_nothing(self, tmp_path, capsys):
        out = tmp_path / "out"
        code, _ = run("plot", "--start", "2010-01-01", "--end", "2010-12-31", out_dir=out)
        assert code == 2
        assert not out.exists()


class TestConfig:
    def test_file_and_precedence(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            f"input = {FIXTURES / 'sample60.csv'}\nsymbol = AALI  # ticker\n"
            "sma_window = 3\nmacd_windows = 5,10\noutput_format = json\n"
        )
        code, text = run("evaluate", "--config", str(cfg), "--sma-window", "4",
                         out_dir=tmp_path / "o", input=None, symbol=None)
        assert code == 0
        assert "SMA(4)" in text and "MACD(5,10)" in text
        assert (tmp_path / "o" / "indicators" / "AALI.sma_4.json").exists()

    def test_unknown_key(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("colour = blue\n")
        with pytest.raises(UsageError):
            read_config_file(cfg)
        assert main(["indicators", "--config", str(cfg)], out=io.StringIO()) == 1

    def test_date_window_key(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("symbol = A\ndate_window = 2016-01-01,2016-02-01\nstrict_validation = yes\n")
        config = build_config(read_config_file(cfg), {})
        assert str(config.start) == "2016-01-01" and config.strict_validation is True

    def test_env_cache_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SUTTE_CACHE_DIR", str(tmp_path / "cache"))
        code, _ = run("indicators")
        assert code == 0
        assert (tmp_path / "cache" / "indicators" / "AALI.sutte_l.csv").exists()
        assert RunConfig().output_dir == tmp_path / "cache"

    def test_cached_raw_used_without_input(self, tmp_path):
        run("fetch", out_dir=tmp_path)
        code, text = run("evaluate", out_dir=tmp_path, input=None)
        assert code == 0 and "SUTTE-PRED" in text

    def test_split_methods(self):
        assert split_methods("SUTTE-PRED,SMA(5),MACD(12,26)") == ("SUTTE-PRED", "SMA(5)", "MACD(12,26)")

    def test_hash_ignores_paths(self):
        a = RunConfig(symbol="A", input="x.csv", output_dir="o1").fingerprint("d")
        b = RunConfig(symbol="A", input="y.csv", output_dir="o2", output_format="json").fingerprint("d")
        c = RunConfig(symbol="A", sma_window=6).fingerprint("d")
        assert a == b and a[0] != c[0]


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "sutte.cli", "evaluate", "--input", str(FIXTURES / "sample60.csv"),
         "--symbol", "AALI", "--out", str(tmp_path)],
        capture_output=True, text=True, timeout=60,
    )
    assert proc.returncode == 0, proc.stderr
    assert "SUTTE-PRED" in proc.stdout
