import subprocess
import sys

import pytest

from ampsure.bench.cli import build_parser, main


def test_parser_subcommands():
    p = build_parser()
    for cmd in ("recover", "train", "joint", "compare-estimators", "sure-check", "eval"):
        assert p.parse_args([cmd]).command == cmd
    with pytest.raises(SystemExit):
        p.parse_args(["recover", "--profile", "radon"])


def test_main_recover(tmp_path, capsys):
    code = main(["recover", "--out", str(tmp_path), "--seed", "1", "--rate", "0.3",
                 "--set", "synthetic_count=1", "--set", "synthetic-size=32", "--set", "iterations=2"])
    assert code == 0
    assert "outputs written to" in capsys.readouterr().out
    lines = (tmp_path / "metrics.csv").read_text().splitlines()
    assert len(lines) == 2 and lines[1].startswith("synth000,damp-fallback,0.3,")


def test_main_config_file_and_rate_alias(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("synthetic_count = 1\nsynthetic_size = 32\niterations = 2\n", encoding="utf-8")
    assert main(["recover", "--config", str(cfg), "--out", str(tmp_path / "o"), "--set", "rate=0.2"]) == 0
    assert ",0.2," in (tmp_path / "o" / "metrics.csv").read_text()


def test_main_empty_dataset_exit_nonzero(tmp_path, capsys):
    (tmp_path / "empty").mkdir()
    code = main(["recover", "--dataset", str(tmp_path / "empty"), "--out", str(tmp_path / "o")])
    assert code != 0
    assert "error=ConfigError" in capsys.readouterr().err


def test_main_bad_key(tmp_path, capsys):
    assert main(["recover", "--out", str(tmp_path), "--set", "colour=red"]) == 2
    assert "unknown config key" in capsys.readouterr().err


def test_console_script_module_entry(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "ampsure.bench.cli", "sure-check", "--out", str(tmp_path),
                           "--set", "synthetic_count=1", "--set", "synthetic_size=16", "--set", "sure_trials=10"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "sure_check.tsv").exists()
