import json

import pytest

from fbmgreeks.cli import main

CONFIG = """\
estimator = pathwise-delta
hurst = 0.6
n2 = 6
paths = 50
alpha = 0.05
seed = 42

[model]
sigma = paper_sigma()
payoff = square()
x0 = 1
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "scenario.cfg"
    path.write_text(CONFIG)
    return path


def test_run_writes_report_and_trace(config_file, tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["run", str(config_file), "--out", str(out)])
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["estimator_kind"] == "pathwise_delta"
    assert report["n"] == 50
    lines = (out / "trace.csv").read_text().strip().splitlines()
    assert lines[0] == "i,theta,ci_low,ci_high"
    assert len(lines) == 51
    captured = capsys.readouterr().out
    assert "confidence interval" in captured


def test_repeat_runs_are_byte_identical(config_file, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(config_file), "--out", str(out1)]) == 0
    assert main(["run", str(config_file), "--out", str(out2)]) == 0
    assert (out1 / "report.json").read_bytes() == (out2 / "report.json").read_bytes()
    assert (out1 / "trace.csv").read_bytes() == (out2 / "trace.csv").read_bytes()


def test_flags_override_file_values(config_file, tmp_path):
    out = tmp_path / "o"
    code = main(["run", str(config_file), "--paths", "60", "--seed", "7", "--out", str(out)])
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["n"] == 60
    assert report["seed"]["master"] == 7


def test_flags_alone_suffice_with_preset(tmp_path):
    out = tmp_path / "o"
    code = main([
        "run", "--scenario", "paper-8.2", "--estimator", "pathwise-delta",
        "--seed", "3", "--n2", "6", "--paths", "40", "--out", str(out),
    ])
    assert code == 0
    assert (out / "report.json").exists()


def test_config_output_section_sets_paths(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = tmp_path / "s.cfg"
    cfg.write_text(CONFIG + "\n[output]\nreport = files/rep.json\ntrace = files/tr.csv\n")
    assert main(["run", str(cfg)]) == 0
    assert (tmp_path / "files" / "rep.json").exists()
    assert (tmp_path / "files" / "tr.csv").exists()


def test_explicit_report_flag_beats_config(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text(CONFIG + "\n[output]\nreport = ignored.json\n")
    target = tmp_path / "wanted.json"
    assert main(["run", str(cfg), "--report", str(target), "--trace", str(tmp_path / "t.csv")]) == 0
    assert target.exists()
    assert not (tmp_path / "ignored.json").exists()


def test_validate_prints_normalized_form(config_file, capsys):
    assert main(["validate", str(config_file)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("estimator = pathwise-delta")
    assert "sigma = paper_sigma()" in out


def test_config_error_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("estimator = pathwise-delta\nhurst = 0.4\n")
    code = main(["run", str(bad), "--out", str(tmp_path)])
    assert code == 2
    assert "error[config]" in capsys.readouterr().err


def test_unknown_key_error_carries_line(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text(CONFIG + "mystery = 1\n")
    assert main(["validate", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "line 12" in err and "mystery" in err


def test_missing_config_file_is_io_error(tmp_path, capsys):
    code = main(["run", str(tmp_path / "nope.cfg")])
    assert code == 4
    assert "error[io]" in capsys.readouterr().err


def test_weight_delta_brownian_scenario_brackets_the_analytic_value(tmp_path):
    cfg = tmp_path / "w.cfg"
    cfg.write_text(
        "estimator = weight-delta\nhurst = 0.5\nn2 = 7\npaths = 1500\n"
        "alpha = 0.05\nseed = 101\n\n[model]\nsigma = constant(1.5)\n"
        "payoff = square()\nx0 = 1\n"
    )
    out = tmp_path / "o"
    assert main(["run", str(cfg), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["estimator_kind"] == "weight_delta"
    assert report["ci_low"] <= 2.0 <= report["ci_high"]
