import json

import pytest

from curvflow import cli
from curvflow.errors import UsageError
from curvflow.report import SuiteResult, emit


def test_parse_config_and_flag_precedence(tmp_path):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("suite=identities\nN=8\nseed=3\ntol.identity=1e-7\n# comment\n")
    args = _args(config=str(cfgfile), N="8,12,16,24")
    cfg = cli.build_config(args)
    assert cfg.suite == "identities"
    assert cfg.n_list == [8, 12, 16, 24]  # flag overrides file
    assert cfg.seed == 3
    assert cfg.tol["identity"] == 1e-7


def _args(**kw):
    import argparse

    ns = argparse.Namespace(
        config=None, suite=None, N=None, t_grid=None, seed=None, out=None, tol=None
    )
    for k, v in kw.items():
        setattr(ns, k, v)
    return ns


def test_unknown_key_rejected(tmp_path):
    cfgfile = tmp_path / "bad.cfg"
    cfgfile.write_text("nonsense=1\n")
    with pytest.raises(UsageError):
        cli.build_config(_args(config=str(cfgfile)))


def test_malformed_number_reports_line(tmp_path):
    cfgfile = tmp_path / "bad.cfg"
    cfgfile.write_text("seed=xyz\n")
    with pytest.raises(UsageError, match="bad.cfg:1"):
        cli.build_config(_args(config=str(cfgfile)))


def test_zero_in_t_grid_rejected():
    with pytest.raises(UsageError, match="strictly inside"):
        cli.build_config(_args(suite="flow", t_grid="0,0.5"))


def test_unknown_tolerance_name_rejected():
    with pytest.raises(UsageError, match="tolerance"):
        cli.build_config(_args(suite="flow", tol=["no_such_knob=1e-8"]))


def test_entropy_suite_deterministic(tmp_path):
    cfg = cli.RunConfig(suite="entropy", seed=5, out=str(tmp_path / "a"))
    res1 = cli.run_suite(cfg)
    emit(res1, cfg.echo(), cfg.out)
    cfg2 = cli.RunConfig(suite="entropy", seed=5, out=str(tmp_path / "b"))
    res2 = cli.run_suite(cfg2)
    emit(res2, cfg2.echo(), cfg2.out)
    a = (tmp_path / "a" / "summary.json").read_bytes()
    b = (tmp_path / "b" / "summary.json").read_bytes()
    assert a == b


def test_forced_failure_exit_code(tmp_path, capsys):
    rc = cli.main(
        ["identities", "--out", str(tmp_path / "o"), "--tol", "identity=1e-20"]
    )
    assert rc == 1
    assert "FIRST FAILING CHECK" in capsys.readouterr().err


def test_usage_error_exit_code(tmp_path, capsys):
    rc = cli.main(["flow", "--t-grid", "0,0.5", "--out", str(tmp_path / "o")])
    assert rc == 2


def test_nothing_ran_exit_code(tmp_path, monkeypatch, capsys):
    monkeypatch.setitem(cli.SUITE_FUNCS, "entropy", lambda cfg: SuiteResult(suite="entropy"))
    rc = cli.main(["entropy", "--out", str(tmp_path / "o")])
    assert rc == 3
    assert "nothing ran" in capsys.readouterr().err


def test_summary_structure_and_references(tmp_path):
    cfg = cli.RunConfig(suite="entropy", out=str(tmp_path / "out"))
    res = cli.run_suite(cfg)
    emit(res, cfg.echo(), cfg.out)
    payload = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert payload["all_passed"] is True
    assert payload["counts"]["total"] == len(payload["checks"])
    for check in payload["checks"]:
        assert check["reference"]  # every record carries its identity reference
    # CSV series documented by a header row
    series = (tmp_path / "out" / "entropy_series.csv").read_text().splitlines()
    assert series[0] == "family,tau,W,dW_sign"


def test_decay_csv_header(tmp_path):
    cfg = cli.RunConfig(suite="thermostat", out=str(tmp_path / "out"))
    res = cli.run_suite(cfg)
    emit(res, cfg.echo(), cfg.out)
    lines = (tmp_path / "out" / "ricci_decay.csv").read_text().splitlines()
    assert lines[0] == "N,ricci_norm"
