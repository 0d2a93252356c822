import json

import pytest

from active_eval.cli import main


@pytest.fixture(scope="module")
def pool_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "pool.jsonl"
    code = main(["synth", "--out", str(path), "--size", "300", "--seed", "11"])
    assert code == 0
    return path


def test_synth_reference_flag(tmp_path, capsys):
    path = tmp_path / "ref.jsonl"
    assert main(["synth", "--out", str(path), "--reference"]) == 0
    out = capsys.readouterr().out
    assert "3000 instances" in out
    assert sum(1 for _ in open(path)) == 3000


def test_signals_outputs_csv(pool_file, capsys):
    assert main(["signals", "--pool", str(pool_file)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "id,se,sc"
    assert len(lines) == 301


def test_stratify_reports_table(pool_file, capsys):
    assert main(["stratify", "--pool", str(pool_file), "--strata", "5"]) == 0
    table = json.loads(capsys.readouterr().out)
    assert table["method"] == "adaptive_se"
    assert sum(s["size"] for s in table["strata"]) == 300
    assert table["strata"][0]["mean_sc"] == 1.0  # base stratum


def test_allocate_prints_plan(pool_file, capsys):
    assert main([
        "allocate", "--pool", str(pool_file), "--budget", "30",
        "--alloc-rule", "proxy_neyman",
    ]) == 0
    plan = json.loads(capsys.readouterr().out)
    assert sum(plan["m"]) == 30
    assert plan["rule"] == "proxy_neyman"
    assert all(1 <= m <= n for m, n in zip(plan["m"], plan["sizes"]))


def test_estimate_prints_risk_and_labels(pool_file, capsys):
    assert main([
        "estimate", "--pool", str(pool_file), "--budget", "40", "--seed", "3",
    ]) == 0
    out = capsys.readouterr().out
    assert "risk_estimate=" in out and "labels_used=40" in out


def test_estimate_uniform_method(pool_file, capsys):
    assert main([
        "estimate", "--pool", str(pool_file), "--budget", "40",
        "--method", "uniform",
    ]) == 0
    assert "labels_used=40" in capsys.readouterr().out


def test_run_and_report_round_trip(pool_file, tmp_path, capsys):
    report_path = tmp_path / "report.json"
    assert main([
        "run", "--pool", str(pool_file), "--budgets", "20,40",
        "--trials", "40", "--seed", "5",
        "--methods", "uniform,proxy_neyman", "--out", str(report_path),
    ]) == 0
    assert "cells=4" in capsys.readouterr().out

    assert main(["report", "--report", str(report_path), "--format", "csv"]) == 0
    csv_out = capsys.readouterr().out
    assert csv_out.startswith("method,")
    assert "proxy_neyman" in csv_out

    plot_path = tmp_path / "plot.json"
    assert main([
        "report", "--report", str(report_path), "--format", "plot",
        "--out", str(plot_path),
    ]) == 0
    curves = json.loads(plot_path.read_text())
    assert set(curves) == {"uniform", "proxy_neyman"}


def test_report_savings_view(pool_file, tmp_path, capsys):
    report_path = tmp_path / "report.json"
    assert main([
        "run", "--pool", str(pool_file), "--budgets", "20,40,80",
        "--trials", "120", "--seed", "2",
        "--methods", "uniform,proxy_neyman", "--out", str(report_path),
    ]) == 0
    capsys.readouterr()
    assert main([
        "report", "--report", str(report_path), "--format", "savings",
        "--method", "proxy_neyman", "--m-ref", "80",
    ]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["method"] == "proxy_neyman"
    assert record["m_uniform_ref"] == 80
    if record["resolved"]:
        assert record["matched_m"] <= 80

    assert main([
        "report", "--report", str(report_path), "--format", "savings",
    ]) == 2  # missing --method / --m-ref


def test_run_skips_infeasible_cells(pool_file, tmp_path, capsys):
    report_path = tmp_path / "report.json"
    assert main([
        "run", "--pool", str(pool_file), "--budgets", "3,30",
        "--trials", "10", "--seed", "1",
        "--methods", "uniform,proxy_neyman", "--out", str(report_path),
    ]) == 0
    err = capsys.readouterr().err
    assert "skipped proxy_neyman at M=3" in err


def test_missing_pool_file_is_data_error(capsys):
    assert main(["signals", "--pool", "/nonexistent/pool.jsonl"]) == 3


def test_infeasible_budget_is_config_error(pool_file, capsys):
    code = main([
        "estimate", "--pool", str(pool_file), "--budget", "2", "--strata", "5",
    ])
    assert code == 2
    assert "below the stratum count" in capsys.readouterr().err


def test_unknown_method_is_config_error(pool_file, tmp_path, capsys):
    code = main([
        "run", "--pool", str(pool_file), "--budgets", "20", "--trials", "5",
        "--methods", "nope", "--out", str(tmp_path / "r.json"),
    ])
    assert code == 2


def test_argparse_rejects_unknown_flags(capsys):
    with pytest.raises(SystemExit) as err:
        main(["estimate", "--bogus"])
    assert err.value.code == 2


def test_malformed_pool_is_data_error(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"id": "a", "surrogate_answers": ["A"], "target_loss": 0}\n')
    assert main(["signals", "--pool", str(bad)]) == 3
