from __future__ import annotations

import csv
import io
import json

import pytest

from kfibconcat import cli
from kfibconcat.pipeline import (
    CSV_COLUMNS,
    EXIT_MISMATCH,
    EXIT_OK,
    RunConfig,
    emit_report,
    render_json,
    run,
)


@pytest.fixture(scope="module")
def report_a():
    return run(RunConfig(phases=("A",), k_min=3, k_max=10, m_max=30, l_max=30))


@pytest.fixture(scope="module")
def report_b():
    return run(RunConfig(phases=("B",), k_min=3, k_max=4, sample_k=(), precision_digits=300, recheck=False))


def test_phase_a_lists_three_solutions(report_a):
    sols = report_a.phases["A"]["solutions"]
    assert {(s["k"], s["n"], s["m"], s["l"]) for s in sols} == {(3, 7, 3, 4), (3, 8, 4, 4), (8, 16, 6, 9)}
    assert report_a.exit_code == EXIT_OK


def test_json_schema(report_a):
    d = json.loads(emit_report(report_a, "json"))
    assert d["schema_version"] == 1
    for s in d["phases"]["A"]["solutions"]:
        assert set(s) >= {"k", "n", "m", "l", "d", "value"}
        assert isinstance(s["value"], str)


def test_text_verdict(report_a):
    assert "paper constants reproduced: yes" in emit_report(report_a, "text")


def test_phase_b_csv(report_b):
    rows = list(csv.reader(io.StringIO(emit_report(report_b, "csv"))))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert [int(r[0]) for r in rows[1:]] == [3, 4]


def test_phase_b_record_is_replayable(report_b):
    rec = report_b.phases["B"]["per_k"][0]
    assert rec["k"] == 3 and int(rec["M"]) > 0
    assert rec["m_bound"] == rec["nl_bound"] + 2
    assert rec["reduction"]["grid"] == {"m": [1, rec["m_bound"] - 1], "n_minus_l": [1, rec["nl_bound"] - 1]}
    assert [(s["n"], s["m"], s["l"]) for s in rec["window_search"]["solutions"]] == [(7, 3, 4), (8, 4, 4)]


def test_replay_is_deterministic(report_b):
    again = run(RunConfig(phases=("B",), k_min=3, k_max=4, sample_k=(), precision_digits=300, recheck=False))
    assert render_json(again, include_timing=False) == render_json(report_b, include_timing=False)


def test_cache_roundtrip(tmp_path):
    cfg = dict(phases=("B",), k_min=3, k_max=3, sample_k=(), precision_digits=300, recheck=False,
               cache_dir=str(tmp_path))
    first = run(RunConfig(**cfg))
    assert list(tmp_path.iterdir())
    second = run(RunConfig(**cfg))
    assert render_json(first, False) == render_json(second, False)


def test_cache_dir_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("KFIBCONCAT_CACHE_DIR", str(tmp_path))
    assert RunConfig(phases=("A",)).cache_dir == str(tmp_path)


def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig(phases=())
    with pytest.raises(ValueError):
        RunConfig(phases=("D",))
    with pytest.raises(ValueError):
        RunConfig(phases=("B",), precision_digits=100)
    assert RunConfig(phases=("A",), long_run=True).k_max == 420


def test_sample_mismatch_sets_exit_code():
    rep = run(RunConfig(phases=("B",), k_min=3, k_max=3, sample_k=(), precision_digits=300, recheck=False))
    checks = {c["name"]: c for c in rep.printed_checks}
    assert "B.n1_bound[k=3]" in checks
    if not checks["B.n1_bound[k=3]"]["holds"]:
        assert rep.exit_code == EXIT_MISMATCH
    assert "paper constants reproduced: no" in emit_report(rep, "text") or rep.printed_reproduced


def test_cli_writes_report(tmp_path):
    out = tmp_path / "r.json"
    code = cli.main(["--phases", "A", "--k-max", "10", "--m-max", "30", "--l-max", "30", "--out", str(out)])
    assert code == EXIT_OK
    d = json.loads(out.read_text())
    assert len(d["phases"]["A"]["solutions"]) == 3
    assert not list(tmp_path.glob("*.tmp"))


def test_cli_rejects_bad_config(capsys):
    assert cli.main(["--phases", "B", "--precision-digits", "50"]) == 64
    assert "precision" in capsys.readouterr().err


def test_cli_text_to_stdout(capsys):
    cli.main(["--phases", "A", "--k-max", "4", "--m-max", "10", "--l-max", "10", "--format", "text"])
    assert "paper constants reproduced" in capsys.readouterr().out
