import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from conftest import fixture_path, schema_validator
from stvrla.cli import main

GOLDEN = Path(__file__).parent / "golden"
FIVE = str(fixture_path("five.json"))
DIVERGENT = str(fixture_path("divergent.json"))


def run(*argv):
    out = io.StringIO()
    rc = main(list(argv), out=out)
    return rc, out.getvalue()


def run_json(*argv):
    rc, text = run(*argv, "--json", "-")
    return rc, json.loads(text)


def test_tabulate_text():
    rc, text = run("tabulate", FIVE)
    assert rc == 0
    assert "quota 7001" in text
    assert "winners: c1, c3" in text
    assert "c3=6777.802" in text


def test_tabulate_json_matches_schema():
    rc, doc = run_json("tabulate", FIVE)
    assert rc == 0
    schema_validator("trace").validate(doc)
    assert doc["trace"]["winners"] == ["c1", "c3"]
    assert doc["manifest"]["command"] == "tabulate"
    assert len(doc["manifest"]["input_sha256"]) == 64


def test_tabulate_blt_input():
    rc, doc = run_json("tabulate", str(fixture_path("five.blt")))
    assert rc == 0 and doc["trace"]["winners"] == ["c1", "c3"]


def test_tabulate_strict_tie(tmp_path):
    p = tmp_path / "tie.json"
    p.write_text(json.dumps({"seats": 2, "candidates": list("abcd"), "ballots": [
        {"ranking": ["a"], "count": 10}, {"ranking": ["b"], "count": 4},
        {"ranking": ["c"], "count": 4}, {"ranking": ["d"], "count": 6}]}))
    assert run("tabulate", str(p))[0] == 0
    assert run("tabulate", str(p), "--strict")[0] == 1


def test_batch_check():
    rc, doc = run_json("batch-check", DIVERGENT)
    assert rc == 0
    schema_validator("batch").validate(doc)
    assert doc["batch_check"]["feasible"] is True


def test_plan_frw():
    rc, doc = run_json("plan-frw", FIVE)
    assert rc == 0
    schema_validator("plan").validate(doc)
    assert doc["plan"]["overall_asn"] == 607


def test_plan_frw_infeasible_exit_code():
    rc, doc = run_json("plan-frw", DIVERGENT)
    assert rc == 2
    schema_validator("plan").validate(doc)
    assert doc["plan"]["overall_asn"] is None
    rc, doc = run_json("plan-frw", DIVERGENT, "--batch-first")
    assert rc == 0 and doc["plan"]["batch"]["feasible"]


def test_plan_frw_needs_a_first_round_winner(tmp_path):
    p = tmp_path / "e.json"
    p.write_text(json.dumps({"seats": 2, "candidates": list("abcd"), "ballots": [
        {"ranking": [c], "count": k} for c, k in zip("abcd", (3, 3, 2, 2))]}))
    assert run("plan-frw", str(p))[0] == 1


def test_plan_general():
    rc, doc = run_json("plan-general", FIVE)
    assert rc == 0
    schema_validator("plan").validate(doc)
    assert doc["plan"]["kind"] == "full-rla"
    rc, text = run("plan-general", FIVE)
    assert "definite losers: c2, c4, c5" in text


def test_export_and_simulate(tmp_path):
    plan = tmp_path / "plan.json"
    rc, text = run("export-assertions", FIVE, "--json", str(plan))
    assert rc == 0
    items = json.loads(plan.read_text())
    schema_validator("assertions").validate(items)
    assert {a["type"] for a in items} >= {"IQ", "NL*"}
    rc, doc = run_json("simulate", FIVE, str(plan), "--trials", "20", "--seed", "3")
    assert rc == 0
    schema_validator("simulation").validate(doc)
    assert doc["simulation"]["trials"] == 20
    assert doc["simulation"]["completion_rate"] == 1.0


def test_simulate_a_saved_plan(tmp_path):
    saved = tmp_path / "p.json"
    assert run("plan-general", FIVE, "--json", str(saved))[0] == 0
    rc, doc = run_json("simulate", FIVE, str(saved), "--trials", "10")
    assert rc == 0 and doc["simulation"]["estimated_asn"] == 607


def test_report_dir(tmp_path):
    for cmd, extra in (("tabulate", ["rounds.csv", "tallies.png"]),
                       ("plan-frw", ["assertions.csv", "asn.png", "bounds.csv", "bounds.png"])):
        d = tmp_path / cmd
        assert run(cmd, FIVE, "--report-dir", str(d))[0] == 0
        for name in ["report.json"] + extra:
            assert (d / name).stat().st_size > 0, name
    saved = tmp_path / "plan.json"
    run("export-assertions", FIVE, "--json", str(saved))
    d = tmp_path / "sim"
    assert run("simulate", FIVE, str(saved), "--trials", "5", "--report-dir", str(d))[0] == 0
    for name in ("report.json", "samples.csv", "samples.png"):
        assert (d / name).exists()


def test_environment_defaults(monkeypatch):
    monkeypatch.setenv("STVRLA_RISK_LIMIT", "0.05")
    rc, doc = run_json("plan-frw", FIVE)
    assert doc["manifest"]["parameters"]["risk_limit"] == 0.05
    assert doc["plan"]["overall_asn"] > 607
    monkeypatch.setenv("STVRLA_RISK_LIMIT", "lots")
    assert run("plan-frw", FIVE)[0] == 1


@pytest.mark.parametrize("argv", [
    [], ["frobnicate"], ["tabulate"], ["tabulate", "/no/such/file.json"],
    ["plan-frw", FIVE, "--delta", "abc"], ["plan-frw", FIVE, "--risk-limit", "2"],
    ["simulate", FIVE, FIVE, "--trials", "0"],
])
def test_usage_errors(argv):
    assert run(*argv)[0] == 1


def test_bad_ballots(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"seats": 2, "candidates": ["a"], "ballots": [{"ranking": ["a", "a"]}]}')
    assert run("tabulate", str(p))[0] == 1


def _strip(doc):
    doc = dict(doc)
    doc.pop("manifest", None)
    return doc


@pytest.mark.parametrize("name,argv", [
    ("five_trace", ["tabulate", FIVE]),
    ("five_frw", ["plan-frw", FIVE]),
    ("five_general", ["plan-general", FIVE]),
    ("divergent_trace", ["tabulate", DIVERGENT, "--batch-first"]),
    ("divergent_frw", ["plan-frw", DIVERGENT, "--batch-first"]),
])
def test_golden(name, argv):
    _, doc = run_json(*argv)
    expected = json.loads((GOLDEN / f"{name}.json").read_text())
    assert _strip(doc) == expected


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "stvrla.cli", "tabulate", FIVE],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "winners: c1, c3" in res.stdout
