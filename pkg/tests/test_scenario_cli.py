import json
import subprocess
import sys

import numpy as np
import pytest

from hetquorum.cli import ERROR, FAILED, OK, main
from hetquorum.requirements import check_all
from hetquorum.scenario import (ScenarioError, bundled, bundled_names, load_scenario,
                                parse_scenario, serialize_scenario)

import configs

EXPECTED = {"alice_eve", "alice_eve_failures", "bosco9", "bosco9_failures", "crash4",
            "byzantine6", "oarcast4", "very_fast_client"}


def test_bundled_names():
    assert set(bundled_names()) == EXPECTED


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_bundled_round_trip(name):
    sc = bundled(name)
    text = serialize_scenario(sc)
    again = parse_scenario(text)
    assert serialize_scenario(again) == text
    if sc.trust is not None:
        for k in ("liar", "crash", "avail", "change", "decide"):
            assert np.array_equal(getattr(sc.trust.tables, k), getattr(again.trust.tables, k))


@pytest.mark.parametrize("name", sorted(EXPECTED - {"oarcast4"}))
def test_bundled_configs_pass(name):
    assert all(r.passed for r in check_all(bundled(name).trust))


def test_alice_eve_bundle_matches_hand_written():
    sc = bundled("alice_eve")
    ref = configs.alice_eve()
    for k in ("liar", "crash", "avail", "change", "decide"):
        assert np.array_equal(getattr(sc.trust.tables, k), getattr(ref.tables, k))


def _doc(**over):
    doc = {"version": 1, "participants": ["a", "b", "c", "d"],
           "trust": {"failures": {"crash": 1, "byzantine": 0}}}
    doc.update(over)
    return json.dumps(doc)


@pytest.mark.parametrize("doc,path", [
    ("{", "line 1"),
    (_doc(version=2), "$.version"),
    (_doc(participants=[]), "$.participants"),
    (_doc(participants=["a", "a"]), "$.participants"),
    (_doc(participants=["a", 3]), "$.participants[1]"),
    (_doc(extra=1), "$"),
    (_doc(trust={"failures": {"crash": -1, "byzantine": 0}}), "$.trust"),
    (_doc(adversary={"crash": ["z"]}), "$.adversary"),
    (_doc(adversary={"byzantine": {"a": "wizard"}}), "$.adversary"),
    (_doc(engine={"selection": "best"}), "$.engine.selection"),
    (_doc(sim={"trials": 0}), "$.sim.trials"),
    (json.dumps({"version": 1, "participants": ["a"]}), "$.trust"),
])
def test_schema_errors_name_their_path(doc, path):
    with pytest.raises(ScenarioError) as ei:
        parse_scenario(doc)
    assert ei.value.path.startswith(path), ei.value.path


def test_label_syntax_error_has_path():
    doc = {"version": 1, "participants": ["a", "b"],
           "trust": {"attack_A": {"a": "{a <-A b}", "b": "{b <-Q a}"},
                     "attack_I": {"a": "{a <-I b}", "b": "{b <-I a}"}}}
    with pytest.raises(ScenarioError) as ei:
        parse_scenario(json.dumps(doc))
    assert ei.value.path.startswith("$.trust.attack_A.b")


def test_load_from_file(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(serialize_scenario(bundled("crash4")))
    assert load_scenario(p).name == "crash4"


def test_sim_config_defaults():
    sc = bundled("crash4")
    sim = sc.sim_config(trials=7)
    assert sim.trials == 7 and sim.seed == sc.seed
    with pytest.raises(ValueError):
        bundled("oarcast4").sim_config()


# -- command line -------------------------------------------------------------

def test_check_ok(capsys):
    assert main(["check", "alice_eve"]) == OK
    assert "alice_eve: PASS" in capsys.readouterr().out


def test_check_json_with_roles(capsys):
    assert main(["check", "alice_eve_failures", "--report", "json"]) == OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["passed"] and doc["roles"]["c"] == "guru"


def test_check_failure_exit(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(_doc(participants=["a", "b", "c"]))
    assert main(["check", str(p)]) == FAILED
    assert "FAIL" in capsys.readouterr().out


def test_check_literal_fails_alice_eve(capsys):
    assert main(["check", "alice_eve", "--literal"]) == FAILED


def test_input_errors_exit_one(tmp_path, capsys):
    assert main(["check", str(tmp_path / "missing.json")]) == ERROR
    p = tmp_path / "broken.json"
    p.write_text("{")
    assert main(["check", str(p)]) == ERROR
    assert "error" in capsys.readouterr().err


def test_search_writes_passing_scenario(tmp_path, capsys):
    attack = tmp_path / "attack.json"
    sc = bundled("alice_eve")
    doc = json.loads(serialize_scenario(sc))
    for k in ("sys_A", "change", "decide"):
        doc["trust"].pop(k)
    attack.write_text(json.dumps(doc))
    out = tmp_path / "found.json"
    assert main(["search", str(attack), "--out", str(out)]) == OK
    assert all(r.passed for r in check_all(load_scenario(out).trust))
    assert main(["check", str(out)]) == OK


def test_search_infeasible(tmp_path, capsys):
    p = tmp_path / "s.json"
    p.write_text(_doc(participants=["a", "b", "c"], trust={"failures": {"crash": 1, "byzantine": 1}}))
    assert main(["search", str(p)]) == FAILED
    assert "infeasible" in capsys.readouterr().out


def test_search_capacity_is_input_error(capsys):
    assert main(["search", "crash4", "--exhaustive"]) == ERROR


def test_simulate_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["simulate", "alice_eve_failures", "--trials", "200", "--seed", "4"]
    assert main(args + ["--out", str(a)]) == OK
    assert main(args + ["--out", str(b), "--jobs", "2"]) == OK
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().startswith("round,fraction_decided,stderr,scenario,trials,seed\n")


def test_report(tmp_path, capsys):
    a = tmp_path / "a.csv"
    main(["simulate", "crash4", "--trials", "50", "--out", str(a)])
    capsys.readouterr()
    assert main(["report", str(a), "--report", "json"]) == OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["curves"][0]["scenario"] == "crash4"
    bad = tmp_path / "bad.csv"
    bad.write_text("nope\n")
    assert main(["report", str(bad)]) == ERROR


def test_oarcast_command(capsys):
    assert main(["oarcast", "oarcast4", "--trials", "200"]) == OK
    out = capsys.readouterr().out
    assert "safety=pass" in out and "divergent=0" in out
    assert main(["oarcast", "crash4"]) == ERROR


def test_console_script_runs():
    r = subprocess.run([sys.executable, "-m", "hetquorum.cli", "check", "crash4",
                        "--report", "json"], capture_output=True, text=True)
    assert r.returncode == OK
    assert json.loads(r.stdout)["passed"]
