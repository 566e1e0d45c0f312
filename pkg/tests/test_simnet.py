import numpy as np
import pytest

from hetquorum.config import homogeneous_config
from hetquorum.engine import CountingPredicates
from hetquorum.requirements import FailureAssignment
from hetquorum.simnet import (CSV_COLUMNS, DecisionCurve, SimConfig, initial_values,
                              read_curve_csv, run_experiment, run_trial, strategy,
                              summarize, trial_streams)

import configs


def _sc(**kw):
    kw.setdefault("cfg", homogeneous_config(4, 1, 0))
    return SimConfig(**kw)


def test_everyone_crashed():
    cfg = homogeneous_config(4, 1, 0)
    tr = run_trial(_sc(cfg=cfg, fa=FailureAssignment(crashed=list(cfg.participants))))
    assert all(d is None for d in tr.decisions.values())
    assert not tr.terminated


def test_unanimous_single_trial_is_a_step():
    cfg = homogeneous_config(4, 1, 0)
    sc = _sc(cfg=cfg, trials=1, max_rounds=5, proposals={p: "v" for p in cfg.participants})
    curve = run_experiment(sc)
    assert curve.fraction.tolist() == [1.0] * 5
    assert curve.median == 1 and curve.terminated == 1 and curve.violations == []


def test_distinct_proposals_sorted_like_participants():
    vals = initial_values([str(i) for i in range(12)])
    assert list(vals.values()) == sorted(vals.values())
    assert len(set(vals.values())) == 12


def test_trial_is_deterministic():
    sc = _sc(seed=4)
    a, b = run_trial(sc, 17), run_trial(sc, 17)
    assert a.decisions == b.decisions and a.rounds_run == b.rounds_run


def test_streams_are_independent_of_trial_count():
    x = trial_streams(9, 3, 4)[2].integers(1 << 30, size=4)
    y = trial_streams(9, 3, 4)[2].integers(1 << 30, size=4)
    z = trial_streams(9, 4, 4)[2].integers(1 << 30, size=4)
    assert (x == y).all() and not (x == z).all()


def test_csv_schema_and_determinism():
    sc = _sc(trials=50, seed=3, max_rounds=12, name="h4")
    text = run_experiment(sc).to_csv()
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 13
    assert lines[1].split(",")[3:] == ["h4", "50", "3"]
    assert run_experiment(sc).to_csv() == text
    back = read_curve_csv(text)
    assert back.to_csv() == text


def test_jobs_do_not_change_results():
    sc = _sc(cfg=configs.alice_eve(), trials=40, seed=2, max_rounds=20)
    one = run_experiment(sc)
    many = run_experiment(sc, jobs=3)
    assert one.to_csv() == many.to_csv()
    assert np.array_equal(one.decision_rounds, many.decision_rounds)


def test_percentile_convention():
    c = DecisionCurve("x", 1, 0, np.array([0.2, 0.5, 0.94, 0.95, 1.0]), np.zeros(5),
                      np.zeros(0, dtype=int))
    assert c.median == 2 and c.p95 == 4 and c.percentile(1.0) == 5
    never = DecisionCurve("x", 1, 0, np.array([0.1, 0.2]), np.zeros(2), np.zeros(0, dtype=int))
    assert never.median is None


def test_fractions_monotone_and_bounded():
    curve = run_experiment(_sc(cfg=configs.alice_eve(), trials=100, seed=5, max_rounds=30))
    f = curve.fraction
    assert (np.diff(f) >= -1e-12).all() and f[0] >= 0 and f[-1] <= 1
    assert (curve.stderr >= 0).all()


def test_alice_eve_with_failures_is_safe():
    cfg = configs.alice_eve()
    fa = FailureAssignment(crashed=["b"], byzantine=["a"])
    curve = run_experiment(SimConfig(cfg, fa, trials=200, seed=1, max_rounds=40))
    assert curve.violations == []
    assert curve.terminated == 200


@pytest.mark.parametrize("name", ["equivocator", "per_receiver_equivocator", "silent"])
def test_strategies_keep_gurus_safe(name):
    cfg = homogeneous_config(6, 1, 1)
    fa = FailureAssignment(byzantine={"5": name})
    curve = run_experiment(SimConfig(cfg, fa, trials=100, seed=8, max_rounds=60))
    assert curve.violations == []


def test_unknown_strategy():
    with pytest.raises(ValueError):
        strategy("nonsense")


def test_counting_predicates_without_config():
    sc = SimConfig(None, predicates=CountingPredicates(4, 1, 0), trials=30, seed=1)
    curve = run_experiment(sc)
    assert curve.violations == [] and curve.terminated == 30


def test_unsafe_thresholds_are_caught():
    # deciding on a single vote lets gurus decide different values
    pred = CountingPredicates(4, 1, 0)
    pred.decide = lambda r, m: m != 0
    curve = run_experiment(SimConfig(None, predicates=pred, trials=30, seed=1))
    assert any("agreement" in v for v in curve.violations)


def test_config_validation():
    with pytest.raises(ValueError):
        _sc(trials=0)
    with pytest.raises(ValueError):
        _sc(max_rounds=0)
    with pytest.raises(ValueError):
        _sc(selection="best")
    with pytest.raises(ValueError):
        SimConfig(None)


def test_read_curve_errors():
    with pytest.raises(ValueError):
        read_curve_csv("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_curve_csv(",".join(CSV_COLUMNS) + "\n")
    with pytest.raises(ValueError):
        read_curve_csv(",".join(CSV_COLUMNS) + "\n2,0.1,0,x,1,0\n")


def test_summarize():
    curve = run_experiment(_sc(trials=10, seed=1, max_rounds=8))
    (row,) = summarize([curve])
    assert row["median"] == curve.median and len(row["per_round"]) == 8
    with pytest.raises(ValueError):
        summarize([])
