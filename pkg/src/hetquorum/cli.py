"""``hetquorum`` command line.

Exit status is 0 on success, 2 when a check fails, a search is infeasible
or a simulation observes a safety violation, and 1 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional

from .config import CapacityError
from .oarcast import check_oarcast_liveness, check_oarcast_safety, run_oarcast_experiment
from .requirements import Role, check_all, classify
from .scenario import Scenario, ScenarioError, bundled, bundled_names, load_scenario, serialize_scenario
from .search import synthesize
from .simnet import read_curve_csv, run_experiment, summarize

OK, FAILED, ERROR = 0, 2, 1


def _load(ref: str) -> Scenario:
    """A path, or the name of a bundled scenario."""
    if os.path.exists(ref):
        return load_scenario(ref)
    if ref.removesuffix(".json") in bundled_names():
        return bundled(ref)
    raise ScenarioError(ref, "no such file or bundled scenario")


def _emit(args, doc: dict, text: str) -> None:
    print(json.dumps(doc, indent=2) if args.report == "json" else text)


def _write(path: Optional[str], data: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(data)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(data)


def cmd_check(args) -> int:
    sc = _load(args.scenario)
    reports = []
    if sc.trust is not None:
        reports += check_all(sc.trust, limit=args.limit, literal=args.literal)
    if sc.oarcast is not None:
        reports += [check_oarcast_safety(sc.oarcast, args.limit, args.literal),
                    check_oarcast_liveness(sc.oarcast, args.limit, args.literal)]
    ok = all(r.passed for r in reports)
    doc = {"scenario": sc.name, "passed": ok, "checks": [r.to_dict() for r in reports]}
    lines = [f"{sc.name}: {'PASS' if ok else 'FAIL'}"]
    for r in reports:
        lines.append(f"  {r.name:<24} {'pass' if r.passed else 'FAIL'}")
        for v in r.violations:
            lines.append(f"    {json.dumps(v, sort_keys=True)}")
    if sc.trust is not None and sc.adversary.faulty:
        roles = classify(sc.trust, sc.adversary)
        doc["roles"] = {p: r.value for p, r in roles.items()}
        lines.append("  roles: " + ", ".join(f"{p}={r.value}" for p, r in roles.items()))
    _emit(args, doc, "\n".join(lines))
    return OK if ok else FAILED


def cmd_search(args) -> int:
    sc = _load(args.attack)
    if sc.trust is None:
        raise ScenarioError(args.attack, "no trust section to search over")
    res = synthesize(sc.trust, exhaustive=args.exhaustive)
    doc = {"scenario": sc.name, "feasible": res.feasible, "complete": res.exhaustive,
           "explored": res.explored}
    if not res.feasible:
        why = "infeasible" if res.exhaustive else "no solution found within the node limit"
        _emit(args, doc, f"{sc.name}: {why}")
        return FAILED
    out = Scenario(sc.name, sc.participants, res.config, sc.adversary, sc.selection,
                   sc.proposals, sc.trials, sc.seed, sc.max_rounds, sc.oarcast,
                   sc.description)
    text = serialize_scenario(out)
    if args.out:
        _write(args.out, text)
        _emit(args, doc, f"{sc.name}: feasible; wrote {args.out}")
    else:
        sys.stdout.write(text)
    return OK


def cmd_simulate(args) -> int:
    sc = _load(args.scenario)
    sim = sc.sim_config(args.trials, args.seed, args.max_rounds)
    curve = run_experiment(sim, check=True, jobs=args.jobs)
    if args.out:
        _write(args.out, curve.to_csv())
    summary = summarize([curve])[0]
    summary["violation_examples"] = curve.violations[:5]
    text = (f"{sc.name}: trials={curve.trials} seed={curve.seed} median={curve.median} "
            f"p95={curve.p95} terminated={curve.terminated}/{curve.trials} "
            f"violations={len(curve.violations)}")
    if not args.out or args.out != "-":
        _emit(args, summary, text)
    return FAILED if curve.violations else OK


def cmd_oarcast(args) -> int:
    sc = _load(args.scenario)
    if sc.oarcast is None:
        raise ScenarioError(args.scenario, "no oarcast section")
    safe = check_oarcast_safety(sc.oarcast, 5)
    live = check_oarcast_liveness(sc.oarcast, 5)
    trials = args.trials if args.trials is not None else sc.trials
    seed = args.seed if args.seed is not None else sc.seed
    s = run_oarcast_experiment(sc.oarcast, trials, seed)
    doc = {"scenario": sc.name, "trials": trials, "seed": seed,
           "safety": safe.passed, "liveness": live.passed,
           "divergent": s.divergent, "order_violations": s.order_violations,
           "missed_cease": s.missed_cease, "incomplete": s.incomplete,
           "equivocations_observed": s.equivocations, "examples": s.details[:5]}
    text = (f"{sc.name}: safety={'pass' if safe.passed else 'FAIL'} "
            f"liveness={'pass' if live.passed else 'FAIL'} trials={trials} "
            f"divergent={s.divergent} order_violations={s.order_violations} "
            f"missed_cease={s.missed_cease} incomplete={s.incomplete}")
    if args.out:
        _write(args.out, json.dumps(doc, indent=2) + "\n")
    _emit(args, doc, text)
    ok = safe.passed and live.passed and s.ok()
    return OK if ok else FAILED


def cmd_report(args) -> int:
    curves = []
    for path in args.curves:
        with open(path, encoding="utf-8") as fh:
            curves.append(read_curve_csv(fh.read()))
    rows = summarize(curves)
    for r in rows:
        for k in ("terminated", "violations"):
            r.pop(k)
    lines = []
    for r in rows:
        lines.append(f"{r['scenario']}: trials={r['trials']} seed={r['seed']} "
                     f"median={r['median']} p95={r['p95']}")
        for i, f in enumerate(r["per_round"], start=1):
            lines.append(f"  round {i:>3}  {f:.4f}")
            if f >= 1 - 1e-9:
                break
    _emit(args, {"curves": rows}, "\n".join(lines))
    return OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hetquorum",
                                 description="Heterogeneous-trust consensus toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, sim=False):
        p.add_argument("--report", choices=("json", "text"), default="text")
        if sim:
            p.add_argument("--trials", type=int)
            p.add_argument("--seed", type=int)
            p.add_argument("--out")

    p = sub.add_parser("check", help="check a scenario's trust configuration")
    p.add_argument("scenario")
    p.add_argument("--limit", type=int, default=5, help="violations listed per check")
    p.add_argument("--literal", action="store_true",
                   help="quantify agreement conditions over every liar set of p")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("search", help="synthesize thresholds for attack labels")
    p.add_argument("attack")
    p.add_argument("--out")
    p.add_argument("--exhaustive", action="store_true")
    common(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("simulate", help="decision-round curve over randomized trials")
    p.add_argument("scenario")
    p.add_argument("--max-rounds", type=int)
    p.add_argument("--jobs", type=int, default=1)
    common(p, sim=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oarcast", help="check and simulate an OARcast scenario")
    p.add_argument("scenario")
    common(p, sim=True)
    p.set_defaults(func=cmd_oarcast)

    p = sub.add_parser("report", help="summarize decision-curve CSV files")
    p.add_argument("curves", nargs="+")
    common(p)
    p.set_defaults(func=cmd_report)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, CapacityError, ValueError, OSError) as e:
        print(f"hetquorum: error: {e}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
