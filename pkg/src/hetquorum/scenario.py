"""Versioned JSON scenario files.

A scenario names the participants, their trust (explicit labels or the
``{"failures": {"crash": c, "byzantine": b}}`` shorthand), an optional
failure script, engine and simulation options, and optionally an OARcast
configuration.  Unknown keys are rejected; every error carries a JSON path.
Serialization always writes the resolved labels, so parsing a serialized
scenario gives back an equal scenario.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Dict, List, Mapping, Optional, Tuple

from .config import TrustConfig, homogeneous_config, standard_messages
from .label import Label, LabelSyntaxError, parse_label
from .oarcast import OarcastConfig, homogeneous_oarcast
from .principal import Delegations, PrincipalSyntaxError, parse_delegation
from .requirements import FailureAssignment
from .simnet import _STRATEGIES, SimConfig

__all__ = ["Scenario", "ScenarioError", "parse_scenario", "load_scenario",
           "serialize_scenario", "bundled", "bundled_names", "VERSION"]

VERSION = 1
_TOP_KEYS = {"version", "name", "description", "participants", "trust",
             "adversary", "engine", "sim", "oarcast"}
_LABEL_MAPS = ("attack_A", "attack_I", "sys_A", "change", "decide")


class ScenarioError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class Scenario:
    name: str
    participants: Tuple[str, ...]
    trust: Optional[TrustConfig]
    adversary: FailureAssignment = field(default_factory=FailureAssignment)
    selection: str = "uniform"
    proposals: Optional[Mapping[str, str]] = None
    trials: int = 1000
    seed: int = 0
    max_rounds: int = 64
    oarcast: Optional[OarcastConfig] = None
    description: str = ""

    def sim_config(self, trials: Optional[int] = None, seed: Optional[int] = None,
                   max_rounds: Optional[int] = None) -> SimConfig:
        if self.trust is None:
            raise ValueError(f"scenario {self.name!r} has no consensus configuration")
        return SimConfig(
            self.trust, self.adversary, seed=self.seed if seed is None else seed,
            max_rounds=self.max_rounds if max_rounds is None else max_rounds,
            trials=self.trials if trials is None else trials,
            selection=self.selection, proposals=self.proposals, name=self.name)


# -- parsing helpers --------------------------------------------------------

def _obj(v, path: str, keys, required=()) -> dict:
    if not isinstance(v, dict):
        raise ScenarioError(path, "expected an object")
    extra = set(v) - set(keys)
    if extra:
        raise ScenarioError(f"{path}.{sorted(extra)[0]}", "unknown field")
    for k in required:
        if k not in v:
            raise ScenarioError(f"{path}.{k}", "required field missing")
    return v


def _int(v, path: str, lo: int = 0) -> int:
    if isinstance(v, bool) or not isinstance(v, int) or v < lo:
        raise ScenarioError(path, f"expected an integer >= {lo}")
    return v


def _label(text, path: str, P) -> Label:
    if not isinstance(text, str):
        raise ScenarioError(path, "expected a label string")
    try:
        lab = parse_label(text)
    except (LabelSyntaxError, PrincipalSyntaxError) as e:
        raise ScenarioError(path, str(e)) from None
    unknown = lab.atoms() - set(P) - {"top", "bottom"}
    if unknown:
        raise ScenarioError(path, f"unknown participant {sorted(unknown)[0]!r}")
    return lab


def _label_map(v, path: str, P) -> Dict[str, Label]:
    _obj(v, path, P)
    return {p: _label(t, f"{path}.{p}", P) for p, t in v.items()}


def _participant(x, path: str, P) -> str:
    if x not in P:
        raise ScenarioError(path, f"unknown participant {x!r}")
    return x


def _messages(v, path: str, P) -> Dict[Tuple[str, str], Label]:
    if not isinstance(v, dict):
        raise ScenarioError(path, "expected an object")
    out = dict(standard_messages(P))
    for key, text in v.items():
        parts = key.split("->")
        if len(parts) != 2:
            raise ScenarioError(f"{path}.{key}", "message keys look like 'sender->receiver'")
        s, r = (_participant(x.strip(), f"{path}.{key}", P) for x in parts)
        out[(s, r)] = _label(text, f"{path}.{key}", P)
    return out


def _trust(v, P) -> TrustConfig:
    path = "$.trust"
    _obj(v, path, set(_LABEL_MAPS) | {"failures", "messages", "delegations"})
    if "failures" in v:
        if set(v) - {"failures"}:
            raise ScenarioError(path, "'failures' shorthand excludes explicit labels")
        f = _obj(v["failures"], f"{path}.failures", {"crash", "byzantine"}, ("crash", "byzantine"))
        c = _int(f["crash"], f"{path}.failures.crash")
        b = _int(f["byzantine"], f"{path}.failures.byzantine")
        if b > c or c > len(P):
            raise ScenarioError(f"{path}.failures", "need byzantine <= crash <= n")
        return homogeneous_config(P, c, b)
    for k in ("attack_A", "attack_I"):
        if k not in v:
            raise ScenarioError(f"{path}.{k}", "required field missing")
    maps = {k: _label_map(v.get(k, {}), f"{path}.{k}", P) for k in _LABEL_MAPS}
    for k in ("attack_A", "attack_I"):
        for p in P:
            if p not in maps[k]:
                raise ScenarioError(f"{path}.{k}.{p}", "label missing")
    th = [k for k in ("sys_A", "change", "decide") if maps[k]]
    if th and (len(th) != 3 or any(set(maps[k]) != set(P) for k in th)):
        raise ScenarioError(path, "sys_A, change and decide must all cover every participant")
    msgs = _messages(v["messages"], f"{path}.messages", P) if "messages" in v else {}
    dels = []
    for i, t in enumerate(v.get("delegations", [])):
        try:
            sup, inf = parse_delegation(t)
        except (PrincipalSyntaxError, ValueError, TypeError) as e:
            raise ScenarioError(f"{path}.delegations[{i}]", str(e)) from None
        for x in (sup, inf):
            _participant(x, f"{path}.delegations[{i}]", P)
        dels.append((sup, inf))
    try:
        return TrustConfig(P, maps["attack_A"], maps["attack_I"], maps["sys_A"],
                           maps["change"], maps["decide"], msgs, Delegations(dels))
    except ValueError as e:
        raise ScenarioError(path, str(e)) from None


def _adversary(v, P) -> FailureAssignment:
    path = "$.adversary"
    _obj(v, path, {"crash", "byzantine"})
    crashed, byz = {}, {}
    c = v.get("crash", {})
    if isinstance(c, list):
        c = {p: 0 for p in c}
    if not isinstance(c, dict):
        raise ScenarioError(f"{path}.crash", "expected a list or an object")
    for p, r in c.items():
        crashed[_participant(p, f"{path}.crash", P)] = _int(r, f"{path}.crash.{p}")
    b = v.get("byzantine", {})
    if isinstance(b, list):
        b = {p: "equivocator" for p in b}
    if not isinstance(b, dict):
        raise ScenarioError(f"{path}.byzantine", "expected a list or an object")
    for p, s in b.items():
        _participant(p, f"{path}.byzantine", P)
        if s not in _STRATEGIES:
            raise ScenarioError(f"{path}.byzantine.{p}",
                                f"strategy must be one of {sorted(_STRATEGIES)}")
        byz[p] = s
    try:
        return FailureAssignment(crashed, byz)
    except ValueError as e:
        raise ScenarioError(path, str(e)) from None


def _oarcast(v, P) -> OarcastConfig:
    path = "$.oarcast"
    _obj(v, path, {"sender", "byzantine", "threshold", "attack",
                   "sender_availability", "messages"}, ("sender",))
    s = _participant(v["sender"], f"{path}.sender", P)
    if "byzantine" in v:
        if set(v) - {"sender", "byzantine"}:
            raise ScenarioError(path, "'byzantine' shorthand excludes explicit labels")
        return homogeneous_oarcast(P, _int(v["byzantine"], f"{path}.byzantine"), s)
    for k in ("threshold", "attack"):
        if k not in v:
            raise ScenarioError(f"{path}.{k}", "required field missing")
    T = _label_map(v["threshold"], f"{path}.threshold", P)
    IA = _label_map(v["attack"], f"{path}.attack", P)
    As = (_label(v["sender_availability"], f"{path}.sender_availability", P)
          if "sender_availability" in v else Label())
    msgs = _messages(v["messages"], f"{path}.messages", P) if "messages" in v else {}
    try:
        return OarcastConfig(P, s, T, IA, As, msgs)
    except ValueError as e:
        raise ScenarioError(path, str(e)) from None


def _from_obj(doc) -> Scenario:
    _obj(doc, "$", _TOP_KEYS, ("version", "participants"))
    if doc["version"] != VERSION:
        raise ScenarioError("$.version", f"unsupported version {doc['version']!r}")
    P = doc["participants"]
    if not isinstance(P, list) or not P:
        raise ScenarioError("$.participants", "expected a non-empty list")
    for i, p in enumerate(P):
        if not isinstance(p, str) or not p or p in ("top", "bottom"):
            raise ScenarioError(f"$.participants[{i}]", "expected a participant name")
    if len(set(P)) != len(P):
        raise ScenarioError("$.participants", "duplicate participant")
    P = tuple(P)
    if "trust" not in doc and "oarcast" not in doc:
        raise ScenarioError("$.trust", "required field missing")
    name = doc.get("name", "scenario")
    if not isinstance(name, str):
        raise ScenarioError("$.name", "expected a string")
    trust = _trust(doc["trust"], P) if "trust" in doc else None
    adversary = _adversary(doc.get("adversary", {}), P)
    eng = _obj(doc.get("engine", {}), "$.engine", {"selection", "proposals"})
    selection = eng.get("selection", "uniform")
    if selection not in ("uniform", "first"):
        raise ScenarioError("$.engine.selection", "expected 'uniform' or 'first'")
    proposals = None
    if "proposals" in eng:
        pr = _obj(eng["proposals"], "$.engine.proposals", P, P)
        for p, x in pr.items():
            if not isinstance(x, str):
                raise ScenarioError(f"$.engine.proposals.{p}", "expected a string")
        proposals = {p: pr[p] for p in P}
    sim = _obj(doc.get("sim", {}), "$.sim", {"trials", "seed", "max_rounds"})
    oc = _oarcast(doc["oarcast"], P) if "oarcast" in doc else None
    desc = doc.get("description", "")
    if not isinstance(desc, str):
        raise ScenarioError("$.description", "expected a string")
    return Scenario(
        name=name, participants=P, trust=trust, adversary=adversary,
        selection=selection, proposals=proposals,
        trials=_int(sim.get("trials", 1000), "$.sim.trials", 1),
        seed=_int(sim.get("seed", 0), "$.sim.seed"),
        max_rounds=_int(sim.get("max_rounds", 64), "$.sim.max_rounds", 1),
        oarcast=oc, description=desc)


def parse_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"line {e.lineno} column {e.colno}", e.msg) from None
    return _from_obj(doc)


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


# -- serialization ----------------------------------------------------------

def _labels(m: Mapping[str, Label], P) -> Dict[str, str]:
    return {p: str(m[p]) for p in P if p in m}


def _message_overrides(msgs, P) -> Dict[str, str]:
    std = standard_messages(P)
    return {f"{s}->{r}": str(msgs[(s, r)]) for s in P for r in P
            if msgs[(s, r)] != std[(s, r)]}


def serialize_scenario(sc: Scenario) -> str:
    P = list(sc.participants)
    t = sc.trust
    trust: Dict[str, Any] = {}
    if t is not None:
        trust = {k: _labels(getattr(t, k), P) for k in _LABEL_MAPS if getattr(t, k)}
        over = _message_overrides(t.messages, P)
        if over:
            trust["messages"] = over
        if t.delegations:
            trust["delegations"] = [f"{a} >= {b}" for a, b in sorted(t.delegations.pairs)]
    doc: Dict[str, Any] = {"version": VERSION, "name": sc.name}
    if sc.description:
        doc["description"] = sc.description
    doc["participants"] = P
    if t is not None:
        doc["trust"] = trust
    adv = {}
    if sc.adversary.crashed:
        adv["crash"] = dict(sc.adversary.crashed)
    if sc.adversary.byzantine:
        adv["byzantine"] = dict(sc.adversary.byzantine)
    if adv:
        doc["adversary"] = adv
    eng: Dict[str, Any] = {"selection": sc.selection}
    if sc.proposals is not None:
        eng["proposals"] = dict(sc.proposals)
    doc["engine"] = eng
    doc["sim"] = {"trials": sc.trials, "seed": sc.seed, "max_rounds": sc.max_rounds}
    if sc.oarcast is not None:
        oc = sc.oarcast
        o: Dict[str, Any] = {"sender": oc.sender,
                             "threshold": _labels(oc.threshold, P),
                             "attack": _labels(oc.attack, P)}
        if oc.sender_availability:
            o["sender_availability"] = str(oc.sender_availability)
        over = _message_overrides(oc.messages, P)
        if over:
            o["messages"] = over
        doc["oarcast"] = o
    return json.dumps(doc, indent=2) + "\n"


# -- bundled scenarios ------------------------------------------------------

def bundled_names() -> List[str]:
    files = resources.files("hetquorum").joinpath("scenarios").iterdir()
    return sorted(f.name[:-5] for f in files if f.name.endswith(".json"))


def bundled(name: str) -> Scenario:
    fname = name if name.endswith(".json") else name + ".json"
    text = resources.files("hetquorum").joinpath("scenarios", fname).read_text("utf-8")
    return parse_scenario(text)
