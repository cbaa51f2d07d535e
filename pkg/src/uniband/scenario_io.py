"""Scenario files and regret CSV output.

A scenario file is a JSON object::

    {
      "arms": [{"a": 0, "b": 10}, {"a": 1, "b": 5}],
      "policies": ["ucb-uniform", "kr", {"kind": "chk-normal", "init_rounds": 3}],
      "horizon": 10000,
      "checkpoints": {"kind": "log", "count": 25},
      "replications": 5000,
      "seed": 20151
    }

``checkpoints`` may also be an explicit increasing list of integers.
``seed`` defaults to 0 and ``replications`` to 1; every other key is
required. Unknown keys are rejected.

The CSV has the header ``policy,n,mean_regret,stderr,reps``; reals are
written with nine digits after the decimal point, lines end in ``\\n``.
"""
from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Any, Iterable

from .core import BanditInstance, InvalidParameterError, UniformArm
from .montecarlo import RegretCurve, Scenario, linear_checkpoints, log_checkpoints
from .policies import PolicySpec

CSV_HEADER = "policy,n,mean_regret,stderr,reps"
_REAL = r"-?\d+\.\d{9}"
_ROW = re.compile(rf"^[a-z][a-z-]*,\d+,{_REAL},{_REAL},\d+$")

TOP_KEYS = {"arms", "policies", "horizon", "checkpoints", "replications", "seed"}
REQUIRED = {"arms", "policies", "horizon", "checkpoints"}


class ScenarioError(InvalidParameterError):
    """A scenario file failed to parse or validate; the message names the location."""


def _int(value: Any, where: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{where}: expected an integer, got {json.dumps(value)}")
    if minimum is not None and value < minimum:
        raise ScenarioError(f"{where}: must be >= {minimum}, got {value}")
    return value


def _real(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{where}: expected a number, got {json.dumps(value)}")
    return float(value)


def _strict(obj: Any, allowed: set[str], where: str) -> dict:
    if not isinstance(obj, dict):
        raise ScenarioError(f"{where}: expected an object, got {type(obj).__name__}")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ScenarioError(f"{where}: unknown key(s) {', '.join(map(repr, unknown))}; allowed: {', '.join(sorted(allowed))}")
    return obj


def _locate(text: str, key: str) -> str:
    m = re.search(rf'"{re.escape(key)}"\s*:', text)
    if m is None:
        return ""
    return f" (line {text.count(chr(10), 0, m.start()) + 1})"


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return _build(doc)
    except ScenarioError as exc:
        key = str(exc).split(":", 1)[0].split("[", 1)[0].split(".", 1)[0]
        raise ScenarioError(f"{source}{_locate(text, key)}: {exc}") from None
    except InvalidParameterError as exc:
        raise ScenarioError(f"{source}: {exc}") from None


def _build(doc: Any) -> Scenario:
    doc = _strict(doc, TOP_KEYS, "scenario")
    missing = sorted(REQUIRED - set(doc))
    if missing:
        raise ScenarioError(f"scenario: missing required key(s) {', '.join(map(repr, missing))}")

    arms_doc = doc["arms"]
    if not isinstance(arms_doc, list) or len(arms_doc) < 2:
        raise ScenarioError("arms: expected a list of at least 2 {a, b} objects")
    arms = []
    for i, item in enumerate(arms_doc):
        where = f"arms[{i}]"
        item = _strict(item, {"a", "b"}, where)
        if set(item) != {"a", "b"}:
            raise ScenarioError(f"{where}: needs both 'a' and 'b'")
        a, b = _real(item["a"], f"{where}.a"), _real(item["b"], f"{where}.b")
        try:
            arms.append(UniformArm(a, b))
        except InvalidParameterError as exc:
            raise ScenarioError(f"{where}: {exc}") from None
    instance = BanditInstance(arms)

    pol_doc = doc["policies"]
    if not isinstance(pol_doc, list) or not pol_doc:
        raise ScenarioError("policies: expected a non-empty list")
    policies = []
    for i, item in enumerate(pol_doc):
        where = f"policies[{i}]"
        try:
            if isinstance(item, str):
                policies.append(PolicySpec(item))
            else:
                item = _strict(item, {"kind", "init_rounds"}, where)
                if "kind" not in item:
                    raise ScenarioError(f"{where}: missing 'kind'")
                rounds = _int(item["init_rounds"], f"{where}.init_rounds", 1) if "init_rounds" in item else -1
                policies.append(PolicySpec(item["kind"], rounds))
        except ScenarioError:
            raise
        except InvalidParameterError as exc:
            raise ScenarioError(f"{where}: {exc}") from None
    names = [p.kind for p in policies]
    if len(set(names)) != len(names):
        raise ScenarioError(f"policies: duplicate entries in {names}")

    horizon = _int(doc["horizon"], "horizon", 1)
    replications = _int(doc.get("replications", 1), "replications", 1)
    seed = _int(doc.get("seed", 0), "seed", 0)
    if seed >= 2**64:
        raise ScenarioError("seed: must fit in 64 bits")
    init_phase = max(p.init_rounds for p in policies) * instance.n_arms
    if horizon < init_phase:
        raise ScenarioError(f"horizon: {horizon} is shorter than the initialization phase ({init_phase})")

    cp_doc = doc["checkpoints"]
    if isinstance(cp_doc, list):
        kind = "explicit"
        checkpoints = [_int(v, f"checkpoints[{i}]") for i, v in enumerate(cp_doc)]
    else:
        cp_doc = _strict(cp_doc, {"kind", "count"}, "checkpoints")
        kind = cp_doc.get("kind")
        if kind not in ("linear", "log"):
            raise ScenarioError(f"checkpoints.kind: expected 'linear' or 'log', got {json.dumps(kind)}")
        count = _int(cp_doc.get("count"), "checkpoints.count", 1)
        make = linear_checkpoints if kind == "linear" else log_checkpoints
        checkpoints = make(horizon, count, init_phase)
    try:
        return Scenario(instance, policies, horizon, checkpoints, replications, seed, kind)
    except InvalidParameterError as exc:
        raise ScenarioError(f"checkpoints: {exc}") from None


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"{path}: cannot read ({exc.strerror})") from None
    return parse_scenario(text, str(path))


def shipped_scenario(name: str = "table1.json") -> Path:
    return Path(__file__).with_name("scenarios") / name


def fmt(x: float) -> str:
    s = f"{x:.9f}"
    return "0.000000000" if s == "-0.000000000" else s


def format_csv(curves: Iterable[RegretCurve]) -> str:
    lines = [CSV_HEADER]
    for curve in curves:
        for policy, n, mean, se, reps in curve.rows():
            lines.append(f"{policy},{n},{fmt(mean)},{fmt(se)},{reps}")
    return "\n".join(lines) + "\n"


def validate_csv(text: str) -> list[tuple[str, int, float, float, int]]:
    """Parse regret CSV text, rejecting anything off-format. Returns the rows."""
    if "\r" in text:
        raise ValueError("CSV must use \\n line endings")
    if not text.endswith("\n"):
        raise ValueError("CSV must end with a newline")
    lines = text[:-1].split("\n")
    if lines[0] != CSV_HEADER:
        raise ValueError(f"bad header {lines[0]!r}")
    rows = []
    for k, line in enumerate(lines[1:], start=2):
        if not _ROW.match(line):
            raise ValueError(f"line {k}: malformed row {line!r}")
        policy, n, mean, se, reps = line.split(",")
        rows.append((policy, int(n), float(mean), float(se), int(reps)))
    return rows
