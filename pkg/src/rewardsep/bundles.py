"""Problem-bundle file format and the bundled example environments.

A bundle is a JSON document carrying an environment, named policies, and
optionally a SOAP (name references) and a reward spec:

    {
      "env": {
        "states": ["s0", "s1"],
        "actions": ["a1", "a2"],
        "gamma": "0.9",
        "start": "s0",
        "transitions": [
          {"from": "s0", "action": "a1", "to": {"s1": "1"}},
          ...
        ]
      },
      "policies": [
        {"name": "pi11", "deterministic": {"s0": "a1", "s1": "a1"}},
        {"name": "mix",  "stochastic": {"s0": {"a1": "0.5", "a2": "0.5"}, ...}}
      ],
      "soap":   {"good": ["pi12", "pi21"], "bad": ["pi11", "pi22"]},
      "reward": {"rows": [{"s0": {"a1": "0", "a2": "1"}, ...}],
                 "lower_bounds": ["2"]}
    }

Numbers are decimal or fraction strings (integers may stay bare) so the
exact-rational backend parses them losslessly; raw JSON floats are
rejected.  Every (state, action) pair needs a transition row -- omission
is an error, not an implicit self-loop.  Serialization is canonical:
parsing and re-serializing a canonical document is byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Optional

from .mdp import MarkovEnv, Policy, RewardSpec
from .numeric import ExactInputError, format_number, parse_rational
from .soap import Soap, SoapError


class BundleError(ValueError):
    """Schema violation; the message carries the file and field path."""


@dataclass(frozen=True)
class ProblemBundle:
    env: MarkovEnv
    policies: tuple
    soap: Optional[Soap] = None
    reward: Optional[RewardSpec] = None

    def policy(self, name: str) -> Policy:
        for p in self.policies:
            if p.name == name:
                return p
        raise KeyError(name)

    def with_soap(self, soap: Soap) -> "ProblemBundle":
        return replace(self, soap=soap)

    def with_reward(self, reward: RewardSpec) -> "ProblemBundle":
        return replace(self, reward=reward)


def fixture_path(name: str) -> Path:
    """Path of a bundled fixture file (entailment.json, xor_soap.json, ...)."""
    candidate = resources.files("rewardsep").joinpath("fixtures", name)
    if not candidate.is_file():
        raise FileNotFoundError(f"no bundled fixture named {name!r}")
    return Path(str(candidate))


def resolve_input_path(path: str) -> Path:
    """Use the file if it exists, otherwise fall back to a bundled fixture
    of the same name so the canonical examples work from any directory."""
    p = Path(path)
    if p.exists():
        return p
    try:
        return fixture_path(path)
    except FileNotFoundError:
        raise BundleError(f"{path}: no such file and no bundled fixture") from None


def _expect(data, key, kind, where):
    if not isinstance(data, dict) or key not in data:
        raise BundleError(f"{where}: missing field {key!r}")
    value = data[key]
    if kind is not None and not isinstance(value, kind):
        raise BundleError(
            f"{where}.{key}: expected {kind.__name__}, got {type(value).__name__}"
        )
    return value


def _number(value, where):
    if isinstance(value, bool) or isinstance(value, float):
        raise BundleError(
            f"{where}: write numbers as decimal strings (got {value!r}); "
            "JSON floats cannot feed the exact backend"
        )
    try:
        return parse_rational(value)
    except ExactInputError as exc:
        raise BundleError(f"{where}: {exc}") from exc


def _parse_env(data, where):
    states = _expect(data, "states", list, where)
    actions = _expect(data, "actions", list, where)
    gamma = _number(_expect(data, "gamma", None, where), f"{where}.gamma")
    start = _expect(data, "start", str, where)
    rows = _expect(data, "transitions", list, where)
    transitions = {}
    for i, row in enumerate(rows):
        rwhere = f"{where}.transitions[{i}]"
        source = _expect(row, "from", str, rwhere)
        action = _expect(row, "action", str, rwhere)
        to = _expect(row, "to", dict, rwhere)
        if (source, action) in transitions:
            raise BundleError(f"{rwhere}: duplicate row for ({source}, {action})")
        transitions[(source, action)] = {
            s2: _number(p, f"{rwhere}.to.{s2}") for s2, p in to.items()
        }
    missing = [
        (s, a) for s in states for a in actions if (s, a) not in transitions
    ]
    if missing:
        raise BundleError(f"{where}: missing transition rows for {missing}")
    extra = set(transitions) - {(s, a) for s in states for a in actions}
    if extra:
        raise BundleError(f"{where}: transition rows for undeclared pairs {sorted(extra)}")
    try:
        return MarkovEnv.from_tables(states, actions, transitions, gamma, start)
    except ValueError as exc:
        raise BundleError(f"{where}: {exc}") from exc


def _parse_policy(data, where):
    name = _expect(data, "name", str, where)
    has_det = "deterministic" in data
    has_sto = "stochastic" in data
    if has_det == has_sto:
        raise BundleError(
            f"{where}: give exactly one of 'deterministic' or 'stochastic'"
        )
    if has_det:
        mapping = _expect(data, "deterministic", dict, where)
        for s, a in mapping.items():
            if not isinstance(a, str):
                raise BundleError(f"{where}.deterministic.{s}: action must be a string")
        return Policy.deterministic(name, mapping)
    table = _expect(data, "stochastic", dict, where)
    parsed = {
        s: {a: _number(p, f"{where}.stochastic.{s}.{a}") for a, p in row.items()}
        for s, row in table.items()
    }
    return Policy.stochastic(name, parsed)


def _parse_soap(data, policies, where):
    by_name = {p.name: p for p in policies}

    def resolve(names, label):
        out = []
        for n in names:
            if n not in by_name:
                raise BundleError(f"{where}.{label}: unresolved policy name {n!r}")
            out.append(by_name[n])
        return out

    good = resolve(_expect(data, "good", list, where), "good")
    bad = resolve(_expect(data, "bad", list, where), "bad")
    try:
        return Soap.build(good=good, bad=bad)
    except SoapError as exc:
        raise BundleError(f"{where}: {exc}") from exc


def _parse_reward(data, env, where):
    rows_data = _expect(data, "rows", list, where)
    bounds_data = _expect(data, "lower_bounds", list, where)
    if len(rows_data) != len(bounds_data):
        raise BundleError(f"{where}: rows and lower_bounds differ in length")
    rows = []
    for i, row in enumerate(rows_data):
        rwhere = f"{where}.rows[{i}]"
        entries = []
        for s in env.states:
            per_state = _expect(row, s, dict, rwhere)
            for a in env.actions:
                entries.append(_number(_expect(per_state, a, None, f"{rwhere}.{s}"),
                                       f"{rwhere}.{s}.{a}"))
        rows.append(tuple(entries))
    bounds = [_number(b, f"{where}.lower_bounds[{i}]") for i, b in enumerate(bounds_data)]
    return RewardSpec.build(rows=rows, lower_bounds=bounds)


def parse_bundle_text(text: str, source: str = "<string>") -> ProblemBundle:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BundleError(f"{source}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise BundleError(f"{source}: top level must be an object")
    env = _parse_env(_expect(data, "env", dict, source), f"{source}.env")
    policies = []
    names = set()
    for i, pdata in enumerate(data.get("policies", [])):
        policy = _parse_policy(pdata, f"{source}.policies[{i}]")
        if policy.name in names:
            raise BundleError(
                f"{source}.policies[{i}]: duplicate policy name {policy.name!r}"
            )
        names.add(policy.name)
        policy.validate_for(env)
        policies.append(policy)
    soap = None
    if "soap" in data:
        soap = _parse_soap(data["soap"], policies, f"{source}.soap")
    reward = None
    if "reward" in data:
        reward = _parse_reward(data["reward"], env, f"{source}.reward")
    return ProblemBundle(env=env, policies=tuple(policies), soap=soap, reward=reward)


def parse_bundle(path) -> ProblemBundle:
    p = resolve_input_path(str(path))
    return parse_bundle_text(p.read_text(), source=str(p))


def load_soap(path, bundle: ProblemBundle) -> Soap:
    p = resolve_input_path(str(path))
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise BundleError(f"{p}: invalid JSON: {exc}") from exc
    return _parse_soap(data, bundle.policies, str(p))


def load_reward(path, env: MarkovEnv) -> RewardSpec:
    p = resolve_input_path(str(path))
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise BundleError(f"{p}: invalid JSON: {exc}") from exc
    return _parse_reward(data, env, str(p))


def _num_str(value) -> str:
    return format_number(parse_rational(value) if isinstance(value, str) else value)


def _env_dict(env: MarkovEnv) -> dict:
    transitions = []
    for (s, a), row in zip(env.sa_pairs(), env.kernel):
        to = {
            s2: _num_str(p)
            for s2, p in zip(env.states, row)
            if parse_rational(p) != 0
        }
        transitions.append({"from": s, "action": a, "to": to})
    return {
        "states": list(env.states),
        "actions": list(env.actions),
        "gamma": _num_str(env.gamma),
        "start": env.start,
        "transitions": transitions,
    }


def _policy_dict(policy: Policy, env: MarkovEnv) -> dict:
    if policy.is_deterministic:
        return {
            "name": policy.name,
            "deterministic": {s: policy.action_map[s] for s in env.states},
        }
    return {
        "name": policy.name,
        "stochastic": {
            s: {
                a: _num_str(p)
                for a, p in zip(env.actions, policy.distribution_row(env, s))
            }
            for s in env.states
        },
    }


def reward_dict(reward: RewardSpec, env: MarkovEnv) -> dict:
    rows = []
    for row in reward.rows:
        per_state = {}
        for si, s in enumerate(env.states):
            per_state[s] = {
                a: _num_str(row[si * env.n_actions + ai])
                for ai, a in enumerate(env.actions)
            }
        rows.append(per_state)
    return {
        "rows": rows,
        "lower_bounds": [_num_str(b) for b in reward.lower_bounds],
    }


def serialize_bundle(bundle: ProblemBundle) -> str:
    """Canonical JSON text; stable under parse -> serialize round trips."""
    doc = {"env": _env_dict(bundle.env)}
    if bundle.policies:
        doc["policies"] = [_policy_dict(p, bundle.env) for p in bundle.policies]
    if bundle.soap is not None:
        doc["soap"] = {
            "good": [p.name for p in bundle.soap.good],
            "bad": [p.name for p in bundle.soap.bad],
        }
    if bundle.reward is not None:
        doc["reward"] = reward_dict(bundle.reward, bundle.env)
    return json.dumps(doc, indent=2) + "\n"
