"""Check a candidate reward/lower-bound pair against a SOAP.

Feasibility is CMDP-style: a policy passes iff every value component
clears its lower bound.  A spec realizes a SOAP when all good policies
are feasible and all bad policies are not.  Boundary ties (value exactly
at the bound) count as feasible; in float mode near-boundary dimensions
are additionally flagged so callers can fall back to exact mode, which is
authoritative.
"""

from __future__ import annotations

from dataclasses import dataclass

from .mdp import (
    MarkovEnv,
    RewardSpec,
    compute_visitation,
    enumerate_deterministic_policies,
    value_of_visitation,
)
from .numeric import EXACT, NumericMode, as_float
from .soap import Soap


@dataclass(frozen=True)
class PolicyVerdict:
    name: str
    label: str
    values: tuple
    feasible: bool
    violated_dims: tuple
    boundary_dims: tuple = ()


@dataclass(frozen=True)
class RealizationReport:
    realized: bool
    verdicts: tuple

    def verdict_for(self, name: str) -> PolicyVerdict:
        for v in self.verdicts:
            if v.name == name:
                return v
        raise KeyError(name)


def _check_spec_dims(env: MarkovEnv, spec: RewardSpec):
    if any(len(row) != env.n_sa for row in spec.rows):
        raise ValueError(
            f"reward rows have width {len(spec.rows[0])}, environment needs {env.n_sa}"
        )


def _judge(values, bounds, mode: NumericMode):
    violated = []
    boundary = []
    for i, (v, c) in enumerate(zip(values, bounds)):
        if mode.exact:
            if v < c:
                violated.append(i)
        else:
            if as_float(v) < as_float(c) - mode.tolerance:
                violated.append(i)
            if abs(as_float(v) - as_float(c)) <= mode.tolerance:
                boundary.append(i)
    return tuple(violated), tuple(boundary)


def is_feasible(values, spec: RewardSpec, mode: NumericMode = EXACT) -> bool:
    violated, _ = _judge(values, spec.lower_bounds, mode)
    return not violated


def verify_realization(env: MarkovEnv, soap: Soap, spec: RewardSpec,
                       mode: NumericMode = EXACT) -> RealizationReport:
    """Per-policy values and verdicts; realized iff the good/bad pattern
    holds exactly."""
    _check_spec_dims(env, spec)
    verdicts = []
    realized = True
    for label, policies in (("good", soap.good), ("bad", soap.bad)):
        for policy in policies:
            rho = compute_visitation(env, policy, mode)
            values = value_of_visitation(rho, spec, mode)
            violated, boundary = _judge(values, spec.lower_bounds, mode)
            feasible = not violated
            if (label == "good") != feasible:
                realized = False
            verdicts.append(
                PolicyVerdict(
                    name=policy.name,
                    label=label,
                    values=values,
                    feasible=feasible,
                    violated_dims=violated,
                    boundary_dims=boundary,
                )
            )
    return RealizationReport(realized=realized, verdicts=tuple(verdicts))


def brute_force_feasible_set(env: MarkovEnv, spec: RewardSpec,
                             limit: int = 4096,
                             mode: NumericMode = EXACT) -> tuple:
    """All deterministic policies that are feasible under the spec.

    The exhaustive oracle against which synthesized rewards are checked;
    refuses when |A|^|S| exceeds `limit`.
    """
    _check_spec_dims(env, spec)
    feasible = []
    for policy in enumerate_deterministic_policies(env, limit):
        rho = compute_visitation(env, policy, mode)
        values = value_of_visitation(rho, spec, mode)
        if is_feasible(values, spec, mode):
            feasible.append(policy)
    return tuple(feasible)
