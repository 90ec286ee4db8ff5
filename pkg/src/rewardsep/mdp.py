"""Reward-free Markov environments, stationary policies, and visitations.

The central quantity is the discounted expected state-action visitation

    rho(s, a) = E[ sum_t gamma^t Pr(S_t = s, A_t = a) ]   from the start state,

whose state marginal d solves the flow system d = e_start + gamma * P_pi^T d.
For gamma < 1 the matrix I - gamma * P_pi^T is strictly column diagonally
dominant (column slack exactly 1 - gamma), hence invertible, so rho is
computed by direct elimination (exact in rational mode), never iteratively.
Every value question reduces to inner products with rho: V_i = r_i . rho.

All types are immutable after construction and all operations are pure.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Optional

import numpy as np

from . import linalg
from .numeric import EXACT, Number, NumericMode, as_exact, as_float, coerce

_VALIDATION_TOL = 1e-9


class EnvError(ValueError):
    """Environment is structurally unusable for computation."""


class PolicyError(ValueError):
    """Policy does not fit the environment it is evaluated on."""


class LimitExceededError(ValueError):
    """Deterministic-policy enumeration would exceed the caller's cap."""


@dataclass(frozen=True)
class MarkovEnv:
    """Finite reward-free environment <S, A, T, gamma, start>.

    ``kernel`` is dense: one row per (state, action) in canonical row-major
    order (states outermost), one column per successor state.  The same
    canonical order indexes every vector and matrix in the package.
    """

    states: tuple
    actions: tuple
    kernel: tuple
    gamma: Number
    start: str

    @staticmethod
    def from_tables(states, actions, transitions, gamma, start) -> "MarkovEnv":
        """Build from a {(state, action): {successor: prob}} table.

        Every (state, action) pair must be present; omitted rows are an
        error rather than an implicit self-loop.
        """
        states = tuple(states)
        actions = tuple(actions)
        rows = []
        for s in states:
            for a in actions:
                if (s, a) not in transitions:
                    raise EnvError(f"missing transition row for ({s}, {a})")
                dist = transitions[(s, a)]
                unknown = set(dist) - set(states)
                if unknown:
                    raise EnvError(
                        f"transition from ({s}, {a}) targets unknown states {sorted(unknown)}"
                    )
                rows.append(tuple(dist.get(s2, 0) for s2 in states))
        return MarkovEnv(states, actions, tuple(rows), gamma, start)

    @cached_property
    def _state_index(self):
        return {s: i for i, s in enumerate(self.states)}

    @cached_property
    def _action_index(self):
        return {a: i for i, a in enumerate(self.actions)}

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    @property
    def n_sa(self) -> int:
        return len(self.states) * len(self.actions)

    def state_index(self, state) -> int:
        try:
            return self._state_index[state]
        except KeyError:
            raise EnvError(f"unknown state {state!r}") from None

    def action_index(self, action) -> int:
        try:
            return self._action_index[action]
        except KeyError:
            raise EnvError(f"unknown action {action!r}") from None

    def sa_index(self, state, action) -> int:
        return self.state_index(state) * self.n_actions + self.action_index(action)

    def sa_pairs(self):
        return tuple((s, a) for s in self.states for a in self.actions)


@dataclass(frozen=True)
class EnvReport:
    ok: bool
    violations: tuple


def validate_env(env: MarkovEnv, mode: NumericMode = EXACT) -> EnvReport:
    """Check stochasticity, discount range, and start membership.

    Report-based: callers that need a hard failure use `require_valid_env`.
    """
    violations = []
    if not env.states:
        violations.append("no states declared")
    if not env.actions:
        violations.append("no actions declared")
    if len(set(env.states)) != len(env.states):
        violations.append("duplicate state names")
    if len(set(env.actions)) != len(env.actions):
        violations.append("duplicate action names")
    if env.start not in env.states:
        violations.append(f"start state {env.start!r} is not a declared state")

    try:
        gamma = coerce(env.gamma, mode)
        if not (0 <= gamma < 1):
            violations.append("gamma out of range [0, 1)")
    except ValueError as exc:
        violations.append(f"gamma unusable: {exc}")

    expected_rows = env.n_sa
    if len(env.kernel) != expected_rows:
        violations.append(
            f"kernel has {len(env.kernel)} rows, expected {expected_rows}"
        )
    else:
        tol = _VALIDATION_TOL if not mode.exact else 0
        for (s, a), row in zip(env.sa_pairs(), env.kernel):
            if len(row) != env.n_states:
                violations.append(f"transition row for ({s}, {a}) has wrong width")
                continue
            try:
                probs = [coerce(p, mode) for p in row]
            except ValueError as exc:
                violations.append(f"transition row for ({s}, {a}) unusable: {exc}")
                continue
            if any(p < -tol for p in probs):
                violations.append(f"negative probability in row ({s}, {a})")
            total = sum(probs)
            if mode.exact:
                if total != 1:
                    violations.append(f"transition row for ({s}, {a}) sums to {total}")
            elif abs(total - 1) > tol:
                violations.append(f"transition row for ({s}, {a}) sums to {total}")
    return EnvReport(ok=not violations, violations=tuple(violations))


def require_valid_env(env: MarkovEnv, mode: NumericMode = EXACT):
    report = validate_env(env, mode)
    if not report.ok:
        raise EnvError("; ".join(report.violations))


@dataclass(frozen=True)
class Policy:
    """Stationary policy: deterministic state->action map or a
    row-stochastic table state -> {action: prob}.  The two kinds are kept
    distinct so determinism is checkable syntactically."""

    name: str
    action_map: Optional[dict] = None
    table: Optional[dict] = None

    def __post_init__(self):
        if (self.action_map is None) == (self.table is None):
            raise PolicyError(
                f"policy {self.name!r} must be deterministic or stochastic, not both"
            )

    @staticmethod
    def deterministic(name, mapping) -> "Policy":
        return Policy(name=name, action_map=dict(mapping))

    @staticmethod
    def stochastic(name, table) -> "Policy":
        return Policy(name=name, table={s: dict(row) for s, row in table.items()})

    @property
    def is_deterministic(self) -> bool:
        return self.action_map is not None

    def validate_for(self, env: MarkovEnv, mode: NumericMode = EXACT):
        tol = 0 if mode.exact else _VALIDATION_TOL
        if self.is_deterministic:
            for s in env.states:
                if s not in self.action_map:
                    raise PolicyError(f"policy {self.name!r} undefined at state {s!r}")
                if self.action_map[s] not in env.actions:
                    raise PolicyError(
                        f"policy {self.name!r} picks unknown action "
                        f"{self.action_map[s]!r} at state {s!r}"
                    )
            extra = set(self.action_map) - set(env.states)
            if extra:
                raise PolicyError(
                    f"policy {self.name!r} mentions unknown states {sorted(extra)}"
                )
            return
        for s in env.states:
            if s not in self.table:
                raise PolicyError(f"policy {self.name!r} undefined at state {s!r}")
            row = self.table[s]
            extra = set(row) - set(env.actions)
            if extra:
                raise PolicyError(
                    f"policy {self.name!r} mentions unknown actions {sorted(extra)}"
                )
            probs = [coerce(row.get(a, 0), mode) for a in env.actions]
            if any(p < -tol for p in probs):
                raise PolicyError(f"policy {self.name!r} has a negative probability at {s!r}")
            total = sum(probs)
            bad = total != 1 if mode.exact else abs(total - 1) > tol
            if bad:
                raise PolicyError(
                    f"policy {self.name!r} row at {s!r} sums to {total}, expected 1"
                )
        extra = set(self.table) - set(env.states)
        if extra:
            raise PolicyError(
                f"policy {self.name!r} mentions unknown states {sorted(extra)}"
            )

    def distribution_row(self, env: MarkovEnv, state):
        """Action distribution at `state` in the env's action order
        (one-hot for deterministic policies)."""
        if self.is_deterministic:
            chosen = self.action_map[state]
            return tuple(1 if a == chosen else 0 for a in env.actions)
        row = self.table[state]
        return tuple(row.get(a, 0) for a in env.actions)

    def canonical_table(self):
        """Kind-independent functional form, for duplicate detection."""
        if self.is_deterministic:
            return {s: {a: Fraction(1)} for s, a in self.action_map.items()}
        table = {}
        for s, row in self.table.items():
            table[s] = {a: as_exact(p) for a, p in row.items() if as_exact(p) != 0}
        return table


@dataclass(frozen=True)
class Visitation:
    """rho vector in canonical (state, action) order; entries are
    nonnegative and sum to 1/(1-gamma)."""

    entries: tuple

    def __getitem__(self, index):
        return self.entries[index]

    def __len__(self):
        return len(self.entries)

    def as_floats(self) -> np.ndarray:
        return np.array([as_float(v) for v in self.entries], dtype=float)


@dataclass(frozen=True)
class RewardSpec:
    """d-dimensional reward with lower bounds: a policy is feasible iff
    rows @ rho >= lower_bounds componentwise."""

    rows: tuple
    lower_bounds: tuple

    @staticmethod
    def build(rows, lower_bounds) -> "RewardSpec":
        rows = tuple(tuple(r) for r in rows)
        lower_bounds = tuple(lower_bounds)
        if not rows or len(rows) != len(lower_bounds):
            raise ValueError("reward rows and lower bounds must pair up, d >= 1")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError("reward rows differ in width")
        for r in rows:
            for v in r:
                if isinstance(v, float) and not math.isfinite(v):
                    raise ValueError("non-finite reward entry")
        for v in lower_bounds:
            if isinstance(v, float) and not math.isfinite(v):
                raise ValueError("non-finite lower bound")
        return RewardSpec(rows, lower_bounds)

    @property
    def dimension(self) -> int:
        return len(self.rows)


def _policy_matrix(env: MarkovEnv, policy: Policy, conv):
    return [
        [conv(p) for p in policy.distribution_row(env, s)]
        for s in env.states
    ]


def compute_visitation(env: MarkovEnv, policy: Policy, mode: NumericMode = EXACT) -> Visitation:
    """Solve the state flow system and multiply in the action choices.

    d = e_start + gamma * P_pi^T d,   rho(s, a) = pi(a | s) * d(s).

    The result is checked against the flow identities before returning, so
    every visitation the package ever produces satisfies them.
    """
    require_valid_env(env, mode)
    policy.validate_for(env, mode)
    conv = as_exact if mode.exact else as_float
    n_s, n_a = env.n_states, env.n_actions
    gamma = conv(env.gamma)
    pol = _policy_matrix(env, policy, conv)
    kernel = [[conv(p) for p in row] for row in env.kernel]

    # P_pi[s][s2] = sum_a pi(a|s) T(s, a, s2); solve (I - gamma P_pi^T) d = e_start.
    p_pi = [
        [
            sum(pol[s][a] * kernel[s * n_a + a][s2] for a in range(n_a))
            for s2 in range(n_s)
        ]
        for s in range(n_s)
    ]
    zero = conv(0)
    one = conv(1)
    system = [
        [(one if s == s2 else zero) - gamma * p_pi[s2][s] for s2 in range(n_s)]
        for s in range(n_s)
    ]
    rhs = [one if s == env.state_index(env.start) else zero for s in range(n_s)]
    d = linalg.solve_square(system, rhs, mode)

    entries = tuple(d[s] * pol[s][a] for s in range(n_s) for a in range(n_a))
    rho = Visitation(entries)
    _self_check(env, rho, gamma, mode)
    return rho


def _self_check(env, rho, gamma, mode):
    tol = 0 if mode.exact else max(_VALIDATION_TOL, 10 * mode.tolerance)
    total = sum(rho.entries)
    expected = (1 if mode.exact else 1.0) / (1 - gamma)
    if abs(total - expected) > tol * abs(expected):
        raise RuntimeError(
            f"visitation normalization violated: sum={total}, expected={expected}"
        )
    residuals = flow_residuals(env, rho, mode)
    scale = abs(expected)
    for s, r in zip(env.states, residuals):
        if abs(r) > tol * scale:
            raise RuntimeError(f"Bellman flow violated at state {s}: residual {r}")


def flow_residuals(env: MarkovEnv, rho: Visitation, mode: NumericMode = EXACT):
    """Per-state residual of
    sum_a rho(s, a) - 1[s = start] - gamma * sum_{s', a'} T(s', a', s) rho(s', a')."""
    conv = as_exact if mode.exact else as_float
    n_s, n_a = env.n_states, env.n_actions
    gamma = conv(env.gamma)
    entries = [conv(v) for v in rho.entries]
    kernel = [[conv(p) for p in row] for row in env.kernel]
    start = env.state_index(env.start)
    out = []
    for s in range(n_s):
        outflow = sum(entries[s * n_a + a] for a in range(n_a))
        inflow = sum(
            kernel[s2 * n_a + a2][s] * entries[s2 * n_a + a2]
            for s2 in range(n_s)
            for a2 in range(n_a)
        )
        source = conv(1) if s == start else conv(0)
        out.append(outflow - source - gamma * inflow)
    return tuple(out)


def policy_value(env: MarkovEnv, policy: Policy, reward: RewardSpec,
                 mode: NumericMode = EXACT) -> tuple:
    """V_i(start) = r_i . rho, one entry per reward dimension."""
    if any(len(row) != env.n_sa for row in reward.rows):
        raise ValueError(
            f"reward rows have width {len(reward.rows[0])}, environment needs {env.n_sa}"
        )
    rho = compute_visitation(env, policy, mode)
    return value_of_visitation(rho, reward, mode)


def value_of_visitation(rho: Visitation, reward: RewardSpec,
                        mode: NumericMode = EXACT) -> tuple:
    conv = as_exact if mode.exact else as_float
    entries = [conv(v) for v in rho.entries]
    out = []
    for row in reward.rows:
        if len(row) != len(entries):
            raise ValueError("reward row width does not match the visitation")
        out.append(sum((conv(r) * e for r, e in zip(row, entries)), conv(0)))
    return tuple(out)


def enumerate_deterministic_policies(env: MarkovEnv, limit: int = 4096):
    """All |A|^|S| deterministic policies in lexicographic action order,
    deterministically named.  Refuses (without enumerating) past `limit`."""
    count = env.n_actions ** env.n_states
    if count > limit:
        raise LimitExceededError(
            f"{count} deterministic policies exceed the limit of {limit}"
        )
    out = []
    for choice in itertools.product(env.actions, repeat=env.n_states):
        name = "pi[" + ",".join(str(a) for a in choice) + "]"
        out.append(Policy.deterministic(name, dict(zip(env.states, choice))))
    return out


def estimate_visitation_monte_carlo(env: MarkovEnv, policy: Policy,
                                    n_rollouts: int = 100_000,
                                    rng: Optional[np.random.Generator] = None,
                                    cutoff: float = 1e-8):
    """Trajectory-sampling estimate of rho with per-entry standard errors.

    Rollouts are truncated at the horizon where the discounted tail drops
    below `cutoff`; the induced bias is below cutoff/(1-gamma) per entry.
    Float-only; used to cross-check the linear solve.
    """
    require_valid_env(env, NumericMode.floating())
    policy.validate_for(env, NumericMode.floating())
    if rng is None:
        rng = np.random.default_rng(0)
    gamma = as_float(env.gamma)
    n_s, n_a = env.n_states, env.n_actions
    horizon = 1 if gamma == 0 else max(1, math.ceil(math.log(cutoff) / math.log(gamma)))

    pol = np.array(
        [[as_float(p) for p in policy.distribution_row(env, s)] for s in env.states]
    )
    kernel = np.array([[as_float(p) for p in row] for row in env.kernel])
    pol_cdf = np.cumsum(pol, axis=1)
    ker_cdf = np.cumsum(kernel, axis=1)

    acc = np.zeros((n_rollouts, n_s * n_a))
    states = np.full(n_rollouts, env.state_index(env.start), dtype=np.int64)
    rows = np.arange(n_rollouts)
    weight = 1.0
    for _ in range(horizon):
        u = rng.random(n_rollouts)
        actions = (u[:, None] < pol_cdf[states]).argmax(axis=1)
        sa = states * n_a + actions
        acc[rows, sa] += weight
        u2 = rng.random(n_rollouts)
        states = (u2[:, None] < ker_cdf[sa]).argmax(axis=1)
        weight *= gamma
    mean = acc.mean(axis=0)
    stderr = acc.std(axis=0, ddof=1) / math.sqrt(n_rollouts)
    return mean, stderr
