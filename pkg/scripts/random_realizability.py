#!/usr/bin/env python3
"""Randomized realizability experiment.

Samples small environments with rational transitions, draws consistent
deterministic SOAPs, and measures how often a scalar reward suffices and
how much the greedy merge shrinks the dimension below |bad|.
"""

import argparse
import random
import time
from fractions import Fraction

from rewardsep import (
    EXACT,
    MarkovEnv,
    Soap,
    check_consistency,
    design_multi,
    design_scalar,
    enumerate_deterministic_policies,
    verify_realization,
)

F = Fraction


def random_env(rng, max_states, max_actions):
    n_s = rng.randint(2, max_states)
    n_a = rng.randint(2, max_actions)
    states = [f"s{i}" for i in range(n_s)]
    actions = [f"a{i}" for i in range(n_a)]
    transitions = {}
    for s in states:
        for a in actions:
            weights = [rng.randint(0, 4) for _ in range(n_s)]
            if sum(weights) == 0:
                weights[rng.randrange(n_s)] = 1
            total = sum(weights)
            transitions[(s, a)] = {
                s2: F(w, total) for s2, w in zip(states, weights) if w
            }
    gamma = rng.choice([F(1, 2), F(9, 10)])
    return MarkovEnv.from_tables(states, actions, transitions, gamma, states[0])


def random_consistent_soap(env, rng, max_policies):
    policies = enumerate_deterministic_policies(env, limit=4096)
    for _ in range(50):
        k = rng.randint(2, min(max_policies, len(policies)))
        chosen = rng.sample(policies, k)
        cut = rng.randint(1, k - 1)
        soap = Soap.build(good=chosen[:cut], bad=chosen[cut:])
        if check_consistency(env, soap, EXACT).consistent:
            return soap
    return None


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--cases", type=int, default=100)
    parser.add_argument("--max-states", type=int, default=4)
    parser.add_argument("--max-actions", type=int, default=3)
    parser.add_argument("--max-policies", type=int, default=6)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    scalar_ok = 0
    reduced_dims = []
    full_dims = []
    start = time.perf_counter()
    done = 0
    while done < args.cases:
        env = random_env(rng, args.max_states, args.max_actions)
        soap = random_consistent_soap(env, rng, args.max_policies)
        if soap is None:
            continue
        done += 1
        outcome = design_multi(env, soap, EXACT, reduce=False)
        assert outcome.realizable, "consistent deterministic SOAP must be realizable"
        assert verify_realization(env, soap, outcome.spec, EXACT).realized
        reduced = design_multi(env, soap, EXACT, reduce=True)
        full_dims.append(outcome.spec.dimension)
        reduced_dims.append(reduced.spec.dimension)
        if design_scalar(env, soap, EXACT).realizable:
            scalar_ok += 1
    elapsed = time.perf_counter() - start

    n = args.cases
    print(f"cases: {n} (seed {args.seed}), elapsed {elapsed:.1f}s")
    print(f"realizable multidimensionally: {n}/{n}")
    print(f"scalar reward sufficed:        {scalar_ok}/{n}")
    print(f"mean d without merge:          {sum(full_dims) / n:.2f}")
    print(f"mean d with greedy merge:      {sum(reduced_dims) / n:.2f}")
    shrunk = sum(1 for a, b in zip(full_dims, reduced_dims) if b < a)
    print(f"merge strictly reduced d:      {shrunk}/{n}")


if __name__ == "__main__":
    main()
