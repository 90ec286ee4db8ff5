#!/usr/bin/env python3
"""Walk through the bundled two-state examples end to end.

Covers: visitation geometry, the consistency check, why no scalar reward
can split the cycle-parity SOAP, the two-dimensional construction that
can, and the single-hyperplane case.
"""

from rewardsep import (
    EXACT,
    Soap,
    check_consistency,
    check_scalar_optimality,
    compute_visitation,
    design_multi,
    design_scalar,
    verify_realization,
)
from rewardsep.bundles import load_reward, load_soap, parse_bundle
from rewardsep.numeric import format_number


def show_visitations(bundle):
    env = bundle.env
    print("visitation vectors (gamma = 9/10):")
    for policy in bundle.policies:
        rho = compute_visitation(env, policy, EXACT)
        entries = ", ".join(
            f"({s},{a})={format_number(rho.entries[env.sa_index(s, a)])}"
            for s in env.states
            for a in env.actions
        )
        print(f"  {policy.name}: {entries}")


def main():
    bundle = parse_bundle("entailment.json")
    env = bundle.env
    show_visitations(bundle)

    xor = load_soap("xor_soap.json", bundle)
    print("\nSOAP: good = {pi12, pi21}, bad = {pi11, pi22}")
    print(f"consistent: {check_consistency(env, xor, EXACT).consistent}")

    scalar = design_scalar(env, xor, EXACT)
    print(f"scalar reward exists: {scalar.realizable}")
    point = scalar.obstruction.point
    print(
        "  obstruction: the two hulls share the point "
        + "(" + ", ".join(format_number(v) for v in point) + ")"
    )

    multi = design_multi(env, xor, EXACT)
    print(f"multidimensional reward exists: d = {multi.spec.dimension}")
    report = verify_realization(env, xor, multi.spec, EXACT)
    print(f"  synthesized spec verified: {report.realized}")

    paper_like = load_reward("entailment_reward.json", env)
    report = verify_realization(env, xor, paper_like, EXACT)
    print("\nhand-written 2-D spec (a2 earns (1, -1), bounds (2, -8)):")
    for v in report.verdicts:
        values = ", ".join(format_number(x) for x in v.values)
        print(f"  {v.name} [{v.label}]: V = ({values}) -> "
              f"{'feasible' if v.feasible else 'infeasible'}")

    single = load_soap("always_a2_soap.json", bundle)
    reduced = design_multi(env, single, EXACT, reduce=True)
    print(f"\ngood = {{pi22}} vs three bad policies: greedy merge gives "
          f"d = {reduced.spec.dimension}")

    steady = parse_bundle("steady_state.json")
    degenerate = Soap.build(
        good=[steady.policy("pi21")], bad=[steady.policy("pi22")]
    )
    report = check_consistency(steady.env, degenerate, EXACT)
    print("\nabsorbing environment, good = {pi21}, bad = {pi22}:")
    print(f"  consistent: {report.consistent}; witnesses: {report.witnesses}")
    outcome = check_scalar_optimality(steady.env, degenerate, EXACT)
    print(f"  optimality-based scalar design realizable: {outcome.realizable}")


if __name__ == "__main__":
    main()
