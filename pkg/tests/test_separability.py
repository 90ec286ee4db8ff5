import random
from fractions import Fraction

import pytest

from rewardsep.mdp import (
    MarkovEnv,
    Policy,
    RewardSpec,
    compute_visitation,
    enumerate_deterministic_policies,
)
from rewardsep.numeric import EXACT, FLOAT
from rewardsep.separability import (
    DeterministicSoapRequired,
    HullObstruction,
    InconsistentSoapError,
    OverlapObstruction,
    PointSet,
    check_scalar_optimality,
    design_multi,
    design_scalar,
    hulls_intersect,
    in_convex_hull,
)
from rewardsep.soap import Soap
from rewardsep.verify import brute_force_feasible_set, verify_realization

from envs import GAMMA, PI11, PI12, PI21, PI22, entailment_env, steady_state_env

F = Fraction

XOR_SOAP = Soap.build(good=[PI12, PI21], bad=[PI11, PI22])
SINGLE_GOOD_SOAP = Soap.build(good=[PI22], bad=[PI11, PI12, PI21])


def points(env, *policies, mode=EXACT):
    return PointSet.from_policies(env, policies, mode)


def separator_is_strict(sep, kept, excluded):
    for p in kept:
        assert sum(n * e for n, e in zip(sep.normal, p.entries)) >= sep.offset
    for q in excluded:
        assert sum(n * e for n, e in zip(sep.normal, q.entries)) <= sep.offset - 1


class TestHullMembership:
    def test_extreme_point_not_member(self):
        env = entailment_env()
        hull = points(env, PI12, PI21)
        target = compute_visitation(env, PI11, EXACT)
        result = in_convex_hull(target, hull, EXACT)
        assert not result.member
        separator_is_strict(result.separator, hull.points, [target])

    def test_hull_point_is_member_with_unit_weights(self):
        env = entailment_env()
        hull = points(env, PI12, PI21)
        target = compute_visitation(env, PI12, EXACT)
        result = in_convex_hull(target, hull, EXACT)
        assert result.member
        assert result.coefficients == (F(1), F(0))

    def test_midpoint_is_member(self):
        env = entailment_env()
        hull = points(env, PI12, PI21)
        mid = tuple(
            (a + b) / 2 for a, b in zip(hull.points[0].entries, hull.points[1].entries)
        )
        result = in_convex_hull(mid, hull, EXACT)
        assert result.member
        assert result.coefficients == (F(1, 2), F(1, 2))

    def test_empty_hull(self):
        env = entailment_env()
        target = compute_visitation(env, PI11, EXACT)
        result = in_convex_hull(target, PointSet(names=(), points=()), EXACT)
        assert not result.member


class TestHullIntersection:
    def test_xor_hulls_cross_at_shared_midpoint(self):
        env = entailment_env()
        crossing = hulls_intersect(
            points(env, PI12, PI21), points(env, PI11, PI22), EXACT
        )
        assert crossing.intersects
        # Both segments meet only at their common midpoint:
        # 50/19 on the s0 entries, 45/19 on the s1 entries.
        assert crossing.point == (F(50, 19), F(50, 19), F(45, 19), F(45, 19))
        assert crossing.coefficients_a == (F(1, 2), F(1, 2))
        assert crossing.coefficients_b == (F(1, 2), F(1, 2))

    def test_identical_singletons_intersect(self):
        env = entailment_env()
        a = points(env, PI11)
        b = PointSet(names=("copy",), points=a.points)
        assert hulls_intersect(a, b, EXACT).intersects

    def test_single_good_against_triangle_is_disjoint(self):
        env = entailment_env()
        good = points(env, PI22)
        bad = points(env, PI11, PI12, PI21)
        crossing = hulls_intersect(good, bad, EXACT)
        assert not crossing.intersects
        separator_is_strict(crossing.separator, good.points, bad.points)


class TestDesignScalar:
    def test_single_good_realizable_d1(self):
        env = entailment_env()
        outcome = design_scalar(env, SINGLE_GOOD_SOAP, EXACT)
        assert outcome.realizable
        assert outcome.spec.dimension == 1
        assert verify_realization(env, SINGLE_GOOD_SOAP, outcome.spec, EXACT).realized

    def test_xor_soap_not_realizable_with_midpoint_witness(self):
        env = entailment_env()
        outcome = design_scalar(env, XOR_SOAP, EXACT)
        assert not outcome.realizable
        obstruction = outcome.obstruction
        assert isinstance(obstruction, OverlapObstruction)
        assert obstruction.point == (F(50, 19), F(50, 19), F(45, 19), F(45, 19))

    def test_one_state_two_action_split(self):
        env = MarkovEnv.from_tables(
            states=["s0"],
            actions=["a1", "a2"],
            transitions={("s0", a): {"s0": F(1)} for a in ["a1", "a2"]},
            gamma=GAMMA,
            start="s0",
        )
        soap = Soap.build(
            good=[Policy.deterministic("stay1", {"s0": "a1"})],
            bad=[Policy.deterministic("stay2", {"s0": "a2"})],
        )
        outcome = design_scalar(env, soap, EXACT)
        assert outcome.realizable
        # Reward 1 on the good action separates with c = 1/(1-gamma).
        hand_built = verify_realization(
            env,
            soap,
            spec=RewardSpec.build(rows=[(1, 0)], lower_bounds=(F(10),)),
            mode=EXACT,
        )
        assert hand_built.realized

    def test_inconsistent_soap_refused(self):
        env = steady_state_env()
        soap = Soap.build(good=[PI21], bad=[PI22])
        with pytest.raises(InconsistentSoapError) as err:
            design_scalar(env, soap, EXACT)
        assert err.value.report.witnesses == (("pi21", "pi22"),)


class TestDesignMulti:
    def test_xor_soap_realizable_d2(self):
        env = entailment_env()
        outcome = design_multi(env, XOR_SOAP, EXACT)
        assert outcome.realizable
        assert outcome.spec.dimension == 2
        assert verify_realization(env, XOR_SOAP, outcome.spec, EXACT).realized

    def test_reduce_collapses_triangle_to_one_plane(self):
        env = entailment_env()
        full = design_multi(env, SINGLE_GOOD_SOAP, EXACT, reduce=False)
        reduced = design_multi(env, SINGLE_GOOD_SOAP, EXACT, reduce=True)
        assert full.realizable and reduced.realizable
        assert full.spec.dimension == 3
        assert reduced.spec.dimension == 1
        assert verify_realization(env, SINGLE_GOOD_SOAP, reduced.spec, EXACT).realized

    def test_reduce_never_worse(self):
        env = entailment_env()
        for soap in (XOR_SOAP, SINGLE_GOOD_SOAP):
            full = design_multi(env, soap, EXACT, reduce=False)
            reduced = design_multi(env, soap, EXACT, reduce=True)
            assert reduced.spec.dimension <= full.spec.dimension

    def test_obstruction_when_bad_point_in_hull(self):
        env = entailment_env()
        half = F(1, 2)
        blend = Policy.stochastic(
            "blend",
            {"s0": {"a1": half, "a2": half}, "s1": {"a1": half, "a2": half}},
        )
        # blend's visitation is the midpoint of the xor good pair, hence
        # inside their hull.
        soap = Soap.build(good=[PI12, PI21], bad=[blend])
        outcome = design_multi(env, soap, EXACT)
        assert not outcome.realizable
        obstruction = outcome.obstruction
        assert isinstance(obstruction, HullObstruction)
        assert obstruction.policy == "blend"
        assert obstruction.coefficients == (F(1, 2), F(1, 2))

    def test_inconsistent_refusal(self):
        env = steady_state_env()
        soap = Soap.build(good=[PI21], bad=[PI11, PI12, PI22])
        with pytest.raises(InconsistentSoapError):
            design_multi(env, soap, EXACT)

    def test_agreement_in_float_mode(self):
        env = entailment_env()
        outcome = design_multi(env, XOR_SOAP, FLOAT)
        assert outcome.realizable
        assert verify_realization(env, XOR_SOAP, outcome.spec, FLOAT).realized


class TestScalarOptimality:
    def test_always_a1_good_realizable(self):
        env = entailment_env()
        soap = Soap.build(good=[PI11], bad=[PI12, PI21, PI22])
        outcome = check_scalar_optimality(env, soap, EXACT)
        assert outcome.realizable
        # The returned reward makes pi11 optimal with value c over every
        # deterministic policy.
        spec = outcome.spec
        v = spec.lower_bounds[0]
        for policy in enumerate_deterministic_policies(env):
            rho = compute_visitation(env, policy, EXACT)
            value = sum(r * e for r, e in zip(spec.rows[0], rho.entries))
            assert value <= v
        assert verify_realization(env, soap, spec, EXACT).realized

    def test_xor_soap_not_realizable(self):
        env = entailment_env()
        outcome = check_scalar_optimality(env, XOR_SOAP, EXACT)
        assert not outcome.realizable

    def test_degenerate_steady_state_not_realizable(self):
        env = steady_state_env()
        soap = Soap.build(good=[PI21], bad=[PI22])
        outcome = check_scalar_optimality(env, soap, EXACT)
        assert not outcome.realizable

    def test_stochastic_policy_rejected(self):
        env = entailment_env()
        half = F(1, 2)
        mix = Policy.stochastic(
            "mix", {"s0": {"a1": half, "a2": half}, "s1": {"a1": half, "a2": half}}
        )
        soap = Soap.build(good=[mix], bad=[PI11])
        with pytest.raises(DeterministicSoapRequired):
            check_scalar_optimality(env, soap, EXACT)

    def test_range_reading_matches_on_deterministic_soaps(self):
        env = entailment_env()
        for soap in (Soap.build(good=[PI11], bad=[PI12, PI21, PI22]), XOR_SOAP):
            equal = check_scalar_optimality(env, soap, EXACT, equal_values=True)
            ranged = check_scalar_optimality(env, soap, EXACT, equal_values=False)
            assert equal.realizable == ranged.realizable


def random_env(rng, max_states=4, max_actions=3):
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


def random_consistent_soap(env, rng, max_policies=6):
    from rewardsep.soap import check_consistency

    policies = enumerate_deterministic_policies(env, limit=4096)
    for _ in range(50):
        k = rng.randint(2, min(max_policies, len(policies)))
        chosen = rng.sample(policies, k)
        cut = rng.randint(1, k - 1)
        soap = Soap.build(good=chosen[:cut], bad=chosen[cut:])
        if check_consistency(env, soap, EXACT).consistent:
            return soap
    return None


class TestRandomizedEquivalences:
    def test_prop1_prop2_oracles_and_deterministic_realizability(self):
        rng = random.Random(99)
        checked = 0
        while checked < 25:
            env = random_env(rng)
            soap = random_consistent_soap(env, rng)
            if soap is None:
                continue
            checked += 1
            good = PointSet.from_policies(env, soap.good, EXACT)
            bad = PointSet.from_policies(env, soap.bad, EXACT)

            multi = design_multi(env, soap, EXACT, reduce=False)
            membership_says_clear = all(
                not in_convex_hull(point, good, EXACT).member for point in bad.points
            )
            assert multi.realizable == membership_says_clear
            # Deterministic consistent SOAPs are always realizable.
            assert multi.realizable
            assert multi.spec.dimension <= len(soap.bad)
            assert verify_realization(env, soap, multi.spec, EXACT).realized

            scalar = design_scalar(env, soap, EXACT)
            crossing = hulls_intersect(good, bad, EXACT)
            assert scalar.realizable == (not crossing.intersects)
            if scalar.realizable:
                assert verify_realization(env, soap, scalar.spec, EXACT).realized

            reduced = design_multi(env, soap, EXACT, reduce=True)
            assert reduced.realizable
            assert reduced.spec.dimension <= multi.spec.dimension

            # Brute-force feasible set agrees with per-policy verdicts.
            report = verify_realization(env, soap, multi.spec, EXACT)
            feasible_names = {
                tuple(p.action_map[s] for s in env.states)
                for p in brute_force_feasible_set(env, multi.spec, mode=EXACT)
            }
            for verdict, policy in zip(report.verdicts, soap.policies):
                key = tuple(policy.action_map[s] for s in env.states)
                assert verdict.feasible == (key in feasible_names)
