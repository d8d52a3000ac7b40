"""Rankings, approvals, and the derived statistics each profile carries."""

from fractions import Fraction

import pytest

from subpb.core import (
    AdditiveOracle,
    CoverageOracle,
    MaxValueOracle,
    OracleSpec,
    RawInstance,
    compute_curvature,
    social_welfare,
    validate_instance,
)
from subpb.elicitation import (
    ApprovalProfile,
    Method,
    RankingProfile,
    approval_profile,
    elicit,
    greedy_prefix_marginals,
    rank_by_marginal,
    rank_by_values,
    ranking_profile,
    threshold_approve,
)
from subpb.partition import build_partition
from subpb.rng import stream


def coverage_example():
    third = 1.0 / 3.0
    return CoverageOracle.normalized(
        weights=[third, third, third], covers=[[0, 1], [1, 2], [1]]
    )


def simple_instance(costs, voters):
    return validate_instance(RawInstance(costs=tuple(costs), voters=tuple(voters)))


class TestRankByMarginal:
    def test_coverage_greedy_order(self):
        # Gains along the greedy order: 2/3 for the first pick, then 1/3 for
        # the second alternative against 0 for the subsumed third.
        assert rank_by_marginal(coverage_example(), [0, 1, 2]) == (0, 1, 2)

    def test_additive_sorts_by_value(self):
        oracle = AdditiveOracle.normalized([0.1, 0.7, 0.2])
        assert rank_by_marginal(oracle, [0, 1, 2]) == (1, 2, 0)

    def test_tie_breaks_by_id_then_marginal_collapses(self):
        oracle = MaxValueOracle.normalized([0.5, 0.5])
        assert rank_by_marginal(oracle, [0, 1]) == (0, 1)

    def test_empty_group_rejected(self):
        with pytest.raises(ValueError):
            rank_by_marginal(AdditiveOracle.normalized([1.0]), [])

    def test_prefix_gains_nonincreasing(self):
        oracle = CoverageOracle.normalized(
            weights=[0.3, 0.2, 0.4, 0.1, 0.5],
            covers=[[0, 1], [1, 2], [2, 3], [4], [0, 4]],
        )
        ranking = rank_by_marginal(oracle, [0, 1, 2, 3, 4])
        gains = greedy_prefix_marginals(oracle, ranking)
        for earlier, later in zip(gains, gains[1:]):
            assert later <= earlier + 1e-9


class TestRankByValues:
    def test_additive(self):
        oracle = AdditiveOracle.normalized([0.1, 0.7, 0.2])
        assert rank_by_values(oracle, [0, 1, 2]) == (1, 2, 0)

    def test_coverage_standalone_tie(self):
        # Standalone weights 2/3, 2/3, 1/3: the leading tie breaks by id.
        assert rank_by_values(coverage_example(), [0, 1, 2]) == (0, 1, 2)

    def test_all_equal_gives_id_order(self):
        oracle = AdditiveOracle.normalized([0.5, 0.5, 0.5])
        assert rank_by_values(oracle, [2, 0, 1]) == (0, 1, 2)


class TestThresholdApprove:
    def test_half_threshold(self):
        oracle = AdditiveOracle.normalized([0.75, 0.25])
        assert threshold_approve(oracle, Fraction(1, 2)) == {0}

    def test_threshold_above_everything(self):
        oracle = AdditiveOracle.normalized([0.3, 0.3, 0.4])
        assert threshold_approve(oracle, Fraction(1, 2)) == frozenset()

    def test_threshold_below_everything(self):
        oracle = AdditiveOracle.normalized([0.5, 0.5])
        assert threshold_approve(oracle, Fraction(1, 4)) == {0, 1}

    def test_boundary_tolerance(self):
        # A value an ulp under the threshold still counts as approving.
        oracle = AdditiveOracle.normalized([0.25, 0.75])
        assert 0 in threshold_approve(oracle, Fraction(1, 4))


class TestProfiles:
    def test_ranking_profile_is_group_permutation(self):
        instance = simple_instance(
            [Fraction(1, 5), Fraction(1, 4), Fraction(1, 2), Fraction(1)],
            [
                OracleSpec("additive", {"values": [0.4, 0.3, 0.2, 0.1]}),
                OracleSpec("max-value", {"values": [1.0, 0.3, 0.8, 0.2]}),
            ],
        )
        partition = build_partition(instance)
        profile = ranking_profile(instance, partition, Method.MARGINAL_VALUES, 0)
        assert profile.group == (0, 1)
        for ranking in profile.rankings:
            assert sorted(ranking) == [0, 1]
        assert profile.position(0, profile.rankings[0][0]) == 1

    def test_empty_group_profile(self):
        instance = simple_instance(
            [Fraction(1, 4)] * 4,
            [OracleSpec("additive", {"values": [1.0] * 4})],
        )
        partition = build_partition(instance)
        profile = ranking_profile(instance, partition, Method.MARGINAL_VALUES, 2)
        assert profile.group == ()
        assert profile.rankings == ((),)

    def test_non_permutation_rejected(self):
        with pytest.raises(ValueError):
            RankingProfile(
                method=Method.MARGINAL_VALUES,
                group_index=0,
                group=(0, 1),
                rankings=((0, 0),),
            )

    def test_approval_profile_statistics(self):
        instance = simple_instance(
            [Fraction(1, 2), Fraction(1, 2)],
            [
                OracleSpec("additive", {"values": [0.75, 0.25]}),
                OracleSpec("additive", {"values": [0.25, 0.75]}),
            ],
        )
        partition = build_partition(instance)
        profile = approval_profile(instance, partition, Fraction(1, 2))
        assert profile.approvals == (frozenset({0}), frozenset({1}))
        assert profile.weights == (1, 1)
        for a in instance.alternatives:
            assert sum(profile.histogram[a]) == instance.n

    def test_histogram_supports_weight_floor(self):
        # Every voter counted strictly above a threshold must approve at it.
        instance = simple_instance(
            [Fraction(k, 8) for k in (1, 2, 3, 8)],
            [
                OracleSpec("additive", {"values": [0.1, 0.5, 0.25, 0.15]}),
                OracleSpec("concave", {"values": [1.0, 0.2, 0.3, 0.6], "gamma": 0.5}),
                OracleSpec("max-value", {"values": [0.9, 0.2, 1.0, 0.4]}),
            ],
        )
        partition = build_partition(instance)
        for t in range(1, partition.T + 1):
            alpha = partition.bounds[t][0]
            profile = approval_profile(instance, partition, alpha)
            for a in instance.alternatives:
                assert profile.weights[a] >= profile.histogram[a][t]

    def test_value_sandwich_from_histogram(self):
        instance = simple_instance(
            [Fraction(k, 8) for k in (1, 3, 5, 8)],
            [
                OracleSpec("additive", {"values": [0.4, 0.3, 0.2, 0.1]}),
                OracleSpec("max-value", {"values": [0.2, 1.0, 0.5, 0.7]}),
            ],
        )
        partition = build_partition(instance)
        profile = approval_profile(instance, partition, partition.thresholds[0])
        for a in instance.alternatives:
            welfare = social_welfare(instance, {a})
            lower = sum(
                profile.histogram[a][t] * float(partition.bounds[t][0])
                for t in range(partition.T + 1)
            )
            upper = profile.histogram[a][0] / instance.m + sum(
                profile.histogram[a][t] * float(partition.bounds[t][1])
                for t in range(1, partition.T + 1)
            )
            assert lower <= welfare + 1e-9
            assert welfare <= upper + 1e-9


class TestGreedyPrefixBound:
    def test_gain_bounded_by_reciprocal_position(self):
        instance = simple_instance(
            [Fraction(1, 8)] * 8,
            [
                OracleSpec("coverage", {
                    "weights": [0.5, 0.25, 0.25, 0.4, 0.3],
                    "covers": [[0], [0, 1], [1, 2], [2], [3], [3, 4], [4], [0, 4]],
                }),
                OracleSpec("additive", {"values": [0.3, 0.1, 0.05, 0.2, 0.05, 0.1, 0.1, 0.1]}),
            ],
        )
        partition = build_partition(instance)
        profile = ranking_profile(instance, partition, Method.MARGINAL_VALUES, 0)
        for voter, ranking in zip(instance.voters, profile.rankings):
            gains = greedy_prefix_marginals(voter, ranking)
            for pos, gain in enumerate(gains, start=1):
                assert gain <= 1.0 / pos + 1e-9

    def test_standalone_bounded_by_curvature_and_position(self):
        instance = simple_instance(
            [Fraction(1, 4)] * 4,
            [
                OracleSpec("concave", {"values": [0.5, 1.0, 0.25, 0.75], "gamma": 0.6}),
                OracleSpec("additive", {"values": [0.4, 0.3, 0.2, 0.1]}),
            ],
        )
        partition = build_partition(instance)
        profile = ranking_profile(instance, partition, Method.STANDALONE_VALUES, 0)
        for voter, ranking in zip(instance.voters, profile.rankings):
            c = compute_curvature(voter)
            assert c < 1 - 1e-6
            for pos, a in enumerate(ranking, start=1):
                assert voter.value((a,)) <= 1.0 / ((1.0 - c) * pos) + 1e-9


class TestElicit:
    def _instance(self):
        return simple_instance(
            [Fraction(1, 5), Fraction(1, 4), Fraction(1, 2), Fraction(1)],
            [
                OracleSpec("additive", {"values": [0.4, 0.3, 0.2, 0.1]}),
                OracleSpec("max-value", {"values": [1.0, 0.3, 0.8, 0.2]}),
            ],
        )

    def test_same_seed_same_profile(self):
        instance = self._instance()
        for method in Method:
            first = elicit(instance, method, stream(42, "elicit"))
            second = elicit(instance, method, stream(42, "elicit"))
            assert first == second

    def test_ranking_draw_covers_one_group(self):
        instance = self._instance()
        partition = build_partition(instance)
        for seed in range(20):
            profile = elicit(instance, Method.MARGINAL_VALUES, stream(seed))
            assert profile.group == partition.groups[profile.group_index]

    def test_threshold_draw_is_uniform_over_lower_bounds(self):
        instance = self._instance()
        seen = {Fraction(1, 4): 0, Fraction(1, 2): 0}
        for seed in range(200):
            profile = elicit(instance, Method.THRESHOLD_APPROVAL, stream(seed))
            assert isinstance(profile, ApprovalProfile)
            seen[profile.threshold] += 1
        assert min(seen.values()) >= 60

    def test_single_alternative_has_no_thresholds(self):
        instance = simple_instance(
            [Fraction(1)], [OracleSpec("additive", {"values": [1.0]})]
        )
        with pytest.raises(ValueError):
            elicit(instance, Method.THRESHOLD_APPROVAL, stream(0))
