"""Vote profiles induced by utility oracles.

Three elicitation formats are supported: greedy marginal-gain rankings of
one cost group, standalone-value rankings of one cost group, and approval
sets at a rational threshold. Ranking profiles carry one permutation of
the group per voter; approval profiles carry per-voter approval sets plus
the derived weight and value-interval histogram used by aggregation.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .core import AlternativeId, Instance, UtilityOracle, marginal
from .partition import GroupPartition, build_partition

#: Utilities within this distance of a rational threshold count as >=.
APPROVAL_TOL = 1e-12


class Method(enum.Enum):
    """Preference elicitation formats."""

    MARGINAL_VALUES = "marginal-rank"
    STANDALONE_VALUES = "value-rank"
    THRESHOLD_APPROVAL = "threshold"

    @property
    def is_ranking(self) -> bool:
        return self is not Method.THRESHOLD_APPROVAL


RANKING_METHODS = (Method.MARGINAL_VALUES, Method.STANDALONE_VALUES)


@dataclass(frozen=True)
class RankingProfile:
    """Per-voter permutations of one cost group.

    For MARGINAL_VALUES the order is the greedy marginal-gain order, so
    gains are nonincreasing along each ranking; for STANDALONE_VALUES the
    standalone values are nonincreasing."""

    method: Method
    group_index: int
    group: tuple[AlternativeId, ...]
    rankings: tuple[tuple[AlternativeId, ...], ...]

    def __post_init__(self):
        members = frozenset(self.group)
        for ranking in self.rankings:
            if len(ranking) != len(members) or frozenset(ranking) != members:
                raise ValueError("each ranking must be a permutation of the group")

    @property
    def n(self) -> int:
        return len(self.rankings)

    def position(self, voter: int, a: AlternativeId) -> int:
        """1-indexed position of `a` in the voter's ranking."""
        return self.rankings[voter].index(a) + 1


@dataclass(frozen=True)
class ApprovalProfile:
    """Per-voter approval sets at one threshold, with derived statistics.

    weights[a] counts approving voters; histogram[a][t] counts voters whose
    standalone value for `a` falls in the t-th value interval (intervals
    reuse the cost-group boundaries)."""

    threshold: Fraction
    approvals: tuple[frozenset, ...]
    weights: tuple[int, ...]
    histogram: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.approvals)


VoteProfile = Union[RankingProfile, ApprovalProfile]


def rank_by_marginal(
    oracle: UtilityOracle, group: Sequence[AlternativeId]
) -> tuple[AlternativeId, ...]:
    """Greedy order: repeatedly append the member with the largest marginal
    gain over the already-ranked prefix, ties by ascending id."""
    if not group:
        raise ValueError("cannot rank an empty group")
    remaining = sorted(group)
    prefix: list[int] = []
    order: list[int] = []
    while remaining:
        best = None
        best_gain = -1.0
        for a in remaining:
            gain = marginal(oracle, a, prefix)
            if gain > best_gain:
                best, best_gain = a, gain
        order.append(best)
        prefix.append(best)
        remaining.remove(best)
    return tuple(order)


def rank_by_values(
    oracle: UtilityOracle, group: Sequence[AlternativeId]
) -> tuple[AlternativeId, ...]:
    """Sort by standalone value, descending; ties by ascending id."""
    if not group:
        raise ValueError("cannot rank an empty group")
    return tuple(sorted(group, key=lambda a: (-oracle.value((a,)), a)))


def threshold_approve(oracle: UtilityOracle, alpha: Fraction) -> frozenset:
    """All alternatives whose standalone value meets the threshold."""
    cutoff = float(alpha) - APPROVAL_TOL
    return frozenset(a for a in range(oracle.m) if oracle.value((a,)) >= cutoff)


def greedy_prefix_marginals(
    oracle: UtilityOracle, ranking: Sequence[AlternativeId]
) -> tuple[float, ...]:
    """Marginal gain of each ranked alternative over its predecessors."""
    gains = []
    prefix: list[int] = []
    for a in ranking:
        gains.append(marginal(oracle, a, prefix))
        prefix.append(a)
    return tuple(gains)


def value_interval_index(x: float, partition: GroupPartition) -> int:
    """Index of the value interval containing x.

    Interval boundaries are shifted by APPROVAL_TOL so that a voter counted
    strictly above l_t is always an approver at threshold l_t."""
    for t in range(partition.T + 1):
        if x <= float(partition.bounds[t][1]) + APPROVAL_TOL:
            return t
    return partition.T  # x <= 1 <= u_T up to float noise


def ranking_profile(
    instance: Instance, partition: GroupPartition, method: Method, t: int
) -> RankingProfile:
    """Deterministic profile for group t; an empty group yields empty
    rankings rather than an error."""
    if method not in RANKING_METHODS:
        raise ValueError(f"{method} is not a ranking method")
    group = partition.groups[t]
    if not group:
        rankings = tuple(() for _ in instance.voters)
    elif method is Method.MARGINAL_VALUES:
        rankings = tuple(rank_by_marginal(v, group) for v in instance.voters)
    else:
        rankings = tuple(rank_by_values(v, group) for v in instance.voters)
    return RankingProfile(method=method, group_index=t, group=group, rankings=rankings)


def approval_profile(
    instance: Instance, partition: GroupPartition, alpha: Fraction
) -> ApprovalProfile:
    """Approval sets at threshold alpha plus derived weights and histogram."""
    approvals = tuple(threshold_approve(v, alpha) for v in instance.voters)
    weights = tuple(
        sum(1 for approved in approvals if a in approved) for a in instance.alternatives
    )
    histogram = []
    for a in instance.alternatives:
        counts = [0] * (partition.T + 1)
        for voter in instance.voters:
            counts[value_interval_index(voter.value((a,)), partition)] += 1
        histogram.append(tuple(counts))
    return ApprovalProfile(
        threshold=Fraction(alpha),
        approvals=approvals,
        weights=weights,
        histogram=tuple(histogram),
    )


def elicit(
    instance: Instance,
    method: Method,
    rng: random.Random,
    partition: GroupPartition | None = None,
) -> VoteProfile:
    """Draw the public randomness (a group index, or a threshold) and collect
    every voter's vote. Deterministic given the RNG state."""
    if partition is None:
        partition = build_partition(instance)
    if method.is_ranking:
        t = rng.randrange(partition.T + 1)
        return ranking_profile(instance, partition, method, t)
    thresholds = partition.thresholds
    if not thresholds:
        raise ValueError("threshold approval needs at least two alternatives")
    alpha = rng.choice(thresholds)
    return approval_profile(instance, partition, alpha)
