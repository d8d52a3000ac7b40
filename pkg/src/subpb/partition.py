"""Dyadic cost groups and harmonic scoring of ranked profiles.

Alternatives are bucketed by cost into groups G_0..G_T with boundaries
(l_t, u_t]: u_0 = 1/m, then l_t = 2^(t-1)/m and u_t = 2^t/m. T is the
smallest exponent with 2^T >= m, so u_T >= 1 and every valid cost falls
in exactly one group. All boundary comparisons are exact rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Mapping

from .core import AlternativeId, Instance

if TYPE_CHECKING:  # pragma: no cover - import cycle guard
    from .elicitation import RankingProfile


def group_index_bound(m: int) -> int:
    """T = ceil(log2 m), computed without floating point."""
    if m < 1:
        raise ValueError("m must be positive")
    return (m - 1).bit_length()


def group_bounds(m: int) -> tuple[tuple[Fraction, Fraction], ...]:
    """(l_t, u_t] pairs for t = 0..T."""
    bounds = [(Fraction(0), Fraction(1, m))]
    for t in range(1, group_index_bound(m) + 1):
        bounds.append((Fraction(2 ** (t - 1), m), Fraction(2**t, m)))
    return tuple(bounds)


@dataclass(frozen=True)
class GroupPartition:
    """Cost-based grouping of all alternatives; groups are disjoint and
    their union is the full alternative set."""

    m: int
    T: int
    bounds: tuple[tuple[Fraction, Fraction], ...]
    groups: tuple[tuple[AlternativeId, ...], ...]

    @property
    def thresholds(self) -> tuple[Fraction, ...]:
        """The lower boundaries l_1..l_T, used as approval thresholds."""
        return tuple(self.bounds[t][0] for t in range(1, self.T + 1))

    def group_of(self, a: AlternativeId) -> int:
        for t, members in enumerate(self.groups):
            if a in members:
                return t
        raise ValueError(f"alternative {a} not in any group")


def build_partition(instance: Instance) -> GroupPartition:
    """Assign every alternative to the unique group whose cost interval
    contains it."""
    m = instance.m
    T = group_index_bound(m)
    bounds = group_bounds(m)
    groups: list[list[int]] = [[] for _ in range(T + 1)]
    for a, cost in enumerate(instance.costs):
        if cost <= bounds[0][1]:
            groups[0].append(a)
            continue
        for t in range(1, T + 1):
            low, high = bounds[t]
            if low < cost <= high:
                groups[t].append(a)
                break
        else:  # pragma: no cover - u_T >= 1 >= cost by validation
            raise AssertionError(f"cost {cost} escaped all groups")
    return GroupPartition(m=m, T=T, bounds=bounds, groups=tuple(tuple(g) for g in groups))


def shortlist_cap(m: int, t: int) -> int:
    """floor(sqrt(m) / u_t) in exact integer arithmetic.

    Uses floor(sqrt(m) * m / 2^t) = isqrt(m^3 // 4^t); never below 1, so a
    shortlist can always name at least one alternative."""
    cap = math.isqrt(m**3 // 4**t)
    return max(1, cap)


def selection_size(m: int, t: int) -> int:
    """floor(1 / u_t): how many group-t members a budget of 1 always affords.

    At least 1; a single member costs at most max(u_t, 1) <= 1 by validation."""
    return max(1, m >> t)


@dataclass(frozen=True)
class HarmonicScoreTable:
    """Per-alternative harmonic scores over one ranked group."""

    group_index: int
    scores: Mapping[AlternativeId, float]

    def top(self, count: int) -> tuple[AlternativeId, ...]:
        """Highest-scored alternatives; ties broken by ascending id."""
        ordered = sorted(self.scores, key=lambda a: (-self.scores[a], a))
        return tuple(ordered[:count])


def harmonic_scores(profile: "RankingProfile") -> HarmonicScoreTable:
    """sc(a) = sum over voters of 1 / position(a), positions 1-indexed.

    Every voter must rank exactly the same group."""
    members = frozenset(profile.group)
    scores: dict[int, float] = {a: 0.0 for a in profile.group}
    for ranking in profile.rankings:
        if frozenset(ranking) != members or len(ranking) != len(profile.group):
            raise ValueError("rankings disagree on group membership")
        for pos, a in enumerate(ranking, start=1):
            scores[a] += 1.0 / pos
    return HarmonicScoreTable(group_index=profile.group_index, scores=scores)


def shortlist(
    partition: GroupPartition, scores: HarmonicScoreTable, t: int
) -> tuple[tuple[AlternativeId, ...], tuple[AlternativeId, ...]]:
    """Split G_t into the score shortlist and the rest.

    The shortlist holds the top min(|G_t|, floor(sqrt(m)/u_t)) members by
    harmonic score, ties by ascending id. For t = 0 the cap is at least m,
    so the whole group is shortlisted."""
    members = partition.groups[t]
    if scores.group_index != t:
        raise ValueError(f"scores computed for group {scores.group_index}, not {t}")
    cap = shortlist_cap(partition.m, t)
    chosen = scores.top(min(len(members), cap))
    chosen_set = frozenset(chosen)
    rest = tuple(a for a in members if a not in chosen_set)
    return tuple(sorted(chosen)), rest
