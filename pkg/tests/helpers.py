"""Independent oracles and exhaustive checkers shared across the test suite.

Everything here deliberately avoids the production code paths it is used
to verify: the knapsack and welfare oracles enumerate subsets directly,
and the property checkers evaluate oracles set by set instead of going
through the incremental trackers.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from subpb.core import Instance, UtilityOracle, social_welfare
from subpb.optimize import KnapsackProblem

TOL = 1e-9


def powerset(universe):
    items = list(universe)
    for r in range(len(items) + 1):
        yield from itertools.combinations(items, r)


def brute_force_knapsack(problem: KnapsackProblem) -> frozenset:
    """Max-profit feasible subset by full enumeration; ties broken toward the
    lexicographically smallest id sequence."""
    best_profit = -1
    best_seq = None
    for combo in powerset(range(problem.size)):
        cost = sum((problem.costs[a] for a in combo), Fraction(0))
        if cost > problem.capacity:
            continue
        profit = problem.profit(combo)
        if profit > best_profit or (profit == best_profit and combo < best_seq):
            best_profit = profit
            best_seq = combo
    return frozenset(best_seq)


def brute_force_best_welfare(instance: Instance) -> tuple[frozenset, float]:
    """Welfare-maximizing feasible subset by full enumeration."""
    best = None
    best_welfare = -1.0
    for combo in powerset(instance.alternatives):
        if not instance.feasible(combo):
            continue
        welfare = social_welfare(instance, combo)
        if welfare > best_welfare or (welfare == best_welfare and combo < best):
            best_welfare = welfare
            best = combo
    return frozenset(best), best_welfare


def direct_value_table(oracle: UtilityOracle) -> np.ndarray:
    """Values of all subsets by direct per-set evaluation (no trackers)."""
    m = oracle.m
    table = np.empty(1 << m)
    for mask in range(1 << m):
        members = [a for a in range(m) if mask >> a & 1]
        table[mask] = oracle.value(members)
    return table


def check_normalized(table: np.ndarray) -> None:
    assert table[0] == 0.0
    assert abs(table[-1] - 1.0) <= 1e-12


def check_monotone(table: np.ndarray, m: int, tol: float = TOL) -> None:
    idx = np.arange(len(table))
    for a in range(m):
        without = idx[(idx >> a) & 1 == 0]
        gains = table[without | (1 << a)] - table[without]
        worst = gains.min()
        assert worst >= -tol, f"adding {a} loses {-worst}"


def check_submodular(table: np.ndarray, m: int, tol: float = TOL) -> None:
    idx = np.arange(len(table))
    for a in range(m):
        for b in range(m):
            if a == b:
                continue
            base = idx[((idx >> a) & 1 == 0) & ((idx >> b) & 1 == 0)]
            small = table[base | (1 << a)] - table[base]
            large = table[base | (1 << a) | (1 << b)] - table[base | (1 << b)]
            worst = (small - large).min()
            assert worst >= -tol, f"marginal of {a} grows after adding {b} by {-worst}"


def check_curvature_floor(table: np.ndarray, m: int, curvature: float,
                          tol: float = TOL) -> None:
    """Every marginal is at least (1 - c) times the standalone value."""
    idx = np.arange(len(table))
    keep = 1.0 - curvature
    for a in range(m):
        single = table[1 << a]
        without = idx[(idx >> a) & 1 == 0]
        gains = table[without | (1 << a)] - table[without]
        worst = (gains - keep * single).min()
        assert worst >= -tol, f"curvature floor broken at {a} by {-worst}"
