"""Brute-force exact solver for small instances, plus a knapsack-derived
instance generator used to sanity-check it.

Optimality rests on two structural facts: an optimal plan never revisits a
point, and its detection probability depends only on per-point search counts.
Enumerating every subset of points, ordering each by its shortest spanning
open path, and allocating the leftover integer search budget by DP therefore
covers an optimal plan.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np

from .dp_solvers import Instance1D, _alloc_best, snap_floor
from .heuristics import _distance_matrix, _unwind_path, held_karp_tables
from .model import (Instance, Schedule, SolveResult, SolverLimitError,
                    SolverTimeout, detection_probability, empty_result)


@dataclass(frozen=True)
class ExactLimits:
    """Guard rails: refuse instances whose enumeration would not finish."""

    max_points: int = 10
    max_scaled_budget: int = 100_000

    def __post_init__(self):
        if self.max_points < 1 or self.max_scaled_budget < 1:
            raise ValueError("limits must be positive")


@dataclass(frozen=True)
class KnapsackItems:
    """A knapsack problem: positive integer profits/weights and a capacity."""

    profits: tuple[int, ...]
    weights: tuple[int, ...]
    capacity: int

    def __post_init__(self):
        profits = tuple(int(p) for p in self.profits)
        weights = tuple(int(w) for w in self.weights)
        if len(profits) != len(weights):
            raise ValueError("profits and weights must have equal length")
        if not profits:
            raise ValueError("need at least one item")
        if any(p < 1 for p in profits) or any(w < 1 for w in weights):
            raise ValueError("profits and weights must be positive integers")
        if self.capacity < 0:
            raise ValueError("capacity must be nonnegative")
        object.__setattr__(self, "profits", profits)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "capacity", int(self.capacity))


def solve_exact(instance: Instance, limits: Optional[ExactLimits] = None,
                deadline: Optional[float] = None) -> SolveResult:
    """Globally optimal plan by subset enumeration (requires alpha = 0).

    Subsets are visited by size then lexicographically; each one's shortest
    spanning open path comes from a single Held-Karp sweep over all masks,
    and the whole-unit residual budget is allocated by the same knapsack-style
    DP the 1D solver uses.  Ties keep the earlier subset.
    """
    limits = limits or ExactLimits()
    n = instance.n
    if n > limits.max_points:
        raise SolverLimitError(
            f"exact solver limited to {limits.max_points} points, got {n}")
    if instance.has_false_positives:
        raise ValueError("exact solver requires all false positives to be 0")
    dist = _distance_matrix(instance.points)
    value, parent = held_karp_tables(dist)
    costs = instance.search_costs
    betas = instance.false_negative
    priors = instance.priors
    budget = instance.budget
    best_prob = 0.0
    best: Optional[tuple[int, int, int]] = None  # (mask, last, search_budget)
    evaluated = 0
    for size in range(1, n + 1):
        for combo in combinations(range(n), size):
            if deadline is not None and time.monotonic() >= deadline:
                raise SolverTimeout("exact solver deadline expired")
            mask = 0
            for i in combo:
                mask |= 1 << i
            row = value[mask]
            last = int(np.argmin(row))
            length = float(row[last])
            min_search = sum(costs[i] for i in combo)
            if length + min_search > budget + 1e-12:
                continue
            residual = snap_floor(budget - length)
            if residual < min_search:
                continue
            cells = (size + 1) * (residual + 1)
            if cells > limits.max_scaled_budget:
                raise SolverLimitError(
                    f"allocation table of {cells} cells exceeds "
                    f"max_scaled_budget={limits.max_scaled_budget}")
            evaluated += 1
            path = _unwind_path(mask, last, parent)
            if path[0] > path[-1]:
                path.reverse()
            prob, _ = _alloc_best([costs[i] for i in path],
                                  [betas[i] for i in path],
                                  [priors[i] for i in path], residual)
            if prob > best_prob:
                best_prob = prob
                best = (mask, last, residual)
    if best is None:
        return empty_result("exact", subsets_evaluated=evaluated)
    mask, last, residual = best
    path = _unwind_path(mask, last, parent)
    if path[0] > path[-1]:
        path.reverse()
    _, counts = _alloc_best([costs[i] for i in path], [betas[i] for i in path],
                            [priors[i] for i in path], residual,
                            want_choices=True)
    visits = tuple((i + 1, s) for i, s in zip(path, counts) if s > 0)
    schedule = Schedule(visits)
    probability = detection_probability(instance, schedule)
    travel = float(value[mask][last])
    search = float(sum(s * costs[i] for i, s in zip(path, counts)))
    return SolveResult.assemble(schedule, probability, travel, search, "exact",
                                subsets_evaluated=evaluated)


def knapsack_to_instance(items: KnapsackItems) -> Instance1D:
    """Encode a knapsack problem as a line search problem.

    Item ``i`` becomes the point ``i / (2n)`` with search cost ``w(i)`` and
    prior ``p(i) / sum p``; the searcher is perfect (beta = 0) and the budget
    is ``B + 1/2``, so total travel can never displace a whole search unit.
    """
    n = len(items.profits)
    total = sum(items.profits)
    return Instance1D(
        positions=tuple(i / (2 * n) for i in range(1, n + 1)),
        priors=tuple(p / total for p in items.profits),
        false_negative=(0.0,) * n,
        search_costs=items.weights,
        budget=items.capacity + 0.5,
        name="knapsack-reduction",
    )


def brute_force_knapsack(items: KnapsackItems) -> int:
    """Optimal knapsack profit by subset enumeration (test oracle scale)."""
    n = len(items.profits)
    best = 0
    for mask in range(1 << n):
        weight = profit = 0
        for i in range(n):
            if mask >> i & 1:
                weight += items.weights[i]
                profit += items.profits[i]
        if weight <= items.capacity and profit > best:
            best = profit
    return best


def verify_reduction(items: KnapsackItems) -> bool:
    """Does the exact solver, run on the encoded line instance, select a
    point set whose total profit equals the knapsack optimum?"""
    instance = knapsack_to_instance(items).to_instance()
    result = solve_exact(instance)
    visited_profit = sum(items.profits[i - 1] for i in result.schedule.point_indices)
    return visited_profit == brute_force_knapsack(items)
