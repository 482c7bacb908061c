"""Polynomial-time solvers for the general planar problem.

* ``solve_tsp_dp`` — order the points along a short open TSP path, then run
  the ordered DP on that ordering (and its reverse, keeping the better run).
* ``solve_greedy`` — repeatedly search the point with the best
  probability-to-cost ratio, updating beliefs after every NO report.
* ``solve_uniform`` — for uniform priors, error rates, and search costs:
  near-equal search allocation over the best k-point short path, for every k.
  Spends up to ``(1 + epsilon) * T`` and, with an exact path oracle, is never
  worse than the optimum at budget ``T``.

Path machinery (Held-Karp tables, nearest-neighbor + 2-opt) also lives here.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dp_solvers import snap_floor, solve_ordered
from .model import (Instance, Point, Schedule, RawSchedule, SolveResult,
                    SolverLimitError, SolverTimeout, canonicalize,
                    detection_probability, empty_result, split_weight)

#: Held-Karp subset tables get large quickly; beyond this use the heuristic.
EXACT_PATH_MAX_POINTS = 12

_IMPROVE_EPS = 1e-12


@dataclass(frozen=True)
class TourOrdering:
    """A visiting order (1-based point indices) and its open-path length."""

    order: tuple[int, ...]
    path_length: float


def _distance_matrix(points: Sequence[Point]) -> list[list[float]]:
    n = len(points)
    d = [[0.0] * n for _ in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            d[a][b] = d[b][a] = points[a].distance_to(points[b])
    return d


def held_karp_tables(dist: list[list[float]]) -> tuple[np.ndarray, np.ndarray]:
    """Shortest open path for every point subset.

    ``value[mask][last]`` is the minimum length of a path visiting exactly
    the points in ``mask`` and ending at ``last``; ``parent`` records the
    predecessor for reconstruction.  O(2^n * n^2) time.
    """
    n = len(dist)
    full = 1 << n
    value = np.full((full, n), np.inf)
    parent = np.full((full, n), -1, dtype=np.int8)
    for i in range(n):
        value[1 << i][i] = 0.0
    for mask in range(1, full):
        for last in range(n):
            if not mask >> last & 1:
                continue
            base = value[mask][last]
            if not math.isfinite(base):
                continue
            row = dist[last]
            for nxt in range(n):
                if mask >> nxt & 1:
                    continue
                cand = base + row[nxt]
                nmask = mask | (1 << nxt)
                if cand < value[nmask][nxt]:
                    value[nmask][nxt] = cand
                    parent[nmask][nxt] = last
    return value, parent


def _unwind_path(mask: int, last: int, parent: np.ndarray) -> list[int]:
    path = []
    while last >= 0:
        path.append(last)
        nxt = int(parent[mask][last])
        mask ^= 1 << last
        last = nxt
    path.reverse()
    return path


def _held_karp_best(dist: list[list[float]]) -> tuple[float, list[int]]:
    n = len(dist)
    value, parent = held_karp_tables(dist)
    full = (1 << n) - 1
    best_last = int(np.argmin(value[full]))
    best_len = float(value[full][best_last])
    path = _unwind_path(full, best_last, parent)
    if path[0] > path[-1]:
        path.reverse()
    return best_len, path


def _nearest_neighbor(dist: list[list[float]], start: int) -> list[int]:
    n = len(dist)
    unvisited = set(range(n))
    unvisited.discard(start)
    path = [start]
    cur = start
    while unvisited:
        nxt = min(unvisited, key=lambda k: (dist[cur][k], k))
        unvisited.discard(nxt)
        path.append(nxt)
        cur = nxt
    return path


def _two_opt(dist: list[list[float]], path: list[int]) -> list[int]:
    """First-improvement 2-opt for an open path: reverse ``path[i:j+1]`` while
    any reversal shortens the two boundary edges."""
    n = len(path)
    improved = True
    while improved:
        improved = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                before = 0.0 if i == 0 else dist[path[i - 1]][path[i]]
                after = 0.0 if j == n - 1 else dist[path[j]][path[j + 1]]
                new_before = 0.0 if i == 0 else dist[path[i - 1]][path[j]]
                new_after = 0.0 if j == n - 1 else dist[path[i]][path[j + 1]]
                if new_before + new_after < before + after - _IMPROVE_EPS:
                    path[i:j + 1] = reversed(path[i:j + 1])
                    improved = True
    return path


def _path_cost(dist: list[list[float]], path: Sequence[int]) -> float:
    return sum(dist[path[k]][path[k + 1]] for k in range(len(path) - 1))


def tsp_order(points: Sequence[Point], mode: str = "auto") -> TourOrdering:
    """A short open path through all points.

    ``exact`` runs the Held-Karp subset DP (at most 12 points), ``heuristic``
    takes the best 2-opt-improved nearest-neighbor path over all starts,
    ``auto`` picks exact when it is affordable.  Deterministic: ties go to
    the smaller start index, and paths are oriented so the smaller endpoint
    comes first.
    """
    n = len(points)
    if n == 0:
        raise ValueError("need at least one point")
    if mode not in ("auto", "exact", "heuristic"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "exact" and n > EXACT_PATH_MAX_POINTS:
        raise SolverLimitError(
            f"exact path ordering supports at most {EXACT_PATH_MAX_POINTS} "
            f"points, got {n}")
    if mode == "auto":
        mode = "exact" if n <= EXACT_PATH_MAX_POINTS else "heuristic"
    if n == 1:
        return TourOrdering((1,), 0.0)
    dist = _distance_matrix(points)
    if mode == "exact":
        length, path = _held_karp_best(dist)
    else:
        length, path = math.inf, None
        for start in range(n):
            cand = _two_opt(dist, _nearest_neighbor(dist, start))
            c = _path_cost(dist, cand)
            if c < length - _IMPROVE_EPS:
                length, path = c, cand
        if path[0] > path[-1]:
            path.reverse()
    return TourOrdering(tuple(k + 1 for k in path), length)


def _rebrand(result: SolveResult, name: str, **extra) -> SolveResult:
    params = dict(result.params)
    params.update(extra)
    return SolveResult(schedule=result.schedule, probability=result.probability,
                       travel_time=result.travel_time, search_time=result.search_time,
                       total_weight=result.total_weight, solver_name=name,
                       params=params)


def solve_tsp_dp(instance: Instance, C: int, deadline: Optional[float] = None,
                 anytime: bool = False, path_mode: str = "auto") -> SolveResult:
    """Ordered DP along a short TSP path; the reversed ordering is evaluated
    too and the better result is kept (forward wins ties)."""
    tour = tsp_order(instance.points, path_mode)
    forward = solve_ordered(instance, tour.order, C, deadline, anytime)
    backward = solve_ordered(instance, tuple(reversed(tour.order)), C,
                             deadline, anytime)
    best = backward if backward.probability > forward.probability else forward
    return _rebrand(best, "tsp-dp", ordering=list(tour.order),
                    ordering_length=tour.path_length, path_mode=path_mode)


def _greedy_pick(candidates, score, tie):
    """argmax of ``score``, ties by ``tie`` descending then smaller index."""
    best = None
    best_key = None
    for i in candidates:
        key = (score(i), tie(i), -i)
        if best_key is None or key > best_key:
            best, best_key = i, key
    return best


def solve_greedy(instance: Instance, update: str = "posterior",
                 ratio: str = "paper", deadline: Optional[float] = None) -> SolveResult:
    """Iterated best ratio of (scaled) belief to cost of moving there and
    searching once.

    The selection ratio is ``beta_i * p[i] / (c_i + d)`` — the first pick uses
    ``c_i`` alone — where ``p`` is the running belief.  ``ratio="marginal"``
    swaps in the one-search detection gain ``(1 - beta_i) * p[i] / (c_i + d)``.
    After each (assumed NO) search the belief is updated Bayes-style;
    ``update="none"`` keeps the priors frozen instead.  Requires alpha = 0.
    """
    if update not in ("posterior", "none"):
        raise ValueError(f"unknown update {update!r}")
    if ratio not in ("paper", "marginal"):
        raise ValueError(f"unknown ratio {ratio!r}")
    if instance.has_false_positives:
        raise ValueError("greedy solver requires all false positives to be 0")
    n = instance.n
    beta = instance.false_negative
    costs = instance.search_costs
    p = list(instance.priors)
    remaining = instance.budget

    def numerator(i):
        return (beta[i - 1] if ratio == "paper" else 1.0 - beta[i - 1]) * p[i - 1]

    def bayes_no(i):
        # One NO report at i with alpha = 0: scale mass at i by beta_i,
        # renormalizing by the actual updated mass.
        pi = p[i - 1]
        z = beta[i - 1] * pi + (sum(p) - pi)
        if z <= 0.0:
            return
        scale = 1.0 / z
        for k in range(n):
            p[k] *= scale
        p[i - 1] = pi * beta[i - 1] * scale

    first = _greedy_pick((i for i in range(1, n + 1) if costs[i - 1] <= remaining),
                         lambda i: numerator(i) / costs[i - 1],
                         lambda i: p[i - 1] / costs[i - 1])
    if first is None:
        return empty_result("greedy", update=update, ratio=ratio)
    raw = [first, first]
    remaining -= costs[first - 1]
    if update == "posterior":
        bayes_no(first)
    at = first
    truncated = False
    while True:
        if deadline is not None and time.monotonic() >= deadline:
            truncated = True
            break
        fee = {i: costs[i - 1] + instance.distance(at, i) for i in range(1, n + 1)}
        pick = _greedy_pick((i for i in range(1, n + 1) if fee[i] <= remaining),
                            lambda i: numerator(i) / fee[i],
                            lambda i: p[i - 1] / fee[i])
        if pick is None:
            break
        remaining -= fee[pick]
        if pick != at:
            raw.append(pick)
        raw.append(pick)
        if update == "posterior":
            bayes_no(pick)
        at = pick
    schedule = canonicalize(instance, RawSchedule(tuple(raw)))
    probability = detection_probability(instance, schedule)
    travel, search = split_weight(instance, schedule)
    return SolveResult.assemble(schedule, probability, travel, search, "greedy",
                                update=update, ratio=ratio, truncated=truncated)


@dataclass(frozen=True)
class UniformParams:
    """Shared sensor/cost values of a uniform instance plus the budget slack
    factor the solver is allowed to spend."""

    beta: float
    cost: int
    epsilon: float

    def __post_init__(self):
        if not 0.0 <= self.beta < 1.0:
            raise ValueError(f"beta must lie in [0, 1), got {self.beta!r}")
        if self.cost < 1 or int(self.cost) != self.cost:
            raise ValueError(f"cost must be a positive integer, got {self.cost!r}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        object.__setattr__(self, "cost", int(self.cost))

    @classmethod
    def from_instance(cls, instance: Instance, epsilon: float) -> "UniformParams":
        _require_uniform(instance)
        return cls(instance.false_negative[0], instance.search_costs[0], epsilon)


def _require_uniform(instance: Instance) -> None:
    n = instance.n
    if any(abs(p - 1.0 / n) > 1e-9 for p in instance.priors):
        raise ValueError("uniform solver requires uniform priors")
    if len(set(instance.false_negative)) != 1:
        raise ValueError("uniform solver requires identical false-negative rates")
    if len(set(instance.search_costs)) != 1:
        raise ValueError("uniform solver requires identical search costs")
    if instance.has_false_positives:
        raise ValueError("uniform solver requires all false positives to be 0")


def allocate_equal(total_searches: int, k: int) -> list[int]:
    """Split ``total_searches`` into ``k`` counts with max - min <= 1; the
    larger counts go to the lower indices."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if total_searches < 0:
        raise ValueError(f"total_searches must be >= 0, got {total_searches}")
    base, rem = divmod(total_searches, k)
    return [base + 1] * rem + [base] * (k - rem)


def _k_paths_exact(points) -> list[tuple[float, list[int]]]:
    """Per k: the shortest open path over the best k-subset (0-based)."""
    n = len(points)
    dist = _distance_matrix(points)
    value, parent = held_karp_tables(dist)
    sizes = [bin(mask).count("1") for mask in range(1 << n)]
    best: list[tuple[float, int, int]] = [(math.inf, 0, -1)] * (n + 1)
    for mask in range(1, 1 << n):
        k = sizes[mask]
        row = value[mask]
        last = int(np.argmin(row))
        length = float(row[last])
        if length < best[k][0] - _IMPROVE_EPS:
            best[k] = (length, mask, last)
    out = []
    for k in range(1, n + 1):
        length, mask, last = best[k]
        path = _unwind_path(mask, last, parent)
        if path[0] > path[-1]:
            path.reverse()
        out.append((length, path))
    return out


def _k_paths_heuristic(points) -> list[tuple[float, list[int]]]:
    """Per k: best k-prefix over 2-opt-improved nearest-neighbor paths."""
    n = len(points)
    dist = _distance_matrix(points)
    paths = [_two_opt(dist, _nearest_neighbor(dist, s)) for s in range(n)]
    prefix = []
    for path in paths:
        acc = [0.0]
        for t in range(1, n):
            acc.append(acc[-1] + dist[path[t - 1]][path[t]])
        prefix.append(acc)
    out = []
    for k in range(1, n + 1):
        best_len, best_s = math.inf, 0
        for s in range(n):
            if prefix[s][k - 1] < best_len - _IMPROVE_EPS:
                best_len, best_s = prefix[s][k - 1], s
        out.append((best_len, paths[best_s][:k]))
    return out


def solve_uniform(instance: Instance, params: UniformParams,
                  path_mode: str = "auto",
                  deadline: Optional[float] = None) -> SolveResult:
    """Dual-approximation solver for uniform instances.

    For every candidate count ``k`` of visited points, take a short open path
    over some ``k`` points, spend the rest of the inflated budget
    ``(1 + epsilon) * T`` on ``floor((T' - L_k) / c)`` searches split as
    equally as possible, and keep the best ``k``.  With the exact path oracle
    the result's probability is at least the optimum at budget ``T``.
    """
    _require_uniform(instance)
    if abs(instance.false_negative[0] - params.beta) > 1e-12:
        raise ValueError("params.beta does not match the instance")
    if instance.search_costs[0] != params.cost:
        raise ValueError("params.cost does not match the instance")
    n = instance.n
    if path_mode not in ("auto", "exact", "heuristic"):
        raise ValueError(f"unknown path mode {path_mode!r}")
    if path_mode == "exact" and n > EXACT_PATH_MAX_POINTS:
        raise SolverLimitError(
            f"exact path oracle supports at most {EXACT_PATH_MAX_POINTS} points")
    if path_mode == "auto":
        path_mode = "exact" if n <= EXACT_PATH_MAX_POINTS else "heuristic"
    beta, cost, eps = params.beta, params.cost, params.epsilon
    inflated = (1.0 + eps) * instance.budget
    k_paths = _k_paths_exact(instance.points) if path_mode == "exact" \
        else _k_paths_heuristic(instance.points)
    best_prob, best = 0.0, None
    for k in range(1, n + 1):
        if deadline is not None and time.monotonic() >= deadline:
            raise SolverTimeout("uniform solver deadline expired")
        length, path = k_paths[k - 1]
        total = snap_floor((inflated - length) / cost)
        if total < 1:
            continue
        counts = allocate_equal(total, k)
        prob = sum(1.0 - beta ** s for s in counts if s > 0) / n
        if prob > best_prob:
            best_prob = prob
            best = (k, length, path, counts, total)
    if best is None:
        return empty_result("uniform", epsilon=eps, path_mode=path_mode,
                            slack=eps * instance.budget)
    k, length, path, counts, total = best
    assert max(counts) - min(counts) <= 1
    visits = tuple((path[t] + 1, counts[t]) for t in range(k) if counts[t] > 0)
    schedule = Schedule(visits)
    probability = detection_probability(instance, schedule)
    travel, search = split_weight(instance, schedule)
    return SolveResult.assemble(schedule, probability, travel, search, "uniform",
                                k=k, epsilon=eps, path_mode=path_mode,
                                k_path_length=length, total_searches=total,
                                slack=eps * instance.budget)
