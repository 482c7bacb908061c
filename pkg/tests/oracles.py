"""Independent test oracles and seeded corpus builders.

Everything here recomputes results from first principles (exhaustive
enumeration, exact rational arithmetic) without touching the package's
solver internals, so solver tests check two genuinely different routes.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import permutations

import numpy as np

from searchplan import Instance, Point


def rng_for(*key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(list(key)))


# ---------------------------------------------------------------- schedules

def _alloc_candidates(costs, budget, lo=1):
    """Yield count vectors with each entry >= lo and sum(j * c) <= budget."""
    if not costs:
        yield ()
        return
    c = costs[0]
    top = budget // c
    for j in range(lo, top + 1):
        for rest in _alloc_candidates(costs[1:], budget - j * c, lo):
            yield (j,) + rest


def best_schedule_by_enumeration(instance: Instance) -> float:
    """Optimal detection probability by enumerating every visited subset,
    every visit order, and every search allocation.  Exponential; for tiny
    instances only."""
    n = instance.n
    pts = instance.points
    best = 0.0
    for mask in range(1, 1 << n):
        subset = [i for i in range(n) if mask >> i & 1]
        for order in permutations(subset):
            travel = sum(pts[order[k]].distance_to(pts[order[k + 1]])
                         for k in range(len(order) - 1))
            residual = instance.budget - travel
            if residual < 0:
                continue
            budget = int(math.floor(residual + 1e-12))
            costs = [instance.search_costs[i] for i in order]
            if sum(costs) > budget:
                continue
            for counts in _alloc_candidates(costs, budget):
                prob = sum((1.0 - instance.false_negative[i] ** j) * instance.priors[i]
                           for i, j in zip(order, counts))
                if prob > best:
                    best = prob
    return best


def best_ordered_by_enumeration(instance: Instance, ordering, C: int) -> float:
    """Optimum over order-respecting plans under tick rounding, by brute
    force: every subset of the ordering (kept in order), every allocation.

    Mirrors the discretization contract: each hop's combined search+travel
    cost is rounded up once to whole ticks, and the budget is ceil(T * C).
    """
    pts = instance.points
    tau = math.ceil(round(instance.budget * C, 6))
    order = [i - 1 for i in ordering]
    best = 0.0
    for mask in range(1, 1 << len(order)):
        chain = [order[k] for k in range(len(order)) if mask >> k & 1]
        hops = [0.0] + [pts[a].distance_to(pts[b])
                        for a, b in zip(chain, chain[1:])]

        def extend(pos, ticks_left, prob):
            nonlocal best
            if pos == len(chain):
                best = max(best, prob)
                return
            i = chain[pos]
            cost, beta, prior = (instance.search_costs[i],
                                 instance.false_negative[i],
                                 instance.priors[i])
            j = 1
            while True:
                spent = math.ceil(round((j * cost + hops[pos]) * C, 6))
                if spent > ticks_left:
                    break
                extend(pos + 1, ticks_left - spent,
                       prob + (1 - beta ** j) * prior)
                j += 1

        extend(0, tau, 0.0)
    return best


def shortest_open_path_by_enumeration(points: list[Point]) -> float:
    n = len(points)
    if n == 1:
        return 0.0
    best = math.inf
    for order in permutations(range(n)):
        length = sum(points[order[k]].distance_to(points[order[k + 1]])
                     for k in range(n - 1))
        best = min(best, length)
    return best


# ------------------------------------------------------------------ beliefs

def exact_posterior(priors, observations, alpha, beta) -> list[Fraction]:
    """Recursive Bayes in exact rational arithmetic.

    Every float input converts exactly to a Fraction, so discrepancies when
    comparing against the float implementations are entirely theirs.
    """
    p = [Fraction(v) for v in priors]
    a = [Fraction(v) for v in alpha]
    b = [Fraction(v) for v in beta]
    for i, report in observations:
        idx = i - 1
        if report:
            f_target, f_other = 1 - b[idx], a[idx]
        else:
            f_target, f_other = b[idx], 1 - a[idx]
        z = f_target * p[idx] + f_other * (1 - p[idx])
        if z == 0:
            raise ZeroDivisionError("contradictory observation")
        target_mass = p[idx] * f_target / z
        p = [q * f_other / z for q in p]
        p[idx] = target_mass
    return p


# ----------------------------------------------------------------- corpora

def random_grid_instance(seed: int, collinear: bool = False,
                         n_max: int = 7) -> Instance:
    """Random instance matching the desk-scale corpus: n <= n_max distinct
    integer grid points in [0, 10]^2, costs in {1, 2, 3}, budget <= 15."""
    rng = rng_for(4210, seed)
    n = int(rng.integers(2, n_max + 1))
    if collinear:
        xs = rng.choice(11, size=n, replace=False)
        points = [(float(x), 0.0) for x in sorted(xs.tolist())]
    else:
        cells = rng.choice(121, size=n, replace=False)
        points = [(float(c % 11), float(c // 11)) for c in cells.tolist()]
    priors = rng.dirichlet([1.0] * n).tolist()
    betas = rng.uniform(0.1, 0.9, size=n).tolist()
    costs = rng.integers(1, 4, size=n).tolist()
    budget = float(rng.uniform(1.0, 15.0))
    return Instance(points=points, priors=priors, false_negative=betas,
                    search_costs=costs, budget=budget,
                    name=f"grid-{'line' if collinear else 'plane'}-{seed}")


def random_uniform_instance(seed: int, n_max: int = 7) -> Instance:
    rng = rng_for(9177, seed)
    n = int(rng.integers(1, n_max + 1))
    points = [(float(x), float(y))
              for x, y in zip(rng.uniform(0, 10, n), rng.uniform(0, 10, n))]
    beta = float(rng.uniform(0.0, 0.9))
    cost = int(rng.integers(1, 4))
    budget = float(rng.uniform(1.0, 25.0))
    return Instance(points=points, priors=[1.0 / n] * n,
                    false_negative=[beta] * n, search_costs=[cost] * n,
                    budget=budget, name=f"uniform-{seed}")


def random_raw_schedule(instance: Instance, seed: int):
    """A random walk with searches: raw step indices (1-based), possibly
    revisiting points, ignoring the budget."""
    rng = rng_for(5150, seed)
    n = instance.n
    length = int(rng.integers(1, 12))
    steps = [int(rng.integers(1, n + 1))]
    for _ in range(length):
        if rng.random() < 0.5:
            steps.append(steps[-1])  # search
        else:
            steps.append(int(rng.integers(1, n + 1)))
    return steps
