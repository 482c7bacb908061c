"""Core problem model: instances, schedules, detection probability, and weights.

A searcher moves between candidate points in the plane at unit speed and may
search its current point repeatedly.  Each point ``i`` carries a prior
probability ``p_i`` of housing the target, a false-negative rate ``beta_i``
(a search of the target's point misses it with this probability), an optional
false-positive rate ``alpha_i``, and an integer search cost ``c_i``.  A plan
must fit within the time budget ``T``: travel time is Euclidean distance,
search time is ``c_i`` per search.

Point indices are 1-based throughout the public API: index ``i`` refers to
``instance.points[i - 1]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence, Union

PRIOR_SUM_TOL = 1e-9

#: Priors whose sum is off by at most this much are renormalized by loaders.
PRIOR_RENORM_TOL = 1e-6


class SolverTimeout(RuntimeError):
    """A solver's cooperative deadline expired before it finished."""


class SolverLimitError(RuntimeError):
    """An input exceeds a solver's declared size limits."""


class Point(NamedTuple):
    """A candidate target location in the plane (length units)."""

    x: float
    y: float

    def distance_to(self, other: "Point") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


def _float_tuple(values: Iterable, name: str) -> tuple[float, ...]:
    out = []
    for k, v in enumerate(values):
        f = float(v)
        if not math.isfinite(f):
            raise ValueError(f"{name}[{k}] must be finite, got {v!r}")
        out.append(f)
    return tuple(out)


def _cost_tuple(values: Iterable, name: str) -> tuple[int, ...]:
    out = []
    for k, v in enumerate(values):
        if isinstance(v, float) and not v.is_integer():
            raise ValueError(f"{name}[{k}] must be an integer, got {v!r}")
        c = int(v)
        if c < 1:
            raise ValueError(f"{name}[{k}] must be >= 1, got {v!r}")
        out.append(c)
    return tuple(out)


@dataclass(frozen=True)
class Instance:
    """A search problem: weighted points, sensor error rates, and a budget.

    Invariants are enforced on construction: all per-point sequences share
    the same length, priors are nonnegative and sum to 1 within 1e-9,
    ``0 <= beta_i < 1`` and ``0 <= alpha_i < 1``, search costs are positive
    integers, and the budget is a nonnegative real.
    """

    points: tuple[Point, ...]
    priors: tuple[float, ...]
    false_negative: tuple[float, ...]
    search_costs: tuple[int, ...]
    budget: float
    false_positive: tuple[float, ...] = ()
    name: str = ""

    def __post_init__(self):
        points = tuple(Point(float(x), float(y)) for x, y in self.points)
        if not points:
            raise ValueError("an instance needs at least one point")
        for k, p in enumerate(points):
            if not (math.isfinite(p.x) and math.isfinite(p.y)):
                raise ValueError(f"points[{k}] has non-finite coordinates")
        n = len(points)
        priors = _float_tuple(self.priors, "priors")
        beta = _float_tuple(self.false_negative, "false_negative")
        alpha = _float_tuple(self.false_positive or (0.0,) * n, "false_positive")
        costs = _cost_tuple(self.search_costs, "search_costs")
        for name, seq in (("priors", priors), ("false_negative", beta),
                          ("false_positive", alpha), ("search_costs", costs)):
            if len(seq) != n:
                raise ValueError(f"{name} has length {len(seq)}, expected {n}")
        for k, p in enumerate(priors):
            if p < 0:
                raise ValueError(f"priors[{k}] must be >= 0, got {p}")
        if abs(sum(priors) - 1.0) > PRIOR_SUM_TOL:
            raise ValueError(f"priors must sum to 1 within {PRIOR_SUM_TOL}, "
                             f"got {sum(priors)!r}")
        for label, seq in (("false_negative", beta), ("false_positive", alpha)):
            for k, v in enumerate(seq):
                if not (0.0 <= v < 1.0):
                    raise ValueError(f"{label}[{k}] must lie in [0, 1), got {v}")
        budget = float(self.budget)
        if not math.isfinite(budget) or budget < 0:
            raise ValueError(f"budget must be a nonnegative real, got {self.budget!r}")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "false_negative", beta)
        object.__setattr__(self, "false_positive", alpha)
        object.__setattr__(self, "search_costs", costs)
        object.__setattr__(self, "budget", budget)

    @property
    def n(self) -> int:
        return len(self.points)

    def distance(self, i: int, j: int) -> float:
        """Euclidean distance between points ``i`` and ``j`` (1-based)."""
        return self.points[i - 1].distance_to(self.points[j - 1])

    @property
    def has_false_positives(self) -> bool:
        return any(a > 0 for a in self.false_positive)

    def with_budget(self, budget: float) -> "Instance":
        return Instance(self.points, self.priors, self.false_negative,
                        self.search_costs, budget, self.false_positive, self.name)


@dataclass(frozen=True)
class Schedule:
    """A canonical no-revisit plan: ordered (point_index, search_count) pairs.

    Every visited point appears exactly once and is searched at least once
    during its visit.  The searcher starts at the first visited point.
    """

    visits: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        visits = tuple((int(i), int(s)) for i, s in self.visits)
        seen = set()
        for i, s in visits:
            if i in seen:
                raise ValueError(f"point {i} is visited more than once")
            seen.add(i)
            if s < 1:
                raise ValueError(f"search_count for point {i} must be >= 1, got {s}")
        object.__setattr__(self, "visits", visits)

    @property
    def point_indices(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.visits)

    @property
    def total_searches(self) -> int:
        return sum(s for _, s in self.visits)

    def __len__(self) -> int:
        return len(self.visits)


@dataclass(frozen=True)
class RawSchedule:
    """A raw step sequence: the first entry is the start point; a repeated
    index is a search of that point, a changed index is a move."""

    steps: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(int(i) for i in self.steps))


ScheduleLike = Union[Schedule, RawSchedule]


@dataclass
class SolveResult:
    """A solver's output: the plan plus its analytic quality and cost."""

    schedule: Schedule
    probability: float
    travel_time: float
    search_time: float
    total_weight: float
    solver_name: str
    params: dict = field(default_factory=dict)

    @classmethod
    def assemble(cls, schedule: Schedule, probability: float, travel_time: float,
                 search_time: float, solver_name: str, **params) -> "SolveResult":
        return cls(schedule=schedule, probability=probability,
                   travel_time=travel_time, search_time=search_time,
                   total_weight=travel_time + search_time,
                   solver_name=solver_name, params=params)

    def to_dict(self) -> dict:
        return {
            "solver": self.solver_name,
            "probability": self.probability,
            "travel_time": self.travel_time,
            "search_time": self.search_time,
            "total_weight": self.total_weight,
            "schedule": {"visits": [[i, s] for i, s in self.schedule.visits]},
            "params": self.params,
        }


def _check_indices(instance: Instance, indices: Iterable[int]) -> None:
    n = instance.n
    for i in indices:
        if not 1 <= i <= n:
            raise IndexError(f"point index {i} out of range [1, {n}]")


def path_length(points: Sequence[Point]) -> float:
    """Length of the open polyline through ``points`` in order."""
    return sum(points[k].distance_to(points[k + 1]) for k in range(len(points) - 1))


def detection_probability(instance: Instance, schedule: Schedule) -> float:
    """Probability that the target is reported at its true location at least
    once: ``sum_i (1 - beta_i ** s_i) * p_i`` over the visited points.

    Depends only on per-point search counts, not on visit order.
    """
    _check_indices(instance, schedule.point_indices)
    total = 0.0
    for i, s in schedule.visits:
        total += (1.0 - instance.false_negative[i - 1] ** s) * instance.priors[i - 1]
    return total


def schedule_weight(instance: Instance, schedule: ScheduleLike) -> float:
    """Total time of a plan: Euclidean travel plus per-search costs.

    Accepts a canonical schedule (travel follows the visit order) or a raw
    step sequence (each step is charged individually).
    """
    if isinstance(schedule, RawSchedule):
        steps = schedule.steps
        _check_indices(instance, steps)
        total = 0.0
        for t in range(1, len(steps)):
            a, b = steps[t - 1], steps[t]
            total += instance.search_costs[b - 1] if a == b else instance.distance(a, b)
        return total
    _check_indices(instance, schedule.point_indices)
    search = sum(s * instance.search_costs[i - 1] for i, s in schedule.visits)
    travel = path_length([instance.points[i - 1] for i in schedule.point_indices])
    return travel + search


def split_weight(instance: Instance, schedule: Schedule) -> tuple[float, float]:
    """(travel_time, search_time) of a canonical schedule."""
    _check_indices(instance, schedule.point_indices)
    search = sum(s * instance.search_costs[i - 1] for i, s in schedule.visits)
    travel = path_length([instance.points[i - 1] for i in schedule.point_indices])
    return travel, search


def canonicalize(instance: Instance, raw: RawSchedule) -> Schedule:
    """Merge all searches of each point into one visit at its first appearance.

    The result has the same detection probability as ``raw`` and never more
    weight (shortcutting repeated passes cannot lengthen a Euclidean path).
    A raw schedule with no search steps canonicalizes to the empty schedule.
    """
    steps = raw.steps
    _check_indices(instance, steps)
    counts: dict[int, int] = {}
    order: list[int] = []
    for t, i in enumerate(steps):
        if i not in counts:
            counts[i] = 0
            order.append(i)
        if t > 0 and steps[t - 1] == i:
            counts[i] += 1
    return Schedule(tuple((i, counts[i]) for i in order if counts[i] > 0))


def validate(instance: Instance, schedule,
             tolerance: float = 1e-9) -> list[str]:
    """Check a plan against the instance; an empty list means feasible.

    Violations are returned as data rather than raised, so callers can
    report all of them at once.  Accepts a :class:`Schedule` or a raw
    sequence of ``(point_index, search_count)`` pairs, so structurally
    broken plans (revisits, zero counts) are reported instead of rejected.
    """
    pairs = schedule.visits if isinstance(schedule, Schedule) else \
        [(int(i), int(s)) for i, s in schedule]
    violations = []
    n = instance.n
    seen = set()
    for i, s in pairs:
        if not 1 <= i <= n:
            violations.append(f"index violation: point {i} outside [1, {n}]")
            continue
        if i in seen:
            violations.append(f"revisit violation: point {i} appears more than once")
        seen.add(i)
        if s < 1:
            violations.append(f"count violation: point {i} searched {s} times")
    if not any(v.startswith("index") for v in violations):
        search = sum(s * instance.search_costs[i - 1] for i, s in pairs)
        travel = path_length([instance.points[i - 1] for i, _ in pairs])
        weight = travel + search
        if weight > instance.budget + tolerance:
            violations.append(
                f"budget violation: weight {weight!r} exceeds budget "
                f"{instance.budget!r} + tolerance {tolerance!r}")
    return violations


def diameter(instance: Instance) -> float:
    """Maximum pairwise Euclidean distance of the point set (0 for n = 1)."""
    pts = instance.points
    best = 0.0
    for a in range(len(pts)):
        for b in range(a + 1, len(pts)):
            d = pts[a].distance_to(pts[b])
            if d > best:
                best = d
    return best


def empty_result(solver_name: str, **params) -> SolveResult:
    """The do-nothing plan, used when nothing affordable exists."""
    return SolveResult.assemble(Schedule(), 0.0, 0.0, 0.0, solver_name, **params)
