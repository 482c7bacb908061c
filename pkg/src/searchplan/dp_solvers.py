"""Exact pseudopolynomial dynamic programs with schedule reconstruction.

Two solvers live here:

* ``solve_1d`` / ``solve_segment_1d`` — points on a line.  An optimal plan
  sweeps monotonically, so after guessing the leftmost and rightmost visited
  points the residual budget is an integer search budget and the allocation
  is an unbounded-knapsack-style DP.

* ``solve_ordered`` — points in the plane that must be searched in a given
  order (skipping allowed).  Time is discretized into ``C`` ticks per unit;
  each hop's combined cost ``j * c_i + d(v_i, v_k)`` is rounded up once to
  whole ticks.  Reported weights are the true, unrounded ones and may exceed
  the budget by at most ``1 / C``.

Both reconstruct the maximizing plan via per-cell choice records.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from .model import (Instance, Schedule, SolveResult, SolverLimitError,
                    SolverTimeout, detection_probability, diameter,
                    empty_result, split_weight)

#: Above this many table cells the ordered DP switches to subset evaluation.
DENSE_CELL_LIMIT = 4_000_000

#: Subset evaluation enumerates 2^m chains; refuse beyond this many points.
SPARSE_MAX_POINTS = 20

#: Cap on allocation-table cells in subset mode.
SPARSE_ALLOC_LIMIT = 5_000_000

_SNAP = 1e-6  # absolute; float noise in tick products stays well below this


def _snap_int(x: float) -> Optional[int]:
    r = round(x)
    if abs(x - r) <= _SNAP:
        return int(r)
    return None


def snap_floor(x: float) -> int:
    """floor(x), treating values within 1e-6 of an integer as that integer so
    that exact-in-spirit budgets survive float arithmetic."""
    r = _snap_int(x)
    return r if r is not None else int(math.floor(x))


def snap_ceil(x: float) -> int:
    """ceil(x) with the same near-integer snapping as :func:`snap_floor`."""
    r = _snap_int(x)
    return r if r is not None else int(math.ceil(x))


def _check_deadline(deadline: Optional[float]) -> bool:
    return deadline is not None and time.monotonic() >= deadline


@dataclass(frozen=True)
class Instance1D:
    """A search problem on a line: strictly increasing x-coordinates, no
    false positives."""

    positions: tuple[float, ...]
    priors: tuple[float, ...]
    false_negative: tuple[float, ...]
    search_costs: tuple[int, ...]
    budget: float
    name: str = ""

    def __post_init__(self):
        embedded = Instance(
            points=[(x, 0.0) for x in self.positions],
            priors=self.priors,
            false_negative=self.false_negative,
            search_costs=self.search_costs,
            budget=self.budget,
            name=self.name,
        )
        pos = tuple(float(x) for x in self.positions)
        for k in range(len(pos) - 1):
            if pos[k + 1] <= pos[k]:
                raise ValueError(
                    f"positions must be strictly increasing; "
                    f"positions[{k}]={pos[k]!r} >= positions[{k + 1}]={pos[k + 1]!r}")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "priors", embedded.priors)
        object.__setattr__(self, "false_negative", embedded.false_negative)
        object.__setattr__(self, "search_costs", embedded.search_costs)
        object.__setattr__(self, "budget", embedded.budget)

    @property
    def n(self) -> int:
        return len(self.positions)

    def to_instance(self) -> Instance:
        """Embed on the x-axis as a planar instance (alpha = 0)."""
        return Instance(points=[(x, 0.0) for x in self.positions],
                        priors=self.priors, false_negative=self.false_negative,
                        search_costs=self.search_costs, budget=self.budget,
                        name=self.name)


def to_line_instance(instance: Instance,
                     tolerance: float = 1e-9) -> tuple[Instance1D, tuple[int, ...]]:
    """Project a collinear planar instance onto a line.

    Returns the 1D instance (positions sorted ascending) and, per sorted
    position, the original 1-based point index.  Raises ``ValueError`` when
    the points are not collinear within ``tolerance`` (relative to the point
    spread) or when two points coincide.
    """
    pts = instance.points
    n = len(pts)
    if n == 1:
        one = Instance1D((0.0,), instance.priors, instance.false_negative,
                         instance.search_costs, instance.budget, instance.name)
        return one, (1,)
    origin = pts[0]
    far = max(pts, key=lambda p: origin.distance_to(p))
    scale = origin.distance_to(far)
    if scale == 0.0:
        raise ValueError("all points coincide; not a valid 1D instance")
    ux, uy = (far.x - origin.x) / scale, (far.y - origin.y) / scale
    if ux < 0 or (ux == 0 and uy < 0):
        ux, uy = -ux, -uy  # orient so positions ascend with x (then y)
    coords = []
    for k, p in enumerate(pts):
        dx, dy = p.x - origin.x, p.y - origin.y
        cross = dx * uy - dy * ux
        if abs(cross) > tolerance * max(1.0, scale):
            raise ValueError(f"points are not collinear: points[{k}] is "
                             f"{abs(cross)!r} off the line")
        coords.append(dx * ux + dy * uy)
    order = sorted(range(n), key=lambda k: coords[k])
    positions = [coords[k] for k in order]
    inst = Instance1D(
        positions=positions,
        priors=[instance.priors[k] for k in order],
        false_negative=[instance.false_negative[k] for k in order],
        search_costs=[instance.search_costs[k] for k in order],
        budget=instance.budget,
        name=instance.name,
    )
    return inst, tuple(k + 1 for k in order)


@dataclass(frozen=True)
class DpTableMeta:
    """Size accounting for a DP run (cells are value-table entries)."""

    tau: int
    cells_filled: int
    peak_memory_estimate: int


@dataclass(frozen=True)
class SegmentResult:
    """Outcome of the line DP for one (leftmost, rightmost) guess."""

    feasible: bool
    probability: float
    allocation: tuple[int, ...]
    meta: Optional[DpTableMeta] = None


def solve_segment_1d(instance: Instance1D, l: int, r: int) -> SegmentResult:
    """Best left-to-right plan that starts at position ``l`` and ends at
    ``r`` (1-based, ``l <= r``), searching only points in between.

    The search budget is ``floor(T - (x_r - x_l))`` whole time units; each
    point ``i`` in the window may be searched ``j >= 0`` times, contributing
    ``(1 - beta_i**j) * p_i``.  Infeasible windows (travel alone exceeds the
    budget) yield an infeasible result rather than an exception.
    """
    n = instance.n
    if not 1 <= l <= r <= n:
        raise IndexError(f"need 1 <= l <= r <= {n}, got ({l}, {r})")
    travel = instance.positions[r - 1] - instance.positions[l - 1]
    tau = snap_floor(instance.budget - travel)
    if tau < 0:
        return SegmentResult(False, 0.0, ())
    width = r - l + 1
    value = np.zeros(tau + 1)
    choices = []
    for i in range(l - 1, r):
        cost = instance.search_costs[i]
        beta_i = instance.false_negative[i]
        p_i = instance.priors[i]
        jmax = tau // cost
        prev = value
        value = prev.copy()
        choice = np.zeros(tau + 1, dtype=np.int32)
        gain = p_i * (1.0 - np.power(beta_i, np.arange(1, jmax + 1)))
        for j in range(1, jmax + 1):
            lo = j * cost
            cand = prev[:tau + 1 - lo] + gain[j - 1]
            window = value[lo:]
            better = cand > window
            window[better] = cand[better]
            choice[lo:][better] = j
        choices.append(choice)
    allocation = [0] * width
    t = tau
    for k in range(width - 1, -1, -1):
        j = int(choices[k][t])
        allocation[k] = j
        t -= j * instance.search_costs[l - 1 + k]
    meta = DpTableMeta(tau=tau, cells_filled=width * (tau + 1),
                       peak_memory_estimate=2 * 8 * (tau + 1) + 4 * width * (tau + 1))
    return SegmentResult(True, float(value[tau]), tuple(allocation), meta)


def solve_1d(instance: Instance1D, deadline: Optional[float] = None) -> SolveResult:
    """Optimal plan on a line: best window over all ``1 <= l <= r <= n``
    (single-point windows included), ties to the smallest ``l`` then ``r``."""
    n = instance.n
    best_prob = 0.0
    best: Optional[tuple[int, int, SegmentResult]] = None
    cells = 0
    for l in range(1, n + 1):
        for r in range(l, n + 1):
            if _check_deadline(deadline):
                raise SolverTimeout("dp1d deadline expired")
            seg = solve_segment_1d(instance, l, r)
            if seg.meta is not None:
                cells += seg.meta.cells_filled
            if seg.feasible and seg.probability > best_prob:
                best_prob = seg.probability
                best = (l, r, seg)
    if best is None:
        return empty_result("dp1d", cells_filled=cells)
    l, r, seg = best
    pairs = [(l + k, s) for k, s in enumerate(seg.allocation) if s > 0]
    if not pairs:
        return empty_result("dp1d", cells_filled=cells)
    schedule = Schedule(tuple(pairs))
    travel = instance.positions[pairs[-1][0] - 1] - instance.positions[pairs[0][0] - 1]
    search = float(sum(s * instance.search_costs[i - 1] for i, s in pairs))
    probability = detection_probability(instance.to_instance(), schedule)
    return SolveResult.assemble(schedule, probability, travel, search, "dp1d",
                                segment=(l, r), table=asdict(seg.meta),
                                cells_filled=cells)


def _hop_ticks(j: int, cost: int, dist: float, C: int) -> int:
    """Scaled cost of arriving and searching ``j`` times: one joint round-up."""
    return snap_ceil((j * cost + dist) * C)


def choose_discretization(instance: Instance, epsilon: float) -> int:
    """Ticks per unit time so that total rounding error is at most ``epsilon``:
    ``C = ceil(n * delta / epsilon)`` with ``delta`` the point-set diameter."""
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    delta = diameter(instance)
    if delta == 0.0:
        return 1
    return max(1, snap_ceil(instance.n * delta / epsilon))


def solve_ordered(instance: Instance, ordering: Sequence[int], C: int,
                  deadline: Optional[float] = None, anytime: bool = False,
                  mode: str = "auto") -> SolveResult:
    """Optimal plan among those searching points in the given order.

    ``ordering`` is a sequence of distinct 1-based point indices (usually a
    permutation of all of them); points not listed cannot be searched, and
    listed points may be skipped.  The first searched point is reached for
    free.  ``mode`` selects the table layout: ``"dense"`` is the literal
    tick-indexed DP, ``"sparse"`` evaluates ordered subsets directly (exactly
    equivalent, since integral search costs make search ticks a multiple of
    ``C``) and is chosen automatically when the dense table would be too
    large.  With ``anytime=True`` an expired deadline truncates to the best
    plan over the prefix processed so far instead of raising.
    """
    if int(C) != C or C < 1:
        raise ValueError(f"C must be a positive integer, got {C!r}")
    C = int(C)
    order = [int(i) for i in ordering]
    if len(set(order)) != len(order):
        raise ValueError("ordering contains repeated point indices")
    for i in order:
        if not 1 <= i <= instance.n:
            raise IndexError(f"ordering index {i} out of range [1, {instance.n}]")
    tau = snap_ceil(instance.budget * C)
    m = len(order)
    if m == 0 or tau < 0:
        return empty_result("ordered", C=C, tau=max(tau, 0), mode="empty")
    if _check_deadline(deadline):
        if anytime:
            return empty_result("ordered", C=C, tau=tau, mode="timeout",
                                truncated=True)
        raise SolverTimeout("ordered DP deadline expired")
    if mode not in ("auto", "dense", "sparse"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "auto":
        mode = "dense" if (m + 1) * (tau + 1) <= DENSE_CELL_LIMIT else "sparse"
    if mode == "dense":
        return _solve_ordered_dense(instance, order, C, tau, deadline, anytime)
    if m > SPARSE_MAX_POINTS:
        raise SolverLimitError(
            f"ordered DP needs {(m + 1) * (tau + 1)} cells dense or 2^{m} "
            f"subsets sparse; both exceed limits")
    return _solve_ordered_sparse(instance, order, C, tau, deadline, anytime)


def _ordered_result(instance: Instance, visits: list[tuple[int, int]],
                    C: int, meta: DpTableMeta, mode: str,
                    truncated: bool) -> SolveResult:
    if not visits:
        return empty_result("ordered", C=C, tau=meta.tau, mode=mode,
                            table=asdict(meta), truncated=truncated,
                            budget_slack=1.0 / C)
    schedule = Schedule(tuple(visits))
    probability = detection_probability(instance, schedule)
    travel, search = split_weight(instance, schedule)
    return SolveResult.assemble(schedule, probability, travel, search, "ordered",
                                C=C, tau=meta.tau, mode=mode, table=asdict(meta),
                                truncated=truncated, budget_slack=1.0 / C)


def _solve_ordered_dense(instance, order, C, tau, deadline, anytime):
    m = len(order)
    pts = [instance.points[i - 1] for i in order]
    costs = [instance.search_costs[i - 1] for i in order]
    betas = [instance.false_negative[i - 1] for i in order]
    prs = [instance.priors[i - 1] for i in order]
    neg = float("-inf")
    value = np.full((m + 1, tau + 1), neg)
    value[0, :] = 0.0
    parent_j = np.zeros((m + 1, tau + 1), dtype=np.int32)
    parent_b = np.zeros((m + 1, tau + 1), dtype=np.int32)
    rows_done = m
    truncated = False
    for a in range(1, m + 1):
        if _check_deadline(deadline):
            if anytime:
                rows_done = a - 1
                truncated = True
                break
            raise SolverTimeout("ordered DP deadline expired")
        cost, beta_a, p_a = costs[a - 1], betas[a - 1], prs[a - 1]
        jmax = tau // (cost * C)
        row = value[a]
        for j in range(1, jmax + 1):
            gain = (1.0 - beta_a ** j) * p_a
            for b in range(0, a):
                dist = 0.0 if b == 0 else pts[a - 1].distance_to(pts[b - 1])
                h = _hop_ticks(j, cost, dist, C)
                if h > tau:
                    continue
                cand = value[b][:tau + 1 - h] + gain
                window = row[h:]
                better = cand > window
                window[better] = cand[better]
                parent_j[a, h:][better] = j
                parent_b[a, h:][better] = b
    best_a, best_v = 0, 0.0
    for a in range(1, rows_done + 1):
        v = float(value[a, tau])
        if v > best_v:
            best_a, best_v = a, v
    meta = DpTableMeta(tau=tau, cells_filled=(rows_done + 1) * (tau + 1),
                       peak_memory_estimate=(m + 1) * (tau + 1) * 16)
    visits: list[tuple[int, int]] = []
    a, t = best_a, tau
    while a > 0:
        j = int(parent_j[a, t])
        b = int(parent_b[a, t])
        visits.append((order[a - 1], j))
        dist = 0.0 if b == 0 else pts[a - 1].distance_to(pts[b - 1])
        t -= _hop_ticks(j, costs[a - 1], dist, C)
        a = b
    visits.reverse()
    return _ordered_result(instance, visits, C, meta, "dense", truncated)


def _alloc_best(costs, betas, prs, budget, want_choices=False):
    """Maximize sum((1 - beta**j) * p) over j >= 1 per point with
    sum(j * c) <= budget; returns (value, counts or None)."""
    k = len(costs)
    neg = float("-inf")
    value = np.full(budget + 1, neg)
    value[0] = 0.0
    rows = []
    for t in range(k):
        cost, beta_t, p_t = costs[t], betas[t], prs[t]
        prev = value
        value = np.full(budget + 1, neg)
        choice = np.zeros(budget + 1, dtype=np.int32) if want_choices else None
        jmax = budget // cost
        for j in range(1, jmax + 1):
            lo = j * cost
            gain = (1.0 - beta_t ** j) * p_t
            cand = prev[:budget + 1 - lo] + gain
            window = value[lo:]
            better = cand > window
            window[better] = cand[better]
            if want_choices:
                choice[lo:][better] = j
        if want_choices:
            rows.append(choice)
    running = np.maximum.accumulate(value)
    best_t = int(np.argmax(running == running[budget]))
    best = float(running[budget])
    if not want_choices:
        return best, None
    counts = [0] * k
    t = best_t
    for idx in range(k - 1, -1, -1):
        j = int(rows[idx][t])
        counts[idx] = j
        t -= j * costs[idx]
    return best, counts


def _solve_ordered_sparse(instance, order, C, tau, deadline, anytime):
    m = len(order)
    pts = [instance.points[i - 1] for i in order]
    costs = [instance.search_costs[i - 1] for i in order]
    betas = [instance.false_negative[i - 1] for i in order]
    prs = [instance.priors[i - 1] for i in order]
    dticks = [[0] * m for _ in range(m)]
    for a in range(m):
        for b in range(a):
            dticks[a][b] = dticks[b][a] = snap_ceil(pts[a].distance_to(pts[b]) * C)
    travel = [0] * (1 << m)
    highest = [0] * (1 << m)
    best_mask, best_v = 0, 0.0
    cells = 0
    truncated = False
    for mask in range(1, 1 << m):
        hb = mask.bit_length() - 1
        rest = mask ^ (1 << hb)
        highest[mask] = hb
        if rest:
            travel[mask] = travel[rest] + dticks[hb][highest[rest]]
        if mask % 1024 == 0 and _check_deadline(deadline):
            if anytime:
                truncated = True
                break
            raise SolverTimeout("ordered DP deadline expired")
        if travel[mask] > tau:
            continue
        budget = (tau - travel[mask]) // C
        chain = [t for t in range(m) if mask >> t & 1]
        if sum(costs[t] for t in chain) > budget:
            continue
        if (len(chain) + 1) * (budget + 1) > SPARSE_ALLOC_LIMIT:
            raise SolverLimitError(
                f"subset allocation table of {(len(chain) + 1) * (budget + 1)} "
                f"cells exceeds limit {SPARSE_ALLOC_LIMIT}")
        cells += (len(chain) + 1) * (budget + 1)
        v, _ = _alloc_best([costs[t] for t in chain], [betas[t] for t in chain],
                           [prs[t] for t in chain], budget)
        if v > best_v:
            best_mask, best_v = mask, v
    meta = DpTableMeta(tau=tau, cells_filled=cells,
                       peak_memory_estimate=16 * (1 << m))
    visits: list[tuple[int, int]] = []
    if best_mask:
        chain = [t for t in range(m) if best_mask >> t & 1]
        budget = (tau - travel[best_mask]) // C
        _, counts = _alloc_best([costs[t] for t in chain], [betas[t] for t in chain],
                                [prs[t] for t in chain], budget, want_choices=True)
        visits = [(order[t], j) for t, j in zip(chain, counts) if j > 0]
    return _ordered_result(instance, visits, C, meta, "sparse", truncated)
