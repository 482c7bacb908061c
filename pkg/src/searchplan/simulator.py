"""Monte Carlo execution of schedules against sampled target positions and
sensor noise.

Trials are reproducible and embarrassingly parallel: trial ``t`` of a run
seeded with ``s`` draws from a counter-based Philox generator keyed by
``(s, t)``, so any subset of trials can be replayed independently.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .belief import BeliefVector, ExecutionTrace, fast_posterior, recursive_posterior
from .model import Instance, Schedule

_MASK64 = (1 << 64) - 1


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream for one trial: Philox keyed by (seed, trial)."""
    return np.random.Generator(np.random.Philox(key=[seed & _MASK64, trial]))


def _trial_streams(seed: int, trials: int):
    """Yield the trial_rng(seed, t) streams for t in range(trials), reusing
    one generator object via state resets (stream-identical, much cheaper)."""
    bitgen = np.random.Philox(key=[seed & _MASK64, 0])
    gen = np.random.Generator(bitgen)
    state = bitgen.state
    key = state["state"]["key"]
    counter = state["state"]["counter"]
    for t in range(trials):
        key[1] = t
        counter[:] = 0
        state["buffer_pos"] = 4
        state["has_uint32"] = 0
        bitgen.state = state
        yield gen


@dataclass(frozen=True)
class SimOutcome:
    """One simulated execution.  ``detection_step`` counts search steps from 1
    and is set only when the target was truly reported (a false alarm is not
    a detection).  ``target_index`` is the sampled true location (1-based)."""

    detected: bool
    detection_step: Optional[int]
    trace: ExecutionTrace
    elapsed_time: float
    target_index: int


@dataclass(frozen=True)
class SimStats:
    """Aggregate of independent trials."""

    trials: int
    detections: int
    p_hat: float
    std_err: float

    @classmethod
    def from_counts(cls, trials: int, detections: int) -> "SimStats":
        p = detections / trials
        return cls(trials=trials, detections=detections, p_hat=p,
                   std_err=math.sqrt(p * (1.0 - p) / trials))


def _cumulative_priors(instance: Instance) -> list[float]:
    acc, cum = 0.0, []
    for p in instance.priors:
        acc += p
        cum.append(acc)
    cum[-1] = max(cum[-1], 1.0)
    return cum


def _sample_target(cum: list[float], rng: np.random.Generator) -> int:
    return bisect_right(cum, rng.random()) + 1  # 1-based


def simulate_once(instance: Instance, schedule: Schedule,
                  rng: np.random.Generator) -> SimOutcome:
    """Sample a target position and execute the schedule against it.

    Reports are YES with probability ``1 - beta_i`` at the target's point and
    ``alpha_i`` elsewhere.  With all alpha zero the run stops at the first
    YES (a true detection); otherwise the full schedule is executed, the
    whole trace recorded, and the first YES at the true target flagged.
    """
    n = instance.n
    target = _sample_target(_cumulative_priors(instance), rng)
    stop_on_yes = not instance.has_false_positives
    yes = [0] * n
    no = [0] * n
    elapsed = 0.0
    step = 0
    detected = False
    detection_step: Optional[int] = None
    prev: Optional[int] = None
    for i, searches in schedule.visits:
        if prev is not None:
            elapsed += instance.distance(prev, i)
        prev = i
        cost = instance.search_costs[i - 1]
        p_yes = (1.0 - instance.false_negative[i - 1]) if i == target \
            else instance.false_positive[i - 1]
        for _ in range(searches):
            elapsed += cost
            step += 1
            if rng.random() < p_yes:
                yes[i - 1] += 1
                if i == target and not detected:
                    detected = True
                    detection_step = step
                if stop_on_yes:
                    return SimOutcome(True, step, ExecutionTrace(tuple(yes), tuple(no)),
                                      elapsed, target)
            else:
                no[i - 1] += 1
    return SimOutcome(detected, detection_step,
                      ExecutionTrace(tuple(yes), tuple(no)), elapsed, target)


def _detection_and_target(instance, schedule, cum, rng) -> tuple[bool, int]:
    """Lean trial kernel consuming randomness exactly like simulate_once."""
    target = bisect_right(cum, rng.random()) + 1
    stop_on_yes = not instance.has_false_positives
    beta = instance.false_negative
    alpha = instance.false_positive
    detected = False
    for i, searches in schedule.visits:
        p_yes = (1.0 - beta[i - 1]) if i == target else alpha[i - 1]
        for _ in range(searches):
            if rng.random() < p_yes and i == target:
                detected = True
                if stop_on_yes:
                    return True, target
    return detected, target


def estimate_probability(instance: Instance, schedule: Schedule, trials: int,
                         seed: int) -> SimStats:
    """Empirical detection probability over independent seeded trials."""
    stats, _ = estimate_with_miss_counts(instance, schedule, trials, seed)
    return stats


def estimate_with_miss_counts(instance: Instance, schedule: Schedule,
                              trials: int, seed: int) -> tuple[SimStats, tuple[int, ...]]:
    """Like :func:`estimate_probability`, also counting, per point, how often
    the target sat there in the trials that ended undetected."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    cum = _cumulative_priors(instance)
    misses = [0] * instance.n
    detections = 0
    for rng in _trial_streams(seed, trials):
        detected, target = _detection_and_target(instance, schedule, cum, rng)
        if detected:
            detections += 1
        else:
            misses[target - 1] += 1
    return SimStats.from_counts(trials, detections), tuple(misses)


def replay_posterior(instance: Instance, observations: Iterable) -> BeliefVector:
    """Posterior after a recorded observation sequence, computed by the
    recursive fold and cross-checked against the closed form."""
    obs = [(int(i), int(r)) for i, r in observations]
    recursive = recursive_posterior(instance.priors, obs, instance.false_positive,
                                    instance.false_negative)
    trace = ExecutionTrace.from_observations(instance.n, obs)
    fast = fast_posterior(instance.priors, trace, instance.false_positive,
                          instance.false_negative)
    drift = max((abs(a - b) for a, b in zip(recursive.mass, fast.mass)), default=0.0)
    if drift > 1e-9:
        raise RuntimeError(f"posterior implementations disagree by {drift!r}")
    return recursive
