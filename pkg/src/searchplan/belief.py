"""Bayesian posterior over target location after (partial) plan execution.

Sensor reports are binary: a search of point ``i`` returns YES with
probability ``1 - beta_i`` if the target is there and ``alpha_i`` if it is
not.  The posterior after a sequence of reports depends only on the
per-point counts of YES and NO answers, which is what makes the closed-form
computation possible: it needs one pair of exponentiations per point instead
of one Bayes step per report.

Point indices are 1-based, matching the rest of the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

_NEG_INF = float("-inf")

#: Beyond this exponent the closed form switches to log-space to stay finite.
LOG_SPACE_EXPONENT = 64


class ContradictionError(ValueError):
    """The observations have zero probability under the model, e.g. a YES
    report at a point with no false positives and no prior mass."""


class Observation(NamedTuple):
    """One sensor report: ``report`` is 1 for YES (target present), 0 for NO."""

    point_index: int
    report: int


@dataclass(frozen=True)
class ExecutionTrace:
    """Per-point counts of YES (``yes_counts``) and NO (``no_counts``) reports."""

    yes_counts: tuple[int, ...]
    no_counts: tuple[int, ...]

    def __post_init__(self):
        yes = tuple(int(a) for a in self.yes_counts)
        no = tuple(int(b) for b in self.no_counts)
        if len(yes) != len(no):
            raise ValueError("yes_counts and no_counts must have equal length")
        if any(a < 0 for a in yes) or any(b < 0 for b in no):
            raise ValueError("trace counts must be nonnegative")
        object.__setattr__(self, "yes_counts", yes)
        object.__setattr__(self, "no_counts", no)

    @classmethod
    def from_observations(cls, n: int, observations: Iterable) -> "ExecutionTrace":
        yes = [0] * n
        no = [0] * n
        for i, r in observations:
            if not 1 <= i <= n:
                raise IndexError(f"point index {i} out of range [1, {n}]")
            if r:
                yes[i - 1] += 1
            else:
                no[i - 1] += 1
        return cls(tuple(yes), tuple(no))

    @property
    def total_steps(self) -> int:
        return sum(self.yes_counts) + sum(self.no_counts)


@dataclass(frozen=True)
class BeliefVector:
    """Normalized posterior mass per point.  ``certain`` is set when all mass
    has collapsed onto a single point (e.g. a conclusive YES report)."""

    mass: tuple[float, ...]
    certain: bool = False

    def __post_init__(self):
        mass = tuple(float(m) for m in self.mass)
        if any(m < 0 for m in mass):
            raise ValueError("belief mass entries must be nonnegative")
        if abs(sum(mass) - 1.0) > 1e-9:
            raise ValueError(f"belief mass must sum to 1, got {sum(mass)!r}")
        object.__setattr__(self, "mass", mass)

    def __len__(self) -> int:
        return len(self.mass)


def pow_by_squaring(base: float, exponent: int) -> float:
    """``base ** exponent`` by repeated squaring, with ``0 ** 0 == 1``."""
    if exponent < 0:
        raise ValueError("exponent must be nonnegative")
    result = 1.0
    b = float(base)
    e = exponent
    while e:
        if e & 1:
            result *= b
        b *= b
        e >>= 1
    return result


def _log_pow(base: float, exponent: int) -> float:
    """log(base ** exponent) with the same ``0 ** 0 == 1`` convention."""
    if exponent == 0:
        return 0.0
    if base == 0.0:
        return _NEG_INF
    return exponent * math.log(base)


def _mass_of(belief) -> list[float]:
    if isinstance(belief, BeliefVector):
        return list(belief.mass)
    return [float(m) for m in belief]


def _finish(weights: Sequence[float]) -> BeliefVector:
    total = sum(weights)
    if total <= 0.0 or not math.isfinite(total):
        raise ContradictionError("all posterior mass annihilated by the evidence")
    mass = tuple(w / total for w in weights)
    return BeliefVector(mass, certain=sum(1 for m in mass if m > 0.0) == 1)


def one_step_update(belief, observation, false_positive: Sequence[float],
                    false_negative: Sequence[float]) -> BeliefVector:
    """Bayes update of ``belief`` for a single report at one point.

    With ``report = 1`` and ``alpha_i = 0`` the posterior collapses onto
    point ``i``.  Raises :class:`ContradictionError` when the observation
    has zero probability under the current belief.
    """
    p = _mass_of(belief)
    i, report = observation
    if not 1 <= i <= len(p):
        raise IndexError(f"point index {i} out of range [1, {len(p)}]")
    idx = i - 1
    alpha_i = float(false_positive[idx])
    beta_i = float(false_negative[idx])
    if report:
        f_target, f_other = 1.0 - beta_i, alpha_i
    else:
        f_target, f_other = beta_i, 1.0 - alpha_i
    # Normalize by the actual updated mass (equal to the textbook denominator
    # f_target * p_i + f_other * (1 - p_i) when the belief sums to one, but
    # self-correcting under float drift).
    z = f_target * p[idx] + f_other * (sum(p) - p[idx])
    if z <= 0.0:
        raise ContradictionError(
            f"observation ({i}, {report}) has zero probability")
    out = [q * f_other / z for q in p]
    out[idx] = p[idx] * f_target / z
    return _finish(out)


def recursive_posterior(priors: Sequence[float], observations: Iterable,
                        false_positive: Sequence[float],
                        false_negative: Sequence[float]) -> BeliefVector:
    """Reference posterior: fold the one-step Bayes update over the reports.

    Costs O(n) per report, O(n * s) in total; serves as the ground truth the
    closed-form computation is checked against.
    """
    p = [float(v) for v in priors]
    n = len(p)
    alpha = [float(a) for a in false_positive]
    beta = [float(b) for b in false_negative]
    for i, report in observations:
        if not 1 <= i <= n:
            raise IndexError(f"point index {i} out of range [1, {n}]")
        idx = i - 1
        pi = p[idx]
        if report:
            f_target, f_other = 1.0 - beta[idx], alpha[idx]
        else:
            f_target, f_other = beta[idx], 1.0 - alpha[idx]
        # Dividing by the true updated mass keeps the fold stable over long
        # sequences; with a unit-sum belief it is the textbook denominator.
        z = f_target * pi + f_other * (sum(p) - pi)
        if z <= 0.0:
            raise ContradictionError(
                f"observation ({i}, {report}) has zero probability")
        scale = f_other / z
        p = [q * scale for q in p]
        p[idx] = pi * f_target / z
    return _finish(p)


def _mathematically_positive(p, a, b, alpha, beta, i) -> bool:
    """Would the i-th closed-form numerator be positive in exact arithmetic?"""
    if p[i] == 0.0:
        return False
    if beta[i] == 0.0 and b[i] > 0:
        return False
    return all(alpha[j] > 0.0 or a[j] == 0 for j in range(len(p)) if j != i)


def fast_posterior(priors: Sequence[float], trace: ExecutionTrace,
                   false_positive: Sequence[float],
                   false_negative: Sequence[float]) -> BeliefVector:
    """Closed-form posterior from per-point report counts.

    For each point the evidence factors into ``alpha_i**a_i * (1-alpha_i)**b_i``
    and ``(1-beta_i)**a_i * beta_i**b_i`` (``0**0 == 1``), evaluated by
    repeated squaring, so the whole vector costs O(n log s).  The per-point
    leave-one-out products are formed from prefix/suffix products rather than
    division, which keeps the ``alpha_i = 0`` cases exact.  When any count
    exceeds 64 the products are formed in log-space with a max subtraction,
    since e.g. ``beta**1000`` underflows double precision.
    """
    p = [float(v) for v in priors]
    n = len(p)
    a, b = trace.yes_counts, trace.no_counts
    if len(a) != n:
        raise ValueError(f"trace has {len(a)} points, expected {n}")
    alpha = [float(x) for x in false_positive]
    beta = [float(x) for x in false_negative]

    max_exp = max(max(a, default=0), max(b, default=0))
    if max_exp <= LOG_SPACE_EXPONENT:
        a_star = [pow_by_squaring(alpha[i], a[i]) * pow_by_squaring(1.0 - alpha[i], b[i])
                  for i in range(n)]
        b_star = [pow_by_squaring(1.0 - beta[i], a[i]) * pow_by_squaring(beta[i], b[i])
                  for i in range(n)]
        prefix = [1.0] * (n + 1)
        for i in range(n):
            prefix[i + 1] = prefix[i] * a_star[i]
        suffix = [1.0] * (n + 1)
        for i in range(n - 1, -1, -1):
            suffix[i] = suffix[i + 1] * a_star[i]
        weights = [prefix[i] * suffix[i + 1] * b_star[i] * p[i] for i in range(n)]
        if any(w > 0.0 for w in weights):
            return _finish(weights)
        # Distinguish true contradictions from underflow before giving up.
        if not any(_mathematically_positive(p, a, b, alpha, beta, i) for i in range(n)):
            raise ContradictionError("all posterior mass annihilated by the trace")

    log_a = [_log_pow(alpha[i], a[i]) + _log_pow(1.0 - alpha[i], b[i]) for i in range(n)]
    log_b = [_log_pow(1.0 - beta[i], a[i]) + _log_pow(beta[i], b[i]) for i in range(n)]
    prefix_l = [0.0] * (n + 1)
    for i in range(n):
        prefix_l[i + 1] = prefix_l[i] + log_a[i]
    suffix_l = [0.0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix_l[i] = suffix_l[i + 1] + log_a[i]
    log_w = [prefix_l[i] + suffix_l[i + 1] + log_b[i]
             + (math.log(p[i]) if p[i] > 0.0 else _NEG_INF) for i in range(n)]
    top = max(log_w)
    if top == _NEG_INF:
        raise ContradictionError("all posterior mass annihilated by the trace")
    return _finish([math.exp(w - top) for w in log_w])


def posterior_no_false_positive(priors: Sequence[float],
                                false_negative: Sequence[float],
                                no_counts: Sequence[int]) -> BeliefVector:
    """Posterior when every report was NO and false positives are impossible:
    mass at ``i`` is proportional to ``beta_i ** b_i * p_i``."""
    p = [float(v) for v in priors]
    n = len(p)
    beta = [float(x) for x in false_negative]
    counts = [int(c) for c in no_counts]
    if len(beta) != n or len(counts) != n:
        raise ValueError("priors, false_negative, and no_counts must share a length")
    if any(c < 0 for c in counts):
        raise ValueError("no_counts must be nonnegative")
    weights = [pow_by_squaring(beta[i], counts[i]) * p[i] for i in range(n)]
    if any(w > 0.0 for w in weights):
        return _finish(weights)
    if not any(p[i] > 0.0 and (beta[i] > 0.0 or counts[i] == 0) for i in range(n)):
        raise ContradictionError("all posterior mass annihilated by the trace")
    log_w = [_log_pow(beta[i], counts[i])
             + (math.log(p[i]) if p[i] > 0.0 else _NEG_INF) for i in range(n)]
    top = max(log_w)
    return _finish([math.exp(w - top) for w in log_w])
