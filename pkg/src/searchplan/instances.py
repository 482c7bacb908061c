"""Instance serialization, orienteering-benchmark conversion, and seeded
random generation.

The JSON document schema (version "1") stores one record per point::

    {"schema_version": "1", "name": ..., "budget": ...,
     "points": [{"x": ..., "y": ..., "prior": ..., "beta": ..., "alpha": ...,
                 "cost": ...}, ...],
     "provenance": {"source": ..., "seed": ...}}

Orienteering benchmark files are whitespace-separated text: the first line
holds the budget (a second number, the conventional path count, is ignored),
every following line is ``x y score``.

All randomness flows through ``numpy`` generators seeded from
``SeedSequence([seed, index])``, one child stream per produced instance, so
corpora replay identically for a given seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .model import PRIOR_RENORM_TOL, PRIOR_SUM_TOL, Instance

SCHEMA_VERSION = "1"

#: Raw Dirichlet draws are capped just under 1 so degenerate cases (a single
#: point gets the whole simplex) still satisfy beta < 1.
_BETA_CAP = 1.0 - 1e-9


class FormatError(ValueError):
    """A file failed to parse or violated the document schema."""


class OrienteeringRecord(NamedTuple):
    """One benchmark point: plane coordinates and a nonnegative score."""

    x: float
    y: float
    score: float


@dataclass(frozen=True)
class ConversionConfig:
    """Knobs for turning score-weighted points into search instances."""

    seed: int = 0
    instances_per_base: int = 10
    cost_range: tuple[int, int] = (1, 3)
    dirichlet_concentration: float = 1.0
    beta_transform: str = "raw"
    beta_range: tuple[float, float] = (0.1, 0.6)

    def __post_init__(self):
        if self.cost_range[0] < 1 or self.cost_range[1] < self.cost_range[0]:
            raise ValueError(f"bad cost_range {self.cost_range!r}")
        if self.dirichlet_concentration <= 0:
            raise ValueError("dirichlet_concentration must be positive")
        if self.beta_transform not in ("raw", "minmax"):
            raise ValueError(f"unknown beta_transform {self.beta_transform!r}")
        lo, hi = self.beta_range
        if not (0.0 <= lo <= hi < 1.0):
            raise ValueError(f"beta_range must satisfy 0 <= lo <= hi < 1, "
                             f"got {self.beta_range!r}")


def stream(seed: int, index: int) -> np.random.Generator:
    """Child generator ``index`` of the corpus rooted at ``seed``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def _sample_betas(rng: np.random.Generator, n: int,
                  config: ConversionConfig) -> list[float]:
    draw = rng.dirichlet([config.dirichlet_concentration] * n)
    if config.beta_transform == "minmax":
        lo, hi = config.beta_range
        span = float(draw.max() - draw.min())
        if span == 0.0:
            return [lo] * n
        return [lo + (float(b) - float(draw.min())) / span * (hi - lo) for b in draw]
    return [min(float(b), _BETA_CAP) for b in draw]


def _sample_costs(rng: np.random.Generator, n: int,
                  config: ConversionConfig) -> list[int]:
    lo, hi = config.cost_range
    return [int(c) for c in rng.integers(lo, hi + 1, size=n)]


def _normalized_priors(raw: Sequence[float]) -> list[float]:
    total = float(sum(raw))
    return [float(v) / total for v in raw]


def instance_to_document(instance: Instance, source: str = "",
                         seed: Optional[int] = None,
                         extra_provenance: Optional[dict] = None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "name": instance.name,
        "budget": instance.budget,
        "points": [
            {"x": p.x, "y": p.y, "prior": instance.priors[k],
             "beta": instance.false_negative[k],
             "alpha": instance.false_positive[k],
             "cost": instance.search_costs[k]}
            for k, p in enumerate(instance.points)
        ],
        "provenance": {"source": source},
    }
    if seed is not None:
        doc["provenance"]["seed"] = int(seed)
    if extra_provenance:
        doc["provenance"].update(extra_provenance)
    return doc


def document_to_instance(doc: dict) -> Instance:
    if not isinstance(doc, dict):
        raise FormatError("instance document must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise FormatError(f"schema_version: expected {SCHEMA_VERSION!r}, "
                          f"got {version!r}")
    points = doc.get("points")
    if not isinstance(points, list) or not points:
        raise FormatError("points: expected a nonempty list")
    coords, priors, betas, alphas, costs = [], [], [], [], []
    for k, rec in enumerate(points):
        if not isinstance(rec, dict):
            raise FormatError(f"points[{k}]: expected an object")
        try:
            coords.append((float(rec["x"]), float(rec["y"])))
            priors.append(float(rec["prior"]))
            betas.append(float(rec["beta"]))
            alphas.append(float(rec.get("alpha", 0.0)))
            costs.append(rec["cost"])
        except KeyError as missing:
            raise FormatError(f"points[{k}]: missing field {missing}") from None
        except (TypeError, ValueError) as bad:
            raise FormatError(f"points[{k}]: {bad}") from None
    total = sum(priors)
    if abs(total - 1.0) > PRIOR_RENORM_TOL:
        raise FormatError(f"priors: sum {total!r} is not 1 within "
                          f"{PRIOR_RENORM_TOL}")
    if any(p < 0 for p in priors):
        raise FormatError("priors: entries must be nonnegative")
    if abs(total - 1.0) > PRIOR_SUM_TOL:
        priors = _normalized_priors(priors)  # off by more than float noise
    try:
        return Instance(points=coords, priors=priors, false_negative=betas,
                        search_costs=costs, budget=doc.get("budget", 0.0),
                        false_positive=alphas, name=str(doc.get("name", "")))
    except ValueError as bad:
        raise FormatError(str(bad)) from None


def load_json(path: str) -> Instance:
    """Load and validate an instance document (priors within 1e-6 of unit sum
    are renormalized; anything worse is rejected)."""
    with open(path, "r", encoding="utf-8") as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as bad:
            raise FormatError(f"{path}: {bad}") from None
    return document_to_instance(doc)


def save_json(instance: Instance, path: str, source: str = "",
              seed: Optional[int] = None,
              extra_provenance: Optional[dict] = None) -> None:
    """Canonical serialization: sorted keys, newline-terminated, reals via
    shortest exact round-trip representation."""
    doc = instance_to_document(instance, source=source, seed=seed,
                               extra_provenance=extra_provenance)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, sort_keys=True, indent=2)
        handle.write("\n")


def load_orienteering(path: str) -> tuple[list[OrienteeringRecord], float]:
    """Parse a benchmark file; returns (records, declared budget).

    The customary endpoint depots (the first two data lines in these
    benchmark families) are kept as ordinary points.
    """
    records: list[OrienteeringRecord] = []
    budget: Optional[float] = None
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            fields = line.split()
            if not fields:
                continue
            try:
                values = [float(f) for f in fields]
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-numeric field") from None
            if budget is None:
                if len(values) not in (1, 2):
                    raise FormatError(
                        f"{path}:{lineno}: header must be 'budget' or "
                        f"'budget path_count', got {len(values)} fields")
                budget = values[0]
                continue
            if len(values) != 3:
                raise FormatError(
                    f"{path}:{lineno}: expected 'x y score', got "
                    f"{len(values)} fields")
            records.append(OrienteeringRecord(values[0], values[1], values[2]))
    if budget is None:
        raise FormatError(f"{path}: empty file")
    return records, budget


def subsample_records(records: Sequence[OrienteeringRecord], n: int,
                      seed: int) -> list[OrienteeringRecord]:
    """Seeded choice of ``n`` records without replacement, original order kept."""
    if n < 1 or n > len(records):
        raise ValueError(f"cannot subsample {n} of {len(records)} records")
    rng = stream(seed, 0)
    keep = sorted(rng.choice(len(records), size=n, replace=False).tolist())
    return [records[k] for k in keep]


def convert_orienteering(records: Sequence[OrienteeringRecord], budget: float,
                         config: ConversionConfig,
                         name: str = "orienteering") -> list[Instance]:
    """Turn scored points into instances: priors are normalized scores, error
    rates are Dirichlet draws, costs are uniform integers; one independent
    child stream per produced instance."""
    if not records:
        raise ValueError("no records to convert")
    total = sum(r.score for r in records)
    if total <= 0:
        raise ValueError("scores sum to zero; priors would be undefined")
    priors = _normalized_priors([r.score for r in records])
    n = len(records)
    out = []
    for k in range(config.instances_per_base):
        rng = stream(config.seed, k)
        out.append(Instance(
            points=[(r.x, r.y) for r in records],
            priors=priors,
            false_negative=_sample_betas(rng, n, config),
            search_costs=_sample_costs(rng, n, config),
            budget=budget,
            name=f"{name}-{k:02d}",
        ))
    return out


def generate_random(n: int, bounding_box: tuple[float, float, float, float],
                    config: ConversionConfig,
                    budget_factor: float = 3.0) -> Instance:
    """Random instance: points uniform in the box, Dirichlet priors, error
    rates and costs per config, budget = factor x point-set diameter."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    x0, y0, x1, y1 = bounding_box
    if x1 < x0 or y1 < y0:
        raise ValueError(f"bad bounding box {bounding_box!r}")
    rng = stream(config.seed, 0)
    xs = rng.uniform(x0, x1, size=n)
    ys = rng.uniform(y0, y1, size=n)
    priors = _normalized_priors(rng.dirichlet(
        [config.dirichlet_concentration] * n).tolist())
    betas = _sample_betas(rng, n, config)
    costs = _sample_costs(rng, n, config)
    span = 0.0
    for a in range(n):
        for b in range(a + 1, n):
            span = max(span, math.hypot(xs[a] - xs[b], ys[a] - ys[b]))
    return Instance(points=list(zip(xs.tolist(), ys.tolist())), priors=priors,
                    false_negative=betas, search_costs=costs,
                    budget=budget_factor * span,
                    name=f"random-n{n}-seed{config.seed}")
