"""What-if machinery: weight sweeps and score perturbation.

Same data, different weights, different outcome: the point of these tools
is to show how much of a ranking or an exclusion is driven by the adopted
profile rather than by the alternatives themselves. Perturbation is
one field at a time, which answers the screening question "which single
criterion drives this exclusion" without a combinatorial explosion.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator, Mapping

from .model import (
    INDICATORS,
    SCORE_MAX,
    SCORE_MIN,
    DecisionProfile,
    EvaluationSet,
    ScoreVector,
)
from .normalize import DegeneratePolicy, resolve_scores
from .scoring import Evaluation, evaluate_scored

#: Profile fields a sweep may vary.
SWEEP_AXES: tuple[str, ...] = (
    "w_value",
    "w_risk",
    "w_complexity",
    "alpha",
    "beta",
    "gamma",
    "delta",
)


class SweepError(ValueError):
    pass


@dataclass(frozen=True)
class SweepAxis:
    start: float
    stop: float
    steps: int

    def __post_init__(self) -> None:
        if isinstance(self.steps, bool) or not isinstance(self.steps, int) or self.steps < 1:
            raise SweepError(f"steps must be a positive integer, got {self.steps!r}")

    def values(self) -> list[float]:
        if self.steps == 1:
            return [float(self.start)]
        width = (float(self.stop) - float(self.start)) / (self.steps - 1)
        return [float(self.start) + i * width for i in range(self.steps)]


@dataclass(frozen=True)
class SweepSpec:
    """Grid over profile parameters around a template profile."""

    axes: Mapping[str, SweepAxis]
    profile: DecisionProfile

    def __post_init__(self) -> None:
        axes = dict(self.axes)
        unknown = sorted(set(axes) - set(SWEEP_AXES))
        if unknown:
            raise SweepError(f"unknown sweep axes: {', '.join(unknown)}")
        object.__setattr__(self, "axes", axes)

    def points(self) -> Iterator[dict[str, float]]:
        """Cartesian product of axis values, in sorted-axis order."""
        names = sorted(self.axes)
        if not names:
            yield {}
            return

        def recurse(index: int, acc: dict[str, float]) -> Iterator[dict[str, float]]:
            if index == len(names):
                yield dict(acc)
                return
            name = names[index]
            for value in self.axes[name].values():
                acc[name] = value
                yield from recurse(index + 1, acc)
            acc.pop(name, None)

        yield from recurse(0, {})


@dataclass(frozen=True)
class StabilityReport:
    """Classification stability across a family of evaluations.

    ``counts`` and ``fractions`` are keyed by use id, then classification
    value; fractions are over evaluated points and sum to one per use.
    ``rank_reversals`` counts, per unordered id pair, the evaluations whose
    relative order differs from the baseline evaluation.
    """

    evaluated_points: int
    skipped_points: int
    counts: Mapping[str, Mapping[str, int]]
    fractions: Mapping[str, Mapping[str, float]]
    flips: tuple[str, ...]
    rank_reversals: Mapping[str, int]
    baseline_ranking: tuple[str, ...]


class _Accumulator:
    def __init__(self, baseline: Evaluation) -> None:
        self.baseline = baseline
        self.use_ids = sorted(baseline.input_order)
        self.counts: dict[str, dict[str, int]] = {
            uid: {"pass": 0, "borderline": 0, "exclude": 0} for uid in self.use_ids
        }
        self.flipped: set[str] = set()
        self.reversals: dict[str, int] = {
            f"{a}::{b}": 0
            for i, a in enumerate(self.use_ids)
            for b in self.use_ids[i + 1 :]
        }
        self.baseline_class = {r.use_id: r.classification for r in baseline.results}
        self.baseline_rank = {r.use_id: r.rank for r in baseline.results}
        self.evaluated = 0

    def add(self, evaluation: Evaluation) -> None:
        self.evaluated += 1
        ranks = {}
        for result in evaluation.results:
            uid = result.use_id
            self.counts[uid][result.classification.value] += 1
            if result.classification is not self.baseline_class[uid]:
                self.flipped.add(uid)
            ranks[uid] = result.rank
        for i, a in enumerate(self.use_ids):
            for b in self.use_ids[i + 1 :]:
                baseline_order = self.baseline_rank[a] < self.baseline_rank[b]
                if (ranks[a] < ranks[b]) != baseline_order:
                    self.reversals[f"{a}::{b}"] += 1

    def report(self, skipped: int) -> StabilityReport:
        if self.evaluated == 0:
            raise SweepError("empty grid: no valid evaluation points")
        fractions = {
            uid: {name: count / self.evaluated for name, count in per_class.items()}
            for uid, per_class in self.counts.items()
        }
        return StabilityReport(
            evaluated_points=self.evaluated,
            skipped_points=skipped,
            counts=self.counts,
            fractions=fractions,
            flips=tuple(sorted(self.flipped)),
            rank_reversals=self.reversals,
            baseline_ranking=tuple(r.use_id for r in self.baseline.results),
        )


def weight_sweep(
    set_: EvaluationSet,
    spec: SweepSpec,
    policy: DegeneratePolicy = DegeneratePolicy.NEUTRAL_3,
) -> StabilityReport:
    """Re-evaluate the set at every valid grid point of the sweep.

    Grid points that violate profile invariants (a complexity mix not
    summing to one, weights out of range) are skipped and counted, never
    silently renormalised.
    """
    score_vectors, _ = resolve_scores(set_, policy)
    baseline = evaluate_scored(set_, score_vectors, spec.profile)
    accumulator = _Accumulator(baseline)

    skipped = 0
    for overrides in spec.points():
        try:
            profile = replace(spec.profile, **overrides)
        except ValueError:
            skipped += 1
            continue
        accumulator.add(evaluate_scored(set_, score_vectors, profile))
    return accumulator.report(skipped)


def perturb_scores(
    set_: EvaluationSet,
    profile: DecisionProfile,
    radius: float,
    policy: DegeneratePolicy = DegeneratePolicy.NEUTRAL_3,
) -> StabilityReport:
    """One-field-at-a-time robustness check on the resolved score matrix.

    For every pair, indicator, and direction, the score moves by ``radius``
    (clamped to the 1-5 scale) and the whole set is re-evaluated; the
    report aggregates classification changes against the unperturbed run.
    """
    radius = float(radius)
    if radius < 0:
        raise SweepError("radius must be >= 0")

    score_vectors, _ = resolve_scores(set_, policy)
    baseline = evaluate_scored(set_, score_vectors, profile)
    accumulator = _Accumulator(baseline)

    for uid in set_.use_ids():
        for indicator in INDICATORS:
            for direction in (-1.0, 1.0):
                vector = score_vectors[uid]
                shifted = min(
                    SCORE_MAX, max(SCORE_MIN, vector.value_of(indicator) + direction * radius)
                )
                perturbed: dict[str, ScoreVector] = dict(score_vectors)
                perturbed[uid] = vector.with_value(indicator, shifted)
                accumulator.add(evaluate_scored(set_, perturbed, profile))
    return accumulator.report(skipped=0)
