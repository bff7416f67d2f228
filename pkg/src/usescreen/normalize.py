"""Min-max normalisation of raw indicators onto the relative 1-5 scale.

Scores are relative to the evaluation set only: the observed minimum and
maximum anchor the scale ends, so they carry no meaning across sets. Raw
proxies where larger means worse (risk, complexity, time) are mapped with
the ascending formula so that the resulting score stays penalty-oriented.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from . import economics
from .model import (
    INDICATORS,
    EvaluationSet,
    Origin,
    ScoreVector,
    validate_evaluation_set,
)


class DegeneratePolicy(enum.Enum):
    """What to do when every raw value is identical (zero range)."""

    NEUTRAL_3 = "neutral-3"
    ALL_5 = "all-5"


class NormalizationError(ValueError):
    pass


def _check_values(values: Sequence[float]) -> list[float]:
    if not values:
        raise NormalizationError("cannot normalize an empty value list")
    cleaned = []
    for i, value in enumerate(values):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise NormalizationError(f"value at index {i} is not a number: {value!r}")
        value = float(value)
        if not math.isfinite(value):
            raise NormalizationError(f"value at index {i} is not finite: {value!r}")
        cleaned.append(value)
    return cleaned


def _degenerate(n: int, policy: DegeneratePolicy) -> list[float]:
    fill = 3.0 if policy is DegeneratePolicy.NEUTRAL_3 else 5.0
    return [fill] * n


def normalize_benefit(
    values: Sequence[float], policy: DegeneratePolicy = DegeneratePolicy.NEUTRAL_3
) -> list[float]:
    """Ascending map: the minimum scores 1, the maximum 5, order preserved."""
    cleaned = _check_values(values)
    lo, hi = min(cleaned), max(cleaned)
    if hi == lo:
        return _degenerate(len(cleaned), policy)
    return [1.0 + 4.0 * (x - lo) / (hi - lo) for x in cleaned]


def normalize_penalty(
    values: Sequence[float], policy: DegeneratePolicy = DegeneratePolicy.NEUTRAL_3
) -> list[float]:
    """Descending map: the maximum scores 1, the minimum 5, order reversed."""
    cleaned = _check_values(values)
    lo, hi = min(cleaned), max(cleaned)
    if hi == lo:
        return _degenerate(len(cleaned), policy)
    return [1.0 + 4.0 * (hi - x) / (hi - lo) for x in cleaned]


@dataclass(frozen=True)
class NormalizationSpec:
    """One normalisation run: orientation, degenerate policy, and inputs."""

    orientation: str  # "benefit" or "penalty"
    degenerate_policy: DegeneratePolicy
    source_values: tuple[tuple[str, float], ...]  # (use id, raw value)

    def __post_init__(self) -> None:
        if self.orientation not in ("benefit", "penalty"):
            raise NormalizationError(f"unknown orientation {self.orientation!r}")
        if not self.source_values:
            raise NormalizationError("source_values must be non-empty")
        _check_values([value for _, value in self.source_values])
        object.__setattr__(self, "source_values", tuple(self.source_values))

    def apply(self) -> dict[str, float]:
        values = [value for _, value in self.source_values]
        fn = normalize_benefit if self.orientation == "benefit" else normalize_penalty
        scores = fn(values, self.degenerate_policy)
        return {uid: score for (uid, _), score in zip(self.source_values, scores)}


@dataclass(frozen=True)
class NormalizationRecord:
    """Range actually used for one indicator, kept for the audit trail."""

    indicator: str
    source: str  # "elicited", "raw", or "cash_flows"
    minimum: Optional[float] = None
    maximum: Optional[float] = None
    degenerate_policy: Optional[DegeneratePolicy] = None


def resolve_scores(
    set_: EvaluationSet,
    policy: DegeneratePolicy = DegeneratePolicy.NEUTRAL_3,
) -> tuple[dict[str, ScoreVector], dict[str, NormalizationRecord]]:
    """Turn the set's inputs into one ScoreVector per pair.

    Per indicator, elicited scores pass through unchanged; raw values (and,
    for the value indicator, cash-flow models) are min-max normalised with
    the ascending map. Already-elicited sets come back untouched, so the
    operation is idempotent on them.
    """
    report = validate_evaluation_set(set_)
    if not report.ok:
        raise NormalizationError(
            "evaluation set failed validation: " + "; ".join(report.violations)
        )

    use_ids = set_.use_ids()
    per_indicator: dict[str, dict[str, float]] = {}
    origins: dict[str, Origin] = {}
    records: dict[str, NormalizationRecord] = {}

    for indicator in INDICATORS:
        elicited = [set_.elicited.get(uid, {}).get(indicator) for uid in use_ids]
        if all(value is not None for value in elicited):
            per_indicator[indicator] = {
                uid: float(value) for uid, value in zip(use_ids, elicited)  # type: ignore[arg-type]
            }
            origins[indicator] = Origin.ELICITED
            records[indicator] = NormalizationRecord(indicator=indicator, source="elicited")
            continue

        raw_values = [
            set_.raw[uid].value_for(indicator) if uid in set_.raw else None for uid in use_ids
        ]
        source = "raw"
        if any(value is None for value in raw_values):
            if indicator != "npv":  # pragma: no cover - validation rejects earlier
                raise NormalizationError(f"no score source for indicator: {indicator}")
            source = "cash_flows"
            raw_values = [economics.npv(set_.cash_flows[uid]) for uid in use_ids]

        try:
            scores = normalize_benefit([float(v) for v in raw_values], policy)  # type: ignore[arg-type]
        except NormalizationError as exc:
            raise NormalizationError(f"{indicator}: {exc}") from exc
        per_indicator[indicator] = dict(zip(use_ids, scores))
        origins[indicator] = Origin.NORMALIZED
        records[indicator] = NormalizationRecord(
            indicator=indicator,
            source=source,
            minimum=min(float(v) for v in raw_values),  # type: ignore[arg-type]
            maximum=max(float(v) for v in raw_values),  # type: ignore[arg-type]
            degenerate_policy=policy,
        )

    vectors = {
        uid: ScoreVector(
            origins=dict(origins),
            **{indicator: per_indicator[indicator][uid] for indicator in INDICATORS},
        )
        for uid in use_ids
    }
    return vectors, records


def resolved_origin_map(records: Mapping[str, NormalizationRecord]) -> dict[str, Origin]:
    return {
        indicator: Origin.ELICITED if record.source == "elicited" else Origin.NORMALIZED
        for indicator, record in records.items()
    }
