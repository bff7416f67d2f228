"""Core domain types for comparative screening of asset-use alternatives.

Everything here is an immutable value object. Scores live on a shared 1-5
scale with a fixed direction convention: the value score is
favourability-oriented (higher is better) while the five risk, complexity,
and time scores are penalty-oriented (higher is worse). That convention is
what makes the subtractive attractiveness index meaningful.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields, replace
from typing import Mapping, Optional, Sequence

from .economics import CashFlowModel, TimeToIncome

#: Indicator names in canonical (matrix column) order.
INDICATORS: tuple[str, ...] = (
    "npv",
    "market_risk",
    "operational_risk",
    "technical_complexity",
    "managerial_complexity",
    "time_to_income",
)

#: Map from indicator name to the raw-input field that can back it.
RAW_FIELDS: dict[str, str] = {
    "npv": "npv_raw",
    "market_risk": "market_risk_proxy",
    "operational_risk": "operational_risk_proxy",
    "technical_complexity": "technical_complexity_proxy",
    "managerial_complexity": "managerial_complexity_proxy",
    "time_to_income": "time_to_income_months",
}

SCORE_MIN = 1.0
SCORE_MAX = 5.0

_WEIGHT_SUM_TOL = 1e-9


class ContextClass(enum.Enum):
    DENSE_CENTRAL = "dense-central"
    SEMI_CENTRAL = "semi-central"
    PERIPHERAL_REGENERATION = "peripheral-regeneration"
    SMALL_MUNICIPALITY = "small-municipality"


class Origin(enum.Enum):
    """Where a score came from: min-max normalisation or direct elicitation."""

    NORMALIZED = "normalized"
    ELICITED = "elicited"


class Classification(enum.Enum):
    PASS = "pass"
    BORDERLINE = "borderline"
    EXCLUDE = "exclude"


class StopCode(enum.Enum):
    """Closed vocabulary of exclusion and stop reasons."""

    NEGATIVE_ATTRACTIVENESS = "NEGATIVE_ATTRACTIVENESS"
    STRESS_FRAGILITY = "STRESS_FRAGILITY"
    OPERATOR_GAP = "OPERATOR_GAP"
    CAPITAL_COMPLEXITY_MISMATCH = "CAPITAL_COMPLEXITY_MISMATCH"
    HORIZON_MISMATCH = "HORIZON_MISMATCH"
    PLANNING_BLOCK = "PLANNING_BLOCK"
    DEMAND_VALIDATION_FAIL = "DEMAND_VALIDATION_FAIL"


@dataclass(frozen=True)
class ReasonCode:
    code: StopCode
    detail: str

    def __post_init__(self) -> None:
        if not isinstance(self.code, StopCode):
            raise ValueError(f"code must be a StopCode, got {self.code!r}")
        if not isinstance(self.detail, str) or not self.detail.strip():
            raise ValueError("detail must be non-empty human-readable text")


def _require_text(value: str, name: str) -> str:
    if not isinstance(value, str) or not value.strip():
        raise ValueError(f"{name} must be non-empty text")
    return value


def _require_number(value: float, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"{name} must be a number, got {type(value).__name__}")
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite")
    return value


@dataclass(frozen=True)
class Asset:
    id: str
    name: str
    gla_sqm: float
    context_class: ContextClass
    notes: str = ""

    def __post_init__(self) -> None:
        _require_text(self.id, "asset id")
        _require_text(self.name, "asset name")
        gla = _require_number(self.gla_sqm, "gla_sqm")
        if gla <= 0:
            raise ValueError("gla_sqm must be > 0")
        object.__setattr__(self, "gla_sqm", gla)
        if not isinstance(self.context_class, ContextClass):
            raise ValueError(f"context_class must be a ContextClass, got {self.context_class!r}")


@dataclass(frozen=True)
class IntendedUse:
    id: str
    label: str
    format_class: Optional[str] = None

    def __post_init__(self) -> None:
        _require_text(self.id, "use id")
        _require_text(self.label, "use label")


@dataclass(frozen=True)
class AssetUsePair:
    """The unit of analysis: one asset joined with one candidate use."""

    asset: Asset
    use: IntendedUse


def score_in_range(value: float) -> bool:
    return SCORE_MIN <= value <= SCORE_MAX


@dataclass(frozen=True)
class ScoreVector:
    """One alternative's six scores, each tagged with its origin."""

    npv: float
    market_risk: float
    operational_risk: float
    technical_complexity: float
    managerial_complexity: float
    time_to_income: float
    origins: Mapping[str, Origin]

    def __post_init__(self) -> None:
        for name in INDICATORS:
            value = _require_number(getattr(self, name), name)
            if not score_in_range(value):
                raise ValueError(f"{name} score {value} outside [{SCORE_MIN}, {SCORE_MAX}]")
            object.__setattr__(self, name, value)
        origins = dict(self.origins)
        if set(origins) != set(INDICATORS):
            raise ValueError("origins must cover exactly the six indicators")
        for name, origin in origins.items():
            if not isinstance(origin, Origin):
                raise ValueError(f"origin for {name} must be an Origin, got {origin!r}")
        object.__setattr__(self, "origins", origins)

    def value_of(self, indicator: str) -> float:
        if indicator not in INDICATORS:
            raise KeyError(indicator)
        return getattr(self, indicator)

    def with_value(self, indicator: str, value: float) -> "ScoreVector":
        if indicator not in INDICATORS:
            raise KeyError(indicator)
        return replace(self, **{indicator: value})

    @classmethod
    def elicited(cls, **scores: float) -> "ScoreVector":
        """Build a vector whose six scores were all directly elicited."""
        return cls(origins={name: Origin.ELICITED for name in INDICATORS}, **scores)


@dataclass(frozen=True)
class RawIndicatorSet:
    """Raw measurable inputs for one pair; any subset may be present."""

    npv_raw: Optional[float] = None
    market_risk_proxy: Optional[float] = None
    operational_risk_proxy: Optional[float] = None
    technical_complexity_proxy: Optional[float] = None
    managerial_complexity_proxy: Optional[float] = None
    time_to_income_months: Optional[float] = None

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            value = _require_number(value, f.name)
            if f.name != "npv_raw" and value < 0:
                raise ValueError(f"{f.name} must be >= 0")
            if f.name == "time_to_income_months" and value <= 0:
                raise ValueError("time_to_income_months must be > 0")
            object.__setattr__(self, f.name, value)

    def value_for(self, indicator: str) -> Optional[float]:
        return getattr(self, RAW_FIELDS[indicator])

    def is_empty(self) -> bool:
        return all(getattr(self, f.name) is None for f in fields(self))


@dataclass(frozen=True)
class DecisionProfile:
    """Weight and constraint parameters encoding an investor profile.

    ``alpha`` mixes market vs operational risk; ``beta``/``gamma``/``delta``
    mix technical complexity, managerial complexity, and time-to-income and
    must sum to one; the three ``w_*`` weights drive the attractiveness
    index. The rule thresholds define what counts as "high" on the 1-5
    scale for the operator-gap and capital-mismatch exclusions.
    """

    alpha: float = 0.5
    beta: float = 0.3
    gamma: float = 0.4
    delta: float = 0.3
    w_value: float = 0.40
    w_risk: float = 0.30
    w_complexity: float = 0.30
    borderline_epsilon: float = 0.05
    horizon_months: Optional[float] = None
    operator_available: bool = True
    capital_constrained: bool = False
    op_risk_threshold: float = 4.0
    tech_threshold: float = 4.0
    label: str = "baseline"

    def __post_init__(self) -> None:
        alpha = _require_number(self.alpha, "alpha")
        if not 0.0 <= alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
        object.__setattr__(self, "alpha", alpha)

        for name in ("beta", "gamma", "delta"):
            value = _require_number(getattr(self, name), name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
            object.__setattr__(self, name, value)
        mix_sum = self.beta + self.gamma + self.delta
        if abs(mix_sum - 1.0) > _WEIGHT_SUM_TOL:
            raise ValueError(f"beta + gamma + delta must equal 1, got {mix_sum!r}")

        for name in ("w_value", "w_risk", "w_complexity", "borderline_epsilon"):
            value = _require_number(getattr(self, name), name)
            if value < 0:
                raise ValueError(f"{name} must be >= 0")
            object.__setattr__(self, name, value)

        if self.horizon_months is not None:
            horizon = _require_number(self.horizon_months, "horizon_months")
            if horizon <= 0:
                raise ValueError("horizon_months must be > 0")
            object.__setattr__(self, "horizon_months", horizon)

        for name in ("op_risk_threshold", "tech_threshold"):
            value = _require_number(getattr(self, name), name)
            if not score_in_range(value):
                raise ValueError(f"{name} must lie on the score scale [1, 5]")
            object.__setattr__(self, name, value)

        _require_text(self.label, "profile label")

    @classmethod
    def baseline(cls) -> "DecisionProfile":
        """The neutral reference profile: alpha 0.5, mix 0.3/0.4/0.3, weights 0.40/0.30/0.30."""
        return cls()

    def with_overrides(self, **overrides: object) -> "DecisionProfile":
        return replace(self, **overrides)  # type: ignore[arg-type]


# Named presets for the recurring investor archetypes. The baseline numbers
# are the framework's reference parameters; the other three encode common
# committee postures and are illustrative defaults, not calibrated values.
PROFILE_PRESETS: dict[str, DecisionProfile] = {
    "baseline": DecisionProfile.baseline(),
    "non-professional-owner": DecisionProfile(
        alpha=0.3,
        w_value=0.30,
        w_risk=0.30,
        w_complexity=0.40,
        operator_available=False,
        capital_constrained=True,
        label="non-professional owner",
    ),
    "opportunistic-investor": DecisionProfile(
        alpha=0.5,
        w_value=0.50,
        w_risk=0.20,
        w_complexity=0.30,
        label="opportunistic investor",
    ),
    "institutional": DecisionProfile(
        alpha=0.4,
        beta=0.25,
        gamma=0.50,
        delta=0.25,
        w_value=0.35,
        w_risk=0.30,
        w_complexity=0.35,
        label="institutional investor",
    ),
}


@dataclass(frozen=True)
class EvaluationSet:
    """All inputs for one asset's screening run, keyed by use id.

    ``raw``, ``elicited``, ``cash_flows``, and ``time_to_income`` are maps
    from use id to per-pair inputs; consistency across the set (one source
    per indicator, no cross-asset pairs) is checked by
    :func:`validate_evaluation_set`, which reports rather than raises.
    """

    pairs: tuple[AssetUsePair, ...]
    raw: Mapping[str, RawIndicatorSet] = field(default_factory=dict)
    elicited: Mapping[str, Mapping[str, float]] = field(default_factory=dict)
    cash_flows: Mapping[str, CashFlowModel] = field(default_factory=dict)
    time_to_income: Mapping[str, TimeToIncome] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", tuple(self.pairs))
        object.__setattr__(self, "raw", dict(self.raw))
        object.__setattr__(
            self, "elicited", {uid: dict(scores) for uid, scores in self.elicited.items()}
        )
        object.__setattr__(self, "cash_flows", dict(self.cash_flows))
        object.__setattr__(self, "time_to_income", dict(self.time_to_income))

    def use_ids(self) -> tuple[str, ...]:
        return tuple(pair.use.id for pair in self.pairs)

    def pair_for(self, use_id: str) -> AssetUsePair:
        for pair in self.pairs:
            if pair.use.id == use_id:
                return pair
        raise KeyError(use_id)


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def _coverage(set_: EvaluationSet, indicator: str) -> tuple[list[str], list[str], list[str]]:
    """Use ids with an elicited score, a raw value, and a cash-flow model."""
    elicited = []
    raw = []
    flows = []
    for pair in set_.pairs:
        uid = pair.use.id
        scores = set_.elicited.get(uid, {})
        if indicator in scores and scores[indicator] is not None:
            elicited.append(uid)
        raw_set = set_.raw.get(uid)
        if raw_set is not None and raw_set.value_for(indicator) is not None:
            raw.append(uid)
        if indicator == "npv" and uid in set_.cash_flows:
            flows.append(uid)
    return elicited, raw, flows


def validate_evaluation_set(set_: EvaluationSet) -> ValidationReport:
    """Check set-level consistency; returns a report instead of raising.

    The result is deterministic and independent of pair order: violations
    are reported sorted.
    """
    violations: set[str] = set()

    if not set_.pairs:
        violations.add("evaluation set is empty")
        return ValidationReport(violations=tuple(sorted(violations)))

    asset_ids = {pair.asset.id for pair in set_.pairs}
    if len(asset_ids) > 1:
        listed = ", ".join(sorted(asset_ids))
        violations.add(f"cross-asset set: pairs reference assets {{{listed}}}")

    use_ids = [pair.use.id for pair in set_.pairs]
    for uid in sorted({u for u in use_ids if use_ids.count(u) > 1}):
        violations.add(f"duplicate use id: {uid}")

    known = set(use_ids)
    for section_name, mapping in (
        ("raw", set_.raw),
        ("elicited", set_.elicited),
        ("cash_flows", set_.cash_flows),
        ("time_to_income", set_.time_to_income),
    ):
        for uid in sorted(set(mapping) - known):
            violations.add(f"{section_name} entry for unknown use id: {uid}")

    for uid, scores in set_.elicited.items():
        for name in sorted(set(scores) - set(INDICATORS)):
            violations.add(f"unknown elicited indicator {name!r} for use {uid}")
        for name, value in scores.items():
            if name in INDICATORS and value is not None and not score_in_range(float(value)):
                violations.add(f"elicited {name} for use {uid} outside [1, 5]: {value}")

    total = len(set_.pairs)
    for indicator in INDICATORS:
        elicited, raw, flows = _coverage(set_, indicator)
        if 0 < len(elicited) < total:
            violations.add(
                "mixed indicator provenance: "
                f"{indicator} elicited for {len(elicited)} of {total} pairs"
            )
        if 0 < len(raw) < total:
            violations.add(
                "mixed indicator provenance: "
                f"{RAW_FIELDS[indicator]} present for {len(raw)} of {total} pairs"
            )
        fully_elicited = len(elicited) == total
        fully_raw = len(raw) == total
        if fully_elicited and fully_raw:
            violations.add(f"conflicting provenance: {indicator} has both elicited and raw values")
        if indicator == "npv":
            if fully_raw and len(flows) == total:
                violations.add(
                    "conflicting provenance: npv_raw and cash-flow models both cover the set"
                )
            if not fully_elicited and not fully_raw:
                if 0 < len(flows) < total:
                    violations.add(
                        "mixed indicator provenance: "
                        f"cash-flow models present for {len(flows)} of {total} pairs"
                    )
                elif len(flows) == 0:
                    violations.add("no score source for indicator: npv")
        elif not fully_elicited and not fully_raw:
            violations.add(f"no score source for indicator: {indicator}")

    return ValidationReport(violations=tuple(sorted(violations)))


@dataclass(frozen=True)
class EvaluationResult:
    """Derived indices and verdict for one asset-use pair."""

    pair: AssetUsePair
    scores: ScoreVector
    overall_risk: float
    overall_complexity: float
    attractiveness: float
    classification: Classification
    exclusion_reasons: tuple[ReasonCode, ...]
    rank: int
    rules_not_evaluated: tuple[StopCode, ...] = ()

    def __post_init__(self) -> None:
        lo = min(self.scores.market_risk, self.scores.operational_risk)
        hi = max(self.scores.market_risk, self.scores.operational_risk)
        if not (lo - 1e-9 <= self.overall_risk <= hi + 1e-9):
            raise ValueError(
                f"overall_risk {self.overall_risk} outside its input envelope [{lo}, {hi}]"
            )
        if not (SCORE_MIN - 1e-9 <= self.overall_complexity <= SCORE_MAX + 1e-9):
            raise ValueError(f"overall_complexity {self.overall_complexity} outside [1, 5]")
        if isinstance(self.rank, bool) or not isinstance(self.rank, int) or self.rank < 1:
            raise ValueError("rank must be a positive integer")
        object.__setattr__(self, "exclusion_reasons", tuple(self.exclusion_reasons))
        object.__setattr__(self, "rules_not_evaluated", tuple(self.rules_not_evaluated))

    @property
    def use_id(self) -> str:
        return self.pair.use.id


def build_pairs(asset: Asset, uses: Sequence[IntendedUse]) -> tuple[AssetUsePair, ...]:
    return tuple(AssetUsePair(asset=asset, use=use) for use in uses)
