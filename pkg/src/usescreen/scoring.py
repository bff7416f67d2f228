"""Aggregation into overall risk, complexity, and attractiveness, plus the
classification, rule-based exclusion, and ranking pipeline.

All arithmetic runs at full float precision; rounding to two decimals
happens only when a report is rendered. Every intermediate is retained in
an :class:`AggregationTrace` so a reviewer can replay the computation and
get bit-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from .economics import StressReport, TimeToIncome, stress_report
from .model import (
    AssetUsePair,
    Classification,
    DecisionProfile,
    EvaluationResult,
    EvaluationSet,
    ReasonCode,
    ScoreVector,
    StopCode,
    score_in_range,
    validate_evaluation_set,
)
from .normalize import DegeneratePolicy, NormalizationRecord, resolve_scores

_WEIGHT_SUM_TOL = 1e-9


class EvaluationError(ValueError):
    """Raised when an evaluation set cannot be scored."""


def _check_score(value: float, name: str) -> float:
    value = float(value)
    if not score_in_range(value):
        raise ValueError(f"{name} must lie on the score scale [1, 5], got {value}")
    return value


def aggregate_risk(r_m: float, r_o: float, alpha: float) -> float:
    """Convex mix of market and operational risk: alpha weights the market side."""
    r_m = _check_score(r_m, "market risk")
    r_o = _check_score(r_o, "operational risk")
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return alpha * r_m + (1.0 - alpha) * r_o


def aggregate_complexity(
    c_t: float, c_g: float, t: float, beta: float, gamma: float, delta: float
) -> float:
    """Convex mix of technical complexity, managerial complexity, and time."""
    c_t = _check_score(c_t, "technical complexity")
    c_g = _check_score(c_g, "managerial complexity")
    t = _check_score(t, "time-to-income")
    for name, w in (("beta", beta), ("gamma", gamma), ("delta", delta)):
        if not 0.0 <= float(w) <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {w}")
    if abs(beta + gamma + delta - 1.0) > _WEIGHT_SUM_TOL:
        raise ValueError(f"beta + gamma + delta must equal 1, got {beta + gamma + delta!r}")
    return beta * c_t + gamma * c_g + delta * t


def attractiveness(
    npv_score: float, risk: float, complexity: float, profile: DecisionProfile
) -> float:
    """Signed index: weighted value minus weighted risk minus weighted complexity.

    The subtraction is deliberate; high value cannot silently compensate
    for risk or complexity, it has to outweigh them explicitly. The value
    input is the normalised 1-5 score, never a currency amount.
    """
    return (
        profile.w_value * float(npv_score)
        - profile.w_risk * float(risk)
        - profile.w_complexity * float(complexity)
    )


def classify(a: float, profile: DecisionProfile) -> Classification:
    """Sign bands around zero with a symmetric borderline half-width."""
    eps = profile.borderline_epsilon
    if a > eps:
        return Classification.PASS
    if a < -eps:
        return Classification.EXCLUDE
    return Classification.BORDERLINE


def rule_exclusions(
    pair: AssetUsePair,
    scores: ScoreVector,
    time_to_income: Optional[TimeToIncome],
    stress: Optional[StressReport],
    profile: DecisionProfile,
) -> tuple[ReasonCode, ...]:
    """Hard stop conditions that bypass the index entirely.

    These are go/no-go predicates, not soft penalties: a single hit forces
    exclusion no matter how attractive the index looks.
    """
    label = pair.use.label
    reasons: list[ReasonCode] = []
    if stress is not None and stress.fragile:
        reasons.append(
            ReasonCode(
                code=StopCode.STRESS_FRAGILITY,
                detail=f"{label}: NPV negative under all three stress scenarios",
            )
        )
    if scores.operational_risk >= profile.op_risk_threshold and not profile.operator_available:
        reasons.append(
            ReasonCode(
                code=StopCode.OPERATOR_GAP,
                detail=(
                    f"{label}: operational risk {scores.operational_risk:g} >= "
                    f"{profile.op_risk_threshold:g} with no qualified operator available"
                ),
            )
        )
    if (
        time_to_income is not None
        and profile.horizon_months is not None
        and time_to_income.total() > profile.horizon_months
    ):
        reasons.append(
            ReasonCode(
                code=StopCode.HORIZON_MISMATCH,
                detail=(
                    f"{label}: time-to-income {time_to_income.total():g} months exceeds "
                    f"the {profile.horizon_months:g}-month horizon"
                ),
            )
        )
    if scores.technical_complexity >= profile.tech_threshold and profile.capital_constrained:
        reasons.append(
            ReasonCode(
                code=StopCode.CAPITAL_COMPLEXITY_MISMATCH,
                detail=(
                    f"{label}: technical complexity {scores.technical_complexity:g} >= "
                    f"{profile.tech_threshold:g} under constrained capital"
                ),
            )
        )
    return tuple(reasons)


@dataclass(frozen=True)
class AggregationTrace:
    """Every intermediate of one pair's aggregation, for audit replay."""

    use_id: str
    market_risk: float
    operational_risk: float
    alpha: float
    overall_risk: float
    technical_complexity: float
    managerial_complexity: float
    time_score: float
    beta: float
    gamma: float
    delta: float
    overall_complexity: float
    npv_score: float
    w_value: float
    w_risk: float
    w_complexity: float
    attractiveness: float

    def replay(self) -> tuple[float, float, float]:
        """Recompute (risk, complexity, attractiveness) from the stored inputs."""
        risk = aggregate_risk(self.market_risk, self.operational_risk, self.alpha)
        complexity = aggregate_complexity(
            self.technical_complexity,
            self.managerial_complexity,
            self.time_score,
            self.beta,
            self.gamma,
            self.delta,
        )
        profile_like = DecisionProfile(
            w_value=self.w_value, w_risk=self.w_risk, w_complexity=self.w_complexity
        )
        return risk, complexity, attractiveness(self.npv_score, risk, complexity, profile_like)


@dataclass(frozen=True)
class Evaluation:
    """Full outcome of one screening run, in ranking order."""

    results: tuple[EvaluationResult, ...]
    traces: Mapping[str, AggregationTrace]
    stress: Mapping[str, StressReport]
    scores: Mapping[str, ScoreVector]
    normalization: Mapping[str, NormalizationRecord]
    profile: DecisionProfile
    input_order: tuple[str, ...]

    def result_for(self, use_id: str) -> EvaluationResult:
        for result in self.results:
            if result.use_id == use_id:
                return result
        raise KeyError(use_id)

    @property
    def shortlist(self) -> tuple[str, ...]:
        """Use ids not excluded, in ranking order."""
        return tuple(
            r.use_id for r in self.results if r.classification is not Classification.EXCLUDE
        )

    @property
    def excluded(self) -> tuple[str, ...]:
        return tuple(
            r.use_id for r in self.results if r.classification is Classification.EXCLUDE
        )

    @property
    def stop_signal(self) -> bool:
        """True when screening says stop: structural fragility anywhere or nothing left."""
        if not self.shortlist:
            return True
        return any(
            reason.code is StopCode.STRESS_FRAGILITY
            for result in self.results
            for reason in result.exclusion_reasons
        )


def evaluate_scored(
    set_: EvaluationSet,
    score_vectors: Mapping[str, ScoreVector],
    profile: DecisionProfile,
    normalization: Optional[Mapping[str, NormalizationRecord]] = None,
) -> Evaluation:
    """Run aggregation, classification, exclusion, and ranking on resolved scores."""
    use_ids = set_.use_ids()
    stress_by_use: dict[str, StressReport] = {
        uid: stress_report(set_.cash_flows[uid]) for uid in use_ids if uid in set_.cash_flows
    }

    interim = []
    traces: dict[str, AggregationTrace] = {}
    for pair in set_.pairs:
        uid = pair.use.id
        scores = score_vectors[uid]
        risk = aggregate_risk(scores.market_risk, scores.operational_risk, profile.alpha)
        complexity = aggregate_complexity(
            scores.technical_complexity,
            scores.managerial_complexity,
            scores.time_to_income,
            profile.beta,
            profile.gamma,
            profile.delta,
        )
        index = attractiveness(scores.npv, risk, complexity, profile)
        traces[uid] = AggregationTrace(
            use_id=uid,
            market_risk=scores.market_risk,
            operational_risk=scores.operational_risk,
            alpha=profile.alpha,
            overall_risk=risk,
            technical_complexity=scores.technical_complexity,
            managerial_complexity=scores.managerial_complexity,
            time_score=scores.time_to_income,
            beta=profile.beta,
            gamma=profile.gamma,
            delta=profile.delta,
            overall_complexity=complexity,
            npv_score=scores.npv,
            w_value=profile.w_value,
            w_risk=profile.w_risk,
            w_complexity=profile.w_complexity,
            attractiveness=index,
        )

        classification = classify(index, profile)
        reasons = list(
            rule_exclusions(
                pair, scores, set_.time_to_income.get(uid), stress_by_use.get(uid), profile
            )
        )
        if classification is Classification.EXCLUDE:
            reasons.insert(
                0,
                ReasonCode(
                    code=StopCode.NEGATIVE_ATTRACTIVENESS,
                    detail=(
                        f"{pair.use.label}: attractiveness {index:.2f} below "
                        f"-{profile.borderline_epsilon:g}"
                    ),
                ),
            )
        elif reasons:
            classification = Classification.EXCLUDE

        not_evaluated: list[StopCode] = []
        if uid not in stress_by_use:
            not_evaluated.append(StopCode.STRESS_FRAGILITY)
        if profile.horizon_months is not None and uid not in set_.time_to_income:
            not_evaluated.append(StopCode.HORIZON_MISMATCH)

        interim.append((pair, scores, risk, complexity, index, classification, reasons, not_evaluated))

    ordered = sorted(interim, key=lambda item: (-item[4], item[0].use.id))
    results = tuple(
        EvaluationResult(
            pair=pair,
            scores=scores,
            overall_risk=risk,
            overall_complexity=complexity,
            attractiveness=index,
            classification=classification,
            exclusion_reasons=tuple(reasons),
            rank=position,
            rules_not_evaluated=tuple(not_evaluated),
        )
        for position, (pair, scores, risk, complexity, index, classification, reasons, not_evaluated)
        in enumerate(ordered, start=1)
    )
    return Evaluation(
        results=results,
        traces=traces,
        stress=stress_by_use,
        scores=dict(score_vectors),
        normalization=dict(normalization or {}),
        profile=profile,
        input_order=use_ids,
    )


def evaluate(
    set_: EvaluationSet,
    profile: DecisionProfile,
    policy: DegeneratePolicy = DegeneratePolicy.NEUTRAL_3,
) -> Evaluation:
    """Validate, resolve scores, and run the full pipeline for one set."""
    report = validate_evaluation_set(set_)
    if not report.ok:
        raise EvaluationError("evaluation set failed validation: " + "; ".join(report.violations))
    score_vectors, records = resolve_scores(set_, policy)
    return evaluate_scored(set_, score_vectors, profile, records)


def evaluate_set(
    set_: EvaluationSet,
    profile: DecisionProfile,
    policy: DegeneratePolicy = DegeneratePolicy.NEUTRAL_3,
) -> tuple[EvaluationResult, ...]:
    """The ranked per-pair results; see :func:`evaluate` for the full outcome."""
    return evaluate(set_, profile, policy).results


@dataclass(frozen=True)
class ReferenceCell:
    """One derived-column comparison against an external reference matrix."""

    use_id: str
    column: str
    reference: float
    recomputed: float
    mismatch: bool


@dataclass(frozen=True)
class ReferenceComparison:
    cells: tuple[ReferenceCell, ...]

    @property
    def mismatches(self) -> tuple[ReferenceCell, ...]:
        return tuple(cell for cell in self.cells if cell.mismatch)


_REFERENCE_COLUMNS = {
    "overall_risk": lambda r: r.overall_risk,
    "overall_complexity": lambda r: r.overall_complexity,
    "attractiveness": lambda r: r.attractiveness,
}


def compare_to_reference(
    evaluation: Evaluation,
    reference_rows: Mapping[str, Mapping[str, float]],
    decimals: int = 2,
) -> ReferenceComparison:
    """Diff recomputed derived columns against reference values printed at
    ``decimals`` places; a cell mismatches when the difference exceeds half
    the last printed decimal.
    """
    tolerance = 0.5 * 10.0 ** (-decimals)
    cells = []
    for uid in evaluation.input_order:
        row = reference_rows.get(uid)
        if row is None:
            continue
        result = evaluation.result_for(uid)
        for column, getter in _REFERENCE_COLUMNS.items():
            if column not in row:
                continue
            reference = float(row[column])
            recomputed = getter(result)
            cells.append(
                ReferenceCell(
                    use_id=uid,
                    column=column,
                    reference=reference,
                    recomputed=recomputed,
                    mismatch=abs(recomputed - reference) > tolerance,
                )
            )
    return ReferenceComparison(cells=tuple(cells))
