"""usescreen: comparative ex-ante screening of intended uses for real estate.

The engine turns a set of asset-use alternatives into normalised 1-5
scores, aggregates them into overall risk, overall complexity, and a
subtractive attractiveness index, applies rule-based exclusions and stress
tests, and walks a staged decision sequence with kill criteria. Everything
is driven by a reproducible worksheet document; see the README for the CLI
and service surfaces.
"""

from .analysis import StabilityReport, SweepAxis, SweepSpec, perturb_scores, weight_sweep
from .economics import (
    MINIMUM_STRESS_SUITE,
    CashFlowModel,
    StressKind,
    StressReport,
    TimeToIncome,
    apply_stress,
    npv,
    stress_report,
)
from .model import (
    INDICATORS,
    PROFILE_PRESETS,
    Asset,
    AssetUsePair,
    Classification,
    ContextClass,
    DecisionProfile,
    EvaluationResult,
    EvaluationSet,
    IntendedUse,
    Origin,
    RawIndicatorSet,
    ReasonCode,
    ScoreVector,
    StopCode,
    ValidationReport,
    build_pairs,
    validate_evaluation_set,
)
from .normalize import (
    DegeneratePolicy,
    NormalizationError,
    NormalizationRecord,
    NormalizationSpec,
    normalize_benefit,
    normalize_penalty,
    resolve_scores,
)
from .scoring import (
    AggregationTrace,
    Evaluation,
    EvaluationError,
    ReferenceComparison,
    aggregate_complexity,
    aggregate_risk,
    attractiveness,
    classify,
    compare_to_reference,
    evaluate,
    evaluate_scored,
    evaluate_set,
    rule_exclusions,
)
from .service import ScreeningService, ServiceConfig, serve
from .stagegate import (
    GATED_STAGES,
    STAGE_CHECKLISTS,
    GateError,
    GateRecord,
    Project,
    Stage,
    Verdict,
    attach_evaluation,
    open_project,
    record_gate,
    stage_checklist,
)
from .worksheet import (
    FormatEntry,
    FormatReference,
    Report,
    Worksheet,
    WorksheetError,
    bundled_path,
    export_report,
    load_format_reference,
    parse_report,
    parse_sweep_spec,
    parse_worksheet,
    serialize_report,
    serialize_stability,
    serialize_worksheet,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
