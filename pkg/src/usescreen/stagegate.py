"""Staged decision sequence with kill criteria and an append-only audit trail.

A project walks six stages in strict order; the first four carry stop
gates, the economic-model stage records assumptions only, and design is
the terminal commitment. A stop verdict is permanent: continuing after a
failed gate would be a new project with fresh assumptions, not a resumed
one.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .model import (
    Asset,
    Classification,
    EvaluationResult,
    IntendedUse,
    ReasonCode,
    StopCode,
)


class Stage(enum.Enum):
    ASSET_QUALIFICATION = "asset-qualification"
    USE_SELECTION = "use-selection"
    DEMAND_VALIDATION = "demand-validation"
    PLANNING_PREFEASIBILITY = "planning-pre-feasibility"
    ECONOMIC_MODEL = "economic-model"
    DESIGN = "design"


STAGE_ORDER: tuple[Stage, ...] = (
    Stage.ASSET_QUALIFICATION,
    Stage.USE_SELECTION,
    Stage.DEMAND_VALIDATION,
    Stage.PLANNING_PREFEASIBILITY,
    Stage.ECONOMIC_MODEL,
    Stage.DESIGN,
)

#: Stages that carry a stop gate (the economic-model stage records
#: assumptions but cannot kill; design is terminal and takes no records).
GATED_STAGES: tuple[Stage, ...] = STAGE_ORDER[:4]

#: Closed checklist vocabulary per stage. Unknown ids are rejected to keep
#: the audit trail queryable.
STAGE_CHECKLISTS: dict[Stage, tuple[str, ...]] = {
    Stage.ASSET_QUALIFICATION: (
        "legal-status-clear",
        "planning-constraints-surveyed",
        "scale-and-access-adequate",
        "no-binding-technical-limits",
    ),
    Stage.USE_SELECTION: (
        "scale-context-compatibility",
        "solvent-demand-evidence",
        "operational-capability-match",
        "time-to-income-within-horizon",
        "operating-model-specified",
    ),
    Stage.DEMAND_VALIDATION: (
        "local-benchmarks-collected",
        "absorption-patterns-reviewed",
        "operator-consultation-done",
        "solvent-demand-confirmed",
    ),
    Stage.PLANNING_PREFEASIBILITY: (
        "change-of-use-feasible",
        "compliance-requirements-assessed",
        "system-capacity-adequate",
        "adaptation-costs-bounded",
    ),
    Stage.ECONOMIC_MODEL: (),
}

#: Reason code recorded when a given checklist item fails.
CHECK_FAILURE_CODES: dict[str, StopCode] = {
    "legal-status-clear": StopCode.PLANNING_BLOCK,
    "planning-constraints-surveyed": StopCode.PLANNING_BLOCK,
    "scale-and-access-adequate": StopCode.PLANNING_BLOCK,
    "no-binding-technical-limits": StopCode.PLANNING_BLOCK,
    "scale-context-compatibility": StopCode.PLANNING_BLOCK,
    "solvent-demand-evidence": StopCode.DEMAND_VALIDATION_FAIL,
    "operational-capability-match": StopCode.OPERATOR_GAP,
    "time-to-income-within-horizon": StopCode.HORIZON_MISMATCH,
    "operating-model-specified": StopCode.OPERATOR_GAP,
    "local-benchmarks-collected": StopCode.DEMAND_VALIDATION_FAIL,
    "absorption-patterns-reviewed": StopCode.DEMAND_VALIDATION_FAIL,
    "operator-consultation-done": StopCode.DEMAND_VALIDATION_FAIL,
    "solvent-demand-confirmed": StopCode.DEMAND_VALIDATION_FAIL,
    "change-of-use-feasible": StopCode.PLANNING_BLOCK,
    "compliance-requirements-assessed": StopCode.PLANNING_BLOCK,
    "system-capacity-adequate": StopCode.PLANNING_BLOCK,
    "adaptation-costs-bounded": StopCode.CAPITAL_COMPLEXITY_MISMATCH,
}


class Verdict(enum.Enum):
    PROCEED = "proceed"
    STOP = "stop"


class GateError(ValueError):
    """Raised for out-of-order, frozen, or malformed gate operations."""


@dataclass(frozen=True)
class GateRecord:
    stage: Stage
    verdict: Verdict
    reasons: tuple[ReasonCode, ...]
    checklist: Mapping[str, bool]
    timestamp: float
    assumptions: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "reasons", tuple(self.reasons))
        object.__setattr__(self, "checklist", dict(self.checklist))
        object.__setattr__(self, "assumptions", tuple(self.assumptions))


def stage_checklist(stage: Stage) -> tuple[str, ...]:
    return STAGE_CHECKLISTS.get(stage, ())


def next_stage(stage: Stage) -> Optional[Stage]:
    index = STAGE_ORDER.index(stage)
    return STAGE_ORDER[index + 1] if index + 1 < len(STAGE_ORDER) else None


class Project:
    """Single-writer aggregate tracking candidates, stage, and gate history.

    Concurrent reads are safe; mutations must be serialized per project id
    by the caller (the service layer holds a per-id lock).
    """

    def __init__(self, id: str, asset: Asset, uses: Sequence[IntendedUse]) -> None:
        if not isinstance(id, str) or not id.strip():
            raise GateError("project id must be non-empty text")
        uses = tuple(uses)
        if not uses:
            raise GateError("a project needs at least one candidate use")
        ids = [use.id for use in uses]
        if len(set(ids)) != len(ids):
            raise GateError("candidate use ids must be unique")
        self.id = id
        self.asset = asset
        self.original_uses: tuple[IntendedUse, ...] = uses
        self.candidate_uses: tuple[IntendedUse, ...] = uses
        self.current_stage: Stage = Stage.ASSET_QUALIFICATION
        self.stopped: bool = False
        self.gate_history: tuple[GateRecord, ...] = ()
        self.evaluation_results: tuple[EvaluationResult, ...] = ()

    # -- internal ----------------------------------------------------------

    def _require_active(self) -> None:
        if self.stopped:
            raise GateError(f"project {self.id} is stopped; its history is frozen")
        if self.current_stage is Stage.DESIGN:
            raise GateError("design is the terminal commitment and takes no gate records")

    def _append(self, record: GateRecord) -> GateRecord:
        if self.gate_history and record.timestamp <= self.gate_history[-1].timestamp:
            raise GateError("gate timestamps must be strictly increasing")
        self.gate_history = self.gate_history + (record,)
        if record.verdict is Verdict.STOP:
            self.stopped = True
        else:
            advanced = next_stage(record.stage)
            assert advanced is not None  # design never takes records
            self.current_stage = advanced
        return record

    # -- mutations ---------------------------------------------------------

    def record_gate(
        self,
        stage: Stage,
        checklist: Mapping[str, bool],
        reasons: Sequence[ReasonCode] = (),
        *,
        timestamp: float,
        assumptions: Sequence[str] = (),
    ) -> GateRecord:
        """Append one gate decision at the project's current stage.

        The verdict is derived, never supplied: any false checklist item or
        any explicit stop reason yields a stop; otherwise the project
        proceeds to the next stage. Failed checks contribute reason codes
        of their own so the record explains itself.
        """
        self._require_active()
        if stage is not self.current_stage:
            raise GateError(
                f"gate out of order: project is at {self.current_stage.value}, "
                f"record targets {stage.value}"
            )

        vocabulary = stage_checklist(stage)
        unknown = sorted(set(checklist) - set(vocabulary))
        if unknown:
            raise GateError(f"unknown checklist ids for {stage.value}: {', '.join(unknown)}")

        reasons = tuple(reasons)
        if stage in GATED_STAGES:
            missing = sorted(set(vocabulary) - set(checklist))
            if missing:
                raise GateError(
                    f"incomplete checklist for {stage.value}: missing {', '.join(missing)}"
                )
            derived = tuple(
                ReasonCode(
                    code=CHECK_FAILURE_CODES[check],
                    detail=f"check failed: {check}",
                )
                for check in vocabulary
                if not checklist[check]
            )
            all_reasons = derived + reasons
            verdict = Verdict.STOP if all_reasons else Verdict.PROCEED
        else:  # economic model: no stop gate, findings go into assumptions
            if reasons:
                raise GateError(
                    "the economic-model stage carries no stop gate; "
                    "record findings as assumptions"
                )
            all_reasons = ()
            verdict = Verdict.PROCEED

        record = GateRecord(
            stage=stage,
            verdict=verdict,
            reasons=all_reasons,
            checklist=checklist,
            timestamp=timestamp,
            assumptions=tuple(assumptions),
        )
        return self._append(record)

    def attach_evaluation(
        self,
        results: Sequence[EvaluationResult],
        *,
        timestamp: float,
    ) -> "Project":
        """Prune candidates using screening results at the use-selection stage.

        Excluded alternatives leave the candidate set. When nothing
        survives, an automatic stop record is appended carrying the rule
        codes that dominated the exclusions (or the negative-index code
        when only the index fired).
        """
        self._require_active()
        if self.current_stage is not Stage.USE_SELECTION:
            raise GateError(
                f"evaluation attaches at {Stage.USE_SELECTION.value}, "
                f"project is at {self.current_stage.value}"
            )
        results = tuple(results)
        if not results:
            raise GateError("cannot attach an empty evaluation")

        candidate_ids = {use.id for use in self.candidate_uses}
        result_ids = {result.use_id for result in results}
        stray = sorted(result_ids - candidate_ids)
        if stray:
            raise GateError(f"evaluation covers unknown candidates: {', '.join(stray)}")

        self.evaluation_results = results
        surviving = tuple(
            use
            for use in self.candidate_uses
            if use.id not in result_ids
            or self._result_for(results, use.id).classification is not Classification.EXCLUDE
        )
        self.candidate_uses = surviving

        if not surviving:
            rule_codes = sorted(
                {
                    reason.code
                    for result in results
                    for reason in result.exclusion_reasons
                    if reason.code is not StopCode.NEGATIVE_ATTRACTIVENESS
                },
                key=lambda code: code.value,
            )
            codes = rule_codes or [StopCode.NEGATIVE_ATTRACTIVENESS]
            stop_reasons = tuple(
                ReasonCode(code=code, detail="every candidate use was excluded ex ante")
                for code in codes
            )
            self._append(
                GateRecord(
                    stage=Stage.USE_SELECTION,
                    verdict=Verdict.STOP,
                    reasons=stop_reasons,
                    checklist={},
                    timestamp=timestamp,
                )
            )
        return self

    @staticmethod
    def _result_for(results: Sequence[EvaluationResult], use_id: str) -> EvaluationResult:
        for result in results:
            if result.use_id == use_id:
                return result
        raise KeyError(use_id)

    # -- reconstruction ----------------------------------------------------

    @classmethod
    def replay(
        cls,
        id: str,
        asset: Asset,
        uses: Sequence[IntendedUse],
        history: Sequence[GateRecord],
    ) -> "Project":
        """Rebuild a project from its audit trail, validating the sequence."""
        project = cls(id, asset, uses)
        for record in history:
            project._require_active()
            if record.verdict is Verdict.STOP:
                if record.stage is not project.current_stage:
                    raise GateError("replay: stop recorded at a stage the project never reached")
            elif record.stage is not project.current_stage:
                raise GateError("replay: proceed recorded out of stage order")
            project._append(record)
        return project


def open_project(asset: Asset, uses: Sequence[IntendedUse], id: Optional[str] = None) -> Project:
    """Start a project at asset qualification with an empty history."""
    return Project(id=id or f"{asset.id}-screening", asset=asset, uses=uses)


def record_gate(
    project: Project,
    stage: Stage,
    checklist: Mapping[str, bool],
    reasons: Sequence[ReasonCode] = (),
    *,
    timestamp: float,
    assumptions: Sequence[str] = (),
) -> GateRecord:
    return project.record_gate(
        stage, checklist, reasons, timestamp=timestamp, assumptions=assumptions
    )


def attach_evaluation(
    project: Project, results: Sequence[EvaluationResult], *, timestamp: float
) -> Project:
    return project.attach_evaluation(results, timestamp=timestamp)
