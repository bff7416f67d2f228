"""Versioned evaluation-worksheet documents, report export, and reference data.

The worksheet is the reproducibility contract: everything a committee needs
to regenerate a screening result travels in one JSON document (inputs,
profile, and, for exported reports, every intermediate). Serialization is
canonical - fixed key order, two-space indent, trailing newline - so that
re-exporting a parsed report is byte-identical and golden tests can diff
documents directly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

from .analysis import StabilityReport, SweepAxis, SweepSpec
from .economics import CashFlowModel, StressKind, StressReport, TimeToIncome
from .model import (
    INDICATORS,
    RAW_FIELDS,
    Asset,
    ContextClass,
    DecisionProfile,
    IntendedUse,
    RawIndicatorSet,
    EvaluationSet,
    build_pairs,
)
from .scoring import Evaluation, ReferenceComparison, compare_to_reference
from .stagegate import (
    GateRecord,
    Project,
    Stage,
    Verdict,
)
from .model import ReasonCode, StopCode

FORMAT_VERSION = 1

_WORKSHEET_KEYS = {"format_version", "kind", "asset", "uses", "pairs", "profile",
                   "reference_rows", "notes"}
_ASSET_KEYS = {"id", "name", "gla_sqm", "context_class", "notes"}
_USE_KEYS = {"id", "label", "format_class"}
_PAIR_KEYS = {"elicited_scores", "raw_indicators", "cash_flows", "time_to_income"}
_CASH_FLOW_KEYS = {"initial_investment", "discount_rate", "periods", "rent_share",
                   "occupancy_share"}
_TTI_KEYS = {"permits_months", "works_months", "stabilization_months"}
_PROFILE_KEYS = {
    "label", "alpha", "beta", "gamma", "delta", "w_value", "w_risk", "w_complexity",
    "borderline_epsilon", "horizon_months", "operator_available", "capital_constrained",
    "op_risk_threshold", "tech_threshold",
}
_REFERENCE_COLUMNS = {"overall_risk", "overall_complexity", "attractiveness"}


class WorksheetError(ValueError):
    """Parse or validation failure; ``diagnostics`` lists field-level issues."""

    def __init__(self, diagnostics: Sequence[str]):
        self.diagnostics = tuple(diagnostics)
        super().__init__("; ".join(self.diagnostics))


def canonical_json(doc: Any) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


@dataclass(frozen=True)
class Worksheet:
    asset: Asset
    uses: tuple[IntendedUse, ...]
    profile: DecisionProfile
    raw: Mapping[str, RawIndicatorSet] = field(default_factory=dict)
    elicited: Mapping[str, Mapping[str, float]] = field(default_factory=dict)
    cash_flows: Mapping[str, CashFlowModel] = field(default_factory=dict)
    time_to_income: Mapping[str, TimeToIncome] = field(default_factory=dict)
    reference_rows: Optional[Mapping[str, Mapping[str, float]]] = None
    notes: str = ""
    format_version: int = FORMAT_VERSION
    parse_warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "uses", tuple(self.uses))
        object.__setattr__(
            self, "raw", {uid: r for uid, r in self.raw.items() if not r.is_empty()}
        )
        object.__setattr__(
            self,
            "elicited",
            {
                uid: {name: float(value) for name, value in scores.items()}
                for uid, scores in self.elicited.items()
                if scores
            },
        )
        object.__setattr__(self, "cash_flows", dict(self.cash_flows))
        object.__setattr__(self, "time_to_income", dict(self.time_to_income))
        if self.reference_rows is not None:
            object.__setattr__(
                self,
                "reference_rows",
                {
                    uid: {name: float(value) for name, value in row.items()}
                    for uid, row in self.reference_rows.items()
                },
            )

    def evaluation_set(self) -> EvaluationSet:
        return EvaluationSet(
            pairs=build_pairs(self.asset, self.uses),
            raw=self.raw,
            elicited=self.elicited,
            cash_flows=self.cash_flows,
            time_to_income=self.time_to_income,
        )

    def with_profile(self, profile: DecisionProfile) -> "Worksheet":
        return replace(self, profile=profile)


# ---------------------------------------------------------------------------
# parsing

class _Diagnostics:
    def __init__(self, strict: bool):
        self.strict = strict
        self.errors: list[str] = []
        self.warnings: list[str] = []

    def error(self, path: str, message: str) -> None:
        self.errors.append(f"{path}: {message}")

    def unknown(self, path: str, keys: Sequence[str]) -> None:
        message = f"unknown field(s): {', '.join(sorted(keys))}"
        if self.strict:
            self.errors.append(f"{path}: {message}")
        else:
            self.warnings.append(f"{path}: {message} (ignored)")


def _expect_mapping(value: Any, path: str, diag: _Diagnostics) -> Optional[dict]:
    if not isinstance(value, dict):
        diag.error(path, f"expected an object, got {type(value).__name__}")
        return None
    return value


def _get_number(obj: Mapping, key: str, path: str, diag: _Diagnostics,
                required: bool = True) -> Optional[float]:
    if key not in obj or obj[key] is None:
        if required:
            diag.error(f"{path}.{key}", "missing required number")
        return None
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        diag.error(f"{path}.{key}", f"expected a number, got {type(value).__name__}")
        return None
    return float(value)


def _get_text(obj: Mapping, key: str, path: str, diag: _Diagnostics,
              required: bool = True, default: str = "") -> str:
    if key not in obj:
        if required:
            diag.error(f"{path}.{key}", "missing required text")
        return default
    value = obj[key]
    if not isinstance(value, str):
        diag.error(f"{path}.{key}", f"expected text, got {type(value).__name__}")
        return default
    return value


def _parse_asset(raw: Any, diag: _Diagnostics) -> Optional[Asset]:
    obj = _expect_mapping(raw, "asset", diag)
    if obj is None:
        return None
    unknown = set(obj) - _ASSET_KEYS
    if unknown:
        diag.unknown("asset", sorted(unknown))
    context_text = _get_text(obj, "context_class", "asset", diag)
    context = None
    try:
        context = ContextClass(context_text)
    except ValueError:
        diag.error(
            "asset.context_class",
            f"must be one of {', '.join(c.value for c in ContextClass)}",
        )
    gla = _get_number(obj, "gla_sqm", "asset", diag)
    if diag.errors or context is None or gla is None:
        return None
    try:
        return Asset(
            id=_get_text(obj, "id", "asset", diag),
            name=_get_text(obj, "name", "asset", diag),
            gla_sqm=gla,
            context_class=context,
            notes=_get_text(obj, "notes", "asset", diag, required=False),
        )
    except ValueError as exc:
        diag.error("asset", str(exc))
        return None


def _parse_uses(raw: Any, diag: _Diagnostics) -> tuple[IntendedUse, ...]:
    if not isinstance(raw, list) or not raw:
        diag.error("uses", "expected a non-empty array")
        return ()
    uses = []
    for i, entry in enumerate(raw):
        obj = _expect_mapping(entry, f"uses[{i}]", diag)
        if obj is None:
            continue
        unknown = set(obj) - _USE_KEYS
        if unknown:
            diag.unknown(f"uses[{i}]", sorted(unknown))
        fmt = obj.get("format_class")
        if fmt is not None and not isinstance(fmt, str):
            diag.error(f"uses[{i}].format_class", "expected text or null")
            fmt = None
        try:
            uses.append(
                IntendedUse(
                    id=_get_text(obj, "id", f"uses[{i}]", diag),
                    label=_get_text(obj, "label", f"uses[{i}]", diag),
                    format_class=fmt,
                )
            )
        except ValueError as exc:
            diag.error(f"uses[{i}]", str(exc))
    return tuple(uses)


def _parse_profile(raw: Any, diag: _Diagnostics) -> Optional[DecisionProfile]:
    obj = _expect_mapping(raw, "profile", diag)
    if obj is None:
        return None
    unknown = set(obj) - _PROFILE_KEYS
    if unknown:
        diag.unknown("profile", sorted(unknown))
    kwargs: dict[str, Any] = {}
    for key in ("alpha", "beta", "gamma", "delta", "w_value", "w_risk", "w_complexity",
                "borderline_epsilon", "op_risk_threshold", "tech_threshold"):
        if key in obj:
            value = _get_number(obj, key, "profile", diag)
            if value is not None:
                kwargs[key] = value
    if obj.get("horizon_months") is not None:
        value = _get_number(obj, "horizon_months", "profile", diag)
        if value is not None:
            kwargs["horizon_months"] = value
    for key in ("operator_available", "capital_constrained"):
        if key in obj:
            if not isinstance(obj[key], bool):
                diag.error(f"profile.{key}", "expected true or false")
            else:
                kwargs[key] = obj[key]
    if "label" in obj:
        kwargs["label"] = _get_text(obj, "label", "profile", diag)
    try:
        return DecisionProfile(**kwargs)
    except ValueError as exc:
        diag.error("profile", str(exc))
        return None


def _parse_pair(uid: str, raw: Any, diag: _Diagnostics) -> dict[str, Any]:
    out: dict[str, Any] = {}
    obj = _expect_mapping(raw, f"pairs.{uid}", diag)
    if obj is None:
        return out
    unknown = set(obj) - _PAIR_KEYS
    if unknown:
        diag.unknown(f"pairs.{uid}", sorted(unknown))

    path = f"pairs.{uid}"
    if "elicited_scores" in obj:
        scores = _expect_mapping(obj["elicited_scores"], f"{path}.elicited_scores", diag)
        if scores is not None:
            cleaned = {}
            for name, value in scores.items():
                if name not in INDICATORS:
                    diag.unknown(f"{path}.elicited_scores", [name])
                    continue
                number = _get_number(scores, name, f"{path}.elicited_scores", diag)
                if number is not None:
                    if not 1.0 <= number <= 5.0:
                        diag.error(f"{path}.elicited_scores.{name}",
                                   f"score {number:g} outside the 1-5 scale")
                    else:
                        cleaned[name] = number
            out["elicited"] = cleaned

    if "raw_indicators" in obj:
        raw_obj = _expect_mapping(obj["raw_indicators"], f"{path}.raw_indicators", diag)
        if raw_obj is not None:
            known = set(RAW_FIELDS.values())
            unknown = set(raw_obj) - known
            if unknown:
                diag.unknown(f"{path}.raw_indicators", sorted(unknown))
            kwargs = {}
            for name in known & set(raw_obj):
                value = _get_number(raw_obj, name, f"{path}.raw_indicators", diag,
                                    required=False)
                if value is not None:
                    kwargs[name] = value
            try:
                out["raw"] = RawIndicatorSet(**kwargs)
            except ValueError as exc:
                diag.error(f"{path}.raw_indicators", str(exc))

    if "cash_flows" in obj:
        flows = _expect_mapping(obj["cash_flows"], f"{path}.cash_flows", diag)
        if flows is not None:
            unknown = set(flows) - _CASH_FLOW_KEYS
            if unknown:
                diag.unknown(f"{path}.cash_flows", sorted(unknown))
            periods_raw = flows.get("periods")
            periods: list[tuple[int, float]] = []
            if not isinstance(periods_raw, list):
                diag.error(f"{path}.cash_flows.periods", "expected an array of [year, amount]")
            else:
                for i, entry in enumerate(periods_raw):
                    if (not isinstance(entry, list) or len(entry) != 2
                            or isinstance(entry[0], bool) or not isinstance(entry[0], int)
                            or isinstance(entry[1], bool)
                            or not isinstance(entry[1], (int, float))):
                        diag.error(f"{path}.cash_flows.periods[{i}]",
                                   "expected [integer year, number]")
                        continue
                    periods.append((entry[0], float(entry[1])))
            kwargs = {
                "initial_investment": _get_number(flows, "initial_investment",
                                                  f"{path}.cash_flows", diag),
                "discount_rate": _get_number(flows, "discount_rate",
                                             f"{path}.cash_flows", diag),
            }
            for key in ("rent_share", "occupancy_share"):
                value = _get_number(flows, key, f"{path}.cash_flows", diag, required=False)
                if value is not None:
                    kwargs[key] = value
            if None not in kwargs.values():
                try:
                    out["cash_flows"] = CashFlowModel(periods=tuple(periods), **kwargs)
                except ValueError as exc:
                    diag.error(f"{path}.cash_flows", str(exc))

    if "time_to_income" in obj:
        tti = _expect_mapping(obj["time_to_income"], f"{path}.time_to_income", diag)
        if tti is not None:
            unknown = set(tti) - _TTI_KEYS
            if unknown:
                diag.unknown(f"{path}.time_to_income", sorted(unknown))
            values = {key: _get_number(tti, key, f"{path}.time_to_income", diag)
                      for key in _TTI_KEYS}
            if None not in values.values():
                try:
                    out["time_to_income"] = TimeToIncome(**values)  # type: ignore[arg-type]
                except ValueError as exc:
                    diag.error(f"{path}.time_to_income", str(exc))
    return out


def parse_worksheet(text: str, *, strict: bool = True) -> Worksheet:
    """Parse and fully validate a worksheet document.

    Strict mode rejects unknown fields; lenient mode drops them and records
    a warning on the returned worksheet. Anything that would change the
    meaning of the evaluation is an error in both modes.
    """
    diag = _Diagnostics(strict)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WorksheetError([f"document: invalid JSON ({exc.msg} at line {exc.lineno})"])
    if not isinstance(doc, dict):
        raise WorksheetError(["document: top level must be an object"])

    unknown = set(doc) - _WORKSHEET_KEYS
    if unknown:
        diag.unknown("document", sorted(unknown))

    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        diag.error("format_version", f"unsupported version {version!r}, expected {FORMAT_VERSION}")
    kind = doc.get("kind", "worksheet")
    if kind != "worksheet":
        diag.error("kind", f"expected 'worksheet', got {kind!r}")

    asset = _parse_asset(doc.get("asset"), diag)
    uses = _parse_uses(doc.get("uses"), diag)
    profile = _parse_profile(doc.get("profile"), diag)

    raw: dict[str, RawIndicatorSet] = {}
    elicited: dict[str, Mapping[str, float]] = {}
    cash_flows: dict[str, CashFlowModel] = {}
    tti: dict[str, TimeToIncome] = {}
    pairs_obj = doc.get("pairs", {})
    known_ids = {use.id for use in uses}
    if not isinstance(pairs_obj, dict):
        diag.error("pairs", "expected an object keyed by use id")
    else:
        for uid, entry in pairs_obj.items():
            if uid not in known_ids:
                diag.error(f"pairs.{uid}", "no matching entry in uses")
                continue
            parsed = _parse_pair(uid, entry, diag)
            if "elicited" in parsed and parsed["elicited"]:
                elicited[uid] = parsed["elicited"]
            if "raw" in parsed and not parsed["raw"].is_empty():
                raw[uid] = parsed["raw"]
            if "cash_flows" in parsed:
                cash_flows[uid] = parsed["cash_flows"]
            if "time_to_income" in parsed:
                tti[uid] = parsed["time_to_income"]

    reference_rows = None
    if doc.get("reference_rows") is not None:
        rows = _expect_mapping(doc["reference_rows"], "reference_rows", diag)
        if rows is not None:
            reference_rows = {}
            for uid, row in rows.items():
                if uid not in known_ids:
                    diag.error(f"reference_rows.{uid}", "no matching entry in uses")
                    continue
                row_obj = _expect_mapping(row, f"reference_rows.{uid}", diag)
                if row_obj is None:
                    continue
                unknown = set(row_obj) - _REFERENCE_COLUMNS
                if unknown:
                    diag.unknown(f"reference_rows.{uid}", sorted(unknown))
                reference_rows[uid] = {
                    key: value
                    for key in _REFERENCE_COLUMNS & set(row_obj)
                    if (value := _get_number(row_obj, key, f"reference_rows.{uid}", diag))
                    is not None
                }

    notes = _get_text(doc, "notes", "document", diag, required=False)

    if diag.errors or asset is None or profile is None or not uses:
        raise WorksheetError(diag.errors or ["document: incomplete worksheet"])

    worksheet = Worksheet(
        asset=asset,
        uses=uses,
        profile=profile,
        raw=raw,
        elicited=elicited,
        cash_flows=cash_flows,
        time_to_income=tti,
        reference_rows=reference_rows,
        notes=notes,
        parse_warnings=tuple(diag.warnings),
    )
    return worksheet


# ---------------------------------------------------------------------------
# serialization

def _asset_doc(asset: Asset) -> dict:
    doc: dict[str, Any] = {
        "id": asset.id,
        "name": asset.name,
        "gla_sqm": asset.gla_sqm,
        "context_class": asset.context_class.value,
    }
    if asset.notes:
        doc["notes"] = asset.notes
    return doc


def _profile_doc(profile: DecisionProfile) -> dict:
    return {
        "label": profile.label,
        "alpha": profile.alpha,
        "beta": profile.beta,
        "gamma": profile.gamma,
        "delta": profile.delta,
        "w_value": profile.w_value,
        "w_risk": profile.w_risk,
        "w_complexity": profile.w_complexity,
        "borderline_epsilon": profile.borderline_epsilon,
        "horizon_months": profile.horizon_months,
        "operator_available": profile.operator_available,
        "capital_constrained": profile.capital_constrained,
        "op_risk_threshold": profile.op_risk_threshold,
        "tech_threshold": profile.tech_threshold,
    }


def _pair_doc(worksheet: Worksheet, uid: str) -> dict:
    doc: dict[str, Any] = {}
    if uid in worksheet.elicited:
        doc["elicited_scores"] = {
            name: worksheet.elicited[uid][name]
            for name in INDICATORS
            if name in worksheet.elicited[uid]
        }
    if uid in worksheet.raw:
        raw = worksheet.raw[uid]
        doc["raw_indicators"] = {
            RAW_FIELDS[name]: raw.value_for(name)
            for name in INDICATORS
            if raw.value_for(name) is not None
        }
    if uid in worksheet.cash_flows:
        flows = worksheet.cash_flows[uid]
        doc["cash_flows"] = {
            "initial_investment": flows.initial_investment,
            "discount_rate": flows.discount_rate,
            "periods": [[t, cf] for t, cf in flows.periods],
            "rent_share": flows.rent_share,
            "occupancy_share": flows.occupancy_share,
        }
    if uid in worksheet.time_to_income:
        tti = worksheet.time_to_income[uid]
        doc["time_to_income"] = {
            "permits_months": tti.permits_months,
            "works_months": tti.works_months,
            "stabilization_months": tti.stabilization_months,
        }
    return doc


def worksheet_doc(worksheet: Worksheet) -> dict:
    doc: dict[str, Any] = {
        "format_version": worksheet.format_version,
        "kind": "worksheet",
        "asset": _asset_doc(worksheet.asset),
        "uses": [
            {
                "id": use.id,
                "label": use.label,
                **({"format_class": use.format_class} if use.format_class else {}),
            }
            for use in worksheet.uses
        ],
        "pairs": {use.id: _pair_doc(worksheet, use.id) for use in worksheet.uses},
        "profile": _profile_doc(worksheet.profile),
    }
    if worksheet.reference_rows is not None:
        doc["reference_rows"] = {
            uid: {
                key: row[key]
                for key in ("overall_risk", "overall_complexity", "attractiveness")
                if key in row
            }
            for uid, row in worksheet.reference_rows.items()
        }
    if worksheet.notes:
        doc["notes"] = worksheet.notes
    return doc


def serialize_worksheet(worksheet: Worksheet) -> str:
    return canonical_json(worksheet_doc(worksheet))


def parse_profile_doc(text: str) -> DecisionProfile:
    """Parse a standalone decision-profile document (used by --profile <path>)."""
    diag = _Diagnostics(strict=True)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WorksheetError([f"profile: invalid JSON ({exc.msg} at line {exc.lineno})"])
    profile = _parse_profile(doc, diag)
    if diag.errors or profile is None:
        raise WorksheetError(diag.errors or ["profile: incomplete document"])
    return profile


# ---------------------------------------------------------------------------
# report export

def _stress_doc(report: StressReport) -> dict:
    return {
        "base_npv": report.base_npv,
        "scenario_npvs": {kind.value: report.scenario_npvs[kind] for kind in StressKind},
        "fragile": report.fragile,
    }


def report_doc(worksheet: Worksheet, evaluation: Evaluation) -> dict:
    """Self-contained result document: inputs, intermediates, and outputs."""
    comparison: Optional[ReferenceComparison] = None
    if worksheet.reference_rows:
        comparison = compare_to_reference(evaluation, worksheet.reference_rows)

    normalization = {}
    for indicator in INDICATORS:
        record = evaluation.normalization.get(indicator)
        if record is None:
            continue
        entry: dict[str, Any] = {"source": record.source}
        if record.minimum is not None:
            entry["minimum"] = record.minimum
            entry["maximum"] = record.maximum
            entry["degenerate_policy"] = record.degenerate_policy.value
        normalization[indicator] = entry

    scores = {
        uid: {
            **{name: evaluation.scores[uid].value_of(name) for name in INDICATORS},
            "origins": {
                name: evaluation.scores[uid].origins[name].value for name in INDICATORS
            },
        }
        for uid in evaluation.input_order
    }

    results = [
        {
            "use_id": result.use_id,
            "label": result.pair.use.label,
            "rank": result.rank,
            "overall_risk": result.overall_risk,
            "overall_complexity": result.overall_complexity,
            "attractiveness": result.attractiveness,
            "classification": result.classification.value,
            "exclusion_reasons": [
                {"code": reason.code.value, "detail": reason.detail}
                for reason in result.exclusion_reasons
            ],
            "rules_not_evaluated": [code.value for code in result.rules_not_evaluated],
        }
        for result in evaluation.results
    ]

    traces = {
        uid: {
            "market_risk": trace.market_risk,
            "operational_risk": trace.operational_risk,
            "alpha": trace.alpha,
            "overall_risk": trace.overall_risk,
            "technical_complexity": trace.technical_complexity,
            "managerial_complexity": trace.managerial_complexity,
            "time_score": trace.time_score,
            "beta": trace.beta,
            "gamma": trace.gamma,
            "delta": trace.delta,
            "overall_complexity": trace.overall_complexity,
            "npv_score": trace.npv_score,
            "w_value": trace.w_value,
            "w_risk": trace.w_risk,
            "w_complexity": trace.w_complexity,
            "attractiveness": trace.attractiveness,
        }
        for uid, trace in ((uid, evaluation.traces[uid]) for uid in evaluation.input_order)
    }

    doc: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "kind": "evaluation_report",
        "worksheet": worksheet_doc(worksheet),
        "normalization": normalization,
        "scores": scores,
        "stress": {
            uid: (_stress_doc(evaluation.stress[uid]) if uid in evaluation.stress else None)
            for uid in evaluation.input_order
        },
        "results": results,
        "traces": traces,
        "screening": {
            "shortlist": list(evaluation.shortlist),
            "excluded": list(evaluation.excluded),
            "stop_signal": evaluation.stop_signal,
        },
    }
    if comparison is not None:
        doc["reference_comparison"] = {
            "cells": [
                {
                    "use_id": cell.use_id,
                    "column": cell.column,
                    "reference": cell.reference,
                    "recomputed": cell.recomputed,
                    "mismatch": cell.mismatch,
                }
                for cell in comparison.cells
            ],
            "mismatch_count": len(comparison.mismatches),
        }
    return doc


def export_report(worksheet: Worksheet, evaluation: Evaluation) -> str:
    return canonical_json(report_doc(worksheet, evaluation))


@dataclass(frozen=True)
class Report:
    """A parsed report: the raw document plus its embedded worksheet."""

    doc: Mapping[str, Any]
    worksheet: Worksheet


def parse_report(text: str) -> Report:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WorksheetError([f"document: invalid JSON ({exc.msg} at line {exc.lineno})"])
    if not isinstance(doc, dict) or doc.get("kind") != "evaluation_report":
        raise WorksheetError(["document: not an evaluation report"])
    if doc.get("format_version") != FORMAT_VERSION:
        raise WorksheetError([f"format_version: unsupported {doc.get('format_version')!r}"])
    for key in ("worksheet", "results", "scores", "screening", "traces"):
        if key not in doc:
            raise WorksheetError([f"document: missing report section {key!r}"])
    worksheet = parse_worksheet(canonical_json(doc["worksheet"]), strict=True)
    return Report(doc=doc, worksheet=worksheet)


def serialize_report(report: Report) -> str:
    return canonical_json(dict(report.doc))


# ---------------------------------------------------------------------------
# stability report and sweep spec documents

def stability_doc(report: StabilityReport) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "stability_report",
        "evaluated_points": report.evaluated_points,
        "skipped_points": report.skipped_points,
        "baseline_ranking": list(report.baseline_ranking),
        "counts": {uid: dict(per) for uid, per in report.counts.items()},
        "fractions": {uid: dict(per) for uid, per in report.fractions.items()},
        "flips": list(report.flips),
        "rank_reversals": dict(report.rank_reversals),
    }


def serialize_stability(report: StabilityReport) -> str:
    return canonical_json(stability_doc(report))


def parse_sweep_spec(text: str, template: DecisionProfile) -> SweepSpec:
    """Read a sweep-spec document; the worksheet's profile is the template
    unless the spec embeds profile overrides of its own.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WorksheetError([f"sweep: invalid JSON ({exc.msg} at line {exc.lineno})"])
    if not isinstance(doc, dict):
        raise WorksheetError(["sweep: top level must be an object"])
    unknown = set(doc) - {"axes", "profile_overrides"}
    if unknown:
        raise WorksheetError([f"sweep: unknown field(s): {', '.join(sorted(unknown))}"])

    profile = template
    overrides = doc.get("profile_overrides")
    if overrides is not None:
        if not isinstance(overrides, dict):
            raise WorksheetError(["sweep.profile_overrides: expected an object"])
        try:
            profile = template.with_overrides(**overrides)
        except (TypeError, ValueError) as exc:
            raise WorksheetError([f"sweep.profile_overrides: {exc}"])

    axes_doc = doc.get("axes")
    if not isinstance(axes_doc, dict):
        raise WorksheetError(["sweep.axes: expected an object of axis specs"])
    axes = {}
    for name, spec in axes_doc.items():
        if not isinstance(spec, dict) or not {"start", "stop", "steps"} <= set(spec):
            raise WorksheetError([f"sweep.axes.{name}: expected start/stop/steps"])
        try:
            axes[name] = SweepAxis(
                start=float(spec["start"]), stop=float(spec["stop"]), steps=spec["steps"]
            )
        except (TypeError, ValueError) as exc:
            raise WorksheetError([f"sweep.axes.{name}: {exc}"])
    try:
        return SweepSpec(axes=axes, profile=profile)
    except ValueError as exc:
        raise WorksheetError([f"sweep: {exc}"])


# ---------------------------------------------------------------------------
# project documents (service storage)

def project_doc(project: Project) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "project",
        "id": project.id,
        "asset": _asset_doc(project.asset),
        "uses": [
            {
                "id": use.id,
                "label": use.label,
                **({"format_class": use.format_class} if use.format_class else {}),
            }
            for use in project.original_uses
        ],
        "candidate_use_ids": [use.id for use in project.candidate_uses],
        "current_stage": project.current_stage.value,
        "stopped": project.stopped,
        "history": [
            {
                "stage": record.stage.value,
                "verdict": record.verdict.value,
                "reasons": [
                    {"code": reason.code.value, "detail": reason.detail}
                    for reason in record.reasons
                ],
                "checklist": dict(record.checklist),
                "timestamp": record.timestamp,
                "assumptions": list(record.assumptions),
            }
            for record in project.gate_history
        ],
        "evaluation": [
            {
                "use_id": result.use_id,
                "rank": result.rank,
                "attractiveness": result.attractiveness,
                "classification": result.classification.value,
                "exclusion_reasons": [
                    {"code": reason.code.value, "detail": reason.detail}
                    for reason in result.exclusion_reasons
                ],
            }
            for result in project.evaluation_results
        ],
    }


def project_from_doc(doc: Mapping[str, Any]) -> Project:
    """Rebuild a project aggregate from its stored document by replaying
    the gate history, then restoring the candidate-set snapshot."""
    asset_diag = _Diagnostics(strict=True)
    asset = _parse_asset(doc.get("asset"), asset_diag)
    uses = _parse_uses(doc.get("uses"), asset_diag)
    if asset_diag.errors or asset is None or not uses:
        raise WorksheetError(asset_diag.errors or ["project: incomplete document"])

    history = []
    for i, entry in enumerate(doc.get("history", [])):
        try:
            history.append(
                GateRecord(
                    stage=Stage(entry["stage"]),
                    verdict=Verdict(entry["verdict"]),
                    reasons=tuple(
                        ReasonCode(code=StopCode(r["code"]), detail=r["detail"])
                        for r in entry.get("reasons", [])
                    ),
                    checklist=dict(entry.get("checklist", {})),
                    timestamp=entry["timestamp"],
                    assumptions=tuple(entry.get("assumptions", [])),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise WorksheetError([f"project.history[{i}]: {exc}"])

    project = Project.replay(doc["id"], asset, uses, history)
    candidate_ids = doc.get("candidate_use_ids")
    if candidate_ids is not None:
        by_id = {use.id: use for use in uses}
        try:
            project.candidate_uses = tuple(by_id[uid] for uid in candidate_ids)
        except KeyError as exc:
            raise WorksheetError([f"project.candidate_use_ids: unknown use {exc}"])
    return project


# ---------------------------------------------------------------------------
# bundled reference data and example worksheets

@dataclass(frozen=True)
class FormatEntry:
    label: str
    scale: str
    context: str
    demand: str
    risk: str
    signal: str
    note: str


@dataclass(frozen=True)
class FormatReference:
    entries: tuple[FormatEntry, ...]

    def lookup(self, label: str) -> Optional[FormatEntry]:
        wanted = label.strip().lower()
        for entry in self.entries:
            if entry.label.lower() == wanted:
                return entry
        return None


_FORMAT_REFERENCE_COUNT = 7


def _data_dir():
    return resources.files("usescreen") / "data"


def bundled_path(name: str) -> Path:
    """Filesystem path of a bundled data file (worksheets, sweep specs)."""
    path = Path(str(_data_dir() / name))
    if not path.exists():
        raise FileNotFoundError(f"no bundled file named {name!r}")
    return path


def load_format_reference() -> FormatReference:
    """Load the shipped decision-oriented format summary (seven entries)."""
    try:
        raw = (_data_dir() / "reference_formats.json").read_text(encoding="utf-8")
        doc = json.loads(raw)
        entries = tuple(FormatEntry(**entry) for entry in doc["formats"])
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise RuntimeError(f"bundled format reference is corrupted: {exc}") from exc
    if len(entries) != _FORMAT_REFERENCE_COUNT:
        raise RuntimeError(
            f"bundled format reference must carry exactly {_FORMAT_REFERENCE_COUNT} entries, "
            f"found {len(entries)}"
        )
    return FormatReference(entries=entries)
