/** Pure view-model builders. The DOM layer renders these verbatim; tests
 * assert on them directly. Derived numbers appear only when a service
 * response is present - otherwise every derived field renders the
 * unavailable marker. */

import type { SessionState } from "./session.js";
import type { Classification, Indicator, ResultDoc, StageId } from "./types.js";
import {
  CHECK_FAILURE_CODES,
  INDICATOR_LABELS,
  INDICATORS,
  STAGE_CHECKLISTS,
  STAGES,
} from "./types.js";

export const UNAVAILABLE = "—";

const show = (value: number | undefined | null): string =>
  value === undefined || value === null ? UNAVAILABLE : value.toFixed(2);

export interface MatrixCell {
  indicator: Indicator;
  value: number | null;
  editable: boolean;
  error: string | null;
}

export interface MatrixRow {
  useId: string;
  label: string;
  cells: MatrixCell[];
  rank: number | null;
  attractiveness: string;
  overallRisk: string;
  overallComplexity: string;
  classification: Classification | null;
  excluded: boolean;
  badges: { code: string; detail: string }[];
}

export interface MatrixView {
  available: boolean;
  stale: boolean;
  columns: { indicator: Indicator; label: string }[];
  rows: MatrixRow[];
}

export function matrixView(state: SessionState): MatrixView {
  const worksheet = state.worksheet;
  const results = new Map<string, ResultDoc>(
    (state.report?.results ?? []).map((result) => [result.use_id, result]),
  );
  const available = state.report !== null && state.serviceAvailable;
  const rows: MatrixRow[] = (worksheet?.uses ?? []).map((use) => {
    const pair = worksheet?.pairs[use.id] ?? {};
    const result = available ? results.get(use.id) : undefined;
    const cells: MatrixCell[] = INDICATORS.map((indicator) => {
      const elicited = pair.elicited_scores?.[indicator];
      return {
        indicator,
        value: elicited ?? null,
        editable: elicited !== undefined,
        error: state.cellErrors.get(`${use.id}:${indicator}`) ?? null,
      };
    });
    return {
      useId: use.id,
      label: use.label,
      cells,
      rank: result?.rank ?? null,
      attractiveness: show(result?.attractiveness),
      overallRisk: show(result?.overall_risk),
      overallComplexity: show(result?.overall_complexity),
      classification: result?.classification ?? null,
      excluded: result?.classification === "exclude",
      badges: (result?.exclusion_reasons ?? []).map(({ code, detail }) => ({ code, detail })),
    };
  });
  return {
    available,
    stale: state.reportStale,
    columns: INDICATORS.map((indicator) => ({ indicator, label: INDICATOR_LABELS[indicator] })),
    rows,
  };
}

export interface SliderView {
  name: string;
  value: number;
  min: number;
  max: number;
  step: number;
  constrained: boolean; // part of the sum-one complexity mix
}

export interface WeightConsoleView {
  available: boolean;
  sliders: SliderView[];
  presets: { name: string; selected: boolean }[];
  ranking: { useId: string; label: string; rank: number; attractiveness: string }[];
  sweep: {
    evaluatedPoints: number;
    flips: string[];
    perUse: { useId: string; fractions: Record<Classification, number> }[];
  } | null;
}

export function weightConsoleView(state: SessionState): WeightConsoleView {
  const profile = state.worksheet?.profile;
  const sliders: SliderView[] = profile
    ? [
        { name: "w_value", value: profile.w_value, min: 0, max: 1, step: 0.05, constrained: false },
        { name: "w_risk", value: profile.w_risk, min: 0, max: 1, step: 0.05, constrained: false },
        {
          name: "w_complexity",
          value: profile.w_complexity,
          min: 0,
          max: 1,
          step: 0.05,
          constrained: false,
        },
        { name: "alpha", value: profile.alpha, min: 0, max: 1, step: 0.05, constrained: false },
        { name: "beta", value: profile.beta, min: 0, max: 1, step: 0.05, constrained: true },
        { name: "gamma", value: profile.gamma, min: 0, max: 1, step: 0.05, constrained: true },
        { name: "delta", value: profile.delta, min: 0, max: 1, step: 0.05, constrained: true },
      ]
    : [];
  const available = state.report !== null && state.serviceAvailable;
  return {
    available,
    sliders,
    presets: Object.keys(state.presets).map((name) => ({
      name,
      selected: state.selectedPreset === name,
    })),
    ranking: available
      ? (state.report?.results ?? []).map((result) => ({
          useId: result.use_id,
          label: result.label,
          rank: result.rank,
          attractiveness: show(result.attractiveness),
        }))
      : [],
    sweep: state.stability
      ? {
          evaluatedPoints: state.stability.evaluated_points,
          flips: [...state.stability.flips],
          perUse: Object.entries(state.stability.fractions).map(([useId, fractions]) => ({
            useId,
            fractions: fractions as Record<Classification, number>,
          })),
        }
      : null,
  };
}

export type StageStatus = "done" | "current" | "upcoming" | "stopped" | "terminal";

export interface GateTrackerView {
  open: boolean;
  frozen: boolean;
  notice: string | null;
  stages: { id: StageId; status: StageStatus }[];
  checklist: { id: string; checked: boolean; failureCode: string }[];
  proceedEnabled: boolean;
  stopOffered: boolean;
  stopCodes: string[];
  candidates: string[];
  history: {
    stage: string;
    verdict: "proceed" | "stop";
    reasons: { code: string; detail: string }[];
  }[];
}

export function gateTrackerView(state: SessionState): GateTrackerView {
  const project = state.project;
  if (!project) {
    return {
      open: false,
      frozen: false,
      notice: state.gateNotice,
      stages: STAGES.map((id, index) => ({
        id,
        status: index === 0 ? "current" : "upcoming",
      })),
      checklist: [],
      proceedEnabled: false,
      stopOffered: false,
      stopCodes: [],
      candidates: [],
      history: [],
    };
  }
  const currentIndex = STAGES.indexOf(project.current_stage as StageId);
  const stages = STAGES.map((id, index) => {
    let status: StageStatus;
    if (project.stopped && index === currentIndex) status = "stopped";
    else if (index < currentIndex) status = "done";
    else if (index === currentIndex) status = "current";
    else if (id === "design") status = "terminal";
    else status = "upcoming";
    return { id, status };
  });
  const stageChecks = STAGE_CHECKLISTS[project.current_stage as StageId] ?? [];
  const checklist = stageChecks.map((id) => ({
    id,
    checked: state.pendingChecklist[id] ?? false,
    failureCode: CHECK_FAILURE_CODES[id] ?? "PLANNING_BLOCK",
  }));
  const unchecked = checklist.filter((entry) => !entry.checked);
  const gated = currentIndex >= 0 && currentIndex < 4;
  const recordable = !project.stopped && project.current_stage !== "design";
  const proceedEnabled = recordable && (gated ? unchecked.length === 0 : true);
  return {
    open: true,
    frozen: project.stopped,
    notice: state.gateNotice,
    stages,
    checklist,
    proceedEnabled,
    stopOffered: recordable && gated && unchecked.length > 0,
    stopCodes: [...new Set(unchecked.map((entry) => entry.failureCode))],
    candidates: [...project.candidate_use_ids],
    history: project.history.map((record) => ({
      stage: record.stage,
      verdict: record.verdict,
      reasons: record.reasons.map(({ code, detail }) => ({ code, detail })),
    })),
  };
}
