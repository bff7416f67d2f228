/** Document shapes exchanged with the screening service. */

export const INDICATORS = [
  "npv",
  "market_risk",
  "operational_risk",
  "technical_complexity",
  "managerial_complexity",
  "time_to_income",
] as const;

export type Indicator = (typeof INDICATORS)[number];

export const INDICATOR_LABELS: Record<Indicator, string> = {
  npv: "NPV",
  market_risk: "market risk",
  operational_risk: "operational risk",
  technical_complexity: "technical complexity",
  managerial_complexity: "managerial complexity",
  time_to_income: "time to income",
};

export type Classification = "pass" | "borderline" | "exclude";

export interface ProfileDoc {
  label: string;
  alpha: number;
  beta: number;
  gamma: number;
  delta: number;
  w_value: number;
  w_risk: number;
  w_complexity: number;
  borderline_epsilon: number;
  horizon_months: number | null;
  operator_available: boolean;
  capital_constrained: boolean;
  op_risk_threshold: number;
  tech_threshold: number;
}

export interface UseDoc {
  id: string;
  label: string;
  format_class?: string | null;
}

export interface WorksheetDoc {
  format_version: number;
  kind: "worksheet";
  asset: {
    id: string;
    name: string;
    gla_sqm: number;
    context_class: string;
    notes?: string;
  };
  uses: UseDoc[];
  pairs: Record<string, PairDoc>;
  profile: ProfileDoc;
  reference_rows?: Record<string, Record<string, number>>;
  notes?: string;
}

export interface PairDoc {
  elicited_scores?: Partial<Record<Indicator, number>>;
  raw_indicators?: Record<string, number>;
  cash_flows?: unknown;
  time_to_income?: unknown;
}

export interface ReasonDoc {
  code: string;
  detail: string;
}

export interface ResultDoc {
  use_id: string;
  label: string;
  rank: number;
  overall_risk: number;
  overall_complexity: number;
  attractiveness: number;
  classification: Classification;
  exclusion_reasons: ReasonDoc[];
  rules_not_evaluated: string[];
}

export interface ReportDoc {
  format_version: number;
  kind: "evaluation_report";
  worksheet: WorksheetDoc;
  scores: Record<string, Record<string, number | Record<string, string>>>;
  results: ResultDoc[];
  traces: Record<string, Record<string, number>>;
  stress: Record<string, unknown | null>;
  screening: { shortlist: string[]; excluded: string[]; stop_signal: boolean };
  reference_comparison?: {
    cells: {
      use_id: string;
      column: string;
      reference: number;
      recomputed: number;
      mismatch: boolean;
    }[];
    mismatch_count: number;
  };
}

export interface StabilityDoc {
  kind: "stability_report";
  evaluated_points: number;
  skipped_points: number;
  baseline_ranking: string[];
  counts: Record<string, Record<Classification, number>>;
  fractions: Record<string, Record<Classification, number>>;
  flips: string[];
  rank_reversals: Record<string, number>;
}

export interface GateRecordDoc {
  stage: string;
  verdict: "proceed" | "stop";
  reasons: ReasonDoc[];
  checklist: Record<string, boolean>;
  timestamp: number;
  assumptions: string[];
}

export interface ProjectDoc {
  kind: "project";
  id: string;
  asset: WorksheetDoc["asset"];
  uses: UseDoc[];
  candidate_use_ids: string[];
  current_stage: string;
  stopped: boolean;
  history: GateRecordDoc[];
  evaluation: {
    use_id: string;
    rank: number;
    attractiveness: number;
    classification: Classification;
    exclusion_reasons: ReasonDoc[];
  }[];
}

export interface SweepSpecDoc {
  axes: Record<string, { start: number; stop: number; steps: number }>;
  profile_overrides?: Partial<ProfileDoc>;
}

/** Ordered stage ids with their gate checklists (service vocabulary). */
export const STAGES = [
  "asset-qualification",
  "use-selection",
  "demand-validation",
  "planning-pre-feasibility",
  "economic-model",
  "design",
] as const;

export type StageId = (typeof STAGES)[number];

export const STAGE_CHECKLISTS: Record<StageId, readonly string[]> = {
  "asset-qualification": [
    "legal-status-clear",
    "planning-constraints-surveyed",
    "scale-and-access-adequate",
    "no-binding-technical-limits",
  ],
  "use-selection": [
    "scale-context-compatibility",
    "solvent-demand-evidence",
    "operational-capability-match",
    "time-to-income-within-horizon",
    "operating-model-specified",
  ],
  "demand-validation": [
    "local-benchmarks-collected",
    "absorption-patterns-reviewed",
    "operator-consultation-done",
    "solvent-demand-confirmed",
  ],
  "planning-pre-feasibility": [
    "change-of-use-feasible",
    "compliance-requirements-assessed",
    "system-capacity-adequate",
    "adaptation-costs-bounded",
  ],
  "economic-model": [],
  design: [],
};

/** Stop code a failed checklist item maps to (display vocabulary only;
 * the service derives the authoritative verdict). */
export const CHECK_FAILURE_CODES: Record<string, string> = {
  "legal-status-clear": "PLANNING_BLOCK",
  "planning-constraints-surveyed": "PLANNING_BLOCK",
  "scale-and-access-adequate": "PLANNING_BLOCK",
  "no-binding-technical-limits": "PLANNING_BLOCK",
  "scale-context-compatibility": "PLANNING_BLOCK",
  "solvent-demand-evidence": "DEMAND_VALIDATION_FAIL",
  "operational-capability-match": "OPERATOR_GAP",
  "time-to-income-within-horizon": "HORIZON_MISMATCH",
  "operating-model-specified": "OPERATOR_GAP",
  "local-benchmarks-collected": "DEMAND_VALIDATION_FAIL",
  "absorption-patterns-reviewed": "DEMAND_VALIDATION_FAIL",
  "operator-consultation-done": "DEMAND_VALIDATION_FAIL",
  "solvent-demand-confirmed": "DEMAND_VALIDATION_FAIL",
  "change-of-use-feasible": "PLANNING_BLOCK",
  "compliance-requirements-assessed": "PLANNING_BLOCK",
  "system-capacity-adequate": "PLANNING_BLOCK",
  "adaptation-costs-bounded": "CAPITAL_COMPLEXITY_MISMATCH",
};
