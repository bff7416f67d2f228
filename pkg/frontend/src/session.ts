/** Workbench session: the client-side mirror of one worksheet, the last
 * service responses, and the stage-gate view state.
 *
 * Single source of numerical truth: every derived number (risk, complexity,
 * attractiveness, ranks, fractions) is taken verbatim from the last service
 * response. When the service is unreachable the session keeps no derived
 * numbers at all and the views render an unavailable marker instead.
 */

import {
  GateConflictError,
  ServiceClient,
  ServiceUnavailableError,
  ServiceValidationError,
} from "./api.js";
import type {
  Indicator,
  ProfileDoc,
  ProjectDoc,
  ReportDoc,
  StabilityDoc,
  StageId,
  SweepSpecDoc,
  WorksheetDoc,
} from "./types.js";
import { STAGE_CHECKLISTS } from "./types.js";

export type CellKey = `${string}:${Indicator}`;

export interface SessionState {
  worksheet: WorksheetDoc | null;
  report: ReportDoc | null;
  reportStale: boolean;
  stability: StabilityDoc | null;
  serviceAvailable: boolean;
  evaluating: boolean;
  cellErrors: Map<CellKey, string>;
  presets: Record<string, ProfileDoc>;
  selectedPreset: string | null;
  project: ProjectDoc | null;
  pendingChecklist: Record<string, boolean>;
  gateNotice: string | null;
  lastError: string | null;
}

type Listener = (state: SessionState) => void;

const clamp = (value: number, lo: number, hi: number) => Math.min(hi, Math.max(lo, value));

export class WorkbenchSession {
  private state: SessionState = {
    worksheet: null,
    report: null,
    reportStale: false,
    stability: null,
    serviceAvailable: true,
    evaluating: false,
    cellErrors: new Map(),
    presets: {},
    selectedPreset: null,
    project: null,
    pendingChecklist: {},
    gateNotice: null,
    lastError: null,
  };

  private listeners: Listener[] = [];

  constructor(private readonly client: ServiceClient) {}

  // -- state plumbing ------------------------------------------------------

  snapshot(): SessionState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((entry) => entry !== listener);
    };
  }

  private patch(partial: Partial<SessionState>): void {
    this.state = { ...this.state, ...partial };
    for (const listener of this.listeners) listener(this.state);
  }

  // -- worksheet and matrix ------------------------------------------------

  async loadWorksheet(worksheet: WorksheetDoc): Promise<void> {
    this.patch({
      worksheet: structuredClone(worksheet),
      report: null,
      reportStale: false,
      stability: null,
      cellErrors: new Map(),
      selectedPreset: null,
      lastError: null,
    });
    await this.evaluate();
  }

  /** The session worksheet with live edits applied; re-importing this
   * document reproduces the identical grid. */
  exportWorksheet(): WorksheetDoc {
    if (!this.state.worksheet) throw new Error("no worksheet loaded");
    return structuredClone(this.state.worksheet);
  }

  async evaluate(): Promise<void> {
    const worksheet = this.state.worksheet;
    if (!worksheet) return;
    this.patch({ evaluating: true });
    try {
      const report = await this.client.evaluate(worksheet);
      this.patch({
        report,
        reportStale: false,
        serviceAvailable: true,
        evaluating: false,
        lastError: null,
      });
    } catch (error) {
      if (error instanceof ServiceUnavailableError) {
        // no service, no numbers: drop derived values rather than show stale ones
        this.patch({
          report: null,
          stability: null,
          serviceAvailable: false,
          evaluating: false,
          lastError: error.message,
        });
        return;
      }
      this.patch({
        reportStale: true,
        evaluating: false,
        lastError: error instanceof Error ? error.message : String(error),
      });
      throw error;
    }
  }

  /** Optimistic score edit: the cell updates immediately, the evaluation
   * round-trip refreshes every derived column, and a rejection pins the
   * diagnostic to the offending cell. */
  async editScore(useId: string, indicator: Indicator, value: number): Promise<void> {
    const worksheet = this.state.worksheet;
    if (!worksheet) throw new Error("no worksheet loaded");
    const pair = worksheet.pairs[useId];
    if (!pair?.elicited_scores || !(indicator in pair.elicited_scores)) {
      throw new Error(`use ${useId} has no editable ${indicator} score`);
    }
    pair.elicited_scores[indicator] = value;
    const key: CellKey = `${useId}:${indicator}`;
    const cellErrors = new Map(this.state.cellErrors);
    cellErrors.delete(key);
    this.patch({ worksheet, cellErrors });
    try {
      await this.evaluate();
    } catch (error) {
      if (error instanceof ServiceValidationError) {
        const next = new Map(this.state.cellErrors);
        next.set(key, error.errors.join("; "));
        this.patch({ cellErrors: next });
        return;
      }
      throw error;
    }
  }

  // -- weight console ------------------------------------------------------

  /** Top-level weights and the risk mix; values clamp to their range before
   * anything reaches the service, so the control cannot submit an invalid
   * state. */
  async setWeight(
    name: "w_value" | "w_risk" | "w_complexity" | "alpha" | "borderline_epsilon",
    value: number,
  ): Promise<void> {
    const worksheet = this.state.worksheet;
    if (!worksheet) throw new Error("no worksheet loaded");
    if (!Number.isFinite(value)) throw new Error(`${name} must be a finite number`);
    const lo = 0;
    const hi = name === "alpha" ? 1 : name === "borderline_epsilon" ? 2 : 1;
    worksheet.profile[name] = clamp(value, lo, hi);
    this.patch({ worksheet, selectedPreset: null });
    await this.evaluate();
  }

  /** Complexity-mix slider: moving one weight rebalances the other two
   * proportionally so the sum stays exactly one. */
  async setMixWeight(name: "beta" | "gamma" | "delta", value: number): Promise<void> {
    const worksheet = this.state.worksheet;
    if (!worksheet) throw new Error("no worksheet loaded");
    const target = clamp(value, 0, 1);
    const profile = worksheet.profile;
    const others: ("beta" | "gamma" | "delta")[] = (["beta", "gamma", "delta"] as const).filter(
      (entry) => entry !== name,
    );
    const rest = profile[others[0]] + profile[others[1]];
    const remaining = 1 - target;
    if (rest > 0) {
      profile[others[0]] = (profile[others[0]] / rest) * remaining;
    } else {
      profile[others[0]] = remaining / 2;
    }
    profile[others[1]] = remaining - profile[others[0]];
    profile[name] = target;
    this.patch({ worksheet, selectedPreset: null });
    await this.evaluate();
  }

  async loadPresets(): Promise<void> {
    const presets = await this.client.presets();
    this.patch({ presets, serviceAvailable: true });
  }

  async applyPreset(name: string): Promise<void> {
    const worksheet = this.state.worksheet;
    if (!worksheet) throw new Error("no worksheet loaded");
    if (!(name in this.state.presets)) await this.loadPresets();
    const preset = this.state.presets[name];
    if (!preset) throw new Error(`unknown preset ${name}`);
    worksheet.profile = structuredClone(preset);
    this.patch({ worksheet, selectedPreset: name });
    await this.evaluate();
  }

  async runSweep(spec?: SweepSpecDoc): Promise<void> {
    const worksheet = this.state.worksheet;
    if (!worksheet) throw new Error("no worksheet loaded");
    const sweep: SweepSpecDoc = spec ?? {
      axes: { w_risk: { start: 0.1, stop: 0.5, steps: 5 } },
    };
    try {
      const stability = await this.client.sensitivity(worksheet, sweep);
      this.patch({ stability, serviceAvailable: true, lastError: null });
    } catch (error) {
      if (error instanceof ServiceUnavailableError) {
        this.patch({ stability: null, serviceAvailable: false, lastError: error.message });
        return;
      }
      throw error;
    }
  }

  // -- stage gates ----------------------------------------------------------

  async openProject(id?: string): Promise<void> {
    const worksheet = this.state.worksheet;
    if (!worksheet) throw new Error("no worksheet loaded");
    const project = await this.client.openProject(worksheet, id);
    this.patch({ project, pendingChecklist: this.freshChecklist(project), gateNotice: null });
  }

  async reloadProject(): Promise<void> {
    const project = this.state.project;
    if (!project) return;
    const fresh = await this.client.getProject(project.id);
    this.patch({
      project: fresh,
      pendingChecklist: this.freshChecklist(fresh),
      gateNotice: null,
    });
  }

  private freshChecklist(project: ProjectDoc): Record<string, boolean> {
    const checks = STAGE_CHECKLISTS[project.current_stage as StageId] ?? [];
    return Object.fromEntries(checks.map((check) => [check, false]));
  }

  setCheck(check: string, value: boolean): void {
    if (!(check in this.state.pendingChecklist)) {
      throw new Error(`check ${check} does not belong to the current stage`);
    }
    this.patch({ pendingChecklist: { ...this.state.pendingChecklist, [check]: value } });
  }

  /** Post the pending gate record. Gates are commitments, so there is no
   * optimistic update: the project state shown always comes back from the
   * service. A conflict means someone else recorded first. */
  async submitGate(assumptions: string[] = []): Promise<void> {
    const project = this.state.project;
    if (!project) throw new Error("no project open");
    try {
      const updated = await this.client.appendGate(project.id, {
        stage: project.current_stage,
        checklist: { ...this.state.pendingChecklist },
        assumptions,
      });
      this.patch({
        project: updated,
        pendingChecklist: this.freshChecklist(updated),
        gateNotice: null,
      });
    } catch (error) {
      if (error instanceof GateConflictError) {
        this.patch({ gateNotice: "record superseded, reload" });
        return;
      }
      throw error;
    }
  }

  async attachEvaluationToProject(): Promise<void> {
    const project = this.state.project;
    const worksheet = this.state.worksheet;
    if (!project || !worksheet) throw new Error("project and worksheet required");
    try {
      const updated = await this.client.attachEvaluation(project.id, worksheet);
      this.patch({ project: updated, pendingChecklist: this.freshChecklist(updated) });
    } catch (error) {
      if (error instanceof GateConflictError) {
        this.patch({ gateNotice: "record superseded, reload" });
        return;
      }
      throw error;
    }
  }
}
