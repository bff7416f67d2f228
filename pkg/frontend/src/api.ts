/** HTTP client for the screening service. All derived numbers shown in the
 * workbench come through this client; nothing is recomputed locally. */

import type {
  ProfileDoc,
  ProjectDoc,
  ReportDoc,
  StabilityDoc,
  SweepSpecDoc,
  WorksheetDoc,
} from "./types.js";

export class ServiceValidationError extends Error {
  readonly errors: string[];

  constructor(errors: string[]) {
    super(errors.join("; "));
    this.errors = errors;
  }
}

export class GateConflictError extends Error {
  readonly errors: string[];

  constructor(errors: string[]) {
    super(errors.join("; "));
    this.errors = errors;
  }
}

/** Network failure or non-JSON response: the service is unreachable. */
export class ServiceUnavailableError extends Error {}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url, init);
  } catch (cause) {
    throw new ServiceUnavailableError(`service unreachable: ${String(cause)}`);
  }
  let body: unknown;
  try {
    body = await response.json();
  } catch {
    throw new ServiceUnavailableError(`malformed response from ${url}`);
  }
  if (!response.ok) {
    const errors =
      typeof body === "object" && body !== null && Array.isArray((body as any).errors)
        ? ((body as any).errors as string[])
        : [`HTTP ${response.status}`];
    if (response.status === 409) {
      throw new GateConflictError(errors);
    }
    throw new ServiceValidationError(errors);
  }
  return body as T;
}

export interface EvaluateOptions {
  profilePreset?: string;
  epsilon?: number;
}

export class ServiceClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, "")}${path}`;
  }

  async evaluate(worksheet: WorksheetDoc, options: EvaluateOptions = {}): Promise<ReportDoc> {
    const query = new URLSearchParams();
    if (options.profilePreset) query.set("profile", options.profilePreset);
    if (options.epsilon !== undefined) query.set("epsilon", String(options.epsilon));
    const suffix = query.size > 0 ? `?${query.toString()}` : "";
    return request<ReportDoc>(this.url(`/evaluate${suffix}`), {
      method: "POST",
      body: JSON.stringify(worksheet),
    });
  }

  async sensitivity(worksheet: WorksheetDoc, sweep: SweepSpecDoc): Promise<StabilityDoc> {
    return request<StabilityDoc>(this.url("/sensitivity"), {
      method: "POST",
      body: JSON.stringify({ worksheet, sweep }),
    });
  }

  async presets(): Promise<Record<string, ProfileDoc>> {
    return request(this.url("/presets"));
  }

  async openProject(worksheet: WorksheetDoc, id?: string): Promise<ProjectDoc> {
    return request<ProjectDoc>(this.url("/projects"), {
      method: "POST",
      body: JSON.stringify(id ? { worksheet, id } : { worksheet }),
    });
  }

  async getProject(id: string): Promise<ProjectDoc> {
    return request<ProjectDoc>(this.url(`/projects/${id}`));
  }

  async appendGate(
    id: string,
    body: {
      stage: string;
      checklist: Record<string, boolean>;
      reasons?: { code: string; detail: string }[];
      assumptions?: string[];
      timestamp?: number;
    },
  ): Promise<ProjectDoc> {
    return request<ProjectDoc>(this.url(`/projects/${id}/gates`), {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  async attachEvaluation(id: string, worksheet: WorksheetDoc): Promise<ProjectDoc> {
    return request<ProjectDoc>(this.url(`/projects/${id}/evaluation`), {
      method: "POST",
      body: JSON.stringify(worksheet),
    });
  }
}
