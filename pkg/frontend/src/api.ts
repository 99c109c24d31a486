/** Typed client for the harmon HTTP service.
 *
 * The console is served from /console on the same origin, so the default
 * base is the origin root. Every method either resolves with a parsed
 * payload or throws an ApiError carrying the service's JSON error body
 * (shape: {error, detail, ...extras}).
 */

export interface CandidateRow {
  candidate_label: string;
  lss: number;
  lss_normalized: number;
  lssd: number;
  recommended: boolean;
}

export interface Suggestion {
  source_label: string;
  recommended: string | null;
  candidates: CandidateRow[];
}

export interface SuggestionsPayload {
  dataset_id: string;
  k: number;
  suggestions: Suggestion[];
}

export interface MagnitudePayload {
  dataset_id: string;
  label: string;
  seed: number;
  trial_id: string;
  sample_rate_hz: number;
  magnitude: number[];
}

export interface MergeReport {
  dataset_id: string;
  merged_trials: number;
  rejected_trials: number;
  vocabulary_added: string[];
  per_label: Record<
    string,
    { target: string | null; merged: number; rejected: number }
  >;
}

export interface DatasetInfo {
  dataset_id: string;
  name: string;
  stage: string;
  source_labels: string[];
  trial_count: number;
}

export interface ErrorBody {
  error: string;
  detail: string;
  missing?: string[];
  problems?: string[];
  issues?: string[];
  [key: string]: unknown;
}

export class ApiError extends Error {
  readonly status: number;
  readonly body: ErrorBody;

  constructor(status: number, body: ErrorBody) {
    super(`${body.error}: ${body.detail}`);
    this.name = "ApiError";
    this.status = status;
    this.body = body;
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let body: ErrorBody;
  try {
    body = (await response.json()) as ErrorBody;
  } catch {
    body = { error: `HTTP${response.status}`, detail: response.statusText };
  }
  return new ApiError(response.status, body);
}

export class Api {
  constructor(private readonly base: string = "") {}

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(this.base + path);
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  private async post<T>(path: string, payload: unknown): Promise<T> {
    const response = await fetch(this.base + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  listDatasets(): Promise<{ datasets: DatasetInfo[] }> {
    return this.get("/datasets");
  }

  labels(): Promise<{ labels: string[] }> {
    return this.get("/labels");
  }

  suggestions(datasetId: string, k = 3): Promise<SuggestionsPayload> {
    const id = encodeURIComponent(datasetId);
    return this.get(`/datasets/${id}/mappings/suggestions?k=${k}`);
  }

  magnitude(
    datasetId: string,
    label: string,
    seed: number,
  ): Promise<MagnitudePayload> {
    const id = encodeURIComponent(datasetId);
    const lbl = encodeURIComponent(label);
    return this.get(`/datasets/${id}/labels/${lbl}/magnitude?seed=${seed}`);
  }

  applyMappings(datasetId: string, document: string): Promise<MergeReport> {
    const id = encodeURIComponent(datasetId);
    return this.post(`/datasets/${id}/mappings`, { document });
  }
}

/** Pseudo dataset id the service accepts for the canonical corpus side. */
export const MERGED_DATASET = "merged";
