/**
 * Typed client for the tracing service JSON API.
 *
 * Every number the console displays originates in one of these payloads;
 * the view layer never computes bits or counts of its own.
 */

export interface AttributeInfo {
  name: string;
  values: string[];
}

export interface DatasetRecord {
  dataset_id: string;
  name: string;
  digest: string;
  n_objects: number;
  n_attributes: number;
  created_at: string;
  attributes: AttributeInfo[];
}

export interface PathStep {
  attribute: string;
  value: string;
  entropy_after: number | null;
}

export interface SurvivorRow {
  object_id: string;
  values: Record<string, string | null>;
}

export interface SessionPayload {
  session_id: string;
  dataset_id: string;
  revision: number;
  status: string;
  candidate_count: number;
  entropy_bits: number | null;
  entropy_bits_hex: string | null;
  known: Record<string, string>;
  path: PathStep[];
  entropy_history: Array<number | null>;
  created_at: string;
  updated_at: string;
  identified_object?: string;
  survivors?: SurvivorRow[];
}

export interface RankingEntry {
  attribute: string;
  bits: number;
  bits_hex: string;
  whatif: Record<string, number>;
}

export interface RecommendationsPayload {
  session_id: string;
  revision: number;
  chosen: string;
  ranking: RankingEntry[];
}

export class ApiError extends Error {
  status: number;
  code: string;
  detail: Record<string, unknown>;

  constructor(status: number, code: string, message: string, detail?: Record<string, unknown>) {
    super(message);
    this.status = status;
    this.code = code;
    this.detail = detail ?? {};
  }
}

interface ErrorBody {
  error?: { code?: string; message?: string; detail?: Record<string, unknown> };
}

async function unwrap<T>(response: Response): Promise<T> {
  if (response.ok) {
    if (response.status === 204) return undefined as T;
    return (await response.json()) as T;
  }
  let body: ErrorBody = {};
  try {
    body = (await response.json()) as ErrorBody;
  } catch {
    // non-JSON error body; fall through to the generic message
  }
  const err = body.error ?? {};
  throw new ApiError(
    response.status,
    err.code ?? "http_error",
    err.message ?? `request failed with status ${response.status}`,
    err.detail,
  );
}

export class ApiClient {
  baseUrl: string;

  constructor(baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
  }

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async listDatasets(): Promise<DatasetRecord[]> {
    const body = await unwrap<{ datasets: DatasetRecord[] }>(await fetch(this.url("/v1/datasets")));
    return body.datasets;
  }

  async getDataset(datasetId: string): Promise<DatasetRecord> {
    return unwrap(await fetch(this.url(`/v1/datasets/${datasetId}`)));
  }

  async uploadDataset(csvBody: string, name: string): Promise<DatasetRecord> {
    return unwrap(
      await fetch(this.url(`/v1/datasets?name=${encodeURIComponent(name)}`), {
        method: "POST",
        headers: { "content-type": "text/csv" },
        body: csvBody,
      }),
    );
  }

  async createSession(datasetId: string, known: Record<string, string>): Promise<SessionPayload> {
    return unwrap(
      await fetch(this.url("/v1/sessions"), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ dataset_id: datasetId, known }),
      }),
    );
  }

  async getSession(sessionId: string): Promise<SessionPayload> {
    return unwrap(await fetch(this.url(`/v1/sessions/${sessionId}`)));
  }

  async deleteSession(sessionId: string): Promise<void> {
    await unwrap(await fetch(this.url(`/v1/sessions/${sessionId}`), { method: "DELETE" }));
  }

  async getRecommendations(sessionId: string, top: number): Promise<RecommendationsPayload> {
    return unwrap(
      await fetch(this.url(`/v1/sessions/${sessionId}/recommendations?top=${top}`)),
    );
  }

  async addObservation(
    sessionId: string,
    attribute: string,
    value: string,
    expectedRevision: number,
  ): Promise<SessionPayload> {
    return unwrap(
      await fetch(this.url(`/v1/sessions/${sessionId}/observations`), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ attribute, value, expected_revision: expectedRevision }),
      }),
    );
  }
}
