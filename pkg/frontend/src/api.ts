/** Thin typed client for the matchbench HTTP API. Every durable change goes
 * through here; the UI never mutates matching state locally. */

import type {
  BreakdownReport,
  CandidatePage,
  ConsensusReport,
  DecisionResult,
  ExplanationDict,
  ImportReport,
  JobStatus,
  MatcherDict,
  MatcherListing,
  MetricsReport,
  OntologyDict,
  ProfileResponse,
  ProvenanceEventDict,
  ValueMapResponse,
  ValueMappingDict,
  WeightsDict,
} from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }

  get detail(): string {
    return this.message;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface CandidateQuery {
  cutoff?: number;
  group?: string;
  source?: string;
}

export interface DecisionRequest {
  source: string;
  target: string;
  action: string; // accept | reject | flag | note
  note?: string;
  actor?: string;
}

export interface MatcherRegistration {
  id: string;
  kind?: string;
  command?: string[];
  code?: string;
  top_k?: number;
  actor?: string;
}

function query(params: Record<string, string | number | undefined>): string {
  const search = new URLSearchParams();
  for (const [key, value] of Object.entries(params)) {
    if (value !== undefined) {
      search.set(key, String(value));
    }
  }
  const text = search.toString();
  return text ? `?${text}` : "";
}

export class MatchbenchClient {
  private readonly fetchImpl: FetchLike;

  constructor(readonly baseUrl: string, fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = `${response.status} ${response.statusText}`;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body && typeof body.detail === "string") {
          detail = body.detail;
        }
      } catch {
        // non-JSON error body; keep the status line
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  createSession(id?: string, config?: Record<string, number>): Promise<{ id: string; created: string }> {
    const body: Record<string, unknown> = {};
    if (id !== undefined) body.id = id;
    if (config !== undefined) body.config = config;
    return this.post("/sessions", body);
  }

  listSessions(): Promise<{ sessions: string[] }> {
    return this.request("/sessions");
  }

  startTask(
    sessionId: string,
    source: { name: string; data: string | Blob },
    target: { name: string; data: string | Blob },
    matchers?: MatcherRegistration[],
  ): Promise<JobStatus> {
    const form = new FormData();
    form.append("source", source.data instanceof Blob ? source.data : new Blob([source.data]), source.name);
    form.append("target", target.data instanceof Blob ? target.data : new Blob([target.data]), target.name);
    if (matchers !== undefined) {
      form.append("matchers", JSON.stringify(matchers));
    }
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/task`, {
      method: "POST",
      body: form,
    });
  }

  status(sessionId: string): Promise<JobStatus> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/status`);
  }

  candidates(sessionId: string, params: CandidateQuery = {}): Promise<CandidatePage> {
    return this.request(
      `/sessions/${encodeURIComponent(sessionId)}/candidates` +
        query({ cutoff: params.cutoff, group: params.group, source: params.source }),
    );
  }

  decide(sessionId: string, decision: DecisionRequest): Promise<DecisionResult> {
    return this.post(`/sessions/${encodeURIComponent(sessionId)}/decisions`, decision);
  }

  profile(sessionId: string, attr: string, side: "source" | "target"): Promise<ProfileResponse> {
    return this.request(
      `/sessions/${encodeURIComponent(sessionId)}/profiles/${encodeURIComponent(attr)}` + query({ side }),
    );
  }

  ontology(sessionId: string, side: "source" | "target"): Promise<OntologyDict> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/ontology` + query({ side }));
  }

  valueMap(sessionId: string, src: string, tgt: string): Promise<ValueMapResponse> {
    return this.request(
      `/sessions/${encodeURIComponent(sessionId)}/value-map/${encodeURIComponent(src)}/${encodeURIComponent(tgt)}`,
    );
  }

  putValueMap(
    sessionId: string,
    src: string,
    tgt: string,
    mapping: Partial<ValueMappingDict> & { actor?: string },
  ): Promise<ValueMapResponse> {
    return this.request(
      `/sessions/${encodeURIComponent(sessionId)}/value-map/${encodeURIComponent(src)}/${encodeURIComponent(tgt)}`,
      {
        method: "PUT",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(mapping),
      },
    );
  }

  matchers(sessionId: string): Promise<MatcherListing> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/matchers`);
  }

  registerMatcher(
    sessionId: string,
    registration: MatcherRegistration,
  ): Promise<{ matcher: MatcherDict; weights: WeightsDict }> {
    return this.post(`/sessions/${encodeURIComponent(sessionId)}/matchers`, registration);
  }

  removeMatcher(sessionId: string, matcherId: string): Promise<MatcherListing> {
    return this.request(
      `/sessions/${encodeURIComponent(sessionId)}/matchers/${encodeURIComponent(matcherId)}`,
      { method: "DELETE" },
    );
  }

  metrics(sessionId: string, k?: number): Promise<MetricsReport> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/metrics` + query({ k }));
  }

  consensus(sessionId: string, k?: number): Promise<ConsensusReport> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/consensus` + query({ k }));
  }

  breakdown(sessionId: string): Promise<BreakdownReport> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/breakdown`);
  }

  provenance(sessionId: string): Promise<{ events: ProvenanceEventDict[] }> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/provenance`);
  }

  explain(sessionId: string, source: string, target: string, narrative = false): Promise<ExplanationDict> {
    return this.post(`/sessions/${encodeURIComponent(sessionId)}/explain`, { source, target, narrative });
  }

  exportUrl(sessionId: string, kind: string): string {
    return `${this.baseUrl}/sessions/${encodeURIComponent(sessionId)}/export/${encodeURIComponent(kind)}`;
  }

  async exportArtifact(sessionId: string, kind: string): Promise<string> {
    const response = await this.fetchImpl(this.exportUrl(sessionId, kind));
    if (!response.ok) {
      let detail = `${response.status} ${response.statusText}`;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // keep status line
      }
      throw new ApiError(response.status, detail);
    }
    return response.text();
  }

  importArtifact(sessionId: string, kind: string, data: string | Blob, filename = "import"): Promise<ImportReport> {
    const form = new FormData();
    form.append("file", data instanceof Blob ? data : new Blob([data]), filename);
    form.append("kind", kind);
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/import`, {
      method: "POST",
      body: form,
    });
  }
}
