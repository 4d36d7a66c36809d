// Thin typed client over the session API.  The fetch implementation is
// injectable so tests can run against a scripted server.

import type {
  ProblemDocument,
  ProblemSummary,
  QueryPayload,
  SessionStatus,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`API error ${status}: ${detail}`);
  }
}

export class ConflictError extends ApiError {}

export class WorkbenchApi {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let resp: Response;
    try {
      resp = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new ApiError(0, `service unreachable (${String(err)})`);
    }
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = await resp.json();
        detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail ?? body);
      } catch {
        /* non-JSON error body */
      }
      if (resp.status === 409) throw new ConflictError(409, detail);
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  listProblems(): Promise<ProblemSummary[]> {
    return this.request("/problems");
  }

  getProblem(id: string): Promise<ProblemDocument> {
    return this.request(`/problems/${id}`);
  }

  createSession(body: {
    problem_id: string;
    strategy: string;
    threshold?: number;
    max_queries?: number;
    seed?: number;
  }): Promise<SessionStatus> {
    return this.request("/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  getStatus(sessionId: string): Promise<SessionStatus> {
    return this.request(`/sessions/${sessionId}`);
  }

  getQuery(sessionId: string): Promise<QueryPayload> {
    return this.request(`/sessions/${sessionId}/query`);
  }

  postAnswer(sessionId: string, queryId: string, answer: "yes" | "no"): Promise<SessionStatus> {
    return this.request(`/sessions/${sessionId}/answer`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ query_id: queryId, answer }),
    });
  }
}
