// Session view-state machine.  Every displayed value is copied verbatim from
// an API response; a stale-answer conflict refetches the current query and
// re-prompts instead of failing the session.

import { ApiError, ConflictError, WorkbenchApi } from "./api.js";
import type { ActiveQuery, ProblemDocument, QueryPayload, SessionStatus } from "./types.js";
import { isActiveQuery } from "./types.js";

export interface SessionView {
  phase: "idle" | "question" | "finished" | "error";
  sessionId: string | null;
  strategyLabel: string;
  problem: ProblemDocument | null;
  status: SessionStatus | null;
  query: ActiveQuery | null;
  doneReason: string | null;
  notice: string | null;
  error: string | null;
}

export function emptyView(): SessionView {
  return {
    phase: "idle",
    sessionId: null,
    strategyLabel: "",
    problem: null,
    status: null,
    query: null,
    doneReason: null,
    notice: null,
    error: null,
  };
}

export class SessionController {
  view: SessionView = emptyView();

  constructor(
    private api: WorkbenchApi,
    private onChange: (view: SessionView) => void = () => {},
  ) {}

  private emit() {
    this.onChange(this.view);
  }

  async start(
    problemId: string,
    strategy: string,
    threshold: number,
    maxQueries: number,
    seed = 0,
  ): Promise<SessionView> {
    try {
      const problem = await this.api.getProblem(problemId);
      const status = await this.api.createSession({
        problem_id: problemId,
        strategy,
        threshold,
        max_queries: maxQueries,
        seed,
      });
      this.view = {
        ...emptyView(),
        sessionId: status.session_id,
        strategyLabel: strategy,
        problem,
        status,
      };
      await this.refreshQuery();
    } catch (err) {
      this.view = {
        ...emptyView(),
        phase: "error",
        error: err instanceof ApiError ? err.detail : String(err),
      };
      this.emit();
    }
    return this.view;
  }

  private applyQueryPayload(payload: QueryPayload) {
    if (isActiveQuery(payload)) {
      this.view.phase = "question";
      this.view.query = payload;
      this.view.doneReason = null;
    } else {
      this.view.phase = "finished";
      this.view.query = null;
      this.view.doneReason = payload.done_reason;
    }
  }

  async refreshQuery(): Promise<SessionView> {
    if (!this.view.sessionId) return this.view;
    this.applyQueryPayload(await this.api.getQuery(this.view.sessionId));
    this.emit();
    return this.view;
  }

  async answer(yes: boolean): Promise<SessionView> {
    const { sessionId, query } = this.view;
    if (!sessionId || !query) return this.view;
    try {
      const status = await this.api.postAnswer(sessionId, query.query_id, yes ? "yes" : "no");
      this.view.status = status;
      this.view.notice = null;
      await this.refreshQuery();
    } catch (err) {
      if (err instanceof ConflictError) {
        // someone answered this query already: fetch the live one and re-ask
        this.view.notice = "The question changed; please answer the current one.";
        this.view.status = await this.api.getStatus(sessionId);
        await this.refreshQuery();
      } else {
        this.view.phase = "error";
        this.view.error = err instanceof ApiError ? err.detail : String(err);
        this.emit();
      }
    }
    return this.view;
  }
}
