// Wire types of the workbench session API.  The view layer derives every
// displayed number from these payloads; nothing is computed client-side.

export interface ProblemSummary {
  id: string;
  name: string;
  attributes?: number;
  factors?: number;
  mode?: string;
  error?: string;
}

export interface ProblemDocument {
  name: string;
  attributes: { name: string; levels: string[] }[];
  reference: string[];
}

export interface TracePoint {
  index: number;
  mmr: number;
}

export interface SessionStatus {
  session_id: string;
  problem: string;
  strategy: string;
  mmr: number;
  x_star: string[];
  witness: string[];
  query_count: number;
  done_reason: string | null;
  trace: TracePoint[];
}

export interface LotteryCard {
  p: number;
  top: string;
  bottom: string;
}

export interface RenderedQuery {
  kind: string;
  text: string;
  cards: {
    subject?: string;
    lottery?: LotteryCard;
    left?: string;
    right?: string;
  };
}

export interface ActiveQuery {
  query_id: string;
  machine: Record<string, unknown>;
  rendered: RenderedQuery;
}

export interface ExhaustedQuery {
  query: null;
  done_reason: string;
}

export type QueryPayload = ActiveQuery | ExhaustedQuery;

export function isActiveQuery(q: QueryPayload): q is ActiveQuery {
  return (q as ActiveQuery).query_id !== undefined;
}
