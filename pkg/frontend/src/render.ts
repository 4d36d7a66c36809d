// Pure HTML-string renderers; main.ts only mounts their output.  Keeping them
// DOM-free makes every visual path assertable in unit tests.

import type { ActiveQuery, ProblemDocument, SessionStatus, TracePoint } from "./types.js";

function esc(s: unknown): string {
  return String(s)
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function outcomeCard(title: string, body: string): string {
  return `<div class="card outcome-card"><h4>${esc(title)}</h4><p>${esc(body)}</p></div>`;
}

function lotteryCard(p: number, top: string, bottom: string): string {
  // anchor thresholds live on the raw utility scale and may fall outside
  // [0,1]; only a genuine probability gets the complementary line
  const isProbability = p >= 0 && p <= 1;
  const pct = Math.max(0, Math.min(100, p * 100)).toFixed(1);
  const complement = isProbability
    ? `<p><span class="p-label">${esc((1 - p).toFixed(4))}</span> &rarr; ${esc(bottom)}</p>`
    : `<p><span class="p-label">otherwise</span> &rarr; ${esc(bottom)}</p>`;
  return `
    <div class="card lottery-card">
      <h4>Lottery</h4>
      <div class="lottery-bar" role="img" aria-label="threshold ${esc(p.toFixed(4))}">
        <div class="lottery-top" style="width:${pct}%"></div>
      </div>
      <p><span class="p-label">${esc(p.toFixed(4))}</span> &rarr; ${esc(top)}</p>
      ${complement}
    </div>`;
}

export function renderQuery(query: ActiveQuery): string {
  const { kind, text, cards } = query.rendered;
  let body: string;
  switch (kind) {
    case "LB":
      body =
        outcomeCard("Partial outcome", cards.subject ?? "") +
        lotteryCard(cards.lottery!.p, cards.lottery!.top, cards.lottery!.bottom);
      break;
    case "AB":
      body =
        outcomeCard("Full outcome", cards.subject ?? "") +
        lotteryCard(cards.lottery!.p, cards.lottery!.top, cards.lottery!.bottom);
      break;
    case "LC":
      body =
        outcomeCard("Option A", cards.left ?? "") + outcomeCard("Option B", cards.right ?? "");
      break;
    case "AC":
      body =
        outcomeCard("Outcome A (factor at best)", cards.left ?? "") +
        outcomeCard("Outcome B (factor at worst)", cards.right ?? "");
      break;
    default:
      // unknown variant: raw fallback so the session can still proceed
      body = `<pre class="card raw-query">${esc(JSON.stringify(query.machine, null, 2))}</pre>`;
  }
  return `
    <div class="query" data-kind="${esc(kind)}">
      <span class="badge badge-${esc(kind)}">${esc(kind)}</span>
      <p class="question-text">${esc(text)}</p>
      <div class="cards">${body}</div>
    </div>`;
}

export function renderGauge(status: SessionStatus): string {
  const initial = status.trace.length ? status.trace[0].mmr : status.mmr;
  const frac = initial > 0 ? Math.max(0, Math.min(1, status.mmr / initial)) : 0;
  return `
    <div class="gauge">
      <div class="gauge-label">max regret <strong class="mmr-value">${esc(status.mmr)}</strong></div>
      <div class="gauge-bar"><div class="gauge-fill" style="width:${(frac * 100).toFixed(1)}%"></div></div>
      <div class="gauge-sub">${esc(status.query_count)} queries answered</div>
    </div>`;
}

export function renderCurve(trace: TracePoint[], width = 420, height = 120): string {
  if (trace.length === 0) return `<svg class="curve" width="${width}" height="${height}"></svg>`;
  const maxY = Math.max(...trace.map((t) => t.mmr), 1e-12);
  const maxX = Math.max(trace[trace.length - 1].index, 1);
  const pts = trace
    .map((t) => {
      const x = (t.index / maxX) * (width - 10) + 5;
      const y = height - 5 - (t.mmr / maxY) * (height - 10);
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");
  return `
    <svg class="curve" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">
      <polyline fill="none" stroke="currentColor" stroke-width="2" points="${pts}" />
    </svg>`;
}

export function renderOutcomeTable(
  problem: ProblemDocument,
  levels: string[],
  title: string,
): string {
  const rows = problem.attributes
    .map((attr, i) => `<tr><td>${esc(attr.name)}</td><td>${esc(levels[i] ?? "?")}</td></tr>`)
    .join("");
  return `
    <div class="outcome-table">
      <h4>${esc(title)}</h4>
      <table><tbody>${rows}</tbody></table>
    </div>`;
}

export function renderStatusPanel(problem: ProblemDocument, status: SessionStatus): string {
  return `
    <div class="status-panel">
      ${renderGauge(status)}
      ${renderCurve(status.trace)}
      <div class="recommendation">
        ${renderOutcomeTable(problem, status.x_star, "Current recommendation")}
        ${renderOutcomeTable(problem, status.witness, "Adversary witness")}
      </div>
    </div>`;
}

export function renderFinished(reason: string | null): string {
  const label =
    reason === "threshold"
      ? "Regret target reached."
      : reason === "max-queries"
        ? "Query budget exhausted."
        : "No informative questions remain.";
  return `<div class="finished"><h3>Session complete</h3><p>${esc(label)}</p></div>`;
}

export function renderError(message: string): string {
  return `<div class="error-banner">${esc(message)}</div>`;
}
