// DOM glue: problem picker, yes/no controls, and view mounting.

import { WorkbenchApi } from "./api.js";
import { SessionController, SessionView } from "./controller.js";
import {
  renderError,
  renderFinished,
  renderQuery,
  renderStatusPanel,
} from "./render.js";

const API_BASE = (window as any).REGRETKIT_API ?? "http://127.0.0.1:8000";

const api = new WorkbenchApi(API_BASE);
const controller = new SessionController(api, mount);

function el<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

function mount(view: SessionView) {
  const stage = el<HTMLDivElement>("stage");
  const sidebar = el<HTMLDivElement>("status");
  const notice = el<HTMLDivElement>("notice");
  notice.innerHTML = view.notice ? renderError(view.notice) : "";
  sidebar.innerHTML =
    view.problem && view.status ? renderStatusPanel(view.problem, view.status) : "";
  if (view.phase === "error") {
    stage.innerHTML = renderError(view.error ?? "unknown error");
    el<HTMLDivElement>("answer-controls").hidden = true;
    return;
  }
  if (view.phase === "finished") {
    stage.innerHTML = renderFinished(view.doneReason);
    el<HTMLDivElement>("answer-controls").hidden = true;
    return;
  }
  if (view.phase === "question" && view.query) {
    stage.innerHTML = renderQuery(view.query);
    el<HTMLDivElement>("answer-controls").hidden = false;
  }
}

async function loadProblems() {
  const select = el<HTMLSelectElement>("problem-select");
  try {
    const problems = await api.listProblems();
    select.innerHTML = problems
      .filter((p) => !p.error)
      .map((p) => `<option value="${p.id}">${p.name} (${p.attributes} attrs)</option>`)
      .join("");
  } catch (err) {
    el<HTMLDivElement>("stage").innerHTML = renderError(
      `Cannot reach the workbench service at ${API_BASE}: ${String(err)}`,
    );
  }
}

function wire() {
  el<HTMLButtonElement>("start-button").addEventListener("click", () => {
    const problem = el<HTMLSelectElement>("problem-select").value;
    const strategy = el<HTMLSelectElement>("strategy-select").value;
    const threshold = parseFloat(el<HTMLInputElement>("threshold-input").value || "0");
    const budget = parseInt(el<HTMLInputElement>("budget-input").value || "100", 10);
    void controller.start(problem, strategy, threshold, budget);
  });
  el<HTMLButtonElement>("yes-button").addEventListener("click", () => void controller.answer(true));
  el<HTMLButtonElement>("no-button").addEventListener("click", () => void controller.answer(false));
  document.addEventListener("keydown", (ev) => {
    if (controller.view.phase !== "question") return;
    if (ev.key === "y") void controller.answer(true);
    if (ev.key === "n") void controller.answer(false);
  });
  void loadProblems();
}

wire();
