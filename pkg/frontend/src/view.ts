/** DOM rendering: a full rebuild of the app container per state change.
 *
 * The query card keeps the heuristic description and intended label
 * prominent; the snippets sit behind a "show examples" control and are
 * collapsed on every new query. Nothing in any pre-finalize view carries a
 * quality measurement of the heuristic under review.
 */

import type { AppState } from "./state.js";
import type { Mode, Scenario, Verdict } from "./types.js";

export interface Actions {
  start(mode: Mode, T: number): void;
  submit(verdict: Verdict): void;
  toggleSnippets(): void;
  setConfident(confident: boolean): void;
  setScenario(scenario: Scenario): void;
  finalize(): void;
  dismissBanner(): void;
}

const SCENARIOS: Scenario[] = ["a", "ac", "as"];
const MODES: Mode[] = ["lse_a", "lse_ac", "active_search", "random"];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text !== undefined) node.textContent = text;
  return node;
}

function labelText(target: number): string {
  return target > 0 ? "labels +1" : "labels -1";
}

function renderSetup(root: HTMLElement, actions: Actions): void {
  const card = el("section", { class: "card setup" });
  card.appendChild(el("h1", {}, "Start an annotation session"));
  const modeSel = el("select", { id: "mode" });
  for (const m of MODES) modeSel.appendChild(el("option", { value: m }, m));
  const tInput = el("input", { id: "budget", type: "number", value: "50", min: "8" });
  const start = el("button", { id: "start" }, "start");
  start.addEventListener("click", () => {
    actions.start(modeSel.value as Mode, parseInt(tInput.value, 10));
  });
  const row = el("div", { class: "row" });
  row.append(modeSel, tInput, start);
  card.appendChild(row);
  root.appendChild(card);
}

function renderQuery(root: HTMLElement, state: AppState, actions: Actions): void {
  const q = state.query;
  if (q === null) return;
  const card = el("section", { class: "card query" });
  card.appendChild(el("h2", { class: "description" }, q.description));
  const meta =
    q.kind === "keyword" && q.keyword !== null
      ? `keyword "${q.keyword}" , ${labelText(q.target_label)}`
      : `cluster of ${q.cluster_size ?? "?"} items, ${labelText(q.target_label)}`;
  card.appendChild(el("p", { class: "meta" }, meta));

  const snippets = el("div", { class: "snippets" });
  const toggle = el("button", { id: "show-examples" }, state.snippetsOpen ? "hide examples" : "show examples");
  toggle.addEventListener("click", () => actions.toggleSnippets());
  snippets.appendChild(toggle);
  if (state.snippetsOpen) {
    const list = el("ul", { class: "snippet-list" });
    for (const s of q.snippets) list.appendChild(el("li", {}, s));
    snippets.appendChild(list);
  }
  card.appendChild(snippets);

  const verdicts = el("div", { class: "verdicts" });
  const buttons: Array<[Verdict, string]> = [
    ["useful", "useful [1]"],
    ["not_useful", "not useful [2]"],
    ["unsure", "I don't know [3]"],
  ];
  for (const [verdict, label] of buttons) {
    const b = el("button", { class: "verdict", "data-verdict": verdict }, label);
    if (state.inFlight) b.setAttribute("disabled", "");
    b.addEventListener("click", () => actions.submit(verdict));
    verdicts.appendChild(b);
  }
  card.appendChild(verdicts);

  const confRow = el("label", { class: "confidence" });
  const conf = el("input", { type: "checkbox", id: "confident" });
  conf.checked = state.confident;
  conf.addEventListener("change", () => actions.setConfident(conf.checked));
  confRow.append(conf, document.createTextNode(" confident (uncheck if leaning)"));
  card.appendChild(confRow);
  root.appendChild(card);
}

function renderHistory(root: HTMLElement, state: AppState): void {
  if (state.history.length === 0) return;
  const card = el("section", { class: "card history" });
  card.appendChild(el("h3", {}, `history (${state.history.length})`));
  const list = el("ol", { class: "history-list" });
  for (const h of state.history) {
    const item = el("li", { "data-lf": String(h.lf_id) });
    const verdictTxt = h.response === "unsure" ? "unsure" : h.response.replace("_", " ");
    item.textContent = `#${h.iteration} ${h.description} - ${verdictTxt}` + (h.weight < 1 ? " (leaning)" : "");
    list.appendChild(item);
  }
  card.appendChild(list);
  root.appendChild(card);
}

function renderFinalizeControls(root: HTMLElement, state: AppState, actions: Actions): void {
  const card = el("section", { class: "card finalize" });
  const sel = el("select", { id: "scenario" });
  for (const s of SCENARIOS) {
    const opt = el("option", { value: s }, s);
    if (s === state.scenario) opt.setAttribute("selected", "");
    sel.appendChild(opt);
  }
  sel.addEventListener("change", () => actions.setScenario(sel.value as Scenario));
  const btn = el("button", { id: "finalize" }, "finalize");
  const ready = state.history.length >= 8 && !state.inFlight && state.finalized === null;
  if (!ready) btn.setAttribute("disabled", "");
  btn.addEventListener("click", () => actions.finalize());
  const hint = el("span", { class: "hint" }, state.history.length >= 8 ? "" : "needs 8 responses");
  card.append(el("h3", {}, "final set scenario"), sel, btn, hint);
  root.appendChild(card);
}

function renderComplete(root: HTMLElement, state: AppState): void {
  const card = el("section", { class: "card complete" });
  card.appendChild(el("h2", {}, "session complete"));
  if (state.completeReason) card.appendChild(el("p", { class: "reason" }, state.completeReason));
  const m = state.finalized;
  if (m !== null) {
    const dl = el("dl", { class: "metrics" });
    const rows: Array<[string, string]> = [
      ["scenario", m.scenario],
      ["heuristics kept", String(m.n_selected)],
      ["label coverage", m.label_coverage.toFixed(3)],
      ["test AUC", m.auc === null ? "n/a" : m.auc.toFixed(4)],
    ];
    for (const [k, v] of rows) {
      dl.appendChild(el("dt", {}, k));
      dl.appendChild(el("dd", {}, v));
    }
    card.appendChild(dl);
  }
  root.appendChild(card);
}

export function render(root: HTMLElement, state: AppState, actions: Actions): void {
  root.textContent = "";

  if (state.banner !== null) {
    const banner = el("div", { class: "banner", role: "alert" }, state.banner + " ");
    const dismiss = el("button", { id: "dismiss" }, "dismiss");
    dismiss.addEventListener("click", () => actions.dismissBanner());
    banner.appendChild(dismiss);
    root.appendChild(banner);
  }
  for (const w of state.warnings) root.appendChild(el("div", { class: "warning" }, w));

  if (state.phase === "setup") {
    renderSetup(root, actions);
    return;
  }

  if (state.session !== null) {
    const shown = state.phase === "query" && state.query !== null ? state.query.iteration : state.session.iteration;
    root.appendChild(el("header", { class: "progress" }, `query ${shown} of ${state.session.T}`));
  }

  if (state.phase === "complete") {
    renderComplete(root, state);
    renderHistory(root, state);
    return;
  }
  if (state.phase === "loading" || state.phase === "between") {
    root.appendChild(el("p", { class: "loading" }, "loading..."));
  }
  renderQuery(root, state, actions);
  renderFinalizeControls(root, state, actions);
  renderHistory(root, state);
}

/** Keyboard shortcuts: 1/2/3 answer, c flips confidence; ignored while typing. */
export function keyHandler(actions: Actions, getState: () => AppState): (ev: KeyboardEvent) => void {
  const verdictKeys: Record<string, Verdict> = { "1": "useful", "2": "not_useful", "3": "unsure" };
  return (ev: KeyboardEvent) => {
    const target = ev.target as HTMLElement | null;
    if (target && (target.tagName === "INPUT" || target.tagName === "SELECT" || target.tagName === "TEXTAREA")) {
      return;
    }
    const state = getState();
    const verdict = verdictKeys[ev.key];
    if (verdict !== undefined && state.phase === "query" && !state.inFlight) {
      actions.submit(verdict);
    } else if (ev.key === "c" && state.phase === "query") {
      actions.setConfident(!state.confident);
    }
  };
}
