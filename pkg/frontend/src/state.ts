/** Pure client state machine.
 *
 * The state is a projection of server state plus in-flight request status:
 * every transition is a plain function of (state, event), so reloading the
 * page and replaying GET /state reconstructs the identical view. At most
 * one query is active, and snippets start collapsed on every new query.
 */

import type {
  FinalizeMetrics,
  HistoryEntry,
  QueryPayload,
  Scenario,
  SessionRef,
  SessionStatePayload,
} from "./types.js";

export type ActiveQuery = Omit<QueryPayload, "status" | "snippets_collapsed">;

export type Phase = "setup" | "loading" | "query" | "between" | "complete";

export interface AppState {
  phase: Phase;
  session: SessionRef | null;
  query: ActiveQuery | null;
  history: HistoryEntry[];
  scenario: Scenario;
  confident: boolean;
  snippetsOpen: boolean;
  inFlight: boolean;
  banner: string | null;
  finalized: FinalizeMetrics | null;
  completeReason: string | null;
  warnings: string[];
}

export type Event =
  | { kind: "session_started"; session: SessionRef }
  | { kind: "state_loaded"; payload: SessionStatePayload }
  | { kind: "query_received"; query: ActiveQuery }
  | { kind: "run_complete"; reason?: string; finalized?: FinalizeMetrics }
  | { kind: "submit_started" }
  | { kind: "verdict_recorded"; entry: HistoryEntry }
  | { kind: "request_failed"; message: string }
  | { kind: "finalized"; metrics: FinalizeMetrics }
  | { kind: "toggle_snippets" }
  | { kind: "set_confident"; confident: boolean }
  | { kind: "set_scenario"; scenario: Scenario }
  | { kind: "dismiss_banner" };

export function initialState(): AppState {
  return {
    phase: "setup",
    session: null,
    query: null,
    history: [],
    scenario: "a",
    confident: true,
    snippetsOpen: false,
    inFlight: false,
    banner: null,
    finalized: null,
    completeReason: null,
    warnings: [],
  };
}

export function canSubmit(state: AppState): boolean {
  return state.phase === "query" && state.query !== null && !state.inFlight;
}

export function canFinalize(state: AppState): boolean {
  return state.session !== null && state.history.length >= 8 && !state.inFlight && state.finalized === null;
}

export function update(state: AppState, ev: Event): AppState {
  switch (ev.kind) {
    case "session_started":
      return {
        ...initialState(),
        phase: "loading",
        session: ev.session,
        scenario: state.scenario,
      };
    case "state_loaded": {
      const p = ev.payload;
      const session = { session_id: p.session_id, iteration: p.iteration, T: p.T };
      const base: AppState = {
        ...initialState(),
        session,
        history: p.history,
        scenario: state.scenario,
        warnings: p.warnings,
        finalized: p.finalized,
      };
      if (p.finalized !== null || p.status === "complete") {
        return { ...base, phase: "complete" };
      }
      if (p.pending_query !== null) {
        return { ...base, phase: "query", query: p.pending_query };
      }
      return { ...base, phase: "between" };
    }
    case "query_received":
      return {
        ...state,
        phase: "query",
        query: ev.query,
        session: state.session
          ? { ...state.session, iteration: ev.query.iteration, T: ev.query.T }
          : state.session,
        snippetsOpen: false,
        confident: true,
        inFlight: false,
        banner: null,
      };
    case "run_complete":
      return {
        ...state,
        phase: "complete",
        query: null,
        inFlight: false,
        completeReason: ev.reason ?? null,
        finalized: ev.finalized ?? state.finalized,
      };
    case "submit_started":
      return { ...state, inFlight: true, banner: null };
    case "verdict_recorded": {
      const history = state.history.some((h) => h.lf_id === ev.entry.lf_id)
        ? state.history
        : [...state.history, ev.entry];
      return { ...state, phase: "between", query: null, history, inFlight: false };
    }
    case "request_failed":
      return { ...state, inFlight: false, banner: ev.message };
    case "finalized":
      return { ...state, phase: "complete", query: null, inFlight: false, finalized: ev.metrics };
    case "toggle_snippets":
      return { ...state, snippetsOpen: !state.snippetsOpen };
    case "set_confident":
      return { ...state, confident: ev.confident };
    case "set_scenario":
      return { ...state, scenario: ev.scenario };
    case "dismiss_banner":
      return { ...state, banner: null };
  }
}
