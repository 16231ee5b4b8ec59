/** Session driver shared by the browser shell and scripted tests.
 *
 * Serializes all mutations: a verdict is submitted, acknowledged, appended
 * to history, and only then is the next query fetched. A duplicate submit
 * (double click, or a retry whose first attempt actually landed) comes back
 * recorded=false and is folded into the same success path.
 */

import { ApiClient, ApiError } from "./api.js";
import type { CreateSessionOptions } from "./api.js";
import type { AppState, Event } from "./state.js";
import { canFinalize, canSubmit, initialState, update } from "./state.js";
import type { Scenario, Verdict } from "./types.js";

export type Listener = (state: AppState) => void;

export class Controller {
  private state: AppState = initialState();
  private readonly listeners: Listener[] = [];

  constructor(private readonly client: ApiClient) {}

  snapshot(): AppState {
    return this.state;
  }

  subscribe(fn: Listener): void {
    this.listeners.push(fn);
  }

  dispatch(ev: Event): void {
    this.state = update(this.state, ev);
    for (const fn of this.listeners) fn(this.state);
  }

  async start(opts: CreateSessionOptions): Promise<void> {
    const session = await this.client.createSession(opts);
    this.dispatch({ kind: "session_started", session });
    await this.fetchNext();
  }

  /** Rebuild the view for an existing session (page reload). */
  async restore(sessionId: string): Promise<void> {
    const payload = await this.client.state(sessionId);
    this.dispatch({ kind: "state_loaded", payload });
    if (this.state.phase === "between") await this.fetchNext();
  }

  async fetchNext(): Promise<void> {
    const sid = this.requireSession();
    try {
      const payload = await this.client.next(sid);
      if (payload.status === "complete") {
        this.dispatch({ kind: "run_complete", reason: payload.reason, finalized: payload.finalized });
      } else {
        const { status: _s, snippets_collapsed: _c, ...query } = payload;
        this.dispatch({ kind: "query_received", query });
      }
    } catch (err) {
      if (err instanceof ApiError && err.code === "pending_response") {
        await this.restore(sid);
        return;
      }
      this.dispatch({ kind: "request_failed", message: describe(err) });
    }
  }

  async submitVerdict(verdict: Verdict): Promise<void> {
    if (!canSubmit(this.state) || this.state.query === null) return;
    const sid = this.requireSession();
    const query = this.state.query;
    const confident = this.state.confident;
    this.dispatch({ kind: "submit_started" });
    try {
      await this.client.submit(sid, query.lf_id, verdict, confident);
      this.dispatch({
        kind: "verdict_recorded",
        entry: {
          lf_id: query.lf_id,
          response: verdict,
          weight: confident ? 1.0 : 0.5,
          iteration: query.iteration,
          description: query.description,
        },
      });
      await this.fetchNext();
    } catch (err) {
      this.dispatch({ kind: "request_failed", message: describe(err) });
    }
  }

  async finalize(scenario?: Scenario): Promise<void> {
    if (!canFinalize(this.state)) return;
    const sid = this.requireSession();
    this.dispatch({ kind: "submit_started" });
    try {
      const metrics = await this.client.finalize(sid, scenario ?? this.state.scenario);
      this.dispatch({ kind: "finalized", metrics });
    } catch (err) {
      this.dispatch({ kind: "request_failed", message: describe(err) });
    }
  }

  private requireSession(): string {
    if (this.state.session === null) throw new Error("no active session");
    return this.state.session.session_id;
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.code}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}
