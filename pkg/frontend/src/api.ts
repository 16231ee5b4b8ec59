/** Typed client for the session API.
 *
 * Mutations retry once on network failure. The server keys responses on
 * (session, lf_id), so a retried submit that actually landed the first time
 * comes back as { recorded: false } and the client treats both shapes as
 * success. Exactly one mutation may be in flight at a time; callers get
 * that guarantee from the state layer, not from this module.
 */

import type {
  ApiErrorBody,
  FinalizeMetrics,
  Mode,
  NextPayload,
  ResponseAck,
  Scenario,
  SessionRef,
  SessionStatePayload,
  Verdict,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly field?: string;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.status = status;
    this.code = body.code;
    this.field = body.field;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface CreateSessionOptions {
  mode?: Mode;
  r?: number;
  m_tilde?: number;
  T?: number;
  seed?: number;
}

async function parseError(resp: Response): Promise<ApiError> {
  let body: ApiErrorBody;
  try {
    body = (await resp.json()) as ApiErrorBody;
  } catch {
    body = { code: "error", message: `HTTP ${resp.status}` };
  }
  return new ApiError(resp.status, body);
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl = "", fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(method: string, path: string, body?: unknown, retries = 0): Promise<T> {
    const init: RequestInit = { method, headers: { "content-type": "application/json" } };
    if (body !== undefined) init.body = JSON.stringify(body);
    let resp: Response;
    try {
      resp = await this.fetchImpl(this.base + path, init);
    } catch (err) {
      if (retries > 0) return this.request<T>(method, path, body, retries - 1);
      throw err;
    }
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as T;
  }

  createSession(opts: CreateSessionOptions = {}): Promise<SessionRef> {
    return this.request<SessionRef>("POST", "/sessions", opts);
  }

  next(sessionId: string): Promise<NextPayload> {
    return this.request<NextPayload>("GET", `/sessions/${sessionId}/next`);
  }

  /** Idempotent: a retry after a lost ack resolves to { recorded: false }. */
  submit(sessionId: string, lfId: number, response: Verdict, confident: boolean): Promise<ResponseAck> {
    return this.request<ResponseAck>(
      "POST",
      `/sessions/${sessionId}/responses`,
      { lf_id: lfId, response, confident },
      1,
    );
  }

  finalize(sessionId: string, scenario: Scenario): Promise<FinalizeMetrics> {
    return this.request<FinalizeMetrics>("POST", `/sessions/${sessionId}/finalize`, { scenario }, 1);
  }

  state(sessionId: string): Promise<SessionStatePayload> {
    return this.request<SessionStatePayload>("GET", `/sessions/${sessionId}/state`);
  }
}
