/** Wire types for the session API. */

export type Mode = "lse_a" | "lse_ac" | "active_search" | "random";
export type Verdict = "useful" | "not_useful" | "unsure";
export type Scenario = "a" | "ac" | "as";

export interface SessionRef {
  session_id: string;
  iteration: number;
  T: number;
}

export interface QueryPayload {
  status: "query";
  snippets_collapsed: boolean;
  lf_id: number;
  kind: string;
  target_label: number;
  keyword: string | null;
  cluster_size: number | null;
  description: string;
  snippets: string[];
  iteration: number;
  T: number;
}

export interface CompletePayload {
  status: "complete";
  iteration: number;
  T: number;
  reason?: string;
  finalized?: FinalizeMetrics;
}

export type NextPayload = QueryPayload | CompletePayload;

export interface ResponseAck {
  iteration: number;
  recorded: boolean;
}

export interface FinalizeMetrics {
  scenario: Scenario;
  iteration: number;
  n_selected: number;
  selected: number[];
  mean_lf_coverage: number;
  label_coverage: number;
  auc: number | null;
}

export interface HistoryEntry {
  lf_id: number;
  response: Verdict;
  weight: number;
  iteration: number;
  description: string;
}

export interface SessionStatePayload {
  session_id: string;
  status: "active" | "complete";
  iteration: number;
  T: number;
  mode: Mode;
  r: number;
  m_tilde: number;
  pending: number | null;
  pending_query: Omit<QueryPayload, "status" | "snippets_collapsed"> | null;
  history: HistoryEntry[];
  finalized: FinalizeMetrics | null;
  warnings: string[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
  field?: string;
}
