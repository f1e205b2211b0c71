/**
 * DTOs mirroring the backend HTTP API (see docs/http-api.md in the
 * repository root). The UI never derives state beyond these shapes.
 */

export type ContractStatus = "proposed" | "approved" | "rejected" | "revised";

export type ClauseKind = "precondition" | "postcondition" | "invariant";

export interface Task {
  task_id: string;
  title: string;
  description?: string;
  unit_kind: string;
  order_index: number;
  intent_id: string;
}

export interface ContractView {
  contract_id: string;
  clause_id: string;
  task_id: string;
  task_title: string;
  kind: ClauseKind;
  element: string;
  normalized_text: string;
  source_text: string;
  status: ContractStatus;
  provenance: string;
  revision_of: string | null;
  review_note: string | null;
}

export interface LineageLink {
  from: [string, string];
  to: [string, string];
  edge_kind: string;
}

export interface Lineage {
  nodes: Record<string, Record<string, Record<string, unknown>>>;
  links: LineageLink[];
}

export interface VerdictOutcome {
  clause_id: string;
  outcome: "holds" | "violated" | "indeterminate";
  reason: string | null;
}

export interface Verdict {
  case_id: string;
  classification: string;
  expectation: string;
  args: Record<string, unknown>;
  outcomes: VerdictOutcome[];
}

export interface ViolationReport {
  report_id: string;
  task_id: string;
  plan_id: string;
  summary: Record<string, number>;
  n_cases: number;
  n_passed: number;
  incomplete: boolean;
  witness_limit: number;
  verdicts: Verdict[];
}

export interface PhaseEntry {
  phase: string;
  started: number;
  finished: number | null;
  outcome: string | null;
}

export interface RunStatus {
  run_id: string;
  phases: PhaseEntry[];
  terminal_status: string | null;
}

export interface PipelineRequest {
  intent: string;
  auto_approve?: boolean;
  max_repair_iterations?: number;
  n_valid?: number;
  n_violating_per_clause?: number;
  seed?: number;
}
