/**
 * In-memory stand-in for the backend, faithful to the documented status
 * codes: 409 on re-review, 422 on parse failure, 404 on unknown ids.
 */

import { ApiError, ServiceUnreachableError } from "../src/client.js";
import type { ApiClientLike } from "../src/client.js";
import type {
  ContractStatus,
  ContractView,
  Lineage,
  PipelineRequest,
  RunStatus,
  Task,
  ViolationReport,
} from "../src/types.js";

let nextId = 0;

export function makeContract(overrides: Partial<ContractView> = {}): ContractView {
  nextId += 1;
  return {
    contract_id: `ct-${String(nextId).padStart(4, "0")}`,
    clause_id: `cl-${String(nextId).padStart(4, "0")}`,
    task_id: "tk-0001",
    task_title: "Account constructor",
    kind: "precondition",
    element: "pin",
    normalized_text: "0 <= pin && pin <= 9999",
    source_text: "0 <= pin && pin <= 9999",
    status: "proposed",
    provenance: "llm_generated",
    revision_of: null,
    review_note: null,
    ...overrides,
  };
}

export class FakeClient implements ApiClientLike {
  contracts = new Map<string, ContractView>();
  tasks: Task[] = [];
  reports = new Map<string, ViolationReport>();
  runs = new Map<string, RunStatus>();
  lineages = new Map<string, Lineage>();
  unreachable = false;
  /** normalized_text by input, or null meaning "does not parse" */
  validations = new Map<string, string | null>();
  calls: string[] = [];

  private guard(): void {
    if (this.unreachable) {
      throw new ServiceUnreachableError(new TypeError("fetch failed"));
    }
  }

  seed(...contracts: ContractView[]): void {
    for (const contract of contracts) {
      this.contracts.set(contract.contract_id, contract);
    }
  }

  async listTasks(): Promise<Task[]> {
    this.guard();
    this.calls.push("listTasks");
    return [...this.tasks];
  }

  async listContracts(filter?: {
    status?: ContractStatus;
    taskId?: string;
  }): Promise<ContractView[]> {
    this.guard();
    this.calls.push(`listContracts:${filter?.status ?? "all"}`);
    return [...this.contracts.values()].filter(
      (c) =>
        (!filter?.status || c.status === filter.status) &&
        (!filter?.taskId || c.task_id === filter.taskId),
    );
  }

  async lineage(kind: string, nodeId: string): Promise<Lineage> {
    this.guard();
    const found = this.lineages.get(`${kind}/${nodeId}`);
    if (!found) throw new ApiError(404, `no ${kind} node with id ${nodeId}`);
    return found;
  }

  async latestReport(taskId: string): Promise<ViolationReport> {
    this.guard();
    const report = this.reports.get(taskId);
    if (!report) throw new ApiError(404, `no reports for task ${taskId}`);
    return report;
  }

  async runStatus(runId: string): Promise<RunStatus> {
    this.guard();
    this.calls.push(`runStatus:${runId}`);
    const run = this.runs.get(runId);
    if (!run) throw new ApiError(404, `no run ${runId}`);
    return run;
  }

  async review(
    contractId: string,
    decision: "approve" | "reject",
    note?: string,
  ): Promise<ContractView> {
    this.guard();
    this.calls.push(`review:${contractId}:${decision}`);
    const record = this.contracts.get(contractId);
    if (!record) throw new ApiError(404, `no contract with id ${contractId}`);
    if (record.status !== "proposed" && record.status !== "revised") {
      throw new ApiError(409, `${record.status} -> ${decision} is not allowed`);
    }
    const updated: ContractView = {
      ...record,
      status: decision === "approve" ? "approved" : "rejected",
      review_note: note ?? null,
    };
    this.contracts.set(contractId, updated);
    return updated;
  }

  async revise(contractId: string, newText: string): Promise<ContractView> {
    this.guard();
    this.calls.push(`revise:${contractId}`);
    const record = this.contracts.get(contractId);
    if (!record) throw new ApiError(404, `no contract with id ${contractId}`);
    if (record.status !== "proposed" && record.status !== "revised") {
      throw new ApiError(409, `${record.status} -> revised is not allowed`);
    }
    this.contracts.set(contractId, { ...record, status: "revised" });
    const replacement = makeContract({
      task_id: record.task_id,
      task_title: record.task_title,
      kind: record.kind,
      element: record.element,
      normalized_text: newText,
      source_text: newText,
      status: "revised",
      provenance: "human_authored",
      revision_of: contractId,
    });
    this.contracts.set(replacement.contract_id, replacement);
    return replacement;
  }

  async validate(text: string): Promise<{ normalized_text: string }> {
    this.guard();
    this.calls.push(`validate:${text}`);
    const normalized = this.validations.get(text);
    if (normalized === null) throw new ApiError(422, `syntax error in ${text}`);
    return { normalized_text: normalized ?? text };
  }

  async triggerPipeline(_request: PipelineRequest): Promise<{ run_id: string }> {
    this.guard();
    this.calls.push("triggerPipeline");
    const runId = `run-${String(++nextId).padStart(4, "0")}`;
    this.runs.set(runId, { run_id: runId, phases: [], terminal_status: null });
    return { run_id: runId };
  }
}
