/**
 * Typed client for the backend HTTP API. Every write the UI performs
 * goes through exactly one of these methods; there is no other channel.
 */

import type {
  ContractStatus,
  ContractView,
  Lineage,
  PipelineRequest,
  RunStatus,
  Task,
  ViolationReport,
} from "./types.js";

/** A non-2xx response, carrying the service's machine-readable detail. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

/** Service unreachable (network failure, not an HTTP status). */
export class ServiceUnreachableError extends Error {
  constructor(cause: unknown) {
    super(`service unreachable: ${String(cause)}`);
  }
}

export interface ApiClientLike {
  listTasks(): Promise<Task[]>;
  listContracts(filter?: {
    status?: ContractStatus;
    taskId?: string;
  }): Promise<ContractView[]>;
  lineage(kind: string, nodeId: string): Promise<Lineage>;
  latestReport(taskId: string): Promise<ViolationReport>;
  runStatus(runId: string): Promise<RunStatus>;
  review(
    contractId: string,
    decision: "approve" | "reject",
    note?: string,
  ): Promise<ContractView>;
  revise(contractId: string, newText: string, note?: string): Promise<ContractView>;
  validate(text: string): Promise<{ normalized_text: string }>;
  triggerPipeline(request: PipelineRequest): Promise<{ run_id: string }>;
}

export class ApiClient implements ApiClientLike {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, {
        headers: { "Content-Type": "application/json" },
        ...init,
      });
    } catch (cause) {
      throw new ServiceUnreachableError(cause);
    }
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: unknown };
        if (body.detail !== undefined) detail = String(body.detail);
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  listTasks(): Promise<Task[]> {
    return this.request("/api/tasks");
  }

  listContracts(filter?: {
    status?: ContractStatus;
    taskId?: string;
  }): Promise<ContractView[]> {
    const params = new URLSearchParams();
    if (filter?.status) params.set("status", filter.status);
    if (filter?.taskId) params.set("task_id", filter.taskId);
    const query = params.toString();
    return this.request(`/api/contracts${query ? `?${query}` : ""}`);
  }

  lineage(kind: string, nodeId: string): Promise<Lineage> {
    return this.request(`/api/lineage/${kind}/${nodeId}`);
  }

  latestReport(taskId: string): Promise<ViolationReport> {
    return this.request(`/api/tasks/${taskId}/report`);
  }

  runStatus(runId: string): Promise<RunStatus> {
    return this.request(`/api/runs/${runId}`);
  }

  review(
    contractId: string,
    decision: "approve" | "reject",
    note?: string,
  ): Promise<ContractView> {
    return this.request(`/api/contracts/${contractId}/review`, {
      method: "POST",
      body: JSON.stringify({ decision, note: note ?? null }),
    });
  }

  revise(contractId: string, newText: string, note?: string): Promise<ContractView> {
    return this.request(`/api/contracts/${contractId}/revise`, {
      method: "POST",
      body: JSON.stringify({ new_text: newText, note: note ?? null }),
    });
  }

  validate(text: string): Promise<{ normalized_text: string }> {
    return this.request("/api/validate", {
      method: "POST",
      body: JSON.stringify({ text }),
    });
  }

  triggerPipeline(request: PipelineRequest): Promise<{ run_id: string }> {
    return this.request("/api/pipeline", {
      method: "POST",
      body: JSON.stringify(request),
    });
  }
}
