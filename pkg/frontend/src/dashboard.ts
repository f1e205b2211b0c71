/**
 * Dashboard state: selected task, its latest violation report, lineage
 * for a selected node, and pipeline run status polled every 2 seconds.
 *
 * All state is a verbatim copy of service responses; refreshing twice in
 * a row is a no-op. When the service is unreachable the dashboard enters
 * a degraded state and never presents the stale data as live.
 */

import {
  ApiError,
  ServiceUnreachableError,
  type ApiClientLike,
} from "./client.js";
import type {
  Lineage,
  PipelineRequest,
  RunStatus,
  Task,
  ViolationReport,
} from "./types.js";

export const RUN_POLL_INTERVAL_MS = 2000;

export interface ClauseFailure {
  clauseId: string;
  classification: string;
  witnesses: Record<string, unknown>[];
}

export class Dashboard {
  tasks: Task[] = [];
  selectedTaskId: string | null = null;
  report: ViolationReport | null = null;
  lineage: Lineage | null = null;
  runId: string | null = null;
  run: RunStatus | null = null;
  degraded = false;

  private pollTimer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly client: ApiClientLike,
    private readonly onChange: () => void = () => {},
  ) {}

  async refresh(): Promise<void> {
    try {
      this.tasks = await this.client.listTasks();
      if (this.selectedTaskId) {
        await this.loadReport(this.selectedTaskId);
      }
      this.degraded = false;
    } catch (error) {
      if (error instanceof ServiceUnreachableError) {
        this.degraded = true;
      } else {
        throw error;
      }
    }
    this.onChange();
  }

  async selectTask(taskId: string): Promise<void> {
    this.selectedTaskId = taskId;
    await this.loadReport(taskId);
    this.onChange();
  }

  private async loadReport(taskId: string): Promise<void> {
    try {
      this.report = await this.client.latestReport(taskId);
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) {
        this.report = null; // no report yet is an ordinary empty state
        return;
      }
      throw error;
    }
  }

  async selectNode(kind: string, nodeId: string): Promise<void> {
    this.lineage = await this.client.lineage(kind, nodeId);
    this.onChange();
  }

  /**
   * Per-clause failure families from the current report, each with up to
   * `witnessLimit` witness argument sets — the violation panel's rows.
   */
  clauseFailures(witnessLimit = 3): ClauseFailure[] {
    if (!this.report) return [];
    const families = new Map<string, ClauseFailure>();
    for (const verdict of this.report.verdicts) {
      for (const outcome of verdict.outcomes) {
        if (outcome.outcome !== "violated") continue;
        let family = families.get(outcome.clause_id);
        if (!family) {
          family = {
            clauseId: outcome.clause_id,
            classification: verdict.classification,
            witnesses: [],
          };
          families.set(outcome.clause_id, family);
        }
        if (family.witnesses.length < witnessLimit) {
          family.witnesses.push(verdict.args);
        }
      }
    }
    return [...families.values()].sort((a, b) =>
      a.clauseId.localeCompare(b.clauseId),
    );
  }

  /** Kick off a pipeline run and start polling its status. */
  async startLoop(request: PipelineRequest): Promise<string> {
    const { run_id } = await this.client.triggerPipeline(request);
    this.runId = run_id;
    this.run = null;
    this.startPolling();
    this.onChange();
    return run_id;
  }

  /** Follow an already-running pipeline. */
  followRun(runId: string): void {
    this.runId = runId;
    this.startPolling();
  }

  private startPolling(): void {
    this.stopPolling();
    this.pollTimer = setInterval(() => {
      void this.pollOnce();
    }, RUN_POLL_INTERVAL_MS);
  }

  async pollOnce(): Promise<void> {
    if (!this.runId) return;
    try {
      this.run = await this.client.runStatus(this.runId);
      this.degraded = false;
    } catch (error) {
      if (error instanceof ServiceUnreachableError) {
        this.degraded = true;
        this.onChange();
        return;
      }
      throw error;
    }
    if (this.run.terminal_status) {
      this.stopPolling();
      // the finished run may have produced a fresh report
      await this.refresh();
      return;
    }
    this.onChange();
  }

  stopPolling(): void {
    if (this.pollTimer !== null) {
      clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
  }

  get polling(): boolean {
    return this.pollTimer !== null;
  }
}
