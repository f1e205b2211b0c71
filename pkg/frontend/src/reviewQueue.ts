/**
 * Review queue state machine: proposed/revised contracts grouped by task,
 * with approve/reject/edit actions.
 *
 * Mutations are optimistic — the item leaves the queue immediately — and
 * rolled back when the service answers 4xx. A 409 (reviewed elsewhere)
 * additionally triggers a full refresh so the queue reflects the other
 * session's decision. The queue never computes a contract's status
 * itself; every displayed status is the service's reply.
 */

import { ApiError, type ApiClientLike } from "./client.js";
import type { ContractView } from "./types.js";

export interface QueueGroup {
  taskId: string;
  taskTitle: string;
  items: ContractView[];
}

export interface QueueNotice {
  kind: "error" | "conflict" | "info";
  message: string;
}

export class ReviewQueue {
  private items: ContractView[] = [];
  notices: QueueNotice[] = [];

  constructor(private readonly client: ApiClientLike) {}

  async refresh(): Promise<void> {
    const proposed = await this.client.listContracts({ status: "proposed" });
    const revised = await this.client.listContracts({ status: "revised" });
    // a revised record superseded by a newer revision is not reviewable;
    // the service surfaces that as a 409, which refreshes us anyway
    const superseded = new Set(
      [...proposed, ...revised]
        .map((c) => c.revision_of)
        .filter((id): id is string => id !== null),
    );
    this.items = [...proposed, ...revised]
      .filter((c) => !superseded.has(c.contract_id))
      .sort((a, b) => a.contract_id.localeCompare(b.contract_id));
  }

  get size(): number {
    return this.items.length;
  }

  has(contractId: string): boolean {
    return this.items.some((c) => c.contract_id === contractId);
  }

  /** Queue contents grouped by task, in task order. */
  groups(): QueueGroup[] {
    const byTask = new Map<string, QueueGroup>();
    for (const item of this.items) {
      let group = byTask.get(item.task_id);
      if (!group) {
        group = { taskId: item.task_id, taskTitle: item.task_title, items: [] };
        byTask.set(item.task_id, group);
      }
      group.items.push(item);
    }
    return [...byTask.values()];
  }

  async approve(contractId: string): Promise<void> {
    await this.mutate(contractId, () => this.client.review(contractId, "approve"));
  }

  async reject(contractId: string, note?: string): Promise<void> {
    await this.mutate(contractId, () =>
      this.client.review(contractId, "reject", note),
    );
  }

  /**
   * Edit flow: the replacement text is parse-checked via the validate
   * endpoint first; invalid text never produces a revise request. On
   * success the superseding record (freshly proposed for review) joins
   * the queue in place of the original.
   */
  async edit(contractId: string, newText: string): Promise<string | null> {
    try {
      await this.client.validate(newText);
    } catch (error) {
      if (error instanceof ApiError && error.status === 422) {
        return error.detail; // inline parse error, no revise request sent
      }
      throw error;
    }
    const original = this.take(contractId);
    if (!original) return null;
    try {
      const revision = await this.client.revise(contractId, newText);
      this.items.push(revision);
      this.items.sort((a, b) => a.contract_id.localeCompare(b.contract_id));
      return null;
    } catch (error) {
      await this.handleMutationError(contractId, original, error);
      return null;
    }
  }

  private async mutate(
    contractId: string,
    action: () => Promise<ContractView>,
  ): Promise<void> {
    const original = this.take(contractId);
    if (!original) return;
    try {
      await action();
    } catch (error) {
      await this.handleMutationError(contractId, original, error);
    }
  }

  private take(contractId: string): ContractView | undefined {
    const index = this.items.findIndex((c) => c.contract_id === contractId);
    if (index === -1) return undefined;
    return this.items.splice(index, 1)[0];
  }

  private async handleMutationError(
    contractId: string,
    original: ContractView,
    error: unknown,
  ): Promise<void> {
    if (error instanceof ApiError && error.status === 409) {
      this.notices.push({
        kind: "conflict",
        message: `contract ${contractId} was already reviewed elsewhere`,
      });
      await this.refresh();
      return;
    }
    // roll the optimistic removal back and surface the detail inline
    this.items.push(original);
    this.items.sort((a, b) => a.contract_id.localeCompare(b.contract_id));
    if (error instanceof ApiError) {
      this.notices.push({ kind: "error", message: error.detail });
      return;
    }
    throw error;
  }
}
