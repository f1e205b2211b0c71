/**
 * Page wiring: one review queue, one dashboard, one API client pointed
 * at the service base URL (same origin by default, or ?api=<url>).
 */

import { ApiClient } from "./client.js";
import { Dashboard } from "./dashboard.js";
import {
  renderDegradedBanner,
  renderLineage,
  renderQueue,
  renderRunPanel,
  renderViolations,
} from "./render.js";
import { ReviewQueue } from "./reviewQueue.js";

function baseUrl(): string {
  const override = new URLSearchParams(window.location.search).get("api");
  return override ?? "";
}

export async function boot(root: Document = document): Promise<void> {
  const client = new ApiClient(baseUrl());
  const queue = new ReviewQueue(client);
  const dashboard = new Dashboard(client, () => paint());

  const el = (id: string): HTMLElement => {
    const node = root.getElementById(id);
    if (!node) throw new Error(`missing #${id}`);
    return node;
  };

  const clauseTexts = new Map<string, string>();

  async function loadClauseTexts(): Promise<void> {
    for (const contract of await client.listContracts()) {
      clauseTexts.set(contract.clause_id, contract.normalized_text);
    }
  }

  function paint(): void {
    el("banner").innerHTML = renderDegradedBanner(dashboard.degraded);
    el("queue").innerHTML = renderQueue(queue.groups());
    el("violations").innerHTML = renderViolations(
      dashboard.clauseFailures(),
      (clauseId) => clauseTexts.get(clauseId) ?? clauseId,
    );
    el("run").innerHTML = renderRunPanel(dashboard.run, dashboard.polling);
    el("lineage").innerHTML = dashboard.lineage
      ? renderLineage(dashboard.lineage)
      : "";
    el("notices").textContent = queue.notices
      .map((notice) => `${notice.kind}: ${notice.message}`)
      .join("\n");
  }

  el("queue").addEventListener("click", (event) => {
    const button = (event.target as HTMLElement).closest("button");
    if (!button) return;
    const item = button.closest("li[data-contract]") as HTMLElement | null;
    if (!item) return;
    const contractId = item.dataset.contract!;
    void (async () => {
      const action = button.dataset.action;
      if (action === "approve") await queue.approve(contractId);
      else if (action === "reject") await queue.reject(contractId);
      else if (action === "edit") {
        const text = window.prompt("New contract text:");
        if (text !== null) {
          const parseError = await queue.edit(contractId, text);
          if (parseError) window.alert(`Does not parse: ${parseError}`);
        }
      }
      paint();
    })();
  });

  el("run").addEventListener("click", (event) => {
    const button = (event.target as HTMLElement).closest("button");
    if (button?.dataset.action === "start-loop") {
      const intent = window.prompt("Intent prompt:");
      if (intent) void dashboard.startLoop({ intent, auto_approve: false });
    }
  });

  await loadClauseTexts();
  await queue.refresh();
  await dashboard.refresh();
  if (dashboard.tasks.length > 0) {
    await dashboard.selectTask(dashboard.tasks[0].task_id);
  }
  paint();
}

if (typeof document !== "undefined" && document.getElementById("queue")) {
  void boot();
}
