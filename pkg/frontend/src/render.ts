/**
 * HTML renderers: pure functions from state to markup, so they are
 * testable without a browser. main.ts assigns the output to the page.
 */

import type { ClauseFailure } from "./dashboard.js";
import type { Lineage, QueueGroupLike, RunStatus } from "./renderTypes.js";

const NODE_COLORS: Record<string, string> = {
  intent: "#7b61c4",
  task: "#2f80b9",
  contract: "#2e9e6b",
  code_unit: "#c98a2d",
  test_case: "#b0567a",
  violation: "#c94f4f",
};

function escapeHtml(value: unknown): string {
  return String(value)
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderQueue(groups: QueueGroupLike[]): string {
  if (groups.length === 0) {
    return `<p class="empty">No contracts awaiting review. Generate contracts
      for a task, or start a loop, and proposals will appear here.</p>`;
  }
  return groups
    .map(
      (group) => `
    <section class="queue-group" data-task="${escapeHtml(group.taskId)}">
      <h3>${escapeHtml(group.taskTitle)}</h3>
      <ul>
        ${group.items
          .map(
            (item) => `
        <li data-contract="${escapeHtml(item.contract_id)}">
          <code class="kind">${escapeHtml(item.kind)}</code>
          <code class="element">[${escapeHtml(item.element)}]</code>
          <code class="clause">${escapeHtml(item.normalized_text)}</code>
          <span class="provenance">${escapeHtml(item.provenance)}</span>
          <button data-action="approve">approve</button>
          <button data-action="reject">reject</button>
          <button data-action="edit">edit</button>
        </li>`,
          )
          .join("")}
      </ul>
    </section>`,
    )
    .join("");
}

export function renderLineage(lineage: Lineage, highlightId?: string): string {
  const nodeItems: string[] = [];
  for (const [kind, byId] of Object.entries(lineage.nodes)) {
    for (const nodeId of Object.keys(byId)) {
      const highlight = nodeId === highlightId ? " highlight" : "";
      nodeItems.push(
        `<li class="node${highlight}" style="border-color: ${NODE_COLORS[kind] ?? "#888"}">
          <span class="node-kind">${escapeHtml(kind)}</span>
          <code>${escapeHtml(nodeId)}</code>
        </li>`,
      );
    }
  }
  const edgeItems = lineage.links.map(
    (link) =>
      `<li class="edge"><code>${escapeHtml(link.from[1])}</code>
        <span class="edge-kind">${escapeHtml(link.edge_kind)}</span>
        <code>${escapeHtml(link.to[1])}</code></li>`,
  );
  return `<ul class="lineage-nodes">${nodeItems.join("")}</ul>
    <ul class="lineage-edges">${edgeItems.join("")}</ul>`;
}

export function renderViolations(
  failures: ClauseFailure[],
  clauseText: (clauseId: string) => string,
): string {
  if (failures.length === 0) {
    return `<p class="empty">No violations in the latest report.</p>`;
  }
  return `<table class="violations">
    <thead><tr><th>clause</th><th>classification</th><th>witnesses</th></tr></thead>
    <tbody>
      ${failures
        .map(
          (failure) => `
      <tr data-clause="${escapeHtml(failure.clauseId)}">
        <td><code>${escapeHtml(clauseText(failure.clauseId))}</code></td>
        <td>${escapeHtml(failure.classification)}</td>
        <td>${failure.witnesses
          .map(
            (witness) =>
              `<code class="witness">${escapeHtml(JSON.stringify(witness))}</code>`,
          )
          .join(" ")}</td>
      </tr>`,
        )
        .join("")}
    </tbody>
  </table>`;
}

export function renderRunPanel(run: RunStatus | null, polling: boolean): string {
  if (!run) {
    return `<p class="empty">No run in flight.</p>
      <button data-action="start-loop">start loop</button>`;
  }
  const phases = run.phases
    .map(
      (entry) =>
        `<li><span class="phase">${escapeHtml(entry.phase)}</span>
          <span class="outcome">${escapeHtml(entry.outcome ?? "…")}</span></li>`,
    )
    .join("");
  const status = run.terminal_status
    ? `finished: ${escapeHtml(run.terminal_status)}`
    : polling
      ? "running…"
      : "idle";
  return `<p class="run-status">${status}</p><ol class="phases">${phases}</ol>`;
}

export function renderDegradedBanner(degraded: boolean): string {
  return degraded
    ? `<div class="banner degraded">Service unreachable — data shown may be
       stale. Retrying…</div>`
    : "";
}
