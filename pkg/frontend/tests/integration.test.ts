/**
 * End-to-end test against a real backend process: seeds a project with a
 * golden buggy run plus a fresh batch of proposed contracts, starts the
 * HTTP service, and drives it through the same classes the page uses.
 */

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import * as path from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/client.js";
import { Dashboard } from "../src/dashboard.js";
import { renderViolations } from "../src/render.js";
import { ReviewQueue } from "../src/reviewQueue.js";

const HERE = path.dirname(fileURLToPath(import.meta.url));
const GOLDEN_DIR = path.resolve(HERE, "../../tests/fixtures/golden");
const PORT = 8612 + (process.pid % 137);
const BASE_URL = `http://127.0.0.1:${PORT}`;

let projectDir: string;
let server: ChildProcess;
let taskId: string;
let proposedIds: string[];
let client: ApiClient;

function readRegistryRecord(contractId: string): Record<string, unknown> {
  const doc = JSON.parse(
    readFileSync(path.join(projectDir, "project.json"), "utf-8"),
  ) as { contracts: Record<string, Record<string, unknown>> };
  return doc.contracts[contractId];
}

async function waitForServer(): Promise<void> {
  const deadline = Date.now() + 30_000;
  for (;;) {
    try {
      const response = await fetch(`${BASE_URL}/api/tasks`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) {
      throw new Error(`backend did not come up on port ${PORT}`);
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
}

beforeAll(async () => {
  projectDir = mkdtempSync(path.join(tmpdir(), "review-ui-"));
  const seeded = execFileSync(
    "python3",
    [path.join(HERE, "seed_project.py"), projectDir, GOLDEN_DIR],
    { encoding: "utf-8" },
  )
    .trim()
    .split("\n");
  taskId = seeded[1];
  proposedIds = seeded[2].split(" ");
  expect(proposedIds.length).toBe(8);

  server = spawn(
    "python3",
    [
      "-m",
      "contractloop.cli",
      "--project",
      projectDir,
      "serve",
      "--port",
      String(PORT),
      "--host",
      "127.0.0.1",
    ],
    { stdio: "ignore" },
  );
  await waitForServer();
  client = new ApiClient(BASE_URL);
}, 90_000);

afterAll(() => {
  server?.kill("SIGTERM");
  if (projectDir) rmSync(projectDir, { recursive: true, force: true });
});

describe("review lifecycle against the live service", () => {
  it("approving in the queue transitions the stored registry record", async () => {
    const queue = new ReviewQueue(client);
    await queue.refresh();
    expect(queue.size).toBeGreaterThanOrEqual(8);

    const target = proposedIds[0];
    expect(queue.has(target)).toBe(true);
    await queue.approve(target);

    expect(queue.has(target)).toBe(false);
    expect(queue.notices.filter((n) => n.kind === "error")).toHaveLength(0);
    // verified by reading the project file directly, not through the API
    expect(readRegistryRecord(target).status).toBe("approved");
  }, 30_000);

  it("a concurrent second approval surfaces the 409 as a conflict", async () => {
    const tabA = new ReviewQueue(client);
    const tabB = new ReviewQueue(client);
    await tabA.refresh();
    await tabB.refresh();

    const target = proposedIds[1];
    await tabA.approve(target);
    await tabB.approve(target); // loses the race

    const notice = tabB.notices.at(-1);
    expect(notice?.kind).toBe("conflict");
    expect(tabB.has(target)).toBe(false); // refreshed away
    expect(readRegistryRecord(target).status).toBe("approved");
  }, 30_000);

  it("the dashboard shows every precondition family of the buggy report", async () => {
    const dashboard = new Dashboard(client);
    await dashboard.refresh();
    expect(dashboard.tasks.map((t) => t.task_id)).toContain(taskId);

    await dashboard.selectTask(taskId);
    expect(dashboard.report).not.toBeNull();
    expect(dashboard.report?.summary.missing_rejection).toBe(20);

    const contracts = (await client.listContracts({ status: "approved" })).filter(
      (c) => !proposedIds.includes(c.contract_id), // only the verified batch
    );
    const preconditionClauses = contracts
      .filter((c) => c.kind === "precondition" && c.task_id === taskId)
      .map((c) => c.clause_id);
    expect(new Set(preconditionClauses).size).toBe(4);

    const failures = dashboard.clauseFailures();
    const byClause = new Map(failures.map((f) => [f.clauseId, f]));
    for (const clauseId of preconditionClauses) {
      const family = byClause.get(clauseId);
      expect(family, `no failure family for clause ${clauseId}`).toBeDefined();
      expect(family!.witnesses.length).toBeGreaterThanOrEqual(1);
      expect(family!.classification).toBe("missing_rejection");
    }

    const clauseText = new Map(contracts.map((c) => [c.clause_id, c.normalized_text]));
    const html = renderViolations(failures, (id) => clauseText.get(id) ?? id);
    for (const clauseId of preconditionClauses) {
      expect(html).toContain(`data-clause="${clauseId}"`);
    }
  }, 30_000);
});
