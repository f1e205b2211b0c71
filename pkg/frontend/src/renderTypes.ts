/** Structural types the renderers need; kept separate so render.ts does
 * not depend on the full DTO module. */

import type { ContractView, Lineage, RunStatus } from "./types.js";

export interface QueueGroupLike {
  taskId: string;
  taskTitle: string;
  items: ContractView[];
}

export type { Lineage, RunStatus };
