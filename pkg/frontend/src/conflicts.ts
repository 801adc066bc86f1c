/** Conflict review queue state. */

import type { ConflictInfo } from "./api.js";

export class ConflictQueue {
  private items: ConflictInfo[];

  constructor(items: ConflictInfo[]) {
    this.items = [...items].sort((a, b) => a.timestamp - b.timestamp);
  }

  get remaining(): number {
    return this.items.length;
  }

  get head(): ConflictInfo | null {
    return this.items.length ? this.items[0] : null;
  }

  all(): ConflictInfo[] {
    return [...this.items];
  }

  /** Drop a resolved timestamp locally; the server remains authoritative. */
  markResolved(timestamp: number): void {
    this.items = this.items.filter((c) => c.timestamp !== timestamp);
  }

  /** Distinct cameras voted at one conflict, for the review buttons. */
  static choices(conflict: ConflictInfo): number[] {
    return [...new Set(conflict.votes.map((v) => v.camera))].sort((a, b) => a - b);
  }
}
