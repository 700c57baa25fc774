/**
 * Client view state over one server session.
 *
 * Server-authoritative by construction: committed readings live only in the
 * last `SessionState` snapshot received from the server; events advance a
 * version cursor and tell the caller when to refetch.  The pending what-if
 * set is never sent through the mutation endpoint until explicitly
 * committed.
 */

import type { EventDoc, SessionState } from "./types.js";

export type StageView =
  | "chains"
  | "sectors"
  | "triangle"
  | "final"
  | "spheres"
  | "composition"
  | "trajectory";

export type SphereTab = "eco" | "socio" | "econo" | "composed";

export type EventOutcome =
  /** Already seen (version ≤ cursor); reconnect replays are dropped here. */
  | "duplicate"
  /** Next version in sequence; cursor advanced, state snapshot is now stale. */
  | "advanced"
  /** Version skipped ahead; cursor untouched, caller must refetch state. */
  | "gap";

export class ViewState {
  readonly sessionId: string;
  lastSeenVersion = -1;
  selectedIndicator: string | null = null;
  stageView: StageView = "final";
  sphereTab: SphereTab = "composed";
  readonly pendingWhatif = new Set<string>();
  state: SessionState | null = null;
  readonly notices: string[] = [];

  constructor(sessionId: string) {
    this.sessionId = sessionId;
  }

  /** Record a user-visible notice (errors are surfaced, never dropped). */
  notice(message: string): void {
    this.notices.push(message);
  }

  /**
   * Accept a fresh state snapshot.  Stale responses (older than something we
   * already know happened) are ignored so racing refetches cannot rewind the
   * view.  Returns whether the snapshot was accepted.
   */
  applyState(state: SessionState): boolean {
    if (state.id !== this.sessionId) {
      throw new Error(`state for session ${state.id} applied to view of ${this.sessionId}`);
    }
    if (state.version < this.lastSeenVersion) return false;
    this.state = state;
    this.lastSeenVersion = state.version;
    if (
      this.selectedIndicator !== null &&
      !Object.values(state.tables).some((t) =>
        t.indicators.some((ind) => ind.id === this.selectedIndicator),
      )
    ) {
      this.selectedIndicator = null;
    }
    for (const id of this.pendingWhatif) {
      if (!Object.values(state.tables).some((t) => t.indicators.some((ind) => ind.id === id))) {
        this.pendingWhatif.delete(id);
      }
    }
    return true;
  }

  /**
   * Observe one event from the SSE stream and advance the version cursor.
   * The cursor never exceeds the server version: it only moves along the
   * gapless event sequence the server emits.
   */
  observeEvent(event: Pick<EventDoc, "version">): EventOutcome {
    if (event.version <= this.lastSeenVersion) return "duplicate";
    if (event.version === this.lastSeenVersion + 1) {
      this.lastSeenVersion = event.version;
      return "advanced";
    }
    return "gap";
  }

  /** The state-document table key the active sphere tab looks at. */
  tableKey(): string {
    if (this.state === null || this.state.mode === "single") return "table";
    return this.sphereTab === "composed" ? "eco" : this.sphereTab;
  }

  toggleWhatif(indicatorId: string): void {
    if (this.pendingWhatif.has(indicatorId)) this.pendingWhatif.delete(indicatorId);
    else this.pendingWhatif.add(indicatorId);
  }

  clearWhatif(): void {
    this.pendingWhatif.clear();
  }
}
