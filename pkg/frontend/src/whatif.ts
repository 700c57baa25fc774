/**
 * What-if overlays: preview the compass without a set of indicators, without
 * mutating the session.
 *
 * Every number in the overlay is server-computed.  The hypothetical reading
 * comes from the `/whatif` endpoint; the per-indicator influence figures come
 * from the server's own influence report carried on the committed state.
 * The client never recomputes displacements locally — JavaScript and the
 * server disagree at the last bit on `hypot`-style math, and the overlay is
 * specified to match the server's report exactly.
 */

import type { SessionClient } from "./api.js";
import type { ViewState } from "./state.js";
import type {
  Classification,
  InfluenceEntry,
  Mutation,
  SessionState,
  Sphere,
  VectorDoc,
} from "./types.js";

export interface WhatifOverlay {
  baseVersion: number;
  removed: string[];
  committedFinal: VectorDoc;
  committedClassification: Classification;
  hypotheticalFinal: VectorDoc;
  hypotheticalClassification: Classification;
  /**
   * For a single-removal overlay, the server's influence-report entry for
   * that indicator, verbatim.  Null when the pending set is empty or has
   * more than one member (the report is defined leave-one-out).
   */
  influence: InfluenceEntry | null;
}

/** Deterministic mutation list for a pending set (sorted removals). */
export function whatifMutations(pending: ReadonlySet<string>, sphere?: Sphere): Mutation[] {
  return [...pending].sort().map((id) => {
    const mutation: Mutation = { kind: "remove_indicator", id };
    if (sphere !== undefined) mutation.sphere = sphere;
    return mutation;
  });
}

function requireState(view: ViewState): SessionState {
  if (view.state === null) {
    throw new Error("view has no state snapshot yet; fetch the session first");
  }
  return view.state;
}

function overlaySphere(state: SessionState, key: string): Sphere | undefined {
  return state.mode === "spheres" ? (key as Sphere) : undefined;
}

/** Build the overlay for the view's pending what-if set. */
export async function runWhatif(client: SessionClient, view: ViewState): Promise<WhatifOverlay> {
  const state = requireState(view);
  const key = view.tableKey();
  const reading = state.readings[key];
  if (reading === undefined) throw new Error(`state has no reading for table key ${key}`);
  const removed = [...view.pendingWhatif].sort();

  const committedFinal = reading.final;
  const committedClassification = reading.classification;

  if (removed.length === 0) {
    // Nothing toggled: the hypothetical world is the committed one, same
    // server numbers on both sides of the overlay.
    return {
      baseVersion: state.version,
      removed,
      committedFinal,
      committedClassification,
      hypotheticalFinal: committedFinal,
      hypotheticalClassification: committedClassification,
      influence: null,
    };
  }

  const response = await client.whatif(
    state.id,
    whatifMutations(view.pendingWhatif, overlaySphere(state, key)),
  );
  const hypothetical = response.state.readings[key];
  if (hypothetical === undefined) {
    throw new Error(`whatif state has no reading for table key ${key}`);
  }

  let influence: InfluenceEntry | null = null;
  if (removed.length === 1) {
    influence = (state.influence[key] ?? []).find((e) => e.id === removed[0]) ?? null;
  }

  return {
    baseVersion: response.base_version,
    removed,
    committedFinal,
    committedClassification,
    hypotheticalFinal: hypothetical.final,
    hypotheticalClassification: hypothetical.classification,
    influence,
  };
}

/**
 * Commit the pending what-if set for real: the same removals, in the same
 * order, through the mutation endpoint.  Returns the resulting state (which
 * equals what the overlay showed — same server code path).
 */
export async function commitWhatif(client: SessionClient, view: ViewState): Promise<SessionState> {
  const state = requireState(view);
  const key = view.tableKey();
  const mutations = whatifMutations(view.pendingWhatif, overlaySphere(state, key));
  let version = state.version;
  let latest = state;
  for (const mutation of mutations) {
    const response = await client.mutate(state.id, version, mutation);
    version = response.version;
    latest = response.state;
  }
  view.clearWhatif();
  view.applyState(latest);
  return latest;
}
