/**
 * Drag-to-edit: pointer position → inverse viewbox transform → an
 * `adjust_indicator` mutation with optimistic concurrency.
 *
 * On a version conflict the state is refetched and the drag replayed once if
 * the indicator still exists, otherwise discarded with a visible notice.
 * Every failure path surfaces a notice — no silent drops.
 */

import { ApiError } from "./api.js";
import type { SessionClient } from "./api.js";
import { pointerToPlacement } from "./geometry.js";
import type { PixelPoint, SvgMeta } from "./geometry.js";
import type { ViewState } from "./state.js";
import type { IndicatorDoc, Mutation, SessionState, Sphere } from "./types.js";

export type DragResult =
  | {
      status: "committed";
      /** What the pointer asked for (the mutation payload values). */
      angle: number;
      length: number;
      clamped: boolean;
      replayed: boolean;
      state: SessionState;
    }
  | { status: "blocked"; notice: string }
  | { status: "discarded"; notice: string };

function findIndicator(view: ViewState, indicatorId: string): IndicatorDoc | null {
  const state = view.state;
  if (state === null) return null;
  const table = state.tables[view.tableKey()];
  return table?.indicators.find((ind) => ind.id === indicatorId) ?? null;
}

/** Drag `indicatorId` to `pointer` (SVG pixel coordinates). */
export async function dragIndicator(
  client: SessionClient,
  view: ViewState,
  indicatorId: string,
  pointer: PixelPoint,
  meta: SvgMeta,
): Promise<DragResult> {
  const indicator = findIndicator(view, indicatorId);
  if (indicator === null) {
    const notice = `indicator ${indicatorId} is not in the current table`;
    view.notice(notice);
    return { status: "discarded", notice };
  }

  const placement = pointerToPlacement(meta, indicator.quality, pointer);
  if (placement.kind === "blocked") {
    view.notice(placement.notice);
    return { status: "blocked", notice: placement.notice };
  }

  const mutation: Mutation = {
    kind: "adjust_indicator",
    id: indicatorId,
    angle: placement.angle,
    length: placement.length,
  };
  if (view.state !== null && view.state.mode === "spheres") {
    mutation.sphere = view.tableKey() as Sphere;
  }

  let replayed = false;
  let expected = view.lastSeenVersion;
  for (;;) {
    try {
      const response = await client.mutate(view.sessionId, expected, mutation);
      view.applyState(response.state);
      return {
        status: "committed",
        angle: placement.angle,
        length: placement.length,
        clamped: placement.clamped,
        replayed,
        state: response.state,
      };
    } catch (error) {
      if (!(error instanceof ApiError)) throw error;
      if (error.code === "version_conflict" && !replayed) {
        // Someone else committed first: refetch, then replay the drag once
        // if the indicator is still there.
        const fresh = await client.getState(view.sessionId);
        view.applyState(fresh);
        if (findIndicator(view, indicatorId) === null) {
          const notice =
            `drag discarded: ${indicatorId} was removed by another participant ` +
            `(now at version ${fresh.version})`;
          view.notice(notice);
          return { status: "discarded", notice };
        }
        replayed = true;
        expected = fresh.version;
        continue;
      }
      const notice = `drag failed: ${error.message}`;
      view.notice(notice);
      return { status: "discarded", notice };
    }
  }
}
