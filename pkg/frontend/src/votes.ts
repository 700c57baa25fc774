/**
 * Vote panel: weighted-ballot previews and the commit mutation.
 *
 * The preview formula is the one deliberate exception to "no local compass
 * math": a panel must show where the ballots would put the arrow *before*
 * anything is committed.  It reproduces the server's arithmetic exactly —
 * same accumulation order, same IEEE-754 operations — and the committed
 * value still comes from the server (the `cast_ballots` mutation recomputes
 * it authoritatively; integration tests assert the two are identical).
 */

import type { BallotDoc, Intensity, Mutation, Quality } from "./types.js";

const SECTOR_SPAN = 120;

const INTENSITY_MULTIPLIER: Record<Intensity, number> = {
  light: 1,
  medium: 2,
  strong: 3,
};

export interface Neighbors {
  /** Quality across the sector's start boundary (offset 0 side). */
  start: Quality;
  /** Quality across the sector's end boundary (offset 120 side). */
  end: Quality;
}

/** The two qualities adjacent to `quality` under the layout. */
export function neighborQualities(
  layout: Record<Quality, number>,
  quality: Quality,
): Neighbors {
  const myStart = layout[quality];
  const entries = Object.entries(layout) as Array<[Quality, number]>;
  const at = (angle: number): Quality => {
    const wanted = ((angle % 360) + 360) % 360;
    const found = entries.find(([, start]) => ((start % 360) + 360) % 360 === wanted);
    if (found === undefined) throw new Error(`no sector starts at ${wanted}°`);
    return found[0];
  };
  return { start: at(myStart - SECTOR_SPAN), end: at(myStart + SECTOR_SPAN) };
}

export interface VotePreview {
  /** Within-sector offset in degrees, [0, 120]. */
  offset: number;
  /** Absolute compass direction under the layout. */
  absolute: number;
  /** Degrees from the end boundary — how the protocol quotes pulls. */
  fromEndBoundary: number;
  /** True when the ballots are unanimous to one boundary (needs sign-off). */
  onBoundary: boolean;
}

/**
 * Where the ballots put an indicator of `quality`: weight toward a neighbor
 * drags the arrow to the boundary shared with that neighbor, so
 * offset = 120 · w_end / (w_start + w_end).
 */
export function votePreview(
  layout: Record<Quality, number>,
  quality: Quality,
  ballots: BallotDoc[],
): VotePreview {
  if (ballots.length === 0) throw new Error("no ballots cast");
  const { start, end } = neighborQualities(layout, quality);
  let wStart = 0.0;
  let wEnd = 0.0;
  for (const ballot of ballots) {
    if (ballot.toward === quality) {
      throw new Error(`ballots must pull toward a neighboring quality, not ${quality}`);
    }
    const effective =
      (ballot.weight ?? 1.0) * INTENSITY_MULTIPLIER[ballot.intensity ?? "light"];
    if (!Number.isFinite(effective) || effective < 0) {
      throw new Error(`ballot from ${ballot.voter} has invalid weight`);
    }
    if (ballot.toward === start) wStart += effective;
    else if (ballot.toward === end) wEnd += effective;
    else throw new Error(`quality ${ballot.toward} is not adjacent to ${quality}`);
  }
  const total = wStart + wEnd;
  if (total <= 0) throw new Error("ballots carry zero total weight");
  const offset = (SECTOR_SPAN * wEnd) / total;
  return {
    offset,
    absolute: (layout[quality] + offset) % 360,
    fromEndBoundary: SECTOR_SPAN - offset,
    onBoundary: offset === 0 || offset === SECTOR_SPAN,
  };
}

/** The commit mutation; the server recomputes the angle authoritatively. */
export function castBallotsMutation(indicatorId: string, ballots: BallotDoc[]): Mutation {
  return { kind: "cast_ballots", id: indicatorId, ballots };
}
