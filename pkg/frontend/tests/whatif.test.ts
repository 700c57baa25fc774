import { describe, expect, it } from "vitest";

import type { SessionClient } from "../src/api.js";
import { ViewState } from "../src/state.js";
import { runWhatif, whatifMutations } from "../src/whatif.js";
import type {
  ConfigDoc,
  InfluenceEntry,
  ReadingDoc,
  SessionState,
  WhatifResponse,
} from "../src/types.js";

const CONFIG: ConfigDoc = {
  layout: "harmony:0,passion:120,suppression:240",
  center_method: "centroid",
  perspicuity_alpha: 0.5,
  perspicuity_beta: 0.5,
  perspicuity_enabled: true,
  balance_epsilon: 1e-9,
  weight_eco: 1.0,
  weight_socio: 0.75,
  weight_econo: 0.5,
  convergence_epsilon: 0.02,
  convergence_window: 20,
  outlier_threshold: 0.05,
};

function reading(x: number, y: number): ReadingDoc {
  return {
    institution: "Org",
    sphere: "unspecified",
    table: { institution: "Org", sphere: "unspecified", snapshot_time: null, indicators: [] },
    config: CONFIG,
    sectors: {
      harmony: { x: 0, y: 0, indicator_count: 0 },
      passion: { x: 0, y: 0, indicator_count: 0 },
      suppression: { x: 0, y: 0, indicator_count: 0 },
    },
    triangle: [
      { x: 0, y: 0 },
      { x: 0, y: 0 },
      { x: 0, y: 0 },
    ],
    raw_final: { x, y },
    final: { x, y },
    classification: "harmony",
  };
}

function stateWith(entries: InfluenceEntry[]): SessionState {
  return {
    id: "sess",
    version: 2,
    mode: "single",
    participants: [],
    config: CONFIG,
    tables: {
      table: {
        institution: "Org",
        sphere: "unspecified",
        snapshot_time: null,
        indicators: entries.map((e) => ({
          id: e.id,
          quality: "harmony",
          name: e.id,
          angle: 30,
          length: 0.5,
          boundary_ok: false,
          timestamp: null,
          notes: "",
        })),
      },
    },
    readings: { table: reading(0.25, 0.1) },
    robustness: {},
    influence: { table: entries },
    ecological: null,
    ballots: {},
  };
}

describe("whatifMutations", () => {
  it("emits sorted removals", () => {
    expect(whatifMutations(new Set(["zeta", "alpha"]))).toEqual([
      { kind: "remove_indicator", id: "alpha" },
      { kind: "remove_indicator", id: "zeta" },
    ]);
  });

  it("tags the sphere in spheres mode", () => {
    expect(whatifMutations(new Set(["a"]), "socio")).toEqual([
      { kind: "remove_indicator", id: "a", sphere: "socio" },
    ]);
  });
});

describe("runWhatif", () => {
  const entry: InfluenceEntry = {
    id: "a",
    angle_delta_degrees: 12.5,
    magnitude_delta: -0.03,
    displacement: 0.07,
    outlier: true,
  };

  it("an empty toggle set shows an identical overlay without a network call", async () => {
    const view = new ViewState("sess");
    view.applyState(stateWith([entry]));
    const client = {
      whatif: () => {
        throw new Error("no server call expected for an empty set");
      },
    } as unknown as SessionClient;
    const overlay = await runWhatif(client, view);
    expect(overlay.hypotheticalFinal).toBe(overlay.committedFinal);
    expect(overlay.hypotheticalClassification).toBe(overlay.committedClassification);
    expect(overlay.influence).toBeNull();
    expect(overlay.removed).toEqual([]);
  });

  it("a single removal carries the server influence entry verbatim", async () => {
    const view = new ViewState("sess");
    view.applyState(stateWith([entry]));
    view.toggleWhatif("a");
    const hypothetical: WhatifResponse = {
      committed: false,
      base_version: 2,
      state: { ...stateWith([]), readings: { table: reading(0.5, -0.2) } },
    };
    const client = {
      whatif: async () => hypothetical,
    } as unknown as SessionClient;
    const overlay = await runWhatif(client, view);
    // The very object from the committed state's report — never recomputed.
    expect(overlay.influence).toBe(entry);
    expect(overlay.hypotheticalFinal).toEqual({ x: 0.5, y: -0.2 });
    expect(overlay.committedFinal).toEqual({ x: 0.25, y: 0.1 });
  });

  it("multi-indicator sets have no single leave-one-out entry", async () => {
    const other: InfluenceEntry = { ...entry, id: "b" };
    const view = new ViewState("sess");
    view.applyState(stateWith([entry, other]));
    view.toggleWhatif("a");
    view.toggleWhatif("b");
    const client = {
      whatif: async (): Promise<WhatifResponse> => ({
        committed: false,
        base_version: 2,
        state: stateWith([]),
      }),
    } as unknown as SessionClient;
    const overlay = await runWhatif(client, view);
    expect(overlay.influence).toBeNull();
    expect(overlay.removed).toEqual(["a", "b"]);
  });
});
