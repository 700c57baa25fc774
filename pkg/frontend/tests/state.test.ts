import { describe, expect, it } from "vitest";

import { ViewState } from "../src/state.js";
import type { ConfigDoc, IndicatorDoc, SessionState } from "../src/types.js";

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

function indicator(id: string): IndicatorDoc {
  return {
    id,
    quality: "harmony",
    name: id,
    angle: 30,
    length: 0.5,
    boundary_ok: false,
    timestamp: null,
    notes: "",
  };
}

function makeState(version: number, ids: string[]): SessionState {
  return {
    id: "sess",
    version,
    mode: "single",
    participants: [],
    config: CONFIG,
    tables: {
      table: {
        institution: "Org",
        sphere: "unspecified",
        snapshot_time: null,
        indicators: ids.map(indicator),
      },
    },
    readings: {},
    robustness: {},
    influence: {},
    ecological: null,
    ballots: {},
  };
}

describe("ViewState", () => {
  it("accepts a snapshot and moves the version cursor", () => {
    const view = new ViewState("sess");
    expect(view.applyState(makeState(4, ["a"]))).toBe(true);
    expect(view.lastSeenVersion).toBe(4);
    expect(view.state?.version).toBe(4);
  });

  it("ignores stale snapshots so racing refetches cannot rewind", () => {
    const view = new ViewState("sess");
    view.applyState(makeState(5, ["a"]));
    expect(view.applyState(makeState(3, []))).toBe(false);
    expect(view.state?.version).toBe(5);
    expect(view.lastSeenVersion).toBe(5);
  });

  it("rejects snapshots belonging to another session", () => {
    const view = new ViewState("other");
    expect(() => view.applyState(makeState(0, []))).toThrow(/other/);
  });

  it("cursor never exceeds what the server has emitted", () => {
    const view = new ViewState("sess");
    view.applyState(makeState(0, []));
    expect(view.observeEvent({ version: 0 })).toBe("duplicate");
    expect(view.observeEvent({ version: 1 })).toBe("advanced");
    expect(view.lastSeenVersion).toBe(1);
    expect(view.observeEvent({ version: 1 })).toBe("duplicate");
    expect(view.observeEvent({ version: 5 })).toBe("gap");
    expect(view.lastSeenVersion).toBe(1); // gap does not advance blindly
  });

  it("deduplicates replayed backlog after a reconnect", () => {
    const view = new ViewState("sess");
    view.applyState(makeState(3, ["a"]));
    // Reconnect with after=lastSeenVersion would not resend these; even if a
    // server replays them, the cursor drops every one.
    for (const version of [0, 1, 2, 3]) {
      expect(view.observeEvent({ version })).toBe("duplicate");
    }
  });

  it("clears a selection when the indicator disappears", () => {
    const view = new ViewState("sess");
    view.applyState(makeState(0, ["a", "b"]));
    view.selectedIndicator = "b";
    view.applyState(makeState(1, ["a"]));
    expect(view.selectedIndicator).toBeNull();
  });

  it("prunes pending what-ifs of indicators that no longer exist", () => {
    const view = new ViewState("sess");
    view.applyState(makeState(0, ["a", "b"]));
    view.toggleWhatif("a");
    view.toggleWhatif("b");
    view.applyState(makeState(1, ["a"]));
    expect([...view.pendingWhatif]).toEqual(["a"]);
  });

  it("what-if toggling is local only", () => {
    const view = new ViewState("sess");
    view.applyState(makeState(0, ["a"]));
    view.toggleWhatif("a");
    expect(view.pendingWhatif.has("a")).toBe(true);
    view.toggleWhatif("a");
    expect(view.pendingWhatif.size).toBe(0);
    view.toggleWhatif("a");
    view.clearWhatif();
    expect(view.pendingWhatif.size).toBe(0);
    // Nothing above touched the snapshot: pending sets never mutate state.
    expect(view.state?.version).toBe(0);
  });

  it("maps the sphere tab to the state's table keys", () => {
    const view = new ViewState("sess");
    view.applyState(makeState(0, []));
    expect(view.tableKey()).toBe("table");
    const spheres = makeState(0, []);
    (spheres as { mode: string }).mode = "spheres";
    view.applyState(spheres);
    view.sphereTab = "socio";
    expect(view.tableKey()).toBe("socio");
    view.sphereTab = "composed";
    expect(view.tableKey()).toBe("eco");
  });

  it("collects notices instead of dropping errors", () => {
    const view = new ViewState("sess");
    view.notice("first");
    view.notice("second");
    expect(view.notices).toEqual(["first", "second"]);
  });
});
