import { describe, expect, it } from "vitest";

import {
  angleOfUnit,
  finalArrowFromSvg,
  hitTestIndicator,
  indicatorElements,
  parseLayout,
  parseSvgMeta,
  pixelToUnit,
  pointerToPlacement,
  qualityOfAngle,
  segmentDirectionDegrees,
  unitToPixel,
} from "../src/geometry.js";
import type { SvgMeta } from "../src/geometry.js";

const DEFAULT_META: SvgMeta = {
  center: 320,
  scale: 288,
  layout: { harmony: 0, passion: 120, suppression: 240 },
  stage: "final",
};

const SVG_ROOT =
  '<svg xmlns="http://www.w3.org/2000/svg" width="640" height="640" viewBox="0 0 640 640" ' +
  'data-center="320.000000" data-scale="288.000000" ' +
  'data-layout="harmony:0,passion:120,suppression:240" data-stage="final">';

function pointerFor(meta: SvgMeta, absoluteDeg: number, radius: number) {
  const rad = (absoluteDeg * Math.PI) / 180;
  return unitToPixel({ x: radius * Math.cos(rad), y: radius * Math.sin(rad) }, meta);
}

describe("svg meta", () => {
  it("reads the published transform off the root element", () => {
    const meta = parseSvgMeta(SVG_ROOT + "</svg>");
    expect(meta.center).toBe(320);
    expect(meta.scale).toBe(288);
    expect(meta.layout).toEqual({ harmony: 0, passion: 120, suppression: 240 });
    expect(meta.stage).toBe("final");
  });

  it("rejects an svg without the data attributes", () => {
    expect(() => parseSvgMeta("<svg></svg>")).toThrow(/data-center/);
  });

  it("parses mirrored layout directives", () => {
    expect(parseLayout("harmony:0,suppression:120,passion:240")).toEqual({
      harmony: 0,
      suppression: 120,
      passion: 240,
    });
    expect(() => parseLayout("harmony:0,passion:120")).toThrow(/missing suppression/);
    expect(() => parseLayout("harmony:0,passion:120,unknown:240")).toThrow(/unknown quality/);
  });
});

describe("transforms", () => {
  it("pixel↔unit round trips", () => {
    const unit = { x: 0.37, y: -0.81 };
    const back = pixelToUnit(unitToPixel(unit, DEFAULT_META), DEFAULT_META);
    expect(back.x).toBeCloseTo(unit.x, 12);
    expect(back.y).toBeCloseTo(unit.y, 12);
  });

  it("flips the y axis (svg y grows downward)", () => {
    const px = unitToPixel({ x: 0, y: 0.5 }, DEFAULT_META);
    expect(px.py).toBeLessThan(DEFAULT_META.center);
  });

  it("angleOfUnit normalizes into [0, 360)", () => {
    expect(angleOfUnit({ x: 1, y: 0 })).toBe(0);
    expect(angleOfUnit({ x: 0, y: 1 })).toBe(90);
    expect(angleOfUnit({ x: 0, y: -1 })).toBe(270);
  });

  it("qualityOfAngle follows the half-open sectors", () => {
    const layout = DEFAULT_META.layout;
    expect(qualityOfAngle(layout, 0)).toBe("harmony");
    expect(qualityOfAngle(layout, 119.999)).toBe("harmony");
    expect(qualityOfAngle(layout, 120)).toBe("passion");
    expect(qualityOfAngle(layout, 359.999)).toBe("suppression");
    expect(qualityOfAngle(layout, 360)).toBe("harmony");
  });
});

describe("pointer placement", () => {
  it("drag to 60° mid-radius gives offset 60, length 0.5", () => {
    const pointer = pointerFor(DEFAULT_META, 60, 0.5);
    const placement = pointerToPlacement(DEFAULT_META, "harmony", pointer);
    expect(placement.kind).toBe("ok");
    if (placement.kind !== "ok") return;
    expect(placement.angle).toBeCloseTo(60, 9);
    expect(placement.length).toBeCloseTo(0.5, 9);
    expect(placement.clamped).toBe(false);
  });

  it("integer pixels stay within the 0.5° / 0.01 drag budget", () => {
    const exact = pointerFor(DEFAULT_META, 300, 0.5); // suppression, offset 60
    const pointer = { px: Math.round(exact.px), py: Math.round(exact.py) };
    const placement = pointerToPlacement(DEFAULT_META, "suppression", pointer);
    expect(placement.kind).toBe("ok");
    if (placement.kind !== "ok") return;
    expect(Math.abs(placement.angle - 60)).toBeLessThan(0.5);
    expect(Math.abs(placement.length - 0.5)).toBeLessThan(0.01);
  });

  it("clamps drags outside the circle to radius 1, keeping direction", () => {
    const pointer = pointerFor(DEFAULT_META, 100, 1.7);
    const placement = pointerToPlacement(DEFAULT_META, "harmony", pointer);
    expect(placement.kind).toBe("ok");
    if (placement.kind !== "ok") return;
    expect(placement.length).toBe(1);
    expect(placement.clamped).toBe(true);
    expect(placement.angle).toBeCloseTo(100, 9);
  });

  it("blocks cross-boundary drags with an explanatory notice", () => {
    const pointer = pointerFor(DEFAULT_META, 60, 0.5); // harmony territory
    const placement = pointerToPlacement(DEFAULT_META, "suppression", pointer);
    expect(placement.kind).toBe("blocked");
    if (placement.kind !== "blocked") return;
    expect(placement.notice).toMatch(/harmony/);
    expect(placement.notice).toMatch(/suppression/);
    expect(placement.notice).toMatch(/split\/re-categorize/);
  });

  it("blocks the exact center (no direction)", () => {
    const placement = pointerToPlacement(
      DEFAULT_META,
      "harmony",
      { px: DEFAULT_META.center, py: DEFAULT_META.center },
    );
    expect(placement.kind).toBe("blocked");
  });

  it("respects a mirrored layout", () => {
    const mirrored: SvgMeta = {
      ...DEFAULT_META,
      layout: { harmony: 0, suppression: 120, passion: 240 },
    };
    const pointer = pointerFor(mirrored, 150, 0.4); // 30° into suppression
    const placement = pointerToPlacement(mirrored, "suppression", pointer);
    expect(placement.kind).toBe("ok");
    if (placement.kind !== "ok") return;
    expect(placement.angle).toBeCloseTo(30, 9);
  });
});

const CHAIN_SVG =
  SVG_ROOT +
  "\n" +
  '  <line x1="320.000000" y1="320.000000" x2="390.501139" y2="279.296148" class="indicator indicator-employee-health" data-quality="harmony" stroke="#2a9d8f" stroke-width="2"/>\n' +
  '  <line x1="390.501139" y1="279.296148" x2="381.864685" y2="255.567685" class="indicator indicator-natural-zone" data-quality="harmony" stroke="#2a9d8f" stroke-width="2"/>\n' +
  '  <line x1="320.000000" y1="320.000000" x2="374.307943" y2="338.432642" class="final-arrow" data-classification="suppression" stroke="#222222" stroke-width="4" stroke-linecap="round"/>\n' +
  "</svg>\n";

describe("hit testing over the documented class scheme", () => {
  it("parses indicator elements with ids and qualities", () => {
    const els = indicatorElements(CHAIN_SVG);
    expect(els.map((e) => e.id)).toEqual(["employee-health", "natural-zone"]);
    expect(els[0]?.quality).toBe("harmony");
    expect(els[0]?.x1).toBe(320);
  });

  it("finds the nearest segment within tolerance", () => {
    const hit = hitTestIndicator(CHAIN_SVG, { px: 386, py: 266 }, 8);
    expect(hit?.id).toBe("natural-zone");
    expect(hitTestIndicator(CHAIN_SVG, { px: 100, py: 100 }, 8)).toBeNull();
  });

  it("does not treat the final arrow as an indicator", () => {
    expect(indicatorElements(CHAIN_SVG).some((e) => e.id === "arrow")).toBe(false);
  });
});

describe("reading displayed arrows back", () => {
  it("segment direction uses unit-circle orientation", () => {
    // Straight up on screen is 90° on the compass.
    expect(segmentDirectionDegrees({ x1: 320, y1: 320, x2: 320, y2: 200 })).toBe(90);
    expect(segmentDirectionDegrees({ x1: 320, y1: 320, x2: 420, y2: 320 })).toBe(0);
  });

  it("extracts the final arrow as a unit vector", () => {
    const meta = parseSvgMeta(CHAIN_SVG);
    const final = finalArrowFromSvg(CHAIN_SVG, meta);
    expect(final.x).toBeCloseTo((374.307943 - 320) / 288, 9);
    expect(final.y).toBeCloseTo((320 - 338.432642) / 288, 9);
  });

  it("reads a balanced marker as the zero vector", () => {
    const balanced =
      SVG_ROOT +
      '<circle cx="320.000000" cy="320.000000" r="3.000000" class="final-arrow" data-classification="balanced"/></svg>';
    const meta = parseSvgMeta(balanced);
    expect(finalArrowFromSvg(balanced, meta)).toEqual({ x: 0, y: 0 });
    expect(() => finalArrowFromSvg(SVG_ROOT + "</svg>", meta)).toThrow(/final-arrow/);
  });
});
