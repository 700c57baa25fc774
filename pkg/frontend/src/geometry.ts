/**
 * View geometry: the inverse of the server SVG's published transform, pointer
 * placement, and hit-testing over the documented element class scheme.
 *
 * This is the only place the client does coordinate math, and it is strictly
 * view-side (pixels ↔ unit circle).  Aggregation results are never computed
 * here — committed arrows always come from server responses.
 */

import type { Quality } from "./types.js";
import { QUALITIES } from "./types.js";

export interface SvgMeta {
  /** Pixel coordinate of the circle center (x and y alike). */
  center: number;
  /** Pixels per unit-circle unit. */
  scale: number;
  /** Sector start angle per quality, degrees. */
  layout: Record<Quality, number>;
  stage: string;
}

export interface PixelPoint {
  px: number;
  py: number;
}

export interface UnitPoint {
  x: number;
  y: number;
}

const SECTOR_SPAN = 120;

/** Parse a `quality:start,…` layout directive. */
export function parseLayout(directive: string): Record<Quality, number> {
  const layout: Partial<Record<Quality, number>> = {};
  for (const part of directive.split(",")) {
    const [name, start] = part.split(":");
    if (name === undefined || start === undefined) {
      throw new Error(`malformed layout directive: ${directive}`);
    }
    const quality = name.trim() as Quality;
    if (!QUALITIES.includes(quality)) {
      throw new Error(`unknown quality in layout directive: ${name}`);
    }
    layout[quality] = Number(start);
  }
  for (const quality of QUALITIES) {
    if (layout[quality] === undefined) {
      throw new Error(`layout directive missing ${quality}: ${directive}`);
    }
  }
  return layout as Record<Quality, number>;
}

function rootAttr(svg: string, name: string): string {
  const match = svg.match(new RegExp(`${name}="([^"]*)"`));
  if (match === null || match[1] === undefined) {
    throw new Error(`SVG root is missing ${name}`);
  }
  return match[1];
}

/** Read the transform and layout the server publishes on the SVG root. */
export function parseSvgMeta(svg: string): SvgMeta {
  return {
    center: Number(rootAttr(svg, "data-center")),
    scale: Number(rootAttr(svg, "data-scale")),
    layout: parseLayout(rootAttr(svg, "data-layout")),
    stage: rootAttr(svg, "data-stage"),
  };
}

/** Unit-circle coordinates → pixels (the server's forward transform). */
export function unitToPixel(point: UnitPoint, meta: SvgMeta): PixelPoint {
  return {
    px: meta.center + meta.scale * point.x,
    py: meta.center - meta.scale * point.y,
  };
}

/** Pixels → unit-circle coordinates (inverse viewbox transform). */
export function pixelToUnit(point: PixelPoint, meta: SvgMeta): UnitPoint {
  return {
    x: (point.px - meta.center) / meta.scale,
    y: (meta.center - point.py) / meta.scale,
  };
}

/** Absolute direction of a unit-circle point, degrees in [0, 360). */
export function angleOfUnit(point: UnitPoint): number {
  const deg = (Math.atan2(point.y, point.x) * 180) / Math.PI;
  return ((deg % 360) + 360) % 360;
}

/** Which sector of the layout contains an absolute angle. */
export function qualityOfAngle(layout: Record<Quality, number>, angle: number): Quality {
  const a = ((angle % 360) + 360) % 360;
  for (const quality of QUALITIES) {
    const offset = (a - layout[quality] + 360) % 360;
    if (offset < SECTOR_SPAN) return quality;
  }
  /* istanbul ignore next -- three 120° sectors tile the circle */
  throw new Error(`angle ${angle} not inside any sector`);
}

export type Placement =
  | { kind: "ok"; angle: number; length: number; clamped: boolean }
  | { kind: "blocked"; notice: string };

/**
 * Turn a pointer position into a within-sector placement for an indicator of
 * the given quality.
 *
 * Outside the circle the length clamps to 1 (direction kept).  A pointer in a
 * *different* sector is blocked with a notice: changing an indicator's
 * quality is a deliberate re-categorization (split / re-categorize), not a
 * drag side effect.
 */
export function pointerToPlacement(
  meta: SvgMeta,
  quality: Quality,
  pointer: PixelPoint,
): Placement {
  const unit = pixelToUnit(pointer, meta);
  const radius = Math.hypot(unit.x, unit.y);
  if (radius === 0) {
    return { kind: "blocked", notice: "pointer is at the exact center; no direction to place the arrow" };
  }
  const absolute = angleOfUnit(unit);
  const offset = (absolute - meta.layout[quality] + 360) % 360;
  if (offset >= SECTOR_SPAN) {
    const target = qualityOfAngle(meta.layout, absolute);
    return {
      kind: "blocked",
      notice:
        `drag across the sector boundary blocked: that position lies in ${target}, ` +
        `but the indicator is categorized as ${quality}; ` +
        `changing quality is a split/re-categorize decision, not a drag`,
    };
  }
  return {
    kind: "ok",
    angle: offset,
    length: Math.min(radius, 1),
    clamped: radius > 1,
  };
}

export interface IndicatorElement {
  id: string;
  quality: Quality;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

const INDICATOR_LINE = /<line\s+([^>]*?)\/>/g;

function attrOf(attrs: string, name: string): string | null {
  const match = attrs.match(new RegExp(`${name}="([^"]*)"`));
  return match === null ? null : (match[1] ?? null);
}

/** Every per-indicator chain segment in a rendered SVG, in document order. */
export function indicatorElements(svg: string): IndicatorElement[] {
  const out: IndicatorElement[] = [];
  for (const match of svg.matchAll(INDICATOR_LINE)) {
    const attrs = match[1] ?? "";
    const cls = attrOf(attrs, "class");
    if (cls === null) continue;
    const classes = cls.split(/\s+/);
    if (!classes.includes("indicator")) continue;
    const idClass = classes.find((c) => c.startsWith("indicator-"));
    if (idClass === undefined) continue;
    out.push({
      id: idClass.slice("indicator-".length),
      quality: (attrOf(attrs, "data-quality") ?? "harmony") as Quality,
      x1: Number(attrOf(attrs, "x1")),
      y1: Number(attrOf(attrs, "y1")),
      x2: Number(attrOf(attrs, "x2")),
      y2: Number(attrOf(attrs, "y2")),
    });
  }
  return out;
}

function segmentDistance(el: IndicatorElement, p: PixelPoint): number {
  const dx = el.x2 - el.x1;
  const dy = el.y2 - el.y1;
  const lengthSq = dx * dx + dy * dy;
  let t = 0;
  if (lengthSq > 0) {
    t = ((p.px - el.x1) * dx + (p.py - el.y1) * dy) / lengthSq;
    t = Math.max(0, Math.min(1, t));
  }
  return Math.hypot(p.px - (el.x1 + t * dx), p.py - (el.y1 + t * dy));
}

export interface HitResult {
  id: string;
  quality: Quality;
  distancePx: number;
}

/**
 * Nearest indicator chain segment within `tolerancePx` of the pointer, or
 * null.  Keyed to the documented `indicator indicator-<id>` class scheme.
 */
export function hitTestIndicator(
  svg: string,
  pointer: PixelPoint,
  tolerancePx = 8,
): HitResult | null {
  let best: HitResult | null = null;
  for (const el of indicatorElements(svg)) {
    const distancePx = segmentDistance(el, pointer);
    if (distancePx <= tolerancePx && (best === null || distancePx < best.distancePx)) {
      best = { id: el.id, quality: el.quality, distancePx };
    }
  }
  return best;
}

/**
 * Direction and pixel length of an SVG line segment in unit-circle terms.
 * Used to read *displayed* angles back off server-rendered output.
 */
export function segmentDirectionDegrees(
  el: { x1: number; y1: number; x2: number; y2: number },
): number {
  // The SVG y-axis points down; the unit circle's points up.
  return angleOfUnit({ x: el.x2 - el.x1, y: el.y1 - el.y2 });
}

/** The rendered final arrow (line) or balanced marker (circle at center). */
export function finalArrowFromSvg(svg: string, meta: SvgMeta): UnitPoint {
  const line = svg.match(/<line\s+([^>]*?class="final-arrow"[^>]*?)\/>/);
  if (line !== null) {
    const attrs = line[1] ?? "";
    return pixelToUnit(
      { px: Number(attrOf(attrs, "x2")), py: Number(attrOf(attrs, "y2")) },
      meta,
    );
  }
  const dot = svg.match(/<circle\s+[^>]*?class="final-arrow"[^>]*?\/>/);
  if (dot !== null) return { x: 0, y: 0 };
  throw new Error("no final-arrow element in SVG");
}
