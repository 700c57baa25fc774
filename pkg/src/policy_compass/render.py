"""Deterministic SVG rendering of readings, sphere nests, and trajectories.

The same inputs always yield byte-identical documents: element order is
fixed, floats use fixed six-decimal formatting, and nothing depends on dict
iteration order.  Interactive clients key off the stable class scheme
(``sector-<quality>``, ``indicator-<id>``, ``final-arrow``) and invert the
viewbox transform published as ``data-center`` / ``data-scale`` on the root.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence
from xml.etree import ElementTree

from .aggregate import (
    Classification,
    CompassConfig,
    CompassReading,
    corrected_length,
)
from .model import (
    QUALITIES,
    Quality,
    Sphere,
    Vec2,
    absolute_angle,
)
from .robustness import RobustnessGrade
from .spheres import EcologicalCompass

SVG_NS = "http://www.w3.org/2000/svg"


class RenderStage(str, Enum):
    CHAINS = "chains"
    SECTORS = "sectors"
    TRIANGLE = "triangle"
    FINAL = "final"
    SPHERES = "spheres"
    COMPOSITION = "composition"
    TRAJECTORY = "trajectory"


_COMPASS_STAGES = (
    RenderStage.CHAINS,
    RenderStage.SECTORS,
    RenderStage.TRIANGLE,
    RenderStage.FINAL,
)

_QUALITY_COLOR = {
    Quality.HARMONY: "#2a9d8f",
    Quality.PASSION: "#e76f51",
    Quality.SUPPRESSION: "#6d597a",
}
_SPHERE_COLOR = {
    Sphere.ECO: "#2a9d8f",
    Sphere.SOCIO: "#457b9d",
    Sphere.ECONO: "#b5838d",
}
_SPHERE_ORDER = (Sphere.ECO, Sphere.SOCIO, Sphere.ECONO)


@dataclass(frozen=True)
class RenderOptions:
    stage: RenderStage = RenderStage.FINAL
    size_px: int = 640
    show_labels: bool = True
    robustness_annotation: bool = False

    def __post_init__(self) -> None:
        if self.size_px < 64:
            raise ValueError("size_px must be at least 64")


def _fmt(value: float) -> str:
    return "%.6f" % value


class _Doc:
    """Tiny ordered SVG assembler; avoids any nondeterministic serialization."""

    def __init__(self, size: int, extra_root_attrs: "dict[str, str] | None" = None):
        self.size = size
        self.center = size / 2.0
        self.scale = size / 2.0 * 0.9
        attrs = {
            "xmlns": SVG_NS,
            "width": str(size),
            "height": str(size),
            "viewBox": "0 0 %d %d" % (size, size),
            "data-center": _fmt(self.center),
            "data-scale": _fmt(self.scale),
        }
        attrs.update(extra_root_attrs or {})
        self.lines = ["<svg %s>" % " ".join('%s="%s"' % kv for kv in attrs.items())]

    def point(self, v: Vec2, radius: float = 1.0) -> tuple[float, float]:
        """Unit-circle coordinates to pixels; SVG y grows downward."""
        return (self.center + self.scale * radius * v.x,
                self.center - self.scale * radius * v.y)

    def add(self, tag: str, text: "str | None" = None, **attrs: str) -> None:
        rendered = " ".join('%s="%s"' % (k.replace("_", "-"), _escape(v))
                            for k, v in attrs.items())
        if text is None:
            self.lines.append("  <%s %s/>" % (tag, rendered))
        else:
            self.lines.append("  <%s %s>%s</%s>" % (tag, rendered, _escape(text), tag))

    def line(self, a: tuple[float, float], b: tuple[float, float], **attrs: str) -> None:
        self.add(
            "line",
            x1=_fmt(a[0]), y1=_fmt(a[1]), x2=_fmt(b[0]), y2=_fmt(b[1]),
            **attrs,
        )

    def finish(self) -> str:
        return "\n".join(self.lines + ["</svg>"]) + "\n"


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def _draw_frame(doc: _Doc, config: CompassConfig, show_labels: bool) -> None:
    doc.add(
        "circle",
        **{"class": "compass-rim"},
        cx=_fmt(doc.center), cy=_fmt(doc.center), r=_fmt(doc.scale),
        fill="none", stroke="#999999", stroke_width="1",
    )
    for quality in QUALITIES:
        start = config.layout.start(quality)
        tip = doc.point(Vec2.from_polar(start, 1.0))
        doc.line(
            (doc.center, doc.center), tip,
            **{"class": "boundary boundary-%s" % quality.value},
            stroke="#cccccc", stroke_width="1", stroke_dasharray="4 3",
        )
    if show_labels:
        for quality in QUALITIES:
            mid = config.layout.start(quality) + 60.0
            pos = doc.point(Vec2.from_polar(mid, 0.82))
            doc.add(
                "text",
                quality.value,
                **{"class": "label label-%s" % quality.value},
                x=_fmt(pos[0]), y=_fmt(pos[1]),
                fill=_QUALITY_COLOR[quality],
                font_size="14", text_anchor="middle",
            )


def _draw_chains(doc: _Doc, reading: CompassReading) -> None:
    layout = reading.config.layout
    for quality in QUALITIES:
        rows = sorted(reading.table.by_quality(quality), key=lambda i: i.id)
        if not rows:
            continue
        cursor = Vec2(0.0, 0.0)
        for ind in rows:
            term = corrected_length(ind.raw_length, len(rows))
            head = cursor + Vec2.from_polar(absolute_angle(ind, layout), term)
            doc.line(
                doc.point(cursor), doc.point(head),
                **{"class": "indicator indicator-%s" % ind.id},
                data_quality=quality.value,
                stroke=_QUALITY_COLOR[quality], stroke_width="2",
            )
            cursor = head


def _draw_sector_arrows(doc: _Doc, reading: CompassReading) -> None:
    for quality in QUALITIES:
        arrow = reading.sectors[quality]
        doc.line(
            (doc.center, doc.center), doc.point(arrow.vector),
            **{"class": "sector-arrow sector-%s" % quality.value},
            data_count=str(arrow.indicator_count),
            stroke=_QUALITY_COLOR[quality], stroke_width="3",
        )


def _draw_triangle(doc: _Doc, reading: CompassReading, muted: bool) -> None:
    points = " ".join(
        "%s,%s" % (_fmt(px), _fmt(py))
        for px, py in (doc.point(v) for v in reading.triangle)
    )
    doc.add(
        "polygon",
        **{"class": "triangle"},
        points=points,
        fill="none",
        stroke="#888888" if muted else "#444444",
        stroke_width="1" if muted else "2",
    )


def _draw_final(doc: _Doc, final: Vec2, classification: Classification,
                balanced: bool) -> None:
    if balanced:
        doc.add(
            "circle",
            **{"class": "final-arrow"},
            cx=_fmt(doc.center), cy=_fmt(doc.center), r="3.000000",
            fill="#222222",
            data_classification=classification.value,
        )
        return
    doc.line(
        (doc.center, doc.center), doc.point(final),
        **{"class": "final-arrow"},
        data_classification=classification.value,
        stroke="#222222", stroke_width="4", stroke_linecap="round",
    )


def _draw_badge(doc: _Doc, grade: "RobustnessGrade | None", enabled: bool) -> None:
    if not enabled or grade is None or grade.robust:
        return
    doc.add(
        "rect",
        **{"class": "robustness-badge-box"},
        x="8", y="8", width="150", height="22", rx="4",
        fill="#ffe8cc", stroke="#e07a00", stroke_width="1",
    )
    doc.add(
        "text",
        "caution: not robust",
        **{"class": "robustness-badge"},
        x="16", y="23", fill="#a04a00", font_size="12",
        data_reasons="; ".join(grade.reasons),
    )


def render_compass(
    reading: CompassReading,
    options: "RenderOptions | None" = None,
    grade: "RobustnessGrade | None" = None,
) -> str:
    """Render one reading at the requested construction stage.

    Stages build the picture in construction order: indicator chains, sector
    arrows, the center triangle, then the final arrow.  Exactly one element
    carries the ``final-arrow`` class at the final stage; a balanced reading
    draws it as a center dot instead of a zero-length line.
    """
    options = options or RenderOptions()
    if options.stage not in _COMPASS_STAGES:
        raise ValueError(
            "render_compass handles stages %s, got %r"
            % ("/".join(s.value for s in _COMPASS_STAGES), options.stage.value)
        )
    doc = _Doc(
        options.size_px,
        {
            "data-layout": reading.config.layout.to_directive(),
            "data-stage": options.stage.value,
        },
    )
    _draw_frame(doc, reading.config, options.show_labels)
    if options.stage in (RenderStage.CHAINS, RenderStage.SECTORS):
        _draw_chains(doc, reading)
    if options.stage is RenderStage.SECTORS:
        _draw_sector_arrows(doc, reading)
    if options.stage is RenderStage.TRIANGLE:
        _draw_sector_arrows(doc, reading)
        _draw_triangle(doc, reading, muted=False)
    if options.stage is RenderStage.FINAL:
        _draw_triangle(doc, reading, muted=True)
        balanced = reading.classification is Classification.BALANCED
        _draw_final(doc, reading.final, reading.classification, balanced)
    _draw_badge(doc, grade, options.robustness_annotation)
    return doc.finish()


def render_ecological(
    compass: EcologicalCompass,
    options: "RenderOptions | None" = None,
    grade: "RobustnessGrade | None" = None,
) -> str:
    """Concentric sphere circles with per-sphere finals and the composed arrow.

    Circle radii are proportional to the sphere weights; each sphere's final
    arrow is drawn inside its own circle, and the composition stage adds the
    composed arrow (class ``final-arrow``) at the outer scale.
    """
    options = options or RenderOptions(stage=RenderStage.COMPOSITION)
    if options.stage not in (RenderStage.SPHERES, RenderStage.COMPOSITION):
        raise ValueError("render_ecological handles spheres/composition stages")
    config = compass.readings[Sphere.ECO].config
    doc = _Doc(
        options.size_px,
        {
            "data-layout": config.layout.to_directive(),
            "data-stage": options.stage.value,
        },
    )
    max_weight = max(compass.weights.value(s) for s in _SPHERE_ORDER)
    for sphere in _SPHERE_ORDER:
        fraction = compass.weights.value(sphere) / max_weight
        doc.add(
            "circle",
            **{"class": "sphere sphere-%s" % sphere.value},
            cx=_fmt(doc.center), cy=_fmt(doc.center),
            r=_fmt(doc.scale * fraction),
            data_weight=repr(compass.weights.value(sphere)),
            fill="none", stroke=_SPHERE_COLOR[sphere], stroke_width="1.5",
        )
    for quality in QUALITIES:
        tip = doc.point(Vec2.from_polar(config.layout.start(quality), 1.0))
        doc.line(
            (doc.center, doc.center), tip,
            **{"class": "boundary boundary-%s" % quality.value},
            stroke="#cccccc", stroke_width="1", stroke_dasharray="4 3",
        )
    if options.show_labels:
        for sphere in _SPHERE_ORDER:
            fraction = compass.weights.value(sphere) / max_weight
            doc.add(
                "text",
                sphere.value,
                **{"class": "label label-%s" % sphere.value},
                x=_fmt(doc.center + 4.0),
                y=_fmt(doc.center - doc.scale * fraction + 14.0),
                fill=_SPHERE_COLOR[sphere], font_size="12",
            )
    for sphere in _SPHERE_ORDER:
        final = compass.readings[sphere].final
        if final.magnitude == 0.0:
            continue
        fraction = compass.weights.value(sphere) / max_weight
        doc.line(
            (doc.center, doc.center), doc.point(final, radius=fraction),
            **{"class": "sphere-final sphere-final-%s" % sphere.value},
            stroke=_SPHERE_COLOR[sphere], stroke_width="2.5",
        )
    if options.stage is RenderStage.COMPOSITION:
        balanced = compass.classification is Classification.BALANCED
        _draw_final(doc, compass.composed_final, compass.classification, balanced)
    _draw_badge(doc, grade, options.robustness_annotation)
    return doc.finish()


def render_trajectory(
    readings: Sequence[CompassReading],
    options: "RenderOptions | None" = None,
) -> str:
    """Path of the final arrow tip across ordered snapshots.

    Points carry their snapshot time and classification; a point where the
    classification changed from the previous snapshot gets the extra class
    ``classification-change``.  Identical consecutive snapshots collapse to
    a zero-length path flagged ``data-no-change``.
    """
    options = options or RenderOptions(stage=RenderStage.TRAJECTORY)
    if options.stage is not RenderStage.TRAJECTORY:
        raise ValueError("render_trajectory handles only the trajectory stage")
    if not readings:
        raise ValueError("trajectory needs at least one snapshot")
    config = readings[0].config
    doc = _Doc(
        options.size_px,
        {
            "data-layout": config.layout.to_directive(),
            "data-stage": options.stage.value,
        },
    )
    _draw_frame(doc, config, options.show_labels)
    tips = [doc.point(r.final) for r in readings]
    if len(readings) > 1:
        no_change = all(
            readings[k].final == readings[k - 1].final for k in range(1, len(readings))
        )
        doc.add(
            "polyline",
            **{"class": "trajectory-path"},
            points=" ".join("%s,%s" % (_fmt(x), _fmt(y)) for x, y in tips),
            data_no_change="true" if no_change else "false",
            fill="none", stroke="#555555", stroke_width="2",
        )
        if no_change and options.show_labels:
            doc.add(
                "text", "no change",
                **{"class": "no-change-flag"},
                x=_fmt(tips[0][0] + 6.0), y=_fmt(tips[0][1] - 6.0),
                fill="#555555", font_size="12",
            )
    for index, reading in enumerate(readings):
        classes = "trajectory-point"
        if index > 0 and readings[index].classification is not readings[index - 1].classification:
            classes += " classification-change"
        time = reading.table.snapshot_time
        doc.add(
            "circle",
            **{"class": classes},
            cx=_fmt(tips[index][0]), cy=_fmt(tips[index][1]), r="4.000000",
            fill="#222222",
            data_time=time.isoformat() if time else str(index),
            data_classification=reading.classification.value,
        )
        if options.show_labels:
            doc.add(
                "text",
                time.isoformat() if time else "t%d" % index,
                **{"class": "trajectory-label"},
                x=_fmt(tips[index][0] + 6.0), y=_fmt(tips[index][1] + 4.0),
                fill="#333333", font_size="10",
            )
    return doc.finish()


def svg_transform(svg_text: str) -> tuple[float, float]:
    """(center, scale) published on the document root."""
    root = ElementTree.fromstring(svg_text)
    return float(root.attrib["data-center"]), float(root.attrib["data-scale"])


def _find_by_class(svg_text: str, token: str) -> list[ElementTree.Element]:
    root = ElementTree.fromstring(svg_text)
    found = []
    for element in root.iter():
        classes = element.attrib.get("class", "").split()
        if token in classes:
            found.append(element)
    return found


def extract_final_arrow(svg_text: str) -> Vec2:
    """Invert the viewbox transform on the unique ``final-arrow`` element.

    A balanced center dot reads back as the zero vector.
    """
    center, scale = svg_transform(svg_text)
    elements = _find_by_class(svg_text, "final-arrow")
    if len(elements) != 1:
        raise ValueError("expected exactly one final-arrow element, found %d" % len(elements))
    element = elements[0]
    if element.tag.endswith("circle") or "cx" in element.attrib:
        return Vec2(
            (float(element.attrib["cx"]) - center) / scale,
            (center - float(element.attrib["cy"])) / scale,
        )
    return Vec2(
        (float(element.attrib["x2"]) - center) / scale,
        (center - float(element.attrib["y2"])) / scale,
    )


def extract_sphere_radii(svg_text: str) -> dict[str, float]:
    radii = {}
    for sphere in _SPHERE_ORDER:
        elements = _find_by_class(svg_text, "sphere-%s" % sphere.value)
        if len(elements) == 1:
            radii[sphere.value] = float(elements[0].attrib["r"])
    return radii
