"""Sector arrows, the center triangle, and the final compass reading.

Construction: each sector's indicators are summed as corrected-length unit
vectors, the three sector arrow heads form a triangle, and the triangle's
center (centroid by default) gives the raw final arrow.  A bounded
perspicuity remap of the final magnitude spreads readings away from the
extremes without changing direction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import numpy as np

from . import _kernels
from .model import (
    DEFAULT_LAYOUT,
    QUALITIES,
    QUALITY_INDEX,
    SECTOR_SPAN,
    IndicatorTable,
    Quality,
    SectorLayout,
    Vec2,
    ZERO_VEC,
    absolute_angle,
)


class CenterMethod(str, Enum):
    CENTROID = "centroid"
    ORTHOCENTER = "orthocenter"


class Classification(str, Enum):
    HARMONY = "harmony"
    PASSION = "passion"
    SUPPRESSION = "suppression"
    BALANCED = "balanced"

    @staticmethod
    def from_quality(quality: Quality) -> "Classification":
        return Classification(quality.value)

    @property
    def quality(self) -> Quality | None:
        if self is Classification.BALANCED:
            return None
        return Quality(self.value)


class NonpositiveCountError(ValueError):
    pass


class DegenerateTriangleError(ValueError):
    pass


@dataclass(frozen=True)
class PerspicuityParams:
    """Bounded remap of arrow magnitude; fixed points at 0, 1/2, and 1."""

    alpha: float = 0.5
    beta: float = 0.5
    enabled: bool = True

    def __post_init__(self) -> None:
        for label, value in (("alpha", self.alpha), ("beta", self.beta)):
            if not (0.0 < value <= 1.0) or not math.isfinite(value):
                raise ValueError("perspicuity %s must lie in (0, 1], got %r" % (label, value))


@dataclass(frozen=True)
class CompassConfig:
    layout: SectorLayout = DEFAULT_LAYOUT
    center_method: CenterMethod = CenterMethod.CENTROID
    perspicuity: PerspicuityParams = field(default_factory=PerspicuityParams)
    balance_epsilon: float = 1e-9

    def __post_init__(self) -> None:
        if not (self.balance_epsilon > 0.0) or not math.isfinite(self.balance_epsilon):
            raise ValueError("balance_epsilon must be positive and finite")


def corrected_length(raw_length: float, sector_count: int) -> float:
    """``log2(1 + raw) / n``: monotone in raw, in [0, 1/n], exactly 1/n at raw 1."""
    if sector_count < 1:
        raise NonpositiveCountError("sector count must be >= 1, got %r" % sector_count)
    if not (0.0 <= raw_length <= 1.0) or not math.isfinite(raw_length):
        raise ValueError("raw length %r outside [0, 1]" % (raw_length,))
    return math.log2(1.0 + raw_length) / sector_count


def perspicuity_correct(magnitude: float, alpha: float = 0.5, beta: float = 0.5) -> float:
    """Piecewise power remap of [0, 1] onto itself around the half-way point."""
    if not (0.0 <= magnitude <= 1.0):
        raise ValueError("magnitude %r outside [0, 1]" % (magnitude,))
    for label, value in (("alpha", alpha), ("beta", beta)):
        if not (0.0 < value <= 1.0):
            raise ValueError("perspicuity %s must lie in (0, 1]" % label)
    if magnitude <= 0.5:
        return 0.5 * (2.0 * magnitude) ** alpha
    return 1.0 - 0.5 * (2.0 - 2.0 * magnitude) ** beta


def triangle_center(
    a: Vec2, b: Vec2, c: Vec2, method: CenterMethod = CenterMethod.CENTROID
) -> Vec2:
    if method is CenterMethod.CENTROID:
        return Vec2((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)
    return _orthocenter(a, b, c)


def _orthocenter(a: Vec2, b: Vec2, c: Vec2) -> Vec2:
    area2 = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
    if abs(area2) < 1e-12:
        raise DegenerateTriangleError(
            "orthocenter undefined for collinear or coincident vertices"
        )
    # Altitude through a vertex is orthogonal to the opposite side; intersect two.
    d1x, d1y = c.x - b.x, c.y - b.y
    d2x, d2y = c.x - a.x, c.y - a.y
    r1 = a.x * d1x + a.y * d1y
    r2 = b.x * d2x + b.y * d2y
    det = d1x * d2y - d1y * d2x
    return Vec2((r1 * d2y - r2 * d1y) / det, (d1x * r2 - d2x * r1) / det)


def classify(
    vector: Vec2,
    layout: SectorLayout = DEFAULT_LAYOUT,
    balance_epsilon: float = 1e-9,
) -> Classification:
    """Balanced below the epsilon, else the sector containing the direction."""
    if vector.magnitude < balance_epsilon:
        return Classification.BALANCED
    return Classification.from_quality(layout.classify_angle(vector.angle_degrees))


@dataclass(frozen=True)
class SectorArrow:
    quality: Quality
    vector: Vec2
    indicator_count: int


@dataclass(frozen=True)
class CompassReading:
    table: IndicatorTable
    config: CompassConfig
    sectors: Mapping[Quality, SectorArrow]
    triangle: tuple[Vec2, Vec2, Vec2]
    raw_final: Vec2
    final: Vec2
    classification: Classification


def table_arrays(
    table: IndicatorTable, layout: SectorLayout
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Kernel-ready rows in sorted-id order: quality codes, absolute angles, lengths."""
    rows = table.sorted_by_id()
    return _kernels.as_kernel_arrays(
        [QUALITY_INDEX[i.quality] for i in rows],
        [absolute_angle(i, layout) for i in rows],
        [i.raw_length for i in rows],
    )


def sector_vectors_from_arrays(
    qcodes: np.ndarray, angles_deg: np.ndarray, lengths: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    return _kernels.sector_components(qcodes, angles_deg, lengths)


def finalize_arrays(
    vectors: np.ndarray, config: CompassConfig
) -> tuple[Vec2, Vec2, Classification]:
    """Raw final, corrected final, and classification from (3, 2) sector heads."""
    heads = tuple(Vec2(float(vectors[i, 0]), float(vectors[i, 1])) for i in range(3))
    raw_final = triangle_center(*heads, method=config.center_method)
    magnitude = raw_final.magnitude
    if config.perspicuity.enabled and magnitude > 0.0:
        target = perspicuity_correct(
            magnitude, config.perspicuity.alpha, config.perspicuity.beta
        )
        final = raw_final.scaled(target / magnitude)
    else:
        final = raw_final
    # The balanced cutoff is judged on the raw final so the epsilon keeps its
    # meaning when the perspicuity remap steepens small magnitudes.
    classification = classify(raw_final, config.layout, config.balance_epsilon)
    return raw_final, final, classification


def sector_arrow(
    table: IndicatorTable, quality: Quality, config: CompassConfig | None = None
) -> SectorArrow:
    config = config or CompassConfig()
    vectors, counts = sector_vectors_from_arrays(*table_arrays(table, config.layout))
    idx = QUALITY_INDEX[quality]
    return SectorArrow(
        quality=quality,
        vector=Vec2(float(vectors[idx, 0]), float(vectors[idx, 1])),
        indicator_count=int(counts[idx]),
    )


def compass_reading(table: IndicatorTable, config: CompassConfig | None = None) -> CompassReading:
    """Full construction from table to classified final arrow."""
    config = config or CompassConfig()
    vectors, counts = sector_vectors_from_arrays(*table_arrays(table, config.layout))
    sectors = {
        q: SectorArrow(
            quality=q,
            vector=Vec2(float(vectors[QUALITY_INDEX[q], 0]), float(vectors[QUALITY_INDEX[q], 1])),
            indicator_count=int(counts[QUALITY_INDEX[q]]),
        )
        for q in QUALITIES
    }
    raw_final, final, classification = finalize_arrays(vectors, config)
    triangle = tuple(sectors[q].vector for q in QUALITIES)
    return CompassReading(
        table=table,
        config=config,
        sectors=sectors,
        triangle=triangle,  # type: ignore[arg-type]
        raw_final=raw_final,
        final=final,
        classification=classification,
    )
