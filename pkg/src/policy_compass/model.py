"""Core domain types: qualities, sector layout, indicators, and tables.

The circle is split into three 120-degree sectors, one per quality.  An
indicator lives inside its quality's sector at a within-sector offset and
carries a raw length in [0, 1].  All validation happens at construction;
every frozen dataclass in this module is immutable once built.
"""
from __future__ import annotations

import math
import unicodedata
from dataclasses import dataclass, field, replace
from datetime import datetime
from enum import Enum
from typing import Iterable, Mapping

SECTOR_SPAN = 120.0
FULL_CIRCLE = 360.0


class Quality(str, Enum):
    HARMONY = "harmony"
    PASSION = "passion"
    SUPPRESSION = "suppression"

    @property
    def next(self) -> "Quality":
        """Successor in the fixed circular order harmony -> passion -> suppression."""
        return _NEXT[self]

    @property
    def previous(self) -> "Quality":
        return _PREVIOUS[self]


QUALITIES: tuple[Quality, Quality, Quality] = (
    Quality.HARMONY,
    Quality.PASSION,
    Quality.SUPPRESSION,
)
_NEXT = {
    Quality.HARMONY: Quality.PASSION,
    Quality.PASSION: Quality.SUPPRESSION,
    Quality.SUPPRESSION: Quality.HARMONY,
}
_PREVIOUS = {v: k for k, v in _NEXT.items()}

QUALITY_INDEX: dict[Quality, int] = {q: i for i, q in enumerate(QUALITIES)}


class Sphere(str, Enum):
    ECO = "eco"
    SOCIO = "socio"
    ECONO = "econo"
    UNSPECIFIED = "unspecified"


SPHERES: tuple[Sphere, Sphere, Sphere] = (Sphere.ECO, Sphere.SOCIO, Sphere.ECONO)


class ZeroVectorAngle(ValueError):
    """Raised when the angle of a zero vector is requested."""


@dataclass(frozen=True)
class Vec2:
    x: float
    y: float

    @staticmethod
    def from_polar(angle_degrees: float, magnitude: float) -> "Vec2":
        rad = math.radians(angle_degrees)
        return Vec2(magnitude * math.cos(rad), magnitude * math.sin(rad))

    @property
    def magnitude(self) -> float:
        return math.hypot(self.x, self.y)

    @property
    def angle_degrees(self) -> float:
        """Direction in [0, 360).  Undefined for the zero vector: callers must branch."""
        if self.x == 0.0 and self.y == 0.0:
            raise ZeroVectorAngle("angle of the zero vector is undefined")
        return math.degrees(math.atan2(self.y, self.x)) % FULL_CIRCLE

    def scaled(self, factor: float) -> "Vec2":
        return Vec2(self.x * factor, self.y * factor)

    def rotated(self, delta_degrees: float) -> "Vec2":
        rad = math.radians(delta_degrees)
        c, s = math.cos(rad), math.sin(rad)
        return Vec2(self.x * c - self.y * s, self.x * s + self.y * c)

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def distance_to(self, other: "Vec2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


ZERO_VEC = Vec2(0.0, 0.0)


def circular_delta_degrees(a: float, b: float) -> float:
    """Unsigned circular distance between two directions, in [0, 180]."""
    d = abs(a - b) % FULL_CIRCLE
    return min(d, FULL_CIRCLE - d)


class LayoutError(ValueError):
    """Raised for sector layouts that do not trisect the circle."""


@dataclass(frozen=True)
class SectorLayout:
    """Start angle (degrees, counterclockwise from east) of each sector.

    The three 120-degree spans must partition the circle exactly, so the
    starts are pairwise 120 degrees apart; any rotation and either circular
    ordering of the qualities is allowed.
    """

    harmony_start: float = 0.0
    passion_start: float = 120.0
    suppression_start: float = 240.0

    def __post_init__(self) -> None:
        starts = [self.harmony_start, self.passion_start, self.suppression_start]
        for value in starts:
            if not math.isfinite(value):
                raise LayoutError("sector start angles must be finite")
        norm = sorted(v % FULL_CIRCLE for v in starts)
        gaps = (norm[1] - norm[0], norm[2] - norm[1])
        if any(abs(g - SECTOR_SPAN) > 1e-9 for g in gaps):
            raise LayoutError(
                "sector starts must be pairwise 120 degrees apart, got %r" % (norm,)
            )

    def start(self, quality: Quality) -> float:
        if quality is Quality.HARMONY:
            return self.harmony_start % FULL_CIRCLE
        if quality is Quality.PASSION:
            return self.passion_start % FULL_CIRCLE
        return self.suppression_start % FULL_CIRCLE

    def classify_angle(self, angle_degrees: float) -> Quality:
        """Quality whose half-open span [start, start + 120) contains the angle."""
        a = angle_degrees % FULL_CIRCLE
        for quality in QUALITIES:
            if (a - self.start(quality)) % FULL_CIRCLE < SECTOR_SPAN:
                return quality
        raise AssertionError("sector spans partition the circle")

    def rotated(self, delta_degrees: float) -> "SectorLayout":
        return SectorLayout(
            (self.harmony_start + delta_degrees) % FULL_CIRCLE,
            (self.passion_start + delta_degrees) % FULL_CIRCLE,
            (self.suppression_start + delta_degrees) % FULL_CIRCLE,
        )

    def start_neighbor(self, quality: Quality) -> Quality:
        """Quality whose span ends at this quality's start boundary."""
        target = self.start(quality)
        for other in QUALITIES:
            if other is quality:
                continue
            if abs((self.start(other) + SECTOR_SPAN) % FULL_CIRCLE - target) < 1e-9:
                return other
        raise AssertionError("layout has no gaps")

    def end_neighbor(self, quality: Quality) -> Quality:
        """Quality whose span begins at this quality's end boundary."""
        target = (self.start(quality) + SECTOR_SPAN) % FULL_CIRCLE
        for other in QUALITIES:
            if other is quality:
                continue
            if abs(self.start(other) - target) < 1e-9:
                return other
        raise AssertionError("layout has no gaps")

    def to_directive(self) -> str:
        parts = []
        for quality in QUALITIES:
            parts.append("%s:%s" % (quality.value, format_number(self.start(quality))))
        return ",".join(parts)

    @staticmethod
    def from_directive(text: str) -> "SectorLayout":
        """Parse ``harmony:0,passion:120,suppression:240`` style layout strings."""
        starts: dict[Quality, float] = {}
        for chunk in text.split(","):
            name, _, raw = chunk.strip().partition(":")
            try:
                quality = Quality(name.strip())
            except ValueError:
                raise LayoutError("unknown quality %r in layout" % name.strip())
            try:
                starts[quality] = float(raw)
            except ValueError:
                raise LayoutError("bad angle %r for %s in layout" % (raw, name))
        if set(starts) != set(QUALITIES):
            raise LayoutError("layout must name all three qualities exactly once")
        return SectorLayout(
            starts[Quality.HARMONY], starts[Quality.PASSION], starts[Quality.SUPPRESSION]
        )


DEFAULT_LAYOUT = SectorLayout()


def format_number(value: float) -> str:
    """Shortest decimal form that round-trips exactly; integers drop the dot."""
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(float(value))


# Validation issue codes for indicator construction.
OFFSET_OUT_OF_RANGE = "offset_out_of_range"
LENGTH_OUT_OF_RANGE = "length_out_of_range"
BOUNDARY_SITTING = "boundary_sitting"
EMPTY_NAME = "empty_name"
CONTROL_CHARACTER = "control_character"


def _has_control_characters(text: str) -> bool:
    # All Cc controls (C0, DEL, C1 -- NEL among them) plus the Unicode line
    # and paragraph separators; any of these breaks line-oriented formats.
    return any(
        unicodedata.category(ch) == "Cc" or ch in "  " for ch in text
    )


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    field: str
    message: str


class IndicatorValidationError(ValueError):
    """Carries the complete list of violations, not just the first one."""

    def __init__(self, issues: list[ValidationIssue]):
        self.issues = tuple(issues)
        super().__init__("; ".join(i.message for i in issues))


def indicator_issues(
    name: str,
    offset: float,
    raw_length: float,
    boundary_ok: bool = False,
) -> list[ValidationIssue]:
    """Collect every violation of the indicator invariants.

    The offset domain is the half-open [0, 120).  The two boundaries are
    special: offset 0 sits on the sector's start boundary and needs an
    explicit ``boundary_ok``; offset exactly 120 aliases the next sector's
    start and is accepted only under ``boundary_ok`` (it arises when a table
    authored in absolute angles pins an arrow to its sector's end boundary).
    """
    issues: list[ValidationIssue] = []
    if not name or not name.strip():
        issues.append(ValidationIssue(EMPTY_NAME, "name", "name must be nonempty"))
    elif _has_control_characters(name):
        issues.append(
            ValidationIssue(
                CONTROL_CHARACTER, "name", "name must not contain control characters"
            )
        )
    if not math.isfinite(offset) or offset < 0.0 or offset > SECTOR_SPAN or (
        offset == SECTOR_SPAN and not boundary_ok
    ):
        issues.append(
            ValidationIssue(
                OFFSET_OUT_OF_RANGE,
                "offset",
                "offset %r outside the half-open interval [0, 120)" % (offset,),
            )
        )
    elif offset == 0.0 and not boundary_ok:
        issues.append(
            ValidationIssue(
                BOUNDARY_SITTING,
                "offset",
                "offset sits exactly on a sector boundary; "
                "set boundary_ok or choose another statistic",
            )
        )
    if not math.isfinite(raw_length) or raw_length < 0.0 or raw_length > 1.0:
        issues.append(
            ValidationIssue(
                LENGTH_OUT_OF_RANGE,
                "raw_length",
                "raw length %r outside [0, 1]" % (raw_length,),
            )
        )
    return issues


@dataclass(frozen=True)
class Indicator:
    id: str
    name: str
    quality: Quality
    offset: float
    raw_length: float
    boundary_ok: bool = False
    notes: str = ""
    timestamp: datetime | None = None

    def __post_init__(self) -> None:
        # Leading/trailing whitespace is presentation noise the line-oriented
        # CSV form cannot preserve, so equality and serialization round-trips
        # demand one canonical spelling: normalize before validating.
        object.__setattr__(self, "id", str(self.id).strip())
        object.__setattr__(self, "name", str(self.name).strip())
        object.__setattr__(self, "notes", str(self.notes).strip())
        issues = indicator_issues(self.name, self.offset, self.raw_length, self.boundary_ok)
        if not self.id:
            issues.insert(0, ValidationIssue(EMPTY_NAME, "id", "id must be nonempty"))
        elif _has_control_characters(self.id):
            issues.insert(
                0,
                ValidationIssue(
                    CONTROL_CHARACTER, "id", "id must not contain control characters"
                ),
            )
        if _has_control_characters(self.notes):
            issues.append(
                ValidationIssue(
                    CONTROL_CHARACTER,
                    "notes",
                    "notes must not contain control characters",
                )
            )
        if issues:
            raise IndicatorValidationError(issues)


def validate_indicator(
    *,
    id: str,
    name: str,
    quality: Quality,
    offset: float,
    raw_length: float,
    boundary_ok: bool = False,
    notes: str = "",
    timestamp: datetime | None = None,
) -> Indicator:
    """Build an indicator, raising with the full violation list on failure."""
    return Indicator(
        id=id,
        name=name,
        quality=quality,
        offset=offset,
        raw_length=raw_length,
        boundary_ok=boundary_ok,
        notes=notes,
        timestamp=timestamp,
    )


def absolute_angle(indicator: Indicator, layout: SectorLayout = DEFAULT_LAYOUT) -> float:
    """Absolute direction of the indicator arrow under the layout, in [0, 360)."""
    return (layout.start(indicator.quality) + indicator.offset) % FULL_CIRCLE


class TableValidationError(ValueError):
    pass


@dataclass(frozen=True)
class IndicatorTable:
    """One institution's indicator snapshot for a single sphere."""

    institution: str
    sphere: Sphere = Sphere.UNSPECIFIED
    indicators: tuple[Indicator, ...] = ()
    snapshot_time: datetime | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "institution", str(self.institution).strip())
        if _has_control_characters(self.institution):
            raise TableValidationError(
                "institution must not contain control characters"
            )
        seen: set[str] = set()
        for ind in self.indicators:
            if ind.id in seen:
                raise TableValidationError("duplicate indicator id %r" % ind.id)
            seen.add(ind.id)
        # Canonical (quality, id) storage order makes structurally equal
        # tables compare equal regardless of input order, so serialization
        # round-trips are literal fixpoints.
        ordered = tuple(
            sorted(
                self.indicators,
                key=lambda i: (QUALITY_INDEX[i.quality], i.id),
            )
        )
        object.__setattr__(self, "indicators", ordered)

    def by_quality(self, quality: Quality) -> tuple[Indicator, ...]:
        return tuple(i for i in self.indicators if i.quality is quality)

    def sorted_by_id(self) -> tuple[Indicator, ...]:
        """Fixed summation order for reproducible aggregation."""
        return tuple(sorted(self.indicators, key=lambda i: i.id))

    def get(self, indicator_id: str) -> Indicator | None:
        for ind in self.indicators:
            if ind.id == indicator_id:
                return ind
        return None

    def ids(self) -> tuple[str, ...]:
        return tuple(i.id for i in self.indicators)

    def with_indicator(self, indicator: Indicator) -> "IndicatorTable":
        return replace(self, indicators=self.indicators + (indicator,))

    def without_indicator(self, indicator_id: str) -> "IndicatorTable":
        kept = tuple(i for i in self.indicators if i.id != indicator_id)
        if len(kept) == len(self.indicators):
            raise KeyError(indicator_id)
        return replace(self, indicators=kept)

    def with_replaced(self, indicator: Indicator) -> "IndicatorTable":
        out = []
        hit = False
        for ind in self.indicators:
            if ind.id == indicator.id:
                out.append(indicator)
                hit = True
            else:
                out.append(ind)
        if not hit:
            raise KeyError(indicator.id)
        return replace(self, indicators=tuple(out))
