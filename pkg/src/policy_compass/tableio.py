"""Reading and writing indicator tables, configs, readings, and snapshots.

Formats (full grammars in ``docs/formats.md``):

* CSV: UTF-8, ``#``-prefixed ``key=value`` directive lines before the header,
  then a header row and data rows.  The ``angle`` column is interpreted per
  the ``angle_mode`` directive (``offset`` default, or ``absolute`` under the
  ``layout`` directive).
* JSON: a table object mirroring the CSV fields under identical names.
* Config: a flat JSON object; unknown keys are errors, weight reordering is
  a warning.

Parsers collect every problem into ``TableParseError.issues`` before raising
(one bad cell does not hide the next).  Writers emit one canonical form:
indicators sorted by (quality, id), offsets as angles, shortest round-trip
decimals; writing the same value twice yields identical bytes.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Iterable, Mapping, Sequence

from .aggregate import (
    CenterMethod,
    Classification,
    CompassConfig,
    CompassReading,
    PerspicuityParams,
    compass_reading,
)
from .model import (
    DEFAULT_LAYOUT,
    FULL_CIRCLE,
    QUALITIES,
    SECTOR_SPAN,
    Indicator,
    IndicatorTable,
    LayoutError,
    Quality,
    SectorLayout,
    Sphere,
    Vec2,
    format_number,
    indicator_issues,
)
from .robustness import RobustnessParams
from .spheres import EcologicalCompass, SphereWeights

REQUIRED_COLUMNS = ("sphere", "quality", "name", "angle", "length", "notes")
OPTIONAL_COLUMNS = ("id", "boundary_ok", "timestamp")
CANONICAL_COLUMNS = (
    "id",
    "sphere",
    "quality",
    "name",
    "angle",
    "length",
    "boundary_ok",
    "timestamp",
    "notes",
)
KNOWN_DIRECTIVES = ("angle_mode", "layout", "institution", "sphere", "snapshot_time")

# Issue codes. "row" is 0 for document-level problems (directives, header),
# else the 1-based data-row ordinal; "column" is the column or key name.
BAD_ENCODING = "bad_encoding"
BAD_DIRECTIVE = "bad_directive"
UNKNOWN_DIRECTIVE = "unknown_directive"
MISSING_COLUMN = "missing_column"
UNKNOWN_COLUMN = "unknown_column"
DUPLICATE_COLUMN = "duplicate_column"
MALFORMED_ROW = "malformed_row"
BAD_NUMBER = "bad_number"
BAD_BOOLEAN = "bad_boolean"
BAD_TIMESTAMP = "bad_timestamp"
UNKNOWN_QUALITY = "unknown_quality"
UNKNOWN_SPHERE = "unknown_sphere"
QUALITY_ANGLE_MISMATCH = "quality_angle_mismatch"
DUPLICATE_ID = "duplicate_id"
INCONSISTENT_SPHERE = "inconsistent_sphere"
BAD_DOCUMENT = "bad_document"
UNKNOWN_KEY = "unknown_key"
TYPE_MISMATCH = "type_mismatch"
BAD_VALUE = "bad_value"
INVALID_WEIGHT_ORDER = "invalid_weight_order"


@dataclass(frozen=True)
class ParseIssue:
    row: int
    column: str | None
    code: str
    message: str


class TableParseError(ValueError):
    def __init__(self, issues: Sequence[ParseIssue]):
        self.issues = tuple(issues)
        super().__init__(
            "%d issue(s): %s"
            % (len(self.issues), "; ".join(i.message for i in self.issues[:5]))
        )


def _decode(data: "str | bytes") -> str:
    if isinstance(data, bytes):
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise TableParseError(
                [ParseIssue(0, None, BAD_ENCODING, "document is not valid UTF-8: %s" % exc)]
            )
    return data


def _parse_timestamp(text: str) -> datetime:
    return datetime.fromisoformat(text.replace("Z", "+00:00"))


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("", "false", "0", "no"):
        return False
    if lowered in ("true", "1", "yes"):
        return True
    raise ValueError(text)


_INDICATOR_FIELD_TO_COLUMN = {"offset": "angle", "raw_length": "length", "name": "name"}


def _resolve_offset(
    quality: Quality,
    angle: float,
    boundary_ok: bool,
    angle_mode: str,
    layout: SectorLayout,
) -> tuple[float | None, str | None]:
    """Map the angle cell to a within-sector offset.

    In absolute mode the angle must fall in the declared quality's span.  An
    angle exactly on the span's end boundary is accepted only with
    ``boundary_ok`` (the arrow sits on the border with the next sector);
    otherwise it reads as a quality/angle mismatch since the angle lies in
    the neighboring span.
    """
    if angle_mode == "offset":
        return angle, None
    normalized = angle % FULL_CIRCLE
    offset = (normalized - layout.start(quality)) % FULL_CIRCLE
    if offset < SECTOR_SPAN:
        return offset, None
    if offset == SECTOR_SPAN and boundary_ok:
        return offset, None
    return None, (
        "absolute angle %s lies outside the %s span under the declared layout"
        % (format_number(normalized), quality.value)
    )


def parse_table_csv(data: "str | bytes") -> IndicatorTable:
    text = _decode(data).replace("\r\n", "\n").replace("\r", "\n")
    issues: list[ParseIssue] = []

    directives: dict[str, str] = {}
    lines = text.split("\n")
    body_start = 0
    for line in lines:
        stripped = line.strip()
        if not stripped.startswith("#"):
            break
        body_start += 1
        content = stripped.lstrip("#").strip()
        if not content:
            continue
        key, sep, value = content.partition("=")
        key = key.strip()
        if not sep:
            issues.append(
                ParseIssue(0, None, BAD_DIRECTIVE, "directive %r is not key=value" % content)
            )
            continue
        if key not in KNOWN_DIRECTIVES:
            issues.append(
                ParseIssue(0, key, UNKNOWN_DIRECTIVE, "unknown directive %r" % key)
            )
            continue
        directives[key] = value.strip()

    angle_mode = directives.get("angle_mode", "offset")
    if angle_mode not in ("offset", "absolute"):
        issues.append(
            ParseIssue(
                0, "angle_mode", BAD_DIRECTIVE,
                "angle_mode must be offset or absolute, got %r" % angle_mode,
            )
        )
        angle_mode = "offset"
    layout = DEFAULT_LAYOUT
    if "layout" in directives:
        try:
            layout = SectorLayout.from_directive(directives["layout"])
        except LayoutError as exc:
            issues.append(ParseIssue(0, "layout", BAD_DIRECTIVE, str(exc)))
    institution = directives.get("institution", "")
    snapshot_time: datetime | None = None
    if directives.get("snapshot_time"):
        try:
            snapshot_time = _parse_timestamp(directives["snapshot_time"])
        except ValueError:
            issues.append(
                ParseIssue(
                    0, "snapshot_time", BAD_TIMESTAMP,
                    "bad snapshot_time %r" % directives["snapshot_time"],
                )
            )
    directive_sphere: Sphere | None = None
    if "sphere" in directives:
        try:
            directive_sphere = Sphere(directives["sphere"])
        except ValueError:
            issues.append(
                ParseIssue(0, "sphere", UNKNOWN_SPHERE, "unknown sphere %r" % directives["sphere"])
            )

    body = "\n".join(lines[body_start:])
    reader = csv.reader(io.StringIO(body))
    rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        issues.append(ParseIssue(0, None, MISSING_COLUMN, "document has no header row"))
        raise TableParseError(issues)

    header = [cell.strip() for cell in rows[0]]
    known = set(REQUIRED_COLUMNS) | set(OPTIONAL_COLUMNS)
    for name in header:
        if name not in known:
            issues.append(ParseIssue(0, name, UNKNOWN_COLUMN, "unknown column %r" % name))
    for name in set(header):
        if header.count(name) > 1:
            issues.append(ParseIssue(0, name, DUPLICATE_COLUMN, "column %r repeats" % name))
    missing = [name for name in REQUIRED_COLUMNS if name not in header]
    for name in missing:
        issues.append(ParseIssue(0, name, MISSING_COLUMN, "required column %r missing" % name))
    if missing or any(header.count(n) > 1 for n in header):
        raise TableParseError(issues)
    col = {name: header.index(name) for name in header}

    indicators: list[Indicator] = []
    seen_ids: set[str] = set()
    table_sphere: Sphere | None = directive_sphere
    for ordinal, cells in enumerate(rows[1:], start=1):
        if len(cells) != len(header):
            issues.append(
                ParseIssue(
                    ordinal, None, MALFORMED_ROW,
                    "expected %d cells, got %d" % (len(header), len(cells)),
                )
            )
            continue
        row_bad = False

        def cell(name: str) -> str:
            return cells[col[name]].strip() if name in col else ""

        try:
            quality = Quality(cell("quality"))
        except ValueError:
            issues.append(
                ParseIssue(ordinal, "quality", UNKNOWN_QUALITY,
                           "unknown quality %r" % cell("quality"))
            )
            row_bad = True
            quality = Quality.HARMONY
        try:
            sphere = Sphere(cell("sphere"))
        except ValueError:
            issues.append(
                ParseIssue(ordinal, "sphere", UNKNOWN_SPHERE,
                           "unknown sphere %r" % cell("sphere"))
            )
            row_bad = True
            sphere = Sphere.UNSPECIFIED
        if not row_bad:
            if table_sphere is None:
                table_sphere = sphere
            elif sphere is not table_sphere:
                issues.append(
                    ParseIssue(
                        ordinal, "sphere", INCONSISTENT_SPHERE,
                        "sphere %r differs from the table's %r"
                        % (sphere.value, table_sphere.value),
                    )
                )
                row_bad = True

        angle = length = 0.0
        for name in ("angle", "length"):
            try:
                value = float(cell(name))
                if not math.isfinite(value):
                    raise ValueError
            except ValueError:
                issues.append(
                    ParseIssue(ordinal, name, BAD_NUMBER, "bad number %r" % cell(name))
                )
                row_bad = True
                value = 0.0
            if name == "angle":
                angle = value
            else:
                length = value

        boundary_ok = False
        if "boundary_ok" in col:
            try:
                boundary_ok = _parse_bool(cell("boundary_ok"))
            except ValueError:
                issues.append(
                    ParseIssue(ordinal, "boundary_ok", BAD_BOOLEAN,
                               "bad boolean %r" % cell("boundary_ok"))
                )
                row_bad = True
        timestamp: datetime | None = None
        if "timestamp" in col and cell("timestamp"):
            try:
                timestamp = _parse_timestamp(cell("timestamp"))
            except ValueError:
                issues.append(
                    ParseIssue(ordinal, "timestamp", BAD_TIMESTAMP,
                               "bad timestamp %r" % cell("timestamp"))
                )
                row_bad = True

        indicator_id = cell("id") if "id" in col else ""
        if not indicator_id:
            indicator_id = "r%03d" % ordinal
        if indicator_id in seen_ids:
            issues.append(
                ParseIssue(ordinal, "id", DUPLICATE_ID, "duplicate id %r" % indicator_id)
            )
            row_bad = True
        seen_ids.add(indicator_id)

        if row_bad:
            continue
        offset, mismatch = _resolve_offset(quality, angle, boundary_ok, angle_mode, layout)
        if mismatch is not None:
            issues.append(ParseIssue(ordinal, "angle", QUALITY_ANGLE_MISMATCH, mismatch))
            continue
        assert offset is not None
        field_problems = indicator_issues(cell("name"), offset, length, boundary_ok)
        if field_problems:
            for problem in field_problems:
                issues.append(
                    ParseIssue(
                        ordinal,
                        _INDICATOR_FIELD_TO_COLUMN.get(problem.field, problem.field),
                        problem.code,
                        problem.message,
                    )
                )
            continue
        indicators.append(
            Indicator(
                id=indicator_id,
                name=cell("name"),
                quality=quality,
                offset=offset,
                raw_length=length,
                boundary_ok=boundary_ok,
                notes=cell("notes"),
                timestamp=timestamp,
            )
        )

    if issues:
        raise TableParseError(issues)
    return IndicatorTable(
        institution=institution,
        sphere=table_sphere if table_sphere is not None else Sphere.UNSPECIFIED,
        indicators=tuple(indicators),
        snapshot_time=snapshot_time,
    )


def _canonical_indicators(table: IndicatorTable) -> list[Indicator]:
    order = {q: i for i, q in enumerate(QUALITIES)}
    return sorted(table.indicators, key=lambda i: (order[i.quality], i.id))


def write_table_csv(table: IndicatorTable) -> str:
    """Canonical CSV: offset mode, sorted rows, shortest exact decimals."""
    out = io.StringIO()
    out.write("# angle_mode=offset\n")
    out.write("# institution=%s\n" % table.institution)
    out.write("# sphere=%s\n" % table.sphere.value)
    if table.snapshot_time is not None:
        out.write("# snapshot_time=%s\n" % table.snapshot_time.isoformat())
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CANONICAL_COLUMNS)
    for ind in _canonical_indicators(table):
        writer.writerow(
            [
                ind.id,
                table.sphere.value,
                ind.quality.value,
                ind.name,
                format_number(ind.offset),
                format_number(ind.raw_length),
                "true" if ind.boundary_ok else "",
                ind.timestamp.isoformat() if ind.timestamp else "",
                ind.notes,
            ]
        )
    return out.getvalue()


def indicator_to_dict(indicator: Indicator) -> dict[str, Any]:
    return {
        "id": indicator.id,
        "quality": indicator.quality.value,
        "name": indicator.name,
        "angle": indicator.offset,
        "length": indicator.raw_length,
        "boundary_ok": indicator.boundary_ok,
        "timestamp": indicator.timestamp.isoformat() if indicator.timestamp else None,
        "notes": indicator.notes,
    }


def indicator_from_dict(payload: Mapping[str, Any]) -> Indicator:
    """Strict codec for trusted payloads; raises on any malformed field."""
    timestamp = payload.get("timestamp")
    return Indicator(
        id=str(payload["id"]),
        name=str(payload["name"]),
        quality=Quality(payload["quality"]),
        offset=float(payload["angle"]),
        raw_length=float(payload["length"]),
        boundary_ok=bool(payload.get("boundary_ok", False)),
        notes=str(payload.get("notes", "")),
        timestamp=_parse_timestamp(timestamp) if timestamp else None,
    )


def table_to_dict(table: IndicatorTable) -> dict[str, Any]:
    return {
        "institution": table.institution,
        "sphere": table.sphere.value,
        "snapshot_time": table.snapshot_time.isoformat() if table.snapshot_time else None,
        "angle_mode": "offset",
        "indicators": [indicator_to_dict(i) for i in _canonical_indicators(table)],
    }


def write_table_json(table: IndicatorTable) -> str:
    return to_canonical_json(table_to_dict(table))


_TABLE_JSON_KEYS = {"institution", "sphere", "snapshot_time", "angle_mode", "layout", "indicators"}
_INDICATOR_JSON_KEYS = {
    "id", "quality", "name", "angle", "length", "boundary_ok", "timestamp", "notes",
}


def parse_table_json(data: "str | bytes") -> IndicatorTable:
    text = _decode(data)
    issues: list[ParseIssue] = []
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TableParseError([ParseIssue(0, None, BAD_DOCUMENT, "invalid JSON: %s" % exc)])
    if not isinstance(doc, dict):
        raise TableParseError(
            [ParseIssue(0, None, BAD_DOCUMENT, "table document must be a JSON object")]
        )
    for key in doc:
        if key not in _TABLE_JSON_KEYS:
            issues.append(ParseIssue(0, key, UNKNOWN_KEY, "unknown key %r" % key))

    angle_mode = doc.get("angle_mode", "offset")
    if angle_mode not in ("offset", "absolute"):
        issues.append(
            ParseIssue(0, "angle_mode", BAD_VALUE,
                       "angle_mode must be offset or absolute, got %r" % angle_mode)
        )
        angle_mode = "offset"
    layout = DEFAULT_LAYOUT
    if "layout" in doc:
        try:
            layout = SectorLayout.from_directive(str(doc["layout"]))
        except LayoutError as exc:
            issues.append(ParseIssue(0, "layout", BAD_VALUE, str(exc)))
    institution = doc.get("institution", "")
    if not isinstance(institution, str):
        issues.append(ParseIssue(0, "institution", TYPE_MISMATCH, "institution must be a string"))
        institution = ""
    sphere = Sphere.UNSPECIFIED
    if "sphere" in doc:
        try:
            sphere = Sphere(doc["sphere"])
        except ValueError:
            issues.append(
                ParseIssue(0, "sphere", UNKNOWN_SPHERE, "unknown sphere %r" % doc["sphere"])
            )
    snapshot_time: datetime | None = None
    if doc.get("snapshot_time") is not None:
        try:
            snapshot_time = _parse_timestamp(str(doc["snapshot_time"]))
        except ValueError:
            issues.append(
                ParseIssue(0, "snapshot_time", BAD_TIMESTAMP,
                           "bad snapshot_time %r" % doc["snapshot_time"])
            )

    raw_indicators = doc.get("indicators", [])
    if not isinstance(raw_indicators, list):
        issues.append(ParseIssue(0, "indicators", TYPE_MISMATCH, "indicators must be a list"))
        raw_indicators = []

    indicators: list[Indicator] = []
    seen_ids: set[str] = set()
    for ordinal, item in enumerate(raw_indicators, start=1):
        if not isinstance(item, dict):
            issues.append(
                ParseIssue(ordinal, None, MALFORMED_ROW, "indicator entry must be an object")
            )
            continue
        row_bad = False
        for key in item:
            if key not in _INDICATOR_JSON_KEYS:
                issues.append(ParseIssue(ordinal, key, UNKNOWN_KEY, "unknown key %r" % key))
        try:
            quality = Quality(item.get("quality"))
        except ValueError:
            issues.append(
                ParseIssue(ordinal, "quality", UNKNOWN_QUALITY,
                           "unknown quality %r" % item.get("quality"))
            )
            quality = Quality.HARMONY
            row_bad = True
        angle = length = 0.0
        for key in ("angle", "length"):
            value = item.get(key)
            if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
                issues.append(ParseIssue(ordinal, key, BAD_NUMBER, "bad number %r" % (value,)))
                row_bad = True
                value = 0.0
            if key == "angle":
                angle = float(value)
            else:
                length = float(value)
        boundary_ok = item.get("boundary_ok", False)
        if not isinstance(boundary_ok, bool):
            issues.append(
                ParseIssue(ordinal, "boundary_ok", BAD_BOOLEAN,
                           "boundary_ok must be a boolean")
            )
            boundary_ok = False
            row_bad = True
        timestamp: datetime | None = None
        if item.get("timestamp") is not None:
            try:
                timestamp = _parse_timestamp(str(item["timestamp"]))
            except ValueError:
                issues.append(
                    ParseIssue(ordinal, "timestamp", BAD_TIMESTAMP,
                               "bad timestamp %r" % item["timestamp"])
                )
                row_bad = True
        indicator_id = str(item.get("id") or "") or "r%03d" % ordinal
        if indicator_id in seen_ids:
            issues.append(
                ParseIssue(ordinal, "id", DUPLICATE_ID, "duplicate id %r" % indicator_id)
            )
            row_bad = True
        seen_ids.add(indicator_id)
        if row_bad:
            continue
        offset, mismatch = _resolve_offset(quality, angle, boundary_ok, angle_mode, layout)
        if mismatch is not None:
            issues.append(ParseIssue(ordinal, "angle", QUALITY_ANGLE_MISMATCH, mismatch))
            continue
        assert offset is not None
        name = str(item.get("name") or "")
        field_problems = indicator_issues(name, offset, length, boundary_ok)
        if field_problems:
            for problem in field_problems:
                issues.append(
                    ParseIssue(
                        ordinal,
                        _INDICATOR_FIELD_TO_COLUMN.get(problem.field, problem.field),
                        problem.code,
                        problem.message,
                    )
                )
            continue
        indicators.append(
            Indicator(
                id=indicator_id,
                name=name,
                quality=quality,
                offset=offset,
                raw_length=length,
                boundary_ok=boundary_ok,
                notes=str(item.get("notes") or ""),
                timestamp=timestamp,
            )
        )

    if issues:
        raise TableParseError(issues)
    return IndicatorTable(
        institution=institution,
        sphere=sphere,
        indicators=tuple(indicators),
        snapshot_time=snapshot_time,
    )


def parse_table(data: "str | bytes", format: str) -> IndicatorTable:
    if format == "csv":
        return parse_table_csv(data)
    if format == "json":
        return parse_table_json(data)
    raise ValueError("unknown table format %r" % format)


def write_table(table: IndicatorTable, format: str) -> str:
    if format == "csv":
        return write_table_csv(table)
    if format == "json":
        return write_table_json(table)
    raise ValueError("unknown table format %r" % format)


def to_canonical_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def vec_to_dict(vector: Vec2) -> dict[str, float]:
    return {"x": vector.x, "y": vector.y}


def reading_to_dict(reading: CompassReading) -> dict[str, Any]:
    return {
        "institution": reading.table.institution,
        "sphere": reading.table.sphere.value,
        "table": table_to_dict(reading.table),
        "config": config_to_dict(compass=reading.config),
        "sectors": {
            q.value: {
                "x": reading.sectors[q].vector.x,
                "y": reading.sectors[q].vector.y,
                "indicator_count": reading.sectors[q].indicator_count,
            }
            for q in QUALITIES
        },
        "triangle": [vec_to_dict(v) for v in reading.triangle],
        "raw_final": vec_to_dict(reading.raw_final),
        "final": vec_to_dict(reading.final),
        "classification": reading.classification.value,
    }


def reading_from_dict(payload: Mapping[str, Any]) -> CompassReading:
    """Rebuild a reading by recomputing from its embedded table and config."""
    table = parse_table_json(json.dumps(payload["table"]))
    loaded = load_config(json.dumps(payload.get("config", {})))
    return compass_reading(table, loaded.compass)


def ecological_to_dict(compass: EcologicalCompass) -> dict[str, Any]:
    return {
        "weights": {
            "eco": compass.weights.eco,
            "socio": compass.weights.socio,
            "econo": compass.weights.econo,
        },
        "readings": {
            sphere.value: reading_to_dict(compass.readings[sphere])
            for sphere in (Sphere.ECO, Sphere.SOCIO, Sphere.ECONO)
        },
        "composed_raw": vec_to_dict(compass.composed_raw),
        "composed_sum": vec_to_dict(compass.composed_sum),
        "composed_final": vec_to_dict(compass.composed_final),
        "classification": compass.classification.value,
        "sustainable": compass.sustainable,
    }


@dataclass(frozen=True)
class ConfigWarning:
    code: str
    message: str


class ConfigError(ValueError):
    def __init__(self, issues: Sequence[ParseIssue]):
        self.issues = tuple(issues)
        super().__init__("; ".join(i.message for i in issues))


@dataclass(frozen=True)
class LoadedConfig:
    compass: CompassConfig
    weights: SphereWeights
    robustness: RobustnessParams
    warnings: tuple[ConfigWarning, ...] = ()


_CONFIG_KEYS = (
    "layout",
    "center_method",
    "perspicuity_alpha",
    "perspicuity_beta",
    "perspicuity_enabled",
    "balance_epsilon",
    "weight_eco",
    "weight_socio",
    "weight_econo",
    "convergence_epsilon",
    "convergence_window",
    "outlier_threshold",
)


def config_to_dict(
    compass: CompassConfig | None = None,
    weights: SphereWeights | None = None,
    robustness: RobustnessParams | None = None,
) -> dict[str, Any]:
    compass = compass or CompassConfig()
    weights = weights or SphereWeights()
    robustness = robustness or RobustnessParams()
    return {
        "layout": compass.layout.to_directive(),
        "center_method": compass.center_method.value,
        "perspicuity_alpha": compass.perspicuity.alpha,
        "perspicuity_beta": compass.perspicuity.beta,
        "perspicuity_enabled": compass.perspicuity.enabled,
        "balance_epsilon": compass.balance_epsilon,
        "weight_eco": weights.eco,
        "weight_socio": weights.socio,
        "weight_econo": weights.econo,
        "convergence_epsilon": robustness.convergence_epsilon,
        "convergence_window": robustness.convergence_window,
        "outlier_threshold": robustness.outlier_threshold,
    }


def _config_number(
    doc: Mapping[str, Any], key: str, default: float, issues: list[ParseIssue],
    *, positive: bool = False, at_most_one: bool = False,
) -> float:
    if key not in doc:
        return default
    value = doc[key]
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
        issues.append(ParseIssue(0, key, TYPE_MISMATCH, "%s must be a finite number" % key))
        return default
    value = float(value)
    if positive and value <= 0.0:
        issues.append(ParseIssue(0, key, BAD_VALUE, "%s must be positive" % key))
        return default
    if at_most_one and value > 1.0:
        issues.append(ParseIssue(0, key, BAD_VALUE, "%s must be at most 1" % key))
        return default
    return value


def load_config(data: "str | bytes | Mapping[str, Any] | None") -> LoadedConfig:
    """Flat key-value config; every key optional, unknown keys are errors."""
    if data is None:
        doc: Mapping[str, Any] = {}
    elif isinstance(data, Mapping):
        doc = data
    else:
        text = _decode(data).strip()
        if not text:
            doc = {}
        else:
            try:
                parsed = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError(
                    [ParseIssue(0, None, BAD_DOCUMENT, "invalid config JSON: %s" % exc)]
                )
            if not isinstance(parsed, dict):
                raise ConfigError(
                    [ParseIssue(0, None, BAD_DOCUMENT, "config must be a JSON object")]
                )
            doc = parsed

    issues: list[ParseIssue] = []
    warnings_out: list[ConfigWarning] = []
    for key in doc:
        if key not in _CONFIG_KEYS:
            issues.append(ParseIssue(0, key, UNKNOWN_KEY, "unknown config key %r" % key))

    layout = DEFAULT_LAYOUT
    if "layout" in doc:
        try:
            layout = SectorLayout.from_directive(str(doc["layout"]))
        except LayoutError as exc:
            issues.append(ParseIssue(0, "layout", BAD_VALUE, str(exc)))
    center = CenterMethod.CENTROID
    if "center_method" in doc:
        try:
            center = CenterMethod(doc["center_method"])
        except ValueError:
            issues.append(
                ParseIssue(0, "center_method", BAD_VALUE,
                           "center_method must be centroid or orthocenter")
            )
    alpha = _config_number(doc, "perspicuity_alpha", 0.5, issues, positive=True, at_most_one=True)
    beta = _config_number(doc, "perspicuity_beta", 0.5, issues, positive=True, at_most_one=True)
    enabled = True
    if "perspicuity_enabled" in doc:
        if not isinstance(doc["perspicuity_enabled"], bool):
            issues.append(
                ParseIssue(0, "perspicuity_enabled", TYPE_MISMATCH,
                           "perspicuity_enabled must be a boolean")
            )
        else:
            enabled = doc["perspicuity_enabled"]
    balance_epsilon = _config_number(doc, "balance_epsilon", 1e-9, issues, positive=True)
    w_eco = _config_number(doc, "weight_eco", 1.0, issues, positive=True)
    w_socio = _config_number(doc, "weight_socio", 0.75, issues, positive=True)
    w_econo = _config_number(doc, "weight_econo", 0.5, issues, positive=True)
    conv_eps = _config_number(doc, "convergence_epsilon", 0.02, issues, positive=True)
    outlier = _config_number(doc, "outlier_threshold", 0.05, issues, positive=True)
    window = RobustnessParams().convergence_window
    if "convergence_window" in doc:
        value = doc["convergence_window"]
        if not isinstance(value, int) or isinstance(value, bool) or value < 2:
            issues.append(
                ParseIssue(0, "convergence_window", BAD_VALUE,
                           "convergence_window must be an integer >= 2")
            )
        else:
            window = value

    if issues:
        raise ConfigError(issues)

    weights = SphereWeights(eco=w_eco, socio=w_socio, econo=w_econo)
    if not weights.ordering_ok:
        warnings_out.append(
            ConfigWarning(
                INVALID_WEIGHT_ORDER,
                "sphere weights reordered: expected eco >= socio >= econo",
            )
        )
    return LoadedConfig(
        compass=CompassConfig(
            layout=layout,
            center_method=center,
            perspicuity=PerspicuityParams(alpha=alpha, beta=beta, enabled=enabled),
            balance_epsilon=balance_epsilon,
        ),
        weights=weights,
        robustness=RobustnessParams(
            convergence_epsilon=conv_eps,
            convergence_window=window,
            outlier_threshold=outlier,
        ),
        warnings=tuple(warnings_out),
    )


SnapshotPayload = "IndicatorTable | Mapping[Sphere, IndicatorTable]"


class SnapshotStore:
    """Per-institution time series of tables (or sphere triples).

    Insertion enforces strictly increasing snapshot times so retrieval order
    is always chronological.
    """

    def __init__(self) -> None:
        self._series: dict[str, list[tuple[datetime, Any]]] = {}

    def add(self, institution: str, time: datetime, payload: Any) -> None:
        series = self._series.setdefault(institution, [])
        if series and time <= series[-1][0]:
            raise ValueError(
                "snapshot times must be strictly increasing: %s is not after %s"
                % (time.isoformat(), series[-1][0].isoformat())
            )
        series.append((time, payload))

    def history(self, institution: str) -> tuple[tuple[datetime, Any], ...]:
        return tuple(self._series.get(institution, ()))

    def institutions(self) -> tuple[str, ...]:
        return tuple(self._series)

    def save(self, path: str) -> None:
        doc: dict[str, list[dict[str, Any]]] = {}
        for institution, series in self._series.items():
            entries = []
            for time, payload in series:
                if isinstance(payload, IndicatorTable):
                    entries.append(
                        {"time": time.isoformat(), "kind": "table",
                         "table": table_to_dict(payload)}
                    )
                else:
                    entries.append(
                        {
                            "time": time.isoformat(),
                            "kind": "spheres",
                            "tables": {
                                sphere.value: table_to_dict(table)
                                for sphere, table in payload.items()
                            },
                        }
                    )
            doc[institution] = entries
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(to_canonical_json(doc))

    @staticmethod
    def load(path: str) -> "SnapshotStore":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        store = SnapshotStore()
        for institution, entries in doc.items():
            for entry in entries:
                time = _parse_timestamp(entry["time"])
                if entry["kind"] == "table":
                    payload: Any = parse_table_json(json.dumps(entry["table"]))
                else:
                    payload = {
                        Sphere(name): parse_table_json(json.dumps(tdoc))
                        for name, tdoc in entry["tables"].items()
                    }
                store.add(institution, time, payload)
        return store
