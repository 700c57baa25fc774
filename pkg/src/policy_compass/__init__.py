"""Compass-style aggregation of institutional indicators.

Indicators live on a circle split into three quality sectors (harmony,
passion, suppression).  Per-sector arrows are built from count-corrected
indicator lengths, a center of their triangle gives the overall reading,
and a perspicuity correction stretches the readable middle of the
magnitude scale.  Higher layers compose eco/socio/econo spheres, grade
robustness, run elicitation sessions, render SVG, and serve HTTP.
"""
from .aggregate import (
    CenterMethod,
    Classification,
    CompassConfig,
    CompassReading,
    DegenerateTriangleError,
    NonpositiveCountError,
    PerspicuityParams,
    SectorArrow,
    compass_reading,
    corrected_length,
    perspicuity_correct,
    sector_arrow,
)
from .elicitation import (
    Ballot,
    ElicitationError,
    Intensity,
    Session,
    SessionEvent,
    SplitPlacement,
    VersionConflictError,
    add_indicator,
    angle_from_votes,
    apply_event,
    apply_mutation,
    cast_ballots,
    consensus_adjust,
    create_session,
    remove_indicator,
    replay,
    split_indicator,
)
from .model import (
    BOUNDARY_SITTING,
    CONTROL_CHARACTER,
    DEFAULT_LAYOUT,
    EMPTY_NAME,
    Indicator,
    IndicatorTable,
    IndicatorValidationError,
    LENGTH_OUT_OF_RANGE,
    LayoutError,
    OFFSET_OUT_OF_RANGE,
    QUALITIES,
    Quality,
    SectorLayout,
    Sphere,
    TableValidationError,
    ValidationIssue,
    Vec2,
    ZeroVectorAngle,
    absolute_angle,
    circular_delta_degrees,
    format_number,
    indicator_issues,
    validate_indicator,
)
from .render import (
    RenderOptions,
    RenderStage,
    extract_final_arrow,
    extract_sphere_radii,
    render_compass,
    render_ecological,
    render_trajectory,
    svg_transform,
)
from .robustness import (
    ConvergenceReport,
    GerrymanderDiff,
    IncomparableReadingsError,
    InfluenceReport,
    RobustnessGrade,
    RobustnessParams,
    convergence_report,
    gerrymander_diff,
    grade_table,
    influence_report,
)
from .spheres import (
    DEFAULT_WEIGHTS,
    EcologicalCompass,
    InvalidWeightOrderWarning,
    LayoutMismatchError,
    SphereWeights,
    compose_spheres,
    is_sustainable,
)
from .tableio import (
    ConfigError,
    LoadedConfig,
    ParseIssue,
    SnapshotStore,
    TableParseError,
    config_to_dict,
    ecological_to_dict,
    load_config,
    parse_table,
    parse_table_csv,
    parse_table_json,
    reading_from_dict,
    reading_to_dict,
    table_to_dict,
    write_table,
    write_table_csv,
    write_table_json,
)

__version__ = "0.1.0"

__all__ = [
    "BOUNDARY_SITTING",
    "Ballot",
    "CONTROL_CHARACTER",
    "CenterMethod",
    "Classification",
    "CompassConfig",
    "CompassReading",
    "ConfigError",
    "ConvergenceReport",
    "DEFAULT_LAYOUT",
    "DEFAULT_WEIGHTS",
    "DegenerateTriangleError",
    "EMPTY_NAME",
    "EcologicalCompass",
    "ElicitationError",
    "GerrymanderDiff",
    "IncomparableReadingsError",
    "Indicator",
    "IndicatorTable",
    "IndicatorValidationError",
    "InfluenceReport",
    "Intensity",
    "InvalidWeightOrderWarning",
    "LENGTH_OUT_OF_RANGE",
    "LayoutError",
    "LayoutMismatchError",
    "LoadedConfig",
    "NonpositiveCountError",
    "OFFSET_OUT_OF_RANGE",
    "ParseIssue",
    "PerspicuityParams",
    "QUALITIES",
    "Quality",
    "RenderOptions",
    "RenderStage",
    "RobustnessGrade",
    "RobustnessParams",
    "SectorArrow",
    "SectorLayout",
    "Session",
    "SessionEvent",
    "SnapshotStore",
    "Sphere",
    "SphereWeights",
    "SplitPlacement",
    "TableParseError",
    "TableValidationError",
    "ValidationIssue",
    "Vec2",
    "VersionConflictError",
    "ZeroVectorAngle",
    "absolute_angle",
    "add_indicator",
    "angle_from_votes",
    "apply_event",
    "apply_mutation",
    "cast_ballots",
    "circular_delta_degrees",
    "compass_reading",
    "compose_spheres",
    "config_to_dict",
    "consensus_adjust",
    "convergence_report",
    "corrected_length",
    "create_session",
    "ecological_to_dict",
    "extract_final_arrow",
    "extract_sphere_radii",
    "format_number",
    "gerrymander_diff",
    "grade_table",
    "indicator_issues",
    "influence_report",
    "is_sustainable",
    "load_config",
    "parse_table",
    "parse_table_csv",
    "parse_table_json",
    "perspicuity_correct",
    "reading_from_dict",
    "reading_to_dict",
    "remove_indicator",
    "render_compass",
    "render_ecological",
    "render_trajectory",
    "replay",
    "sector_arrow",
    "split_indicator",
    "svg_transform",
    "table_to_dict",
    "validate_indicator",
    "write_table",
    "write_table_csv",
    "write_table_json",
]
