"""Robustness diagnostics: convergence, leave-one-out influence, input diffs.

These answer the workshop questions "have we sampled enough indicators",
"does any single indicator swing the verdict", and "what exactly differs
between two readings of the same institution".
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

import numpy as np

from . import _kernels
from .aggregate import Classification, CompassConfig, CompassReading, compass_reading
from .model import (
    QUALITIES,
    QUALITY_INDEX,
    Indicator,
    IndicatorTable,
    Quality,
    Vec2,
    absolute_angle,
    circular_delta_degrees,
)


@dataclass(frozen=True)
class RobustnessParams:
    convergence_epsilon: float = 0.02
    convergence_window: int = 20
    outlier_threshold: float = 0.05

    def __post_init__(self) -> None:
        if not (self.convergence_epsilon > 0.0) or not math.isfinite(self.convergence_epsilon):
            raise ValueError("convergence_epsilon must be positive")
        if int(self.convergence_window) != self.convergence_window or self.convergence_window < 2:
            raise ValueError("convergence_window must be an integer >= 2")
        if not (self.outlier_threshold > 0.0) or not math.isfinite(self.outlier_threshold):
            raise ValueError("outlier_threshold must be positive")


@dataclass(frozen=True)
class TraceEntry:
    indicator_count: int
    vector: Vec2


@dataclass(frozen=True)
class ConvergenceReport:
    epsilon: float
    window: int
    stream_length: int
    traces: Mapping[Quality, tuple[TraceEntry, ...]]
    stable: Mapping[Quality, "bool | None"]
    first_stable_index: Mapping[Quality, "int | None"]

    @property
    def overall_stable(self) -> "bool | None":
        """All-quality verdict; None when the window exceeds the stream."""
        values = [self.stable[q] for q in QUALITIES]
        if any(v is None for v in values):
            return None
        return all(values)


def _window_spread(segment: np.ndarray) -> float:
    """Largest pairwise distance among the window's trace vectors."""
    diff = segment[:, None, :] - segment[None, :, :]
    return float(np.sqrt((diff ** 2).sum(axis=-1)).max())


def convergence_report(
    stream: Sequence[Indicator],
    config: CompassConfig | None = None,
    epsilon: float = 0.02,
    window: int = 20,
) -> ConvergenceReport:
    """Recompute sector arrows after every stream prefix and judge stability.

    A quality is stable when the last ``window`` trace vectors sit pairwise
    within ``epsilon`` of each other.  A window longer than the stream leaves
    stability undetermined (reported as None), not an error.
    """
    if not (epsilon > 0.0) or not math.isfinite(epsilon):
        raise ValueError("epsilon must be positive")
    if int(window) != window or window < 2:
        raise ValueError("window must be an integer >= 2")
    config = config or CompassConfig()
    n = len(stream)
    qcodes, angles, lengths = _kernels.as_kernel_arrays(
        [QUALITY_INDEX[i.quality] for i in stream],
        [absolute_angle(i, config.layout) for i in stream],
        [i.raw_length for i in stream],
    )
    if n:
        traces_arr, counts_arr = _kernels.prefix_components(qcodes, angles, lengths)
    else:
        traces_arr = np.zeros((0, 3, 2))
        counts_arr = np.zeros((0, 3), dtype=np.int64)

    traces: dict[Quality, tuple[TraceEntry, ...]] = {}
    stable: dict[Quality, bool | None] = {}
    first_index: dict[Quality, int | None] = {}
    for quality in QUALITIES:
        qi = QUALITY_INDEX[quality]
        entries = tuple(
            TraceEntry(
                indicator_count=int(counts_arr[k, qi]),
                vector=Vec2(float(traces_arr[k, qi, 0]), float(traces_arr[k, qi, 1])),
            )
            for k in range(n)
        )
        traces[quality] = entries
        if n < window:
            stable[quality] = None
            first_index[quality] = None
            continue
        vectors = traces_arr[:, qi, :]
        stable[quality] = _window_spread(vectors[n - window:]) < epsilon
        found: int | None = None
        for end in range(window - 1, n):
            if _window_spread(vectors[end - window + 1:end + 1]) < epsilon:
                found = end + 1  # 1-based prefix length
                break
        first_index[quality] = found
    return ConvergenceReport(
        epsilon=epsilon,
        window=window,
        stream_length=n,
        traces=traces,
        stable=stable,
        first_stable_index=first_index,
    )


@dataclass(frozen=True)
class InfluenceEntry:
    indicator_id: str
    angle_delta_degrees: "float | None"
    magnitude_delta: float
    displacement: float
    outlier: bool


@dataclass(frozen=True)
class InfluenceReport:
    entries: tuple[InfluenceEntry, ...]
    outlier_threshold: float

    def entry(self, indicator_id: str) -> InfluenceEntry:
        for item in self.entries:
            if item.indicator_id == indicator_id:
                return item
        raise KeyError(indicator_id)

    @property
    def outlier_ids(self) -> tuple[str, ...]:
        return tuple(e.indicator_id for e in self.entries if e.outlier)


def influence_report(
    table: IndicatorTable,
    config: CompassConfig | None = None,
    outlier_threshold: float = 0.05,
) -> InfluenceReport:
    """Final-arrow shift from removing each indicator in turn.

    Each entry is computed by rebuilding the (n-1)-row table and running the
    full reading again, so leave-one-out results are exactly what a direct
    recomputation would produce.
    """
    if not table.indicators:
        raise ValueError("influence report needs a nonempty table")
    if not (outlier_threshold > 0.0):
        raise ValueError("outlier_threshold must be positive")
    config = config or CompassConfig()
    base = compass_reading(table, config)
    entries = []
    for ind in sorted(table.indicators, key=lambda i: i.id):
        without = compass_reading(table.without_indicator(ind.id), config)
        displacement = without.final.distance_to(base.final)
        magnitude_delta = without.final.magnitude - base.final.magnitude
        if (
            base.raw_final.magnitude < config.balance_epsilon
            or without.raw_final.magnitude < config.balance_epsilon
        ):
            angle_delta: float | None = None
        else:
            angle_delta = circular_delta_degrees(
                without.final.angle_degrees, base.final.angle_degrees
            )
        entries.append(
            InfluenceEntry(
                indicator_id=ind.id,
                angle_delta_degrees=angle_delta,
                magnitude_delta=magnitude_delta,
                displacement=displacement,
                outlier=displacement > outlier_threshold,
            )
        )
    return InfluenceReport(entries=tuple(entries), outlier_threshold=outlier_threshold)


@dataclass(frozen=True)
class RobustnessGrade:
    robust: bool
    reasons: tuple[str, ...] = ()
    outlier_ids: tuple[str, ...] = ()


def grade_table(
    table: IndicatorTable,
    config: CompassConfig | None = None,
    params: RobustnessParams | None = None,
) -> RobustnessGrade:
    params = params or RobustnessParams()
    if not table.indicators:
        return RobustnessGrade(robust=False, reasons=("table has no indicators",))
    report = influence_report(table, config, params.outlier_threshold)
    if report.outlier_ids:
        return RobustnessGrade(
            robust=False,
            reasons=(
                "single-indicator removal moves the final arrow by more than %s"
                % params.outlier_threshold,
            ),
            outlier_ids=report.outlier_ids,
        )
    return RobustnessGrade(robust=True)


class IncomparableReadingsError(ValueError):
    """Readings of different institutions cannot be diffed."""


@dataclass(frozen=True)
class ConfigChange:
    field: str
    a: Any
    b: Any


@dataclass(frozen=True)
class IndicatorEdit:
    indicator_id: str
    fields: tuple[str, ...]


@dataclass(frozen=True)
class IndicatorChanges:
    added: tuple[str, ...]
    removed: tuple[str, ...]
    modified: tuple[IndicatorEdit, ...]

    @property
    def empty(self) -> bool:
        return not (self.added or self.removed or self.modified)


@dataclass(frozen=True)
class GerrymanderDiff:
    classification_flip: "tuple[Classification, Classification] | None"
    angle_delta_degrees: "float | None"
    magnitude_delta: float
    config_changes: tuple[ConfigChange, ...]
    indicator_changes: IndicatorChanges

    @property
    def is_empty(self) -> bool:
        return (
            self.classification_flip is None
            and not self.config_changes
            and self.indicator_changes.empty
            and self.magnitude_delta == 0.0
            and self.angle_delta_degrees in (None, 0.0)
        )


def _config_fields(config: CompassConfig) -> dict[str, Any]:
    return {
        "layout": config.layout.to_directive(),
        "center_method": config.center_method.value,
        "perspicuity_alpha": config.perspicuity.alpha,
        "perspicuity_beta": config.perspicuity.beta,
        "perspicuity_enabled": config.perspicuity.enabled,
        "balance_epsilon": config.balance_epsilon,
    }


_INDICATOR_FIELDS = ("name", "quality", "offset", "raw_length", "boundary_ok", "notes", "timestamp")


def gerrymander_diff(a: CompassReading, b: CompassReading) -> GerrymanderDiff:
    """Attribute the reading change to the inputs that actually differ.

    Pinning a shift to explicit config edits or indicator edits is the
    defense against quiet re-tuning between two published readings.
    """
    if a.table.institution != b.table.institution:
        raise IncomparableReadingsError(
            "readings belong to different institutions: %r vs %r"
            % (a.table.institution, b.table.institution)
        )

    flip = None
    if a.classification is not b.classification:
        flip = (a.classification, b.classification)
    if (
        a.raw_final.magnitude < a.config.balance_epsilon
        or b.raw_final.magnitude < b.config.balance_epsilon
    ):
        angle_delta: float | None = None
    else:
        angle_delta = circular_delta_degrees(a.final.angle_degrees, b.final.angle_degrees)
    magnitude_delta = b.final.magnitude - a.final.magnitude

    fields_a = _config_fields(a.config)
    fields_b = _config_fields(b.config)
    config_changes = tuple(
        ConfigChange(field=key, a=fields_a[key], b=fields_b[key])
        for key in fields_a
        if fields_a[key] != fields_b[key]
    )

    ids_a = {i.id: i for i in a.table.indicators}
    ids_b = {i.id: i for i in b.table.indicators}
    added = tuple(sorted(set(ids_b) - set(ids_a)))
    removed = tuple(sorted(set(ids_a) - set(ids_b)))
    modified = []
    for indicator_id in sorted(set(ids_a) & set(ids_b)):
        ia, ib = ids_a[indicator_id], ids_b[indicator_id]
        changed = tuple(
            name for name in _INDICATOR_FIELDS if getattr(ia, name) != getattr(ib, name)
        )
        if changed:
            modified.append(IndicatorEdit(indicator_id=indicator_id, fields=changed))

    return GerrymanderDiff(
        classification_flip=flip,
        angle_delta_degrees=angle_delta,
        magnitude_delta=magnitude_delta,
        config_changes=config_changes,
        indicator_changes=IndicatorChanges(
            added=added, removed=removed, modified=tuple(modified)
        ),
    )
