"""Composition of eco, socio, and econo compass readings into one verdict.

The three sphere finals are combined as a normalized weighted mean with the
ecological sphere weighted heaviest by default, mirroring nested dependence:
economies sit inside societies, societies inside ecologies.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Mapping

from .aggregate import (
    Classification,
    CompassConfig,
    CompassReading,
    classify,
    perspicuity_correct,
)
from .model import SPHERES, Sphere, Vec2


class LayoutMismatchError(ValueError):
    """Sphere readings composed under different sector layouts."""


class InvalidWeightOrderWarning(UserWarning):
    """Weights deliberately reordered away from eco >= socio >= econo."""


@dataclass(frozen=True)
class SphereWeights:
    eco: float = 1.0
    socio: float = 0.75
    econo: float = 0.5

    def __post_init__(self) -> None:
        for label, value in (("eco", self.eco), ("socio", self.socio), ("econo", self.econo)):
            if not math.isfinite(value) or value <= 0.0:
                raise ValueError("sphere weight %s must be positive, got %r" % (label, value))

    @property
    def ordering_ok(self) -> bool:
        return self.eco >= self.socio >= self.econo

    def value(self, sphere: Sphere) -> float:
        if sphere is Sphere.ECO:
            return self.eco
        if sphere is Sphere.SOCIO:
            return self.socio
        if sphere is Sphere.ECONO:
            return self.econo
        raise KeyError(sphere)

    @property
    def total(self) -> float:
        return self.eco + self.socio + self.econo


DEFAULT_WEIGHTS = SphereWeights()


@dataclass(frozen=True)
class EcologicalCompass:
    readings: Mapping[Sphere, CompassReading]
    weights: SphereWeights
    composed_raw: Vec2
    composed_sum: Vec2  # un-normalized weighted sum, kept as a diagnostic
    composed_final: Vec2
    classification: Classification
    sustainable: bool


def compose_spheres(
    readings: Mapping[Sphere, CompassReading],
    weights: SphereWeights | None = None,
    config: CompassConfig | None = None,
) -> EcologicalCompass:
    """Weighted mean of the three sphere finals, then one perspicuity pass.

    Per-sphere finals arrive already corrected; the remap is applied exactly
    once more at composition so nesting does not compound it.
    """
    weights = weights or DEFAULT_WEIGHTS
    if set(readings) != set(SPHERES):
        raise ValueError("composition needs exactly the eco, socio, and econo readings")
    layouts = {readings[s].config.layout for s in SPHERES}
    if len(layouts) != 1:
        raise LayoutMismatchError(
            "sphere readings must share one sector layout, got %d distinct" % len(layouts)
        )
    config = config or readings[Sphere.ECO].config
    if config.layout not in layouts:
        raise LayoutMismatchError("composition config layout differs from the readings'")
    if not weights.ordering_ok:
        warnings.warn(
            "sphere weights reordered: expected eco >= socio >= econo",
            InvalidWeightOrderWarning,
            stacklevel=2,
        )

    sum_x = sum_y = 0.0
    for sphere in SPHERES:
        w = weights.value(sphere)
        final = readings[sphere].final
        sum_x += w * final.x
        sum_y += w * final.y
    composed_sum = Vec2(sum_x, sum_y)
    composed_raw = Vec2(sum_x / weights.total, sum_y / weights.total)

    magnitude = composed_raw.magnitude
    if config.perspicuity.enabled and magnitude > 0.0:
        target = perspicuity_correct(
            magnitude, config.perspicuity.alpha, config.perspicuity.beta
        )
        composed_final = composed_raw.scaled(target / magnitude)
    else:
        composed_final = composed_raw
    classification = classify(composed_raw, config.layout, config.balance_epsilon)
    return EcologicalCompass(
        readings=dict(readings),
        weights=weights,
        composed_raw=composed_raw,
        composed_sum=composed_sum,
        composed_final=composed_final,
        classification=classification,
        sustainable=classification is Classification.HARMONY,
    )


def is_sustainable(compass: EcologicalCompass) -> bool:
    """Sustainable exactly when the composed arrow classifies as harmony.

    A balanced composed arrow is not sustainable: the verdict demands a
    definite harmony direction, not the absence of one.
    """
    return compass.classification is Classification.HARMONY
