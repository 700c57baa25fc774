"""Shared fixtures: canonical tables, sphere readings, hypothesis profile."""
from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

import policy_compass as pc

FIXTURES = Path(__file__).parent / "fixtures"

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


MIRROR_LAYOUT = pc.SectorLayout.from_directive(
    "harmony:0,suppression:120,passion:240"
)


@pytest.fixture(scope="session")
def canonical_table() -> pc.IndicatorTable:
    return pc.parse_table_csv((FIXTURES / "example_company.csv").read_bytes())


@pytest.fixture(scope="session")
def canonical_reading(canonical_table) -> pc.CompassReading:
    return pc.compass_reading(canonical_table)


@pytest.fixture(scope="session")
def library_tables() -> dict[pc.Sphere, pc.IndicatorTable]:
    return {
        pc.Sphere(name): pc.parse_table_csv(
            (FIXTURES / ("%s_library.csv" % name)).read_bytes()
        )
        for name in ("eco", "socio", "econo")
    }


@pytest.fixture(scope="session")
def mirror_config() -> pc.CompassConfig:
    return pc.CompassConfig(layout=MIRROR_LAYOUT)


@pytest.fixture(scope="session")
def library_readings(library_tables, mirror_config) -> dict[pc.Sphere, pc.CompassReading]:
    return {
        sphere: pc.compass_reading(table, mirror_config)
        for sphere, table in library_tables.items()
    }
