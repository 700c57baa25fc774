"""CSV/JSON table codecs, config loading, reading docs, snapshot store."""
from __future__ import annotations

import json
import math
from datetime import datetime, timezone

import pytest
from hypothesis import given

from policy_compass import (
    CenterMethod,
    ConfigError,
    IndicatorTable,
    Quality,
    SectorLayout,
    SnapshotStore,
    Sphere,
    TableParseError,
    compass_reading,
    compose_spheres,
    config_to_dict,
    ecological_to_dict,
    load_config,
    parse_table,
    parse_table_csv,
    parse_table_json,
    reading_from_dict,
    reading_to_dict,
    table_to_dict,
    validate_indicator,
    write_table,
    write_table_csv,
    write_table_json,
)
from policy_compass.robustness import RobustnessParams
from policy_compass.spheres import SphereWeights
from policy_compass.tableio import (
    BAD_BOOLEAN,
    BAD_DIRECTIVE,
    BAD_DOCUMENT,
    BAD_ENCODING,
    BAD_NUMBER,
    BAD_TIMESTAMP,
    DUPLICATE_COLUMN,
    DUPLICATE_ID,
    INCONSISTENT_SPHERE,
    INVALID_WEIGHT_ORDER,
    MALFORMED_ROW,
    MISSING_COLUMN,
    QUALITY_ANGLE_MISMATCH,
    TYPE_MISMATCH,
    UNKNOWN_COLUMN,
    UNKNOWN_DIRECTIVE,
    UNKNOWN_KEY,
    UNKNOWN_QUALITY,
    UNKNOWN_SPHERE,
    to_canonical_json,
)

from conftest import FIXTURES
from strategies import tables

FIXTURE_FILES = (
    "example_company.csv",
    "eco_library.csv",
    "socio_library.csv",
    "econo_library.csv",
)

HEADER = "id,sphere,quality,name,angle,length,boundary_ok,notes\n"


def csv_doc(*rows, directives=""):
    return directives + HEADER + "".join(r + "\n" for r in rows)


def issues_of(excinfo):
    return [(i.row, i.column, i.code) for i in excinfo.value.issues]


class TestCsvFixpoint:
    @pytest.mark.parametrize("name", FIXTURE_FILES)
    def test_fixture_round_trips_to_a_fixpoint(self, name):
        original = parse_table_csv((FIXTURES / name).read_bytes())
        canonical = write_table_csv(original)
        reparsed = parse_table_csv(canonical)
        assert reparsed == original
        # Writing the reparsed table reproduces the exact same bytes.
        assert write_table_csv(reparsed) == canonical

    @pytest.mark.parametrize("name", FIXTURE_FILES)
    def test_json_round_trips_to_a_fixpoint(self, name):
        original = parse_table_csv((FIXTURES / name).read_bytes())
        doc = write_table_json(original)
        reparsed = parse_table_json(doc)
        assert reparsed == original
        assert write_table_json(reparsed) == doc

    @given(tables(max_indicators=10))
    def test_any_table_round_trips_both_formats(self, table):
        for fmt in ("csv", "json"):
            text = write_table(table, fmt)
            assert parse_table(text, fmt) == table
            assert write_table(parse_table(text, fmt), fmt) == text

    def test_unicode_fields_survive(self):
        table = IndicatorTable(
            institution="Ekologiskt Café — Växjö",
            indicators=(
                validate_indicator(
                    id="née",
                    name="naïve — λ mètric",
                    quality=Quality.PASSION,
                    offset=42.5,
                    raw_length=0.7,
                    notes="déjà vu, 繁體字",
                ),
            ),
        )
        for fmt in ("csv", "json"):
            assert parse_table(write_table(table, fmt), fmt) == table

    def test_empty_table_round_trips(self):
        table = IndicatorTable(institution="Nothing Yet")
        for fmt in ("csv", "json"):
            parsed = parse_table(write_table(table, fmt), fmt)
            assert parsed == table
            assert parsed.indicators == ()

    def test_header_only_document(self):
        table = parse_table_csv(HEADER)
        assert table.indicators == ()
        assert table.institution == ""

    def test_timestamps_round_trip(self):
        stamp = datetime(2026, 2, 3, 4, 5, 6, tzinfo=timezone.utc)
        table = IndicatorTable(
            institution="Clocked",
            snapshot_time=stamp,
            indicators=(
                validate_indicator(
                    id="t1",
                    name="timed",
                    quality=Quality.HARMONY,
                    offset=30.0,
                    raw_length=0.5,
                    timestamp=stamp,
                ),
            ),
        )
        for fmt in ("csv", "json"):
            parsed = parse_table(write_table(table, fmt), fmt)
            assert parsed.snapshot_time == stamp
            assert parsed.get("t1").timestamp == stamp

    def test_crlf_accepted(self):
        text = csv_doc("a,eco,harmony,Thing,30,0.5,,").replace("\n", "\r\n")
        table = parse_table_csv(text)
        assert table.get("a").offset == 30.0

    def test_unknown_format_rejected(self):
        table = IndicatorTable(institution="X")
        with pytest.raises(ValueError):
            write_table(table, "xml")
        with pytest.raises(ValueError):
            parse_table("", "xml")


class TestAbsoluteAngles:
    def test_absolute_angle_resolves_to_offset(self):
        text = csv_doc(
            "w,econo,harmony,Steady wages,20,.5,,",
            directives="# angle_mode=absolute\n"
            "# layout=harmony:0,suppression:120,passion:240\n",
        )
        table = parse_table_csv(text)
        assert table.get("w").offset == 20.0

    def test_absolute_angle_in_a_later_sector(self):
        text = csv_doc(
            "b,unspecified,suppression,Energy use,280,.3,,",
            directives="# angle_mode=absolute\n",
        )
        assert parse_table_csv(text).get("b").offset == 40.0

    def test_absolute_angle_outside_declared_quality(self):
        text = csv_doc(
            "x,unspecified,harmony,Wrong sector,150,.5,,",
            directives="# angle_mode=absolute\n",
        )
        with pytest.raises(TableParseError) as exc:
            parse_table_csv(text)
        assert issues_of(exc) == [(1, "angle", QUALITY_ANGLE_MISMATCH)]

    def test_end_boundary_needs_boundary_ok(self):
        base = "p,unspecified,passion,Border case,240,.2,%s,on the border"
        ok = csv_doc(base % "true", directives="# angle_mode=absolute\n")
        table = parse_table_csv(ok)
        assert table.get("p").offset == 120.0
        assert table.get("p").boundary_ok is True
        bad = csv_doc(base % "", directives="# angle_mode=absolute\n")
        with pytest.raises(TableParseError) as exc:
            parse_table_csv(bad)
        assert issues_of(exc) == [(1, "angle", QUALITY_ANGLE_MISMATCH)]

    def test_absolute_angles_normalize_mod_360(self):
        text = csv_doc(
            "n,unspecified,harmony,Wrapped,380,.5,,",
            directives="# angle_mode=absolute\n",
        )
        assert parse_table_csv(text).get("n").offset == 20.0


class TestCsvErrorCollection:
    def test_every_bad_row_is_reported_with_row_and_column(self):
        text = csv_doc(
            "g1,eco,harmony,Fine,30,0.5,,",
            "b1,eco,calmness,Bad quality,30,0.5,,",
            "b2,eco,harmony,Bad angle,wat,0.5,,",
            "b3,eco,harmony,Bad length,30,1.7,,",
            "b4,eco,harmony,,30,0.5,,",
        )
        with pytest.raises(TableParseError) as exc:
            parse_table_csv(text)
        got = issues_of(exc)
        assert (2, "quality", UNKNOWN_QUALITY) in got
        assert (3, "angle", BAD_NUMBER) in got
        assert (4, "length", "length_out_of_range") in got
        assert (5, "name", "empty_name") in got
        assert len(got) >= 4
        for row, column, _ in got:
            assert row >= 1 and column is not None

    def test_malformed_row_cell_count(self):
        text = csv_doc('x,eco,harmony,"Unquoted,comma,storm",30')
        with pytest.raises(TableParseError) as exc:
            parse_table_csv(text)
        assert issues_of(exc)[0][2] == MALFORMED_ROW

    def test_duplicate_ids_rejected(self):
        text = csv_doc(
            "same,eco,harmony,First,30,0.5,,",
            "same,eco,passion,Second,40,0.5,,",
        )
        with pytest.raises(TableParseError) as exc:
            parse_table_csv(text)
        assert (2, "id", DUPLICATE_ID) in issues_of(exc)

    def test_missing_required_column(self):
        with pytest.raises(TableParseError) as exc:
            parse_table_csv("id,sphere,quality,name,angle\nx,eco,harmony,Hi,30\n")
        codes = {i.code for i in exc.value.issues}
        assert MISSING_COLUMN in codes

    def test_unknown_and_duplicate_columns(self):
        with pytest.raises(TableParseError) as exc:
            parse_table_csv(
                "id,sphere,quality,name,angle,length,notes,notes,mood\n"
            )
        codes = {i.code for i in exc.value.issues}
        assert UNKNOWN_COLUMN in codes
        assert DUPLICATE_COLUMN in codes

    def test_directive_problems(self):
        text = csv_doc(
            "a,eco,harmony,Fine,30,0.5,,",
            directives="# angle_mode=sideways\n# shoe_size=44\n# just a comment without equals\n",
        )
        with pytest.raises(TableParseError) as exc:
            parse_table_csv(text)
        got = issues_of(exc)
        assert (0, "angle_mode", BAD_DIRECTIVE) in got
        assert (0, "shoe_size", UNKNOWN_DIRECTIVE) in got
        assert any(code == BAD_DIRECTIVE and col is None for _, col, code in got)

    def test_inconsistent_sphere_rows(self):
        text = csv_doc(
            "a,eco,harmony,Fine,30,0.5,,",
            "b,socio,harmony,Other sphere,40,0.5,,",
        )
        with pytest.raises(TableParseError) as exc:
            parse_table_csv(text)
        assert (2, "sphere", INCONSISTENT_SPHERE) in issues_of(exc)

    def test_sphere_directive_pins_the_table_sphere(self):
        text = csv_doc(
            "a,socio,harmony,Fine,30,0.5,,",
            directives="# sphere=eco\n",
        )
        with pytest.raises(TableParseError) as exc:
            parse_table_csv(text)
        assert (1, "sphere", INCONSISTENT_SPHERE) in issues_of(exc)

    def test_bad_boolean_and_timestamp(self):
        text = csv_doc(
            "a,eco,harmony,Fine,30,0.5,perhaps,",
        ).replace(",notes\n", ",timestamp,notes\n").replace(
            "perhaps,", "perhaps,not-a-time,"
        )
        # Rebuild cleanly instead of string surgery: explicit header.
        text = (
            "id,sphere,quality,name,angle,length,boundary_ok,timestamp,notes\n"
            "a,eco,harmony,Fine,30,0.5,perhaps,not-a-time,\n"
        )
        with pytest.raises(TableParseError) as exc:
            parse_table_csv(text)
        got = issues_of(exc)
        assert (1, "boundary_ok", BAD_BOOLEAN) in got
        assert (1, "timestamp", BAD_TIMESTAMP) in got

    def test_invalid_utf8(self):
        with pytest.raises(TableParseError) as exc:
            parse_table_csv(b"\xff\xfe broken")
        assert exc.value.issues[0].code == BAD_ENCODING

    def test_empty_document(self):
        with pytest.raises(TableParseError):
            parse_table_csv("")

    def test_blank_ids_are_assigned_by_ordinal(self):
        text = csv_doc(
            ",eco,harmony,First,30,0.5,,",
            ",eco,passion,Second,40,0.5,,",
        )
        table = parse_table_csv(text)
        assert set(table.ids()) == {"r001", "r002"}


class TestJsonParsing:
    def test_minimal_document(self):
        doc = {
            "institution": "Min",
            "indicators": [
                {"quality": "harmony", "name": "only", "angle": 25.0, "length": 0.5}
            ],
        }
        table = parse_table_json(json.dumps(doc))
        assert table.institution == "Min"
        assert table.get("r001").offset == 25.0

    def test_error_collection(self):
        doc = {
            "institution": "Bad",
            "mood": "confused",
            "indicators": [
                {"quality": "zen", "name": "a", "angle": 10.0, "length": 0.5},
                {"quality": "harmony", "name": "b", "angle": "ten", "length": 0.5},
                "not an object",
                {"quality": "harmony", "name": "c", "angle": 10.0, "length": 0.5,
                 "boundary_ok": "yes"},
            ],
        }
        with pytest.raises(TableParseError) as exc:
            parse_table_json(json.dumps(doc))
        got = issues_of(exc)
        assert (0, "mood", UNKNOWN_KEY) in got
        assert (1, "quality", UNKNOWN_QUALITY) in got
        assert (2, "angle", BAD_NUMBER) in got
        assert (3, None, MALFORMED_ROW) in got
        assert (4, "boundary_ok", BAD_BOOLEAN) in got

    def test_document_level_failures(self):
        with pytest.raises(TableParseError) as exc:
            parse_table_json("{ nope")
        assert exc.value.issues[0].code == BAD_DOCUMENT
        with pytest.raises(TableParseError) as exc:
            parse_table_json("[1, 2]")
        assert exc.value.issues[0].code == BAD_DOCUMENT

    def test_boolean_disguised_as_number_rejected(self):
        doc = {
            "indicators": [
                {"quality": "harmony", "name": "x", "angle": True, "length": 0.5}
            ]
        }
        with pytest.raises(TableParseError) as exc:
            parse_table_json(json.dumps(doc))
        assert issues_of(exc)[0][2] == BAD_NUMBER

    def test_absolute_mode_with_layout(self):
        doc = {
            "angle_mode": "absolute",
            "layout": "harmony:0,suppression:120,passion:240",
            "indicators": [
                {"id": "p", "quality": "passion", "name": "late", "angle": 250.0,
                 "length": 0.5}
            ],
        }
        table = parse_table_json(json.dumps(doc))
        assert table.get("p").offset == 10.0


class TestConfig:
    def test_empty_inputs_give_defaults(self):
        for source in (None, "", "{}", {}):
            loaded = load_config(source)
            assert loaded.compass == load_config(None).compass
            assert loaded.compass.layout == SectorLayout()
            assert loaded.compass.center_method is CenterMethod.CENTROID
            assert loaded.compass.perspicuity.alpha == 0.5
            assert loaded.compass.balance_epsilon == 1e-9
            assert loaded.weights == SphereWeights()
            assert loaded.robustness == RobustnessParams()
            assert loaded.warnings == ()

    def test_full_round_trip(self):
        doc = config_to_dict(
            compass=load_config({"center_method": "orthocenter"}).compass,
            weights=SphereWeights(2.0, 1.0, 0.5),
            robustness=RobustnessParams(0.01, 30, 0.1),
        )
        loaded = load_config(doc)
        assert loaded.compass.center_method is CenterMethod.ORTHOCENTER
        assert loaded.weights == SphereWeights(2.0, 1.0, 0.5)
        assert loaded.robustness == RobustnessParams(0.01, 30, 0.1)
        assert config_to_dict(loaded.compass, loaded.weights, loaded.robustness) == doc

    def test_unknown_key_is_an_error(self):
        with pytest.raises(ConfigError) as exc:
            load_config({"layout": "harmony:0,passion:120,suppression:240", "mood": 3})
        assert [(i.column, i.code) for i in exc.value.issues] == [("mood", UNKNOWN_KEY)]

    def test_type_and_value_errors(self):
        with pytest.raises(ConfigError) as exc:
            load_config(
                {
                    "perspicuity_alpha": "half",
                    "balance_epsilon": -1,
                    "convergence_window": 1,
                    "center_method": "middle",
                }
            )
        codes = {(i.column, i.code) for i in exc.value.issues}
        assert ("perspicuity_alpha", TYPE_MISMATCH) in codes
        assert len(exc.value.issues) == 4

    def test_weight_reorder_is_warning_not_error(self):
        loaded = load_config({"weight_eco": 0.5, "weight_socio": 1.0})
        assert loaded.weights.eco == 0.5
        assert loaded.weights.socio == 1.0
        assert [w.code for w in loaded.warnings] == [INVALID_WEIGHT_ORDER]

    def test_invalid_json_document(self):
        with pytest.raises(ConfigError):
            load_config("not json at all{")
        with pytest.raises(ConfigError):
            load_config("[1,2,3]")

    def test_layout_errors_are_collected(self):
        with pytest.raises(ConfigError) as exc:
            load_config({"layout": "harmony:0,passion:90,suppression:240"})
        assert exc.value.issues[0].column == "layout"


class TestReadingDocuments:
    def test_reading_doc_carries_the_full_story(self, canonical_reading):
        doc = reading_to_dict(canonical_reading)
        assert doc["institution"] == "Example Company"
        assert doc["classification"] == "suppression"
        assert set(doc["sectors"]) == {"harmony", "passion", "suppression"}
        assert doc["sectors"]["harmony"]["indicator_count"] == 3
        assert len(doc["triangle"]) == 3
        assert doc["final"]["x"] == canonical_reading.final.x

    def test_reading_rebuild_is_exact(self, canonical_reading):
        doc = json.loads(json.dumps(reading_to_dict(canonical_reading)))
        rebuilt = reading_from_dict(doc)
        assert rebuilt.table == canonical_reading.table
        assert rebuilt.final == canonical_reading.final
        assert rebuilt.raw_final == canonical_reading.raw_final
        assert rebuilt.classification is canonical_reading.classification

    def test_ecological_doc(self, library_readings):
        compass = compose_spheres(library_readings)
        doc = ecological_to_dict(compass)
        assert doc["sustainable"] is False
        assert doc["classification"] == "passion"
        assert set(doc["readings"]) == {"eco", "socio", "econo"}
        assert doc["weights"] == {"eco": 1.0, "socio": 0.75, "econo": 0.5}
        assert doc["composed_final"]["x"] == compass.composed_final.x

    def test_canonical_json_is_deterministic(self, canonical_reading):
        doc = reading_to_dict(canonical_reading)
        assert to_canonical_json(doc) == to_canonical_json(
            reading_to_dict(canonical_reading)
        )
        assert to_canonical_json(doc).endswith("\n")


class TestSnapshotStore:
    T1 = datetime(2026, 1, 1, tzinfo=timezone.utc)
    T2 = datetime(2026, 2, 1, tzinfo=timezone.utc)
    T3 = datetime(2026, 3, 1, tzinfo=timezone.utc)

    def table(self, length=0.5):
        return IndicatorTable(
            institution="School",
            indicators=(
                validate_indicator(
                    id="x", name="x", quality=Quality.HARMONY, offset=30.0,
                    raw_length=length,
                ),
            ),
        )

    def test_chronological_insertion(self):
        store = SnapshotStore()
        store.add("School", self.T1, self.table(0.1))
        store.add("School", self.T2, self.table(0.2))
        with pytest.raises(ValueError):
            store.add("School", self.T2, self.table(0.3))
        with pytest.raises(ValueError):
            store.add("School", self.T1, self.table(0.3))
        history = store.history("School")
        assert [t for t, _ in history] == [self.T1, self.T2]
        assert store.history("Unknown") == ()
        assert store.institutions() == ("School",)

    def test_save_and_load_round_trip(self, tmp_path, library_tables):
        store = SnapshotStore()
        store.add("School", self.T1, self.table(0.1))
        store.add("School", self.T2, self.table(0.9))
        store.add("Library", self.T3, library_tables)
        path = str(tmp_path / "snapshots.json")
        store.save(path)
        loaded = SnapshotStore.load(path)
        assert loaded.institutions() == store.institutions()
        assert loaded.history("School") == store.history("School")
        time, payload = loaded.history("Library")[0]
        assert time == self.T3
        assert payload == library_tables
