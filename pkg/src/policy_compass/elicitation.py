"""Workshop elicitation: weighted ballots and event-sourced sessions.

A session wraps one indicator table (or an eco/socio/econo triple) plus the
ballots cast so far.  Every accepted mutation bumps the version by exactly
one and appends one event whose payload is plain JSON data; replaying the
event log from scratch reproduces the session state bit for bit, which is
what the service leans on for crash recovery.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Mapping, Sequence

from .aggregate import CompassConfig
from .model import (
    DEFAULT_LAYOUT,
    SECTOR_SPAN,
    Indicator,
    IndicatorTable,
    IndicatorValidationError,
    Quality,
    SectorLayout,
    Sphere,
)
from .spheres import SphereWeights
from .tableio import (
    config_to_dict,
    indicator_from_dict,
    indicator_to_dict,
    load_config,
    table_to_dict,
    parse_table_json,
)
import json


class ElicitationError(ValueError):
    """Base for mutation failures; the session is left untouched."""


class EmptyBallotsError(ElicitationError):
    pass


class ZeroTotalWeightError(ElicitationError):
    pass


class InvalidNeighborError(ElicitationError):
    pass


class UnknownIndicatorError(ElicitationError):
    pass


class DuplicateNameError(ElicitationError):
    pass


class DuplicateIdError(ElicitationError):
    pass


class VersionConflictError(ElicitationError):
    def __init__(self, expected: int, actual: int):
        self.expected = expected
        self.actual = actual
        super().__init__("expected version %d, session is at %d" % (expected, actual))


class BadMutationError(ElicitationError):
    pass


class Intensity(str, Enum):
    LIGHT = "light"
    MEDIUM = "medium"
    STRONG = "strong"

    @property
    def multiplier(self) -> int:
        return {"light": 1, "medium": 2, "strong": 3}[self.value]


@dataclass(frozen=True)
class Ballot:
    voter: str
    toward: Quality
    weight: float = 1.0
    intensity: Intensity = Intensity.LIGHT

    def __post_init__(self) -> None:
        if not self.voter or not self.voter.strip():
            raise ValueError("ballot voter must be nonempty")
        if not math.isfinite(self.weight) or self.weight < 0.0:
            raise ValueError("ballot weight must be finite and >= 0")

    @property
    def effective_weight(self) -> float:
        return self.weight * self.intensity.multiplier


def ballot_to_dict(ballot: Ballot) -> dict[str, Any]:
    return {
        "voter": ballot.voter,
        "toward": ballot.toward.value,
        "weight": ballot.weight,
        "intensity": ballot.intensity.value,
    }


def ballot_from_dict(payload: Mapping[str, Any]) -> Ballot:
    return Ballot(
        voter=str(payload["voter"]),
        toward=Quality(payload["toward"]),
        weight=float(payload.get("weight", 1.0)),
        intensity=Intensity(payload.get("intensity", "light")),
    )


def angle_from_votes(
    ballots: Sequence[Ballot],
    target: Quality,
    layout: SectorLayout = DEFAULT_LAYOUT,
) -> float:
    """Within-sector offset from weighted pulls toward the two neighbors.

    Weight toward a neighbor drags the arrow to the boundary shared with
    that neighbor, so the offset is 120 * w_end / (w_start + w_end).  The
    result spans the closed [0, 120]; the extremes become boundary-sitting
    indicators downstream unless explicitly allowed.
    """
    if not ballots:
        raise EmptyBallotsError("no ballots cast")
    start_neighbor = layout.start_neighbor(target)
    end_neighbor = layout.end_neighbor(target)
    w_start = w_end = 0.0
    for ballot in ballots:
        if ballot.toward is target:
            raise InvalidNeighborError(
                "ballots must pull toward a neighboring quality, not %r" % target.value
            )
        if ballot.toward is start_neighbor:
            w_start += ballot.effective_weight
        elif ballot.toward is end_neighbor:
            w_end += ballot.effective_weight
        else:  # pragma: no cover - three qualities leave no other case
            raise InvalidNeighborError("quality %r is not adjacent" % ballot.toward.value)
    total = w_start + w_end
    if total <= 0.0:
        raise ZeroTotalWeightError("ballots carry zero total weight")
    return SECTOR_SPAN * w_end / total


@dataclass(frozen=True)
class SessionEvent:
    version: int
    kind: str
    payload: Mapping[str, Any]
    timestamp: datetime


def event_to_dict(event: SessionEvent) -> dict[str, Any]:
    return {
        "version": event.version,
        "kind": event.kind,
        "payload": dict(event.payload),
        "timestamp": event.timestamp.isoformat(),
    }


def event_from_dict(payload: Mapping[str, Any]) -> SessionEvent:
    return SessionEvent(
        version=int(payload["version"]),
        kind=str(payload["kind"]),
        payload=dict(payload["payload"]),
        timestamp=datetime.fromisoformat(str(payload["timestamp"])),
    )


@dataclass(frozen=True)
class Session:
    id: str
    tables: tuple[IndicatorTable, ...]
    config: CompassConfig
    weights: SphereWeights
    version: int
    ballots: Mapping[str, tuple[Ballot, ...]]
    participants: tuple[str, ...]
    event_log: tuple[SessionEvent, ...]

    @property
    def is_sphere_triple(self) -> bool:
        return len(self.tables) == 3

    @property
    def table(self) -> IndicatorTable:
        if self.is_sphere_triple:
            raise ValueError("session holds a sphere triple; address tables by sphere")
        return self.tables[0]

    def sphere_table(self, sphere: Sphere) -> IndicatorTable:
        for table in self.tables:
            if table.sphere is sphere:
                return table
        raise KeyError(sphere)

    def find_indicator(self, indicator_id: str) -> tuple[int, Indicator]:
        for index, table in enumerate(self.tables):
            found = table.get(indicator_id)
            if found is not None:
                return index, found
        raise UnknownIndicatorError("no indicator with id %r" % indicator_id)

    def all_ids(self) -> set[str]:
        ids: set[str] = set()
        for table in self.tables:
            ids.update(table.ids())
        return ids


def _now(value: datetime | None) -> datetime:
    return value if value is not None else datetime.now(timezone.utc)


def _check_tables(tables: Sequence[IndicatorTable]) -> tuple[IndicatorTable, ...]:
    tables = tuple(tables)
    if len(tables) not in (1, 3):
        raise ValueError("a session holds one table or an eco/socio/econo triple")
    if len(tables) == 3:
        spheres = {t.sphere for t in tables}
        if spheres != {Sphere.ECO, Sphere.SOCIO, Sphere.ECONO}:
            raise ValueError("a sphere triple needs exactly eco, socio, and econo tables")
    seen: set[str] = set()
    for table in tables:
        for indicator_id in table.ids():
            if indicator_id in seen:
                raise DuplicateIdError(
                    "indicator id %r repeats across session tables" % indicator_id
                )
            seen.add(indicator_id)
    return tables


def create_session(
    session_id: str,
    tables: Sequence[IndicatorTable],
    config: CompassConfig | None = None,
    weights: SphereWeights | None = None,
    now: datetime | None = None,
) -> Session:
    tables = _check_tables(tables)
    config = config or CompassConfig()
    weights = weights or SphereWeights()
    event = SessionEvent(
        version=0,
        kind="created",
        payload={
            "id": session_id,
            "tables": [table_to_dict(t) for t in tables],
            "config": config_to_dict(compass=config, weights=weights),
        },
        timestamp=_now(now),
    )
    return Session(
        id=session_id,
        tables=tables,
        config=config,
        weights=weights,
        version=0,
        ballots={},
        participants=(),
        event_log=(event,),
    )


def _commit(session: Session, kind: str, payload: Mapping[str, Any],
            now: datetime | None, **changes: Any) -> Session:
    event = SessionEvent(
        version=session.version + 1,
        kind=kind,
        payload=dict(payload),
        timestamp=_now(now),
    )
    return replace(
        session,
        version=session.version + 1,
        event_log=session.event_log + (event,),
        **changes,
    )


def _replace_table(tables: tuple[IndicatorTable, ...], index: int,
                   table: IndicatorTable) -> tuple[IndicatorTable, ...]:
    return tables[:index] + (table,) + tables[index + 1:]


def add_indicator(
    session: Session,
    indicator: Indicator,
    sphere: Sphere | None = None,
    now: datetime | None = None,
) -> Session:
    if indicator.id in session.all_ids():
        raise DuplicateIdError("indicator id %r already present" % indicator.id)
    if session.is_sphere_triple:
        if sphere is None:
            raise BadMutationError("sphere required when the session holds a triple")
        index = session.tables.index(session.sphere_table(sphere))
    else:
        if sphere is not None and sphere is not session.table.sphere:
            raise BadMutationError(
                "session table is %r, not %r" % (session.table.sphere.value, sphere.value)
            )
        index = 0
    payload = {
        "sphere": session.tables[index].sphere.value,
        "indicator": indicator_to_dict(indicator),
    }
    tables = _replace_table(
        session.tables, index, session.tables[index].with_indicator(indicator)
    )
    return _commit(session, "add_indicator", payload, now, tables=tables)


def consensus_adjust(
    session: Session,
    indicator_id: str,
    new_offset: float | None = None,
    new_raw_length: float | None = None,
    boundary_ok: bool | None = None,
    now: datetime | None = None,
) -> Session:
    """Move an indicator to the placement the room settled on."""
    index, indicator = session.find_indicator(indicator_id)
    adjusted = replace(
        indicator,
        offset=indicator.offset if new_offset is None else new_offset,
        raw_length=indicator.raw_length if new_raw_length is None else new_raw_length,
        boundary_ok=indicator.boundary_ok if boundary_ok is None else boundary_ok,
    )
    payload = {
        "indicator_id": indicator_id,
        "angle": adjusted.offset,
        "length": adjusted.raw_length,
        "boundary_ok": adjusted.boundary_ok,
    }
    tables = _replace_table(
        session.tables, index, session.tables[index].with_replaced(adjusted)
    )
    return _commit(session, "consensus_adjust", payload, now, tables=tables)


@dataclass(frozen=True)
class SplitPlacement:
    offset: float
    raw_length: float
    quality: Quality | None = None  # None inherits the parent's quality
    boundary_ok: bool = False


def split_indicator(
    session: Session,
    indicator_id: str,
    name_a: str,
    name_b: str,
    placements: Sequence[SplitPlacement],
    now: datetime | None = None,
) -> Session:
    """Replace one conflated statistic with two separately placed ones.

    The children may land in different qualities (a statistic can read as
    harmony for one aspect and suppression for another).
    """
    index, parent = session.find_indicator(indicator_id)
    if len(placements) != 2:
        raise BadMutationError("split needs exactly two placements")
    if name_a.strip() == name_b.strip():
        raise DuplicateNameError("split names must be distinct")
    taken = session.all_ids()
    children = []
    for suffix, name, placement in zip(("a", "b"), (name_a, name_b), placements):
        child_id = "%s-%s" % (parent.id, suffix)
        bump = 2
        while child_id in taken:
            child_id = "%s-%s%d" % (parent.id, suffix, bump)
            bump += 1
        taken.add(child_id)
        children.append(
            Indicator(
                id=child_id,
                name=name,
                quality=placement.quality or parent.quality,
                offset=placement.offset,
                raw_length=placement.raw_length,
                boundary_ok=placement.boundary_ok,
            )
        )
    payload = {
        "indicator_id": indicator_id,
        "children": [indicator_to_dict(c) for c in children],
    }
    table = session.tables[index].without_indicator(indicator_id)
    for child in children:
        table = table.with_indicator(child)
    tables = _replace_table(session.tables, index, table)
    return _commit(session, "split_indicator", payload, now, tables=tables)


def remove_indicator(
    session: Session, indicator_id: str, now: datetime | None = None
) -> Session:
    index, _ = session.find_indicator(indicator_id)
    payload = {"indicator_id": indicator_id}
    tables = _replace_table(
        session.tables, index, session.tables[index].without_indicator(indicator_id)
    )
    ballots = {k: v for k, v in session.ballots.items() if k != indicator_id}
    return _commit(session, "remove_indicator", payload, now, tables=tables, ballots=ballots)


def cast_ballots(
    session: Session,
    indicator_id: str,
    ballots: Sequence[Ballot],
    now: datetime | None = None,
) -> Session:
    """Record ballots and move the indicator to the vote-implied offset.

    Ballots accumulate: the new offset reflects every ballot cast for this
    indicator so far.  Both voting and consensus adjustment may touch the
    same indicator across a session; the later mutation simply wins.
    """
    if not ballots:
        raise EmptyBallotsError("no ballots cast")
    index, indicator = session.find_indicator(indicator_id)
    combined = session.ballots.get(indicator_id, ()) + tuple(ballots)
    new_offset = angle_from_votes(combined, indicator.quality, session.config.layout)
    adjusted = replace(indicator, offset=new_offset)
    payload = {
        "indicator_id": indicator_id,
        "ballots": [ballot_to_dict(b) for b in ballots],
        "new_angle": new_offset,
    }
    tables = _replace_table(
        session.tables, index, session.tables[index].with_replaced(adjusted)
    )
    new_ballots = dict(session.ballots)
    new_ballots[indicator_id] = combined
    participants = list(session.participants)
    for ballot in ballots:
        if ballot.voter not in participants:
            participants.append(ballot.voter)
    return _commit(
        session,
        "cast_ballots",
        payload,
        now,
        tables=tables,
        ballots=new_ballots,
        participants=tuple(participants),
    )


def set_config(
    session: Session,
    config: CompassConfig | None = None,
    weights: SphereWeights | None = None,
    now: datetime | None = None,
) -> Session:
    new_config = config if config is not None else session.config
    new_weights = weights if weights is not None else session.weights
    payload = {"config": config_to_dict(compass=new_config, weights=new_weights)}
    return _commit(
        session, "set_config", payload, now, config=new_config, weights=new_weights
    )


def apply_event(session: "Session | None", event: SessionEvent) -> Session:
    """Replay one persisted event; shares the mutation paths above."""
    kind = event.kind
    payload = event.payload
    if kind == "created":
        if session is not None:
            raise ValueError("created event must come first")
        tables = tuple(
            parse_table_json(json.dumps(doc)) for doc in payload["tables"]
        )
        loaded = load_config(payload.get("config", {}))
        base = create_session(
            str(payload["id"]), tables, loaded.compass, loaded.weights,
            now=event.timestamp,
        )
        return replace(base, event_log=(event,))
    if session is None:
        raise ValueError("event log must start with a created event")
    if event.version != session.version + 1:
        raise ValueError(
            "event version %d does not follow session version %d"
            % (event.version, session.version)
        )

    if kind == "add_indicator":
        out = add_indicator(
            session,
            indicator_from_dict(payload["indicator"]),
            sphere=Sphere(payload["sphere"]) if session.is_sphere_triple else None,
            now=event.timestamp,
        )
    elif kind == "consensus_adjust":
        out = consensus_adjust(
            session,
            str(payload["indicator_id"]),
            new_offset=float(payload["angle"]),
            new_raw_length=float(payload["length"]),
            boundary_ok=bool(payload["boundary_ok"]),
            now=event.timestamp,
        )
    elif kind == "split_indicator":
        children = [indicator_from_dict(doc) for doc in payload["children"]]
        index, _ = session.find_indicator(str(payload["indicator_id"]))
        table = session.tables[index].without_indicator(str(payload["indicator_id"]))
        for child in children:
            table = table.with_indicator(child)
        out = _commit(
            session,
            "split_indicator",
            payload,
            event.timestamp,
            tables=_replace_table(session.tables, index, table),
        )
    elif kind == "remove_indicator":
        out = remove_indicator(session, str(payload["indicator_id"]), now=event.timestamp)
    elif kind == "cast_ballots":
        out = cast_ballots(
            session,
            str(payload["indicator_id"]),
            [ballot_from_dict(doc) for doc in payload["ballots"]],
            now=event.timestamp,
        )
    elif kind == "set_config":
        loaded = load_config(payload.get("config", {}))
        out = set_config(session, loaded.compass, loaded.weights, now=event.timestamp)
    else:
        raise ValueError("unknown event kind %r" % kind)
    # Replay must preserve the persisted payload verbatim.
    return replace(out, event_log=out.event_log[:-1] + (event,))


def replay(events: Sequence[SessionEvent]) -> Session:
    """Fold an event log back into a session; the result equals the original."""
    session: Session | None = None
    for event in events:
        session = apply_event(session, event)
    if session is None:
        raise ValueError("empty event log")
    return session


def apply_mutation(
    session: Session, mutation: Mapping[str, Any], now: datetime | None = None
) -> Session:
    """Apply one JSON mutation request (the service's commit and what-if path)."""
    if not isinstance(mutation, Mapping) or "kind" not in mutation:
        raise BadMutationError("mutation must be an object with a kind")
    kind = mutation["kind"]
    try:
        if kind == "add_indicator":
            doc = dict(mutation["indicator"])
            if not doc.get("id"):
                base_id = "ind-%04d" % (session.version + 1)
                candidate = base_id
                bump = 2
                while candidate in session.all_ids():
                    candidate = "%s-%d" % (base_id, bump)
                    bump += 1
                doc["id"] = candidate
            sphere = (
                Sphere(mutation["sphere"])
                if mutation.get("sphere") is not None
                else None
            )
            return add_indicator(session, indicator_from_dict(doc), sphere=sphere, now=now)
        if kind == "adjust_indicator":
            return consensus_adjust(
                session,
                str(mutation["id"]),
                new_offset=(
                    float(mutation["angle"]) if mutation.get("angle") is not None else None
                ),
                new_raw_length=(
                    float(mutation["length"]) if mutation.get("length") is not None else None
                ),
                boundary_ok=(
                    bool(mutation["boundary_ok"])
                    if mutation.get("boundary_ok") is not None
                    else None
                ),
                now=now,
            )
        if kind == "split_indicator":
            raw_children = mutation["children"]
            if not isinstance(raw_children, Sequence) or len(raw_children) != 2:
                raise BadMutationError("split_indicator needs exactly two children")
            placements = []
            names = []
            for child in raw_children:
                names.append(str(child["name"]))
                placements.append(
                    SplitPlacement(
                        offset=float(child["angle"]),
                        raw_length=float(child["length"]),
                        quality=Quality(child["quality"]) if child.get("quality") else None,
                        boundary_ok=bool(child.get("boundary_ok", False)),
                    )
                )
            return split_indicator(
                session, str(mutation["id"]), names[0], names[1], placements, now=now
            )
        if kind == "remove_indicator":
            return remove_indicator(session, str(mutation["id"]), now=now)
        if kind == "cast_ballots":
            ballots = [ballot_from_dict(doc) for doc in mutation["ballots"]]
            return cast_ballots(session, str(mutation["id"]), ballots, now=now)
        if kind == "set_config":
            loaded = load_config(mutation.get("config", {}))
            return set_config(session, loaded.compass, loaded.weights, now=now)
    except KeyError as exc:
        raise BadMutationError("mutation %r missing field %s" % (kind, exc))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, (ElicitationError, IndicatorValidationError)):
            raise
        raise BadMutationError("malformed %r mutation: %s" % (kind, exc))
    raise BadMutationError("unknown mutation kind %r" % kind)
