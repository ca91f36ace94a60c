"""Test-case composition and result recording.

Each triggering condition is paired with the hazardous events it can
plausibly provoke. A condition whose analyzed source is one of the sensor's
intended targets (after class mapping) pairs only with events targeting that
class; other conditions degrade whatever the sensor is trying to perceive and
pair with events targeting any of its intended classes. Conditions that cover
or obstruct the sensor itself pair with every event.

The fail criterion of a composed case is the event's unintended behavior,
verbatim; the pass criterion comes from the policy's negation table. Executed
outcomes are recorded against a coarse behavior classification and appended
to a JSON-lines results ledger.
"""
from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from . import errors as E
from .docio import check_schema, dump_document, parse_document, read_document
from .errors import DiagnosticSink, ToolkitError
from .generation import TriggeringCondition
from .naming import is_identifier
from .ontology import SourceOntology
from .perception import SensorSuite

__all__ = [
    "EVENTS_SCHEMA",
    "POLICY_SCHEMA",
    "HazardousEvent",
    "ComposePolicy",
    "TestCase",
    "BehaviorClass",
    "OUTCOME_BY_BEHAVIOR",
    "compose",
    "outcome_record",
    "ResultsLedger",
    "load_events",
    "read_events",
    "events_to_doc",
    "serialize_events",
    "load_policy",
    "read_policy",
    "policy_to_doc",
    "serialize_policy",
    "cross_validate_events",
]

EVENTS_SCHEMA = "hazardous-events@1"
POLICY_SCHEMA = "compose-policy@1"

_EVENT_ID = re.compile(r"^[A-Za-z][A-Za-z0-9_-]*$")


@dataclass(frozen=True)
class HazardousEvent:
    """A vehicle-level hazard scenario a perception fault can provoke."""

    id: str
    name: str
    situation: str
    behavior: str
    unintended_behavior: str
    target: str  # concept the event's perception function must detect
    source: str = ""


@dataclass(frozen=True)
class ComposePolicy:
    """Data-driven knobs for pairing conditions with events.

    ``class_map`` folds perceived concepts onto the classes events are keyed
    by (a curb is hit as an obstacle; a cyclist is avoided as a pedestrian).
    ``negations`` maps an event id onto the wording of the pass criterion
    asserting its unintended behavior did not happen.
    """

    class_map: tuple[tuple[str, str], ...] = ()
    negations: tuple[tuple[str, str], ...] = ()  # (event id, pass criterion)

    def mapped(self, concept: str) -> str:
        for name, target in self.class_map:
            if name == concept:
                return target
        return concept

    def negation_of(self, event_id: str) -> str | None:
        for known_id, pass_text in self.negations:
            if known_id == event_id:
                return pass_text
        return None


@dataclass(frozen=True)
class TestCase:
    """One executable pairing of a triggering condition with an event."""

    id: str
    condition_id: str
    event_id: str
    sensor: str
    situation: str
    trigger: str  # the condition description, injected into the scene
    behavior: str
    fail_criterion: str
    pass_criterion: str
    odd: tuple[str, ...] = ()


class BehaviorClass(str, Enum):
    NOMINAL = "Nominal"
    HESITANT = "HesitantBehavior"
    UNINTENDED_NO_HAZARD = "UnintendedNoHazard"
    RISKY_WRONG_CLASSIFICATION = "RiskyBehaviorWrongClassification"
    NEAR_COLLISION = "NearCollision"


OUTCOME_BY_BEHAVIOR: dict[BehaviorClass, str] = {
    BehaviorClass.NOMINAL: "pass",
    BehaviorClass.HESITANT: "marginal",
    BehaviorClass.UNINTENDED_NO_HAZARD: "marginal",
    BehaviorClass.RISKY_WRONG_CLASSIFICATION: "fail",
    BehaviorClass.NEAR_COLLISION: "fail",
}


def test_case_id(condition_id: str, event_id: str) -> str:
    payload = f"{condition_id}|{event_id}"
    return "t" + hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


def _eligible_events(condition: TriggeringCondition, events: Sequence[HazardousEvent],
                     suite: SensorSuite, policy: ComposePolicy) -> list[HazardousEvent]:
    spec = suite.get(condition.sensor)
    if spec is None:
        raise ToolkitError(E.UNKNOWN_SENSOR,
                           f"suite for {suite.vehicle!r} has no sensor "
                           f"{condition.sensor!r}")
    if any(rel.targets_sensor() for rel in condition.relationships):
        return list(events)
    sensor_targets = {policy.mapped(t) for t in spec.targets()}
    focal = policy.mapped(condition.sources[0])
    condition_targets = {focal} if focal in sensor_targets else sensor_targets
    return [e for e in events if policy.mapped(e.target) in condition_targets]


def compose(conditions: Iterable[TriggeringCondition],
            events: Sequence[HazardousEvent], suite: SensorSuite,
            policy: ComposePolicy) -> tuple[list[TestCase], list[str]]:
    """Pair every condition with its eligible events.

    Returns the composed cases plus warnings; a condition with no compatible
    event is skipped with a warning, never an error. The number of cases is
    exactly the sum of eligible-event counts over all conditions.
    """
    cases: list[TestCase] = []
    warnings: list[str] = []
    for condition in conditions:
        eligible = _eligible_events(condition, events, suite, policy)
        if not eligible:
            warnings.append(f"{E.NO_COMPATIBLE_EVENT}: condition {condition.id} "
                            f"({condition.description}) matches no hazardous event")
            continue
        spec = suite.get(condition.sensor)
        for event in eligible:
            pass_criterion = policy.negation_of(event.id)
            if pass_criterion is None:
                pass_criterion = f"The vehicle avoids: {event.unintended_behavior}"
                warnings.append(f"{E.MISSING_TEMPLATE}: no pass-criterion negation "
                                f"for event {event.id}; generic wording used")
            cases.append(TestCase(
                id=test_case_id(condition.id, event.id),
                condition_id=condition.id,
                event_id=event.id,
                sensor=condition.sensor,
                situation=event.situation,
                trigger=condition.description,
                behavior=event.behavior,
                fail_criterion=event.unintended_behavior,
                pass_criterion=pass_criterion,
                odd=spec.odd,
            ))
    return cases, warnings


def outcome_record(case: TestCase, behavior: BehaviorClass | str,
                   note: str = "") -> dict:
    """Build the result row appended to the ledger after executing a case."""
    try:
        behavior = BehaviorClass(behavior)
    except ValueError:
        raise ToolkitError(E.INVALID_VALUE,
                           f"unknown behavior class {behavior!r}") from None
    record = {
        "test_case": case.id,
        "condition": case.condition_id,
        "event": case.event_id,
        "behavior": behavior.value,
        "outcome": OUTCOME_BY_BEHAVIOR[behavior],
    }
    if note:
        record["note"] = note
    return record


class ResultsLedger:
    """Append-only JSON-lines store of executed test-case outcomes."""

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def append(self, record: dict) -> None:
        line = json.dumps(record, sort_keys=True, ensure_ascii=False)
        with open(self.path, "a", encoding="utf-8") as handle:
            handle.write(line + "\n")

    def read(self) -> list[dict]:
        if not self.path.exists():
            return []
        records = []
        with open(self.path, encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    records.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise ToolkitError(E.SYNTAX_ERROR,
                                       f"unreadable results line: {exc.msg}",
                                       file=str(self.path), line=lineno) from None
        return records


# ---------------------------------------------------------------------------
# Event documents
# ---------------------------------------------------------------------------

def load_events(text: str, *, fmt: str = "yaml",
                source: str = "<document>") -> tuple[HazardousEvent, ...]:
    doc = parse_document(text, fmt=fmt, source=source)
    return events_from_doc(doc, source=source)


def read_events(path: str | Path) -> tuple[HazardousEvent, ...]:
    doc = read_document(path)
    return events_from_doc(doc, source=str(path))


_EVENT_TEXT_FIELDS = ("name", "situation", "behavior", "unintended_behavior")


def events_from_doc(doc: dict, *, source: str = "<document>") -> tuple[HazardousEvent, ...]:
    check_schema(doc, EVENTS_SCHEMA, source=source)
    sink = DiagnosticSink(file=source)
    events: list[HazardousEvent] = []
    ids: set[str] = set()
    raw_events = doc.get("events", [])
    if not isinstance(raw_events, list) or not raw_events:
        sink.error(E.MISSING_FIELD, "'events' must be a non-empty list")
        raw_events = []
    for i, raw in enumerate(raw_events):
        where = f"events[{i}]"
        if not isinstance(raw, dict):
            sink.error(E.INVALID_VALUE, f"{where} must be a mapping")
            continue
        event_id = raw.get("id")
        if not isinstance(event_id, str) or not _EVENT_ID.match(event_id):
            sink.error(E.INVALID_IDENTIFIER, f"{where}: event id {event_id!r} is invalid")
            continue
        if event_id in ids:
            sink.error(E.DUPLICATE_NAME, f"{where}: duplicate event id {event_id!r}")
            continue
        ids.add(event_id)
        fields = {}
        ok = True
        for field in _EVENT_TEXT_FIELDS:
            value = raw.get(field)
            if not isinstance(value, str) or not value.strip():
                sink.error(E.MISSING_FIELD, f"{where}: '{field}' is required")
                ok = False
            fields[field] = value
        target = raw.get("target")
        if not is_identifier(target):
            sink.error(E.INVALID_IDENTIFIER, f"{where}: target {target!r} is invalid")
            ok = False
        if not ok:
            continue
        events.append(HazardousEvent(id=event_id, target=target,
                                     source=str(raw.get("source", "")), **fields))
    sink.raise_if_errors()
    events.sort(key=lambda e: e.id)
    return tuple(events)


def events_to_doc(events: Sequence[HazardousEvent]) -> dict:
    raw_events = []
    for event in sorted(events, key=lambda e: e.id):
        raw: dict = {"id": event.id, "name": event.name,
                     "situation": event.situation, "behavior": event.behavior,
                     "unintended_behavior": event.unintended_behavior,
                     "target": event.target}
        if event.source:
            raw["source"] = event.source
        raw_events.append(raw)
    return {"schema": EVENTS_SCHEMA, "events": raw_events}


def serialize_events(events: Sequence[HazardousEvent], *, fmt: str = "yaml") -> str:
    return dump_document(events_to_doc(events), fmt=fmt)


def cross_validate_events(events: Sequence[HazardousEvent], ontology: SourceOntology,
                          sink: DiagnosticSink) -> None:
    """Event targets must resolve against the ontology."""
    for event in events:
        if ontology.get(event.target) is None:
            sink.error(E.UNKNOWN_CONCEPT,
                       f"event {event.id!r}: target {event.target!r} does not "
                       f"resolve in the ontology")


# ---------------------------------------------------------------------------
# Policy documents
# ---------------------------------------------------------------------------

def load_policy(text: str, *, fmt: str = "yaml",
                source: str = "<document>") -> ComposePolicy:
    doc = parse_document(text, fmt=fmt, source=source)
    return policy_from_doc(doc, source=source)


def read_policy(path: str | Path) -> ComposePolicy:
    doc = read_document(path)
    return policy_from_doc(doc, source=str(path))


def policy_from_doc(doc: dict, *, source: str = "<document>") -> ComposePolicy:
    check_schema(doc, POLICY_SCHEMA, source=source)
    sink = DiagnosticSink(file=source)
    class_map: list[tuple[str, str]] = []
    raw_map = doc.get("class_map", {})
    if not isinstance(raw_map, dict):
        sink.error(E.INVALID_VALUE, "'class_map' must be a mapping")
        raw_map = {}
    for name, target in raw_map.items():
        if not is_identifier(name) or not is_identifier(target):
            sink.error(E.INVALID_IDENTIFIER,
                       f"class_map entry {name!r}: {target!r} is invalid")
            continue
        class_map.append((name, target))
    negations: list[tuple[str, str]] = []
    raw_negations = doc.get("negations", {})
    if not isinstance(raw_negations, dict):
        sink.error(E.INVALID_VALUE, "'negations' must be a mapping")
        raw_negations = {}
    for event_id, pass_text in raw_negations.items():
        if not isinstance(event_id, str) or not _EVENT_ID.match(event_id) \
                or not isinstance(pass_text, str) or not pass_text.strip():
            sink.error(E.INVALID_VALUE,
                       f"negation for {event_id!r} must map an event id to text")
            continue
        negations.append((event_id, pass_text))
    sink.raise_if_errors()
    class_map.sort()
    negations.sort()
    return ComposePolicy(class_map=tuple(class_map), negations=tuple(negations))


def policy_to_doc(policy: ComposePolicy) -> dict:
    return {"schema": POLICY_SCHEMA,
            "class_map": {name: target for name, target in sorted(policy.class_map)},
            "negations": {behavior: text for behavior, text in sorted(policy.negations)}}


def serialize_policy(policy: ComposePolicy, *, fmt: str = "yaml") -> str:
    return dump_document(policy_to_doc(policy), fmt=fmt)
