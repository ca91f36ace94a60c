"""Perception-system model: stages, error propagation, and stage mapping.

The stage ontology is closed-world and hard-coded. Active sensing runs
through signal transmission, propagation, reflection and receiving, each
graded by signal intensity/amount/noise. Passive sensing collapses to light
receiving, graded by brightness/contrast/purity. Recognition applies to both
classes: feature extraction, semantic segmentation, target classification and
target tracking, graded by feature variety/similarity/contradiction/
visibility.

A recognition error propagates backwards along a five-event chain; the two
propagation patterns differ in where the root cause sits. ``affected_stages``
maps a triggering source (plus its relationship context) onto the stages of a
declared perception system using five rules:

R1  entities owning a reflection-area property reach the reflection stage
    (active) or light receiving (passive);
R2  interactive entities additionally reach every declared recognition stage;
R3  environmental modifications reach signal propagation (active) or light
    receiving (passive);
R4  sources that cover or obstruct the sensor itself reach signal
    transmission and receiving (active) or light receiving (passive);
R5  disturbing entities and environmental modifications reach recognition
    stages only through a relationship whose focal concept is interactive.

Results are always intersected with the stages the system declares.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable

from . import errors as E
from .docio import check_schema, dump_document, parse_document, read_document
from .errors import DiagnosticSink, ToolkitError
from .naming import is_identifier
from .ontology import ConceptKind, PropertyCategory, SourceConcept, SourceOntology

__all__ = [
    "SensorClass",
    "StagePhase",
    "PerceptionStage",
    "ChainEvent",
    "PropagationPattern",
    "PerceptionSystemSpec",
    "SensorSuite",
    "ALL_STAGES",
    "STAGE_BY_NAME",
    "SYSTEM_SCHEMA",
    "stages_for_class",
    "recognition_stage_names",
    "trace_propagation",
    "affected_stages",
    "load_sensor_suite",
    "read_sensor_suite",
    "suite_to_doc",
    "serialize_sensor_suite",
]

SYSTEM_SCHEMA = "perception-system@1"


class SensorClass(str, Enum):
    ACTIVE = "Active"
    PASSIVE = "Passive"


class StagePhase(str, Enum):
    SENSING = "Sensing"
    RECOGNITION = "Recognition"


@dataclass(frozen=True)
class PerceptionStage:
    name: str
    phase: StagePhase
    sensor_classes: frozenset[SensorClass]
    quality_properties: tuple[str, ...]


_ACTIVE_ONLY = frozenset({SensorClass.ACTIVE})
_PASSIVE_ONLY = frozenset({SensorClass.PASSIVE})
_BOTH = frozenset({SensorClass.ACTIVE, SensorClass.PASSIVE})

_ACTIVE_QUALITIES = ("SignalIntensity", "SignalAmount", "SignalNoise")
_PASSIVE_QUALITIES = ("Brightness", "Contrast", "Purity")
_RECOGNITION_QUALITIES = ("Variety", "Similarity", "Contradiction", "Visibility")

#: Closed stage ontology, in canonical pipeline order.
ALL_STAGES: tuple[PerceptionStage, ...] = (
    PerceptionStage("SignalTransmission", StagePhase.SENSING, _ACTIVE_ONLY, _ACTIVE_QUALITIES),
    PerceptionStage("SignalPropagation", StagePhase.SENSING, _ACTIVE_ONLY, _ACTIVE_QUALITIES),
    PerceptionStage("SignalReflection", StagePhase.SENSING, _ACTIVE_ONLY, _ACTIVE_QUALITIES),
    PerceptionStage("SignalReceiving", StagePhase.SENSING, _ACTIVE_ONLY, _ACTIVE_QUALITIES),
    PerceptionStage("LightReceiving", StagePhase.SENSING, _PASSIVE_ONLY, _PASSIVE_QUALITIES),
    PerceptionStage("FeatureExtraction", StagePhase.RECOGNITION, _BOTH, _RECOGNITION_QUALITIES),
    PerceptionStage("SemanticSegmentation", StagePhase.RECOGNITION, _BOTH, _RECOGNITION_QUALITIES),
    PerceptionStage("TargetClassification", StagePhase.RECOGNITION, _BOTH, _RECOGNITION_QUALITIES),
    PerceptionStage("TargetTracking", StagePhase.RECOGNITION, _BOTH, _RECOGNITION_QUALITIES),
)

STAGE_BY_NAME: dict[str, PerceptionStage] = {s.name: s for s in ALL_STAGES}
STAGE_ORDER: dict[str, int] = {s.name: i for i, s in enumerate(ALL_STAGES)}


def stages_for_class(sensor_class: SensorClass) -> tuple[PerceptionStage, ...]:
    return tuple(s for s in ALL_STAGES if sensor_class in s.sensor_classes)


def recognition_stage_names() -> tuple[str, ...]:
    return tuple(s.name for s in ALL_STAGES if s.phase is StagePhase.RECOGNITION)


# ---------------------------------------------------------------------------
# Error propagation chain
# ---------------------------------------------------------------------------

class ChainEvent(str, Enum):
    PHYSICAL_INFLUENCE = "PhysicalInfluence"
    UNSATISFYING_SIGNAL = "UnsatisfyingSignal"
    RAW_DATA_DEGRADING = "RawDataDegrading"
    FEATURE_MISSING = "FeatureMissing"
    RECOGNITION_ERROR = "RecognitionError"


class PropagationPattern(str, Enum):
    PHYSICAL_CONDITION_BASED = "PhysicalConditionBased"
    TARGET_FEATURE_BASED = "TargetFeatureBased"


_CHAIN: tuple[ChainEvent, ...] = tuple(ChainEvent)


def trace_propagation(root: ChainEvent | str) -> tuple[tuple[ChainEvent, ...], PropagationPattern]:
    """Chain suffix from ``root`` to the recognition error, plus its pattern.

    Roots in the physical half of the chain (influence, signal, raw data)
    follow the physical-condition pattern; roots at the feature level follow
    the target-feature pattern.
    """
    try:
        event = ChainEvent(root)
    except ValueError:
        raise ToolkitError(E.INVALID_VALUE, f"unknown chain event {root!r}") from None
    index = _CHAIN.index(event)
    chain = _CHAIN[index:]
    pattern = (PropagationPattern.PHYSICAL_CONDITION_BASED if index <= 2
               else PropagationPattern.TARGET_FEATURE_BASED)
    return chain, pattern


# ---------------------------------------------------------------------------
# Declared perception systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PerceptionSystemSpec:
    """One sensor of the vehicle: class, declared stages, intended targets."""

    sensor: str
    sensor_class: SensorClass
    stages: tuple[str, ...]
    functionality: tuple[tuple[str, str], ...] = ()  # (target concept, task)
    odd: tuple[str, ...] = ()

    def declared_recognition(self) -> tuple[str, ...]:
        return tuple(s for s in self.stages if STAGE_BY_NAME[s].phase is StagePhase.RECOGNITION)

    def targets(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for concept, _task in self.functionality:
            seen.setdefault(concept, None)
        return tuple(seen)


@dataclass(frozen=True)
class SensorSuite:
    vehicle: str
    sensors: tuple[PerceptionSystemSpec, ...]

    def get(self, sensor: str) -> PerceptionSystemSpec | None:
        for spec in self.sensors:
            if spec.sensor == sensor:
                return spec
        return None


# ---------------------------------------------------------------------------
# Stage mapping (rules R1-R5)
# ---------------------------------------------------------------------------

def _r1_stages(sensor_class: SensorClass) -> frozenset[str]:
    return frozenset({"SignalReflection"} if sensor_class is SensorClass.ACTIVE
                     else {"LightReceiving"})


def _r3_stages(sensor_class: SensorClass) -> frozenset[str]:
    return frozenset({"SignalPropagation"} if sensor_class is SensorClass.ACTIVE
                     else {"LightReceiving"})


def _r4_stages(sensor_class: SensorClass) -> frozenset[str]:
    return frozenset({"SignalTransmission", "SignalReceiving"}
                     if sensor_class is SensorClass.ACTIVE else {"LightReceiving"})


def sensor_obstruction_stages(sensor_class: SensorClass) -> frozenset[str]:
    """Stages reached when the sensor itself is covered or obstructed (R4)."""
    return _r4_stages(sensor_class)


def affected_stages(source: SourceConcept,
                    relations: Iterable,
                    system: PerceptionSystemSpec,
                    ontology: SourceOntology) -> frozenset[str]:
    """Stages of ``system`` that ``source`` can degrade, given its relations.

    ``relations`` holds :class:`~trigkit.relationships.RelationshipInstance`
    values referencing the source (possibly empty). The result is a subset of
    the system's declared stages.
    """
    from .ontology import SENSOR_TARGET  # local import keeps module order simple
    from .relationships import RelationshipKind

    if not system.stages:
        raise ToolkitError(E.EMPTY_STAGES,
                           f"system {system.sensor!r} declares no stages")
    if ontology.get(source.name) is None:
        raise ToolkitError(E.UNKNOWN_CONCEPT,
                           f"source {source.name!r} does not resolve in the ontology")

    declared = frozenset(system.stages)
    recognition = frozenset(system.declared_recognition())
    result: set[str] = set()

    is_entity = source.kind in (ConceptKind.INTERACTIVE, ConceptKind.DISTURBING)
    if is_entity and source.has_category(PropertyCategory.REFLECTION_AREA):
        result |= _r1_stages(system.sensor_class)  # R1
    if source.kind is ConceptKind.INTERACTIVE:
        result |= recognition  # R2
    if source.kind is ConceptKind.MODIFICATION:
        result |= _r3_stages(system.sensor_class)  # R3

    for rel in relations:
        if rel.focal == SENSOR_TARGET and rel.partner == source.name:
            covering = (rel.form.kind is RelationshipKind.SURFACE_TREATMENT
                        and rel.form.subkind == "Cover")
            obstructing = (rel.form.kind is RelationshipKind.SPATIAL_POSITION
                           and rel.form.subkind == "Occlusion")
            if covering or obstructing:
                result |= _r4_stages(system.sensor_class)  # R4
        elif source.kind is not ConceptKind.INTERACTIVE:
            focal = ontology.get(rel.focal)
            if focal is not None and focal.kind is ConceptKind.INTERACTIVE:
                result |= recognition  # R5

    return frozenset(result) & declared


# ---------------------------------------------------------------------------
# Suite documents
# ---------------------------------------------------------------------------

def load_sensor_suite(text: str, *, fmt: str = "yaml",
                      source: str = "<document>") -> SensorSuite:
    doc = parse_document(text, fmt=fmt, source=source)
    return suite_from_doc(doc, source=source)


def read_sensor_suite(path: str | Path) -> SensorSuite:
    doc = read_document(path)
    return suite_from_doc(doc, source=str(path))


def suite_from_doc(doc: dict, *, source: str = "<document>") -> SensorSuite:
    check_schema(doc, SYSTEM_SCHEMA, source=source)
    sink = DiagnosticSink(file=source)

    vehicle = doc.get("vehicle")
    if not isinstance(vehicle, str) or not vehicle:
        sink.error(E.MISSING_FIELD, "'vehicle' must be a non-empty string")
        vehicle = ""
    shared_odd = doc.get("odd", [])
    if not (isinstance(shared_odd, list) and all(isinstance(t, str) for t in shared_odd)):
        sink.error(E.INVALID_VALUE, "'odd' must be a list of strings")
        shared_odd = []

    sensors: list[PerceptionSystemSpec] = []
    names: set[str] = set()
    raw_sensors = doc.get("sensors", [])
    if not isinstance(raw_sensors, list) or not raw_sensors:
        sink.error(E.MISSING_FIELD, "'sensors' must be a non-empty list")
        raw_sensors = []
    for i, raw in enumerate(raw_sensors):
        where = f"sensors[{i}]"
        if not isinstance(raw, dict):
            sink.error(E.INVALID_VALUE, f"{where} must be a mapping")
            continue
        spec = _sensor_from_doc(raw, where, tuple(shared_odd), sink)
        if spec is None:
            continue
        if spec.sensor in names:
            sink.error(E.DUPLICATE_NAME, f"{where}: duplicate sensor {spec.sensor!r}")
            continue
        names.add(spec.sensor)
        sensors.append(spec)

    sink.raise_if_errors()
    sensors.sort(key=lambda s: s.sensor)
    return SensorSuite(vehicle=vehicle, sensors=tuple(sensors))


def _sensor_from_doc(raw: dict, where: str, shared_odd: tuple[str, ...],
                     sink: DiagnosticSink) -> PerceptionSystemSpec | None:
    name = raw.get("sensor")
    if not is_identifier(name):
        sink.error(E.INVALID_IDENTIFIER, f"{where}: sensor name {name!r} is invalid")
        return None
    try:
        sensor_class = SensorClass(raw.get("class"))
    except ValueError:
        sink.error(E.UNKNOWN_SENSOR_CLASS,
                   f"{where}: unknown sensor class {raw.get('class')!r}")
        return None

    allowed = {s.name for s in stages_for_class(sensor_class)}
    stages: list[str] = []
    raw_stages = raw.get("stages", [])
    if not isinstance(raw_stages, list):
        sink.error(E.INVALID_VALUE, f"{where}: 'stages' must be a list")
        raw_stages = []
    for stage in raw_stages:
        if stage not in STAGE_BY_NAME:
            sink.error(E.UNKNOWN_STAGE, f"{where}: unknown stage {stage!r}")
        elif stage not in allowed:
            sink.error(E.ILLEGAL_STAGE_FOR_CLASS,
                       f"{where}: stage {stage} is not available to a "
                       f"{sensor_class.value} sensor")
        elif stage in stages:
            sink.error(E.DUPLICATE_NAME, f"{where}: duplicate stage {stage!r}")
        else:
            stages.append(stage)
    if not stages:
        sink.error(E.EMPTY_STAGES, f"{where}: sensor declares no stages")
        return None

    functionality: list[tuple[str, str]] = []
    raw_func = raw.get("functionality", [])
    if not isinstance(raw_func, list):
        sink.error(E.INVALID_VALUE, f"{where}: 'functionality' must be a list")
        raw_func = []
    for j, rf in enumerate(raw_func):
        fwhere = f"{where}.functionality[{j}]"
        if not isinstance(rf, dict) or not is_identifier(rf.get("target")) \
                or not isinstance(rf.get("task"), str):
            sink.error(E.INVALID_VALUE,
                       f"{fwhere} must be a mapping with 'target' and 'task'")
            continue
        functionality.append((rf["target"], rf["task"]))

    odd = raw.get("odd")
    if odd is None:
        odd = shared_odd
    elif not (isinstance(odd, list) and all(isinstance(t, str) for t in odd)):
        sink.error(E.INVALID_VALUE, f"{where}: 'odd' must be a list of strings")
        odd = shared_odd

    stages.sort(key=lambda s: STAGE_ORDER[s])
    functionality.sort()
    return PerceptionSystemSpec(sensor=name, sensor_class=sensor_class,
                                stages=tuple(stages),
                                functionality=tuple(functionality),
                                odd=tuple(odd))


def suite_to_doc(suite: SensorSuite) -> dict:
    sensors = []
    for spec in sorted(suite.sensors, key=lambda s: s.sensor):
        sensors.append({
            "sensor": spec.sensor,
            "class": spec.sensor_class.value,
            "stages": sorted(spec.stages, key=lambda s: STAGE_ORDER[s]),
            "functionality": [{"target": t, "task": task}
                              for t, task in sorted(spec.functionality)],
            "odd": list(spec.odd),
        })
    return {"schema": SYSTEM_SCHEMA, "vehicle": suite.vehicle, "sensors": sensors}


def serialize_sensor_suite(suite: SensorSuite, *, fmt: str = "yaml") -> str:
    return dump_document(suite_to_doc(suite), fmt=fmt)


def cross_validate_suite(suite: SensorSuite, ontology: SourceOntology,
                         sink: DiagnosticSink) -> None:
    """Intended-functionality targets must resolve against the ontology."""
    for spec in suite.sensors:
        for target, _task in spec.functionality:
            if ontology.get(target) is None:
                sink.error(E.UNKNOWN_CONCEPT,
                           f"sensor {spec.sensor!r}: functionality target "
                           f"{target!r} does not resolve in the ontology")
