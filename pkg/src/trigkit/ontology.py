"""Ontology of triggering sources.

Triggering sources come in three kinds: interactive entities the vehicle must
perceive and react to, disturbing entities whose mass and volume are
negligible but which corrupt sensing, and environmental modifications that
alter the medium between sensor and scene. Each concept owns categorized
properties (the levers a worst-case analysis can pull) and example instances.
A concept may refine another concept of the same kind through ``parent``,
forming a forest.

Documents use the ``triggering-sources@1`` schema. The name ``Sensor`` is
reserved for relationship patterns that target the sensor itself and is
rejected as a concept name.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from . import errors as E
from .docio import check_schema, dump_document, parse_document, read_document
from .errors import DiagnosticSink, ToolkitError
from .naming import is_identifier

__all__ = [
    "ConceptKind",
    "PropertyCategory",
    "SourceProperty",
    "SourceConcept",
    "SourceOntology",
    "SENSOR_TARGET",
    "ONTOLOGY_SCHEMA",
    "ENTITY_CATEGORIES",
    "MODIFICATION_CATEGORIES",
    "legal_categories",
    "load_source_ontology",
    "read_source_ontology",
    "serialize_source_ontology",
    "ontology_to_doc",
    "lookup_concept",
    "is_kind_of",
]

ONTOLOGY_SCHEMA = "triggering-sources@1"

#: Reserved focal name used by compatibility-matrix entries that describe a
#: relation between a triggering source and the perceiving sensor itself.
SENSOR_TARGET = "Sensor"


class ConceptKind(str, Enum):
    INTERACTIVE = "InteractiveEntity"
    DISTURBING = "DisturbingEntity"
    MODIFICATION = "EnvironmentalModification"


class PropertyCategory(str, Enum):
    REFLECTIVITY = "Reflectivity"
    REFLECTION_AREA = "ReflectionArea"
    DATA_GENERATION = "DataGeneration"
    FEATURE_VARIABILITY = "FeatureVariability"
    TRANSMITTANCE = "Transmittance"


ENTITY_CATEGORIES = frozenset({
    PropertyCategory.REFLECTIVITY,
    PropertyCategory.REFLECTION_AREA,
    PropertyCategory.DATA_GENERATION,
    PropertyCategory.FEATURE_VARIABILITY,
})
MODIFICATION_CATEGORIES = frozenset({
    PropertyCategory.REFLECTIVITY,
    PropertyCategory.TRANSMITTANCE,
})


def legal_categories(kind: ConceptKind) -> frozenset[PropertyCategory]:
    if kind is ConceptKind.MODIFICATION:
        return MODIFICATION_CATEGORIES
    return ENTITY_CATEGORIES


@dataclass(frozen=True)
class SourceProperty:
    name: str
    category: PropertyCategory
    note: str = ""


@dataclass(frozen=True)
class SourceConcept:
    name: str
    kind: ConceptKind
    parent: str | None = None
    properties: tuple[SourceProperty, ...] = ()
    instances: tuple[str, ...] = ()

    def property_names(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for prop in self.properties:
            seen.setdefault(prop.name, None)
        return tuple(seen)

    def categories_of(self, property_name: str) -> frozenset[PropertyCategory]:
        return frozenset(p.category for p in self.properties if p.name == property_name)

    def has_category(self, category: PropertyCategory) -> bool:
        return any(p.category is category for p in self.properties)


@dataclass(frozen=True)
class SourceOntology:
    schema_version: str = ONTOLOGY_SCHEMA
    concepts: tuple[SourceConcept, ...] = ()
    _by_name: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_by_name", {c.name: c for c in self.concepts})

    def get(self, name: str) -> SourceConcept | None:
        return self._by_name.get(name)

    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.concepts)


def lookup_concept(ontology: SourceOntology, name: str) -> SourceConcept:
    concept = ontology.get(name)
    if concept is None:
        raise ToolkitError(E.UNKNOWN_CONCEPT, f"unknown concept {name!r}")
    return concept


def is_kind_of(ontology: SourceOntology, name: str, ancestor: str) -> bool:
    """True when ``name`` is ``ancestor`` or refines it through parents."""
    current = ontology.get(name)
    seen = set()
    while current is not None and current.name not in seen:
        if current.name == ancestor:
            return True
        seen.add(current.name)
        current = ontology.get(current.parent) if current.parent else None
    return False


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------

def load_source_ontology(text: str, *, fmt: str = "yaml",
                         source: str = "<document>") -> SourceOntology:
    """Parse and validate an ontology document from text.

    Raises :class:`~trigkit.errors.DocumentError` carrying one diagnostic per
    finding; codes include ``SyntaxError``, ``UnknownKind``,
    ``UnknownCategory``, ``IllegalCategoryForKind``, ``DuplicateName`` and
    ``DanglingParent``.
    """
    doc = parse_document(text, fmt=fmt, source=source)
    return ontology_from_doc(doc, source=source)


def read_source_ontology(path: str | Path) -> SourceOntology:
    doc = read_document(path)
    return ontology_from_doc(doc, source=str(path))


def ontology_from_doc(doc: dict, *, source: str = "<document>") -> SourceOntology:
    check_schema(doc, ONTOLOGY_SCHEMA, source=source)
    sink = DiagnosticSink(file=source)

    raw_concepts = doc.get("concepts", [])
    if not isinstance(raw_concepts, list):
        sink.error(E.INVALID_VALUE, "'concepts' must be a list")
        sink.raise_if_errors()

    concepts: list[SourceConcept] = []
    names: set[str] = set()
    for i, raw in enumerate(raw_concepts):
        where = f"concepts[{i}]"
        if not isinstance(raw, dict):
            sink.error(E.INVALID_VALUE, f"{where} must be a mapping")
            continue
        concept = _concept_from_doc(raw, where, sink)
        if concept is None:
            continue
        if concept.name in names:
            sink.error(E.DUPLICATE_NAME, f"{where}: duplicate concept name {concept.name!r}")
            continue
        names.add(concept.name)
        concepts.append(concept)

    by_name = {c.name: c for c in concepts}
    for concept in concepts:
        if concept.parent is None:
            continue
        parent = by_name.get(concept.parent)
        if parent is None:
            sink.error(E.DANGLING_PARENT,
                       f"concept {concept.name!r} names unknown parent {concept.parent!r}")
        elif parent.kind is not concept.kind:
            sink.error(E.KIND_MISMATCH,
                       f"concept {concept.name!r} ({concept.kind.value}) cannot refine "
                       f"{parent.name!r} ({parent.kind.value})")
    _check_cycles(concepts, sink)

    sink.raise_if_errors()
    concepts.sort(key=lambda c: c.name)
    return SourceOntology(schema_version=ONTOLOGY_SCHEMA, concepts=tuple(concepts))


def _concept_from_doc(raw: dict, where: str, sink: DiagnosticSink) -> SourceConcept | None:
    name = raw.get("name")
    if not is_identifier(name):
        sink.error(E.INVALID_IDENTIFIER, f"{where}: concept name {name!r} is not a valid identifier")
        return None
    if name == SENSOR_TARGET:
        sink.error(E.RESERVED_NAME, f"{where}: {SENSOR_TARGET!r} is reserved and cannot name a concept")
        return None

    kind_raw = raw.get("kind")
    try:
        kind = ConceptKind(kind_raw)
    except ValueError:
        sink.error(E.UNKNOWN_KIND, f"{where}: unknown kind {kind_raw!r} for concept {name!r}")
        return None

    parent = raw.get("parent")
    if parent is not None and not is_identifier(parent):
        sink.error(E.INVALID_IDENTIFIER, f"{where}: parent {parent!r} is not a valid identifier")
        return None

    properties: list[SourceProperty] = []
    seen_props: set[tuple[str, PropertyCategory]] = set()
    raw_props = raw.get("properties", [])
    if not isinstance(raw_props, list):
        sink.error(E.INVALID_VALUE, f"{where}: 'properties' must be a list")
        raw_props = []
    for j, rp in enumerate(raw_props):
        pwhere = f"{where}.properties[{j}]"
        if not isinstance(rp, dict):
            sink.error(E.INVALID_VALUE, f"{pwhere} must be a mapping")
            continue
        pname = rp.get("name")
        if not is_identifier(pname):
            sink.error(E.INVALID_IDENTIFIER, f"{pwhere}: property name {pname!r} is invalid")
            continue
        try:
            category = PropertyCategory(rp.get("category"))
        except ValueError:
            sink.error(E.UNKNOWN_CATEGORY,
                       f"{pwhere}: unknown category {rp.get('category')!r}")
            continue
        if category not in legal_categories(kind):
            sink.error(E.ILLEGAL_CATEGORY_FOR_KIND,
                       f"{pwhere}: category {category.value} is not allowed for "
                       f"{kind.value} concept {name!r}")
            continue
        key = (pname, category)
        if key in seen_props:
            sink.error(E.DUPLICATE_NAME,
                       f"{pwhere}: duplicate property {pname!r} in category {category.value}")
            continue
        seen_props.add(key)
        note = rp.get("note", "")
        if not isinstance(note, str):
            sink.error(E.INVALID_VALUE, f"{pwhere}: 'note' must be a string")
            note = ""
        properties.append(SourceProperty(pname, category, note))

    instances: list[str] = []
    raw_instances = raw.get("instances", [])
    if not isinstance(raw_instances, list):
        sink.error(E.INVALID_VALUE, f"{where}: 'instances' must be a list")
        raw_instances = []
    for inst in raw_instances:
        if not is_identifier(inst):
            sink.error(E.INVALID_IDENTIFIER, f"{where}: instance {inst!r} is invalid")
        elif inst in instances:
            sink.error(E.DUPLICATE_NAME, f"{where}: duplicate instance {inst!r}")
        else:
            instances.append(inst)

    properties.sort(key=lambda p: (p.name, p.category.value))
    instances.sort()
    return SourceConcept(name=name, kind=kind, parent=parent,
                         properties=tuple(properties), instances=tuple(instances))


def _check_cycles(concepts: list[SourceConcept], sink: DiagnosticSink) -> None:
    by_name = {c.name: c for c in concepts}
    for concept in concepts:
        seen = {concept.name}
        current = concept
        while current.parent is not None:
            nxt = by_name.get(current.parent)
            if nxt is None:
                break
            if nxt.name in seen:
                sink.error(E.TAXONOMY_CYCLE,
                           f"taxonomy cycle through concept {nxt.name!r}")
                return
            seen.add(nxt.name)
            current = nxt


# ---------------------------------------------------------------------------
# Serialization (canonical form: everything sorted by name)
# ---------------------------------------------------------------------------

def ontology_to_doc(ontology: SourceOntology) -> dict:
    concepts = []
    for c in sorted(ontology.concepts, key=lambda c: c.name):
        entry: dict = {"name": c.name, "kind": c.kind.value}
        if c.parent is not None:
            entry["parent"] = c.parent
        props = []
        for p in sorted(c.properties, key=lambda p: (p.name, p.category.value)):
            pd: dict = {"name": p.name, "category": p.category.value}
            if p.note:
                pd["note"] = p.note
            props.append(pd)
        entry["properties"] = props
        entry["instances"] = sorted(c.instances)
        concepts.append(entry)
    return {"schema": ONTOLOGY_SCHEMA, "concepts": concepts}


def serialize_source_ontology(ontology: SourceOntology, *, fmt: str = "yaml") -> str:
    """Render the canonical document; ``load . serialize`` is the identity."""
    return dump_document(ontology_to_doc(ontology), fmt=fmt)
