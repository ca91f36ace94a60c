"""Description templates for synthesized triggering conditions.

Templates map a (relationship signature, concept, property key, stage) key to
one or more tagged wording variants; each variant becomes its own catalog
row so distinct real-world phrasings of the same worst-case cell survive
side by side. When no template matches, synthesis falls back to a generic
mechanical wording and reports a warning rather than dropping the condition.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from . import errors as E
from .docio import check_schema, dump_document, parse_document, read_document
from .errors import DiagnosticSink
from .naming import display_name, display_property_key, is_identifier
from .ontology import SENSOR_TARGET, SourceOntology
from .perception import STAGE_BY_NAME, STAGE_ORDER
from .relationships import RelationshipBundle, parse_relation_form

__all__ = [
    "TEMPLATES_SCHEMA",
    "TemplateKey",
    "TemplateSet",
    "load_templates",
    "read_templates",
    "templates_from_doc",
    "templates_to_doc",
    "serialize_templates",
    "cross_validate_templates",
]

TEMPLATES_SCHEMA = "condition-templates@1"

DEFAULT_DISTANCE_SUFFIX = ", combined with a distant target"

TemplateKey = tuple[str, str, str, str]  # (relation signature, concept, property key, stage)

_SIGNATURE_PART = re.compile(
    r"^(?P<form>[A-Za-z]+(?:\.[A-Za-z]+)?)\((?P<focal>[A-Za-z][A-Za-z0-9_]*),"
    r"(?P<partner>[A-Za-z][A-Za-z0-9_]*)\)$")


def split_signature(signature: str) -> list[tuple[str, str, str]]:
    """Break a bundle signature into (form label, focal, partner) parts.

    The empty signature (a source analyzed without relations) yields an
    empty list. Raises ``InvalidValue`` on malformed text.
    """
    if signature == "":
        return []
    parts = []
    for chunk in signature.split(";"):
        match = _SIGNATURE_PART.match(chunk)
        if match is None:
            raise E.ToolkitError(E.INVALID_VALUE,
                                 f"malformed relation signature part {chunk!r}")
        parts.append((match.group("form"), match.group("focal"), match.group("partner")))
    return parts


@dataclass
class TemplateSet:
    """Tagged wording variants keyed by signature, concept, property, stage."""

    GENERIC_TAG = "generic"

    distance_suffix: str = DEFAULT_DISTANCE_SUFFIX
    entries: dict[TemplateKey, tuple[tuple[str, str], ...]] = field(default_factory=dict)

    def lookup(self, signature: str, concept: str, property_key: str,
               stage: str) -> tuple[tuple[str, str], ...] | None:
        return self.entries.get((signature, concept, property_key, stage))

    def generic_description(self, bundle: RelationshipBundle, concept: str,
                            properties: tuple[str, ...], stage: str) -> str:
        prop = display_property_key(properties).lower()
        subject = display_name(concept).lower()
        text = f"Adverse {prop} of the {subject} during {display_name(stage).lower()}"
        regular = [r for r in bundle.relations if not r.targets_sensor()]
        covering = [r for r in bundle.relations if r.targets_sensor()]
        if regular:
            text += ", given " + " and ".join(r.render() for r in regular)
        if covering:
            text += ", with the sensor obstructed"
        return text

    def __len__(self) -> int:
        return len(self.entries)


# ---------------------------------------------------------------------------
# Documents
# ---------------------------------------------------------------------------

def load_templates(text: str, *, fmt: str = "yaml",
                   source: str = "<document>") -> TemplateSet:
    doc = parse_document(text, fmt=fmt, source=source)
    return templates_from_doc(doc, source=source)


def read_templates(path: str | Path) -> TemplateSet:
    doc = read_document(path)
    return templates_from_doc(doc, source=str(path))


def templates_from_doc(doc: dict, *, source: str = "<document>") -> TemplateSet:
    check_schema(doc, TEMPLATES_SCHEMA, source=source)
    sink = DiagnosticSink(file=source)
    suffix = doc.get("distance_suffix", DEFAULT_DISTANCE_SUFFIX)
    if not isinstance(suffix, str) or not suffix:
        sink.error(E.INVALID_VALUE, "'distance_suffix' must be a non-empty string")
        suffix = DEFAULT_DISTANCE_SUFFIX
    entries: dict[TemplateKey, tuple[tuple[str, str], ...]] = {}
    raw_templates = doc.get("templates", [])
    if not isinstance(raw_templates, list):
        sink.error(E.INVALID_VALUE, "'templates' must be a list")
        raw_templates = []
    for i, raw in enumerate(raw_templates):
        where = f"templates[{i}]"
        if not isinstance(raw, dict):
            sink.error(E.INVALID_VALUE, f"{where} must be a mapping")
            continue
        signature = raw.get("relationships", "")
        if signature is None:
            signature = ""
        if not isinstance(signature, str):
            sink.error(E.INVALID_VALUE, f"{where}: 'relationships' must be a string")
            continue
        try:
            split_signature(signature)
        except E.ToolkitError as exc:
            sink.error(exc.code, f"{where}: {exc.args[0]}")
            continue
        concept = raw.get("concept")
        if not is_identifier(concept):
            sink.error(E.INVALID_IDENTIFIER, f"{where}: concept {concept!r} is invalid")
            continue
        prop_field = raw.get("property")
        if not isinstance(prop_field, str) \
                or not all(is_identifier(p) for p in prop_field.split("/")):
            sink.error(E.INVALID_IDENTIFIER,
                       f"{where}: property key {prop_field!r} is invalid")
            continue
        stage = raw.get("stage")
        if stage not in STAGE_BY_NAME:
            sink.error(E.UNKNOWN_STAGE, f"{where}: unknown stage {stage!r}")
            continue
        raw_variants = raw.get("variants")
        if not isinstance(raw_variants, list) or not raw_variants:
            sink.error(E.MISSING_FIELD, f"{where}: 'variants' must be a non-empty list")
            continue
        variants: list[tuple[str, str]] = []
        tags: set[str] = set()
        ok = True
        for j, rv in enumerate(raw_variants):
            vw = f"{where}.variants[{j}]"
            if not isinstance(rv, dict):
                sink.error(E.INVALID_VALUE, f"{vw} must be a mapping")
                ok = False
                continue
            tag = rv.get("tag", "default")
            if not is_identifier(tag):
                sink.error(E.INVALID_IDENTIFIER, f"{vw}: tag {tag!r} is invalid")
                ok = False
                continue
            if tag in tags:
                sink.error(E.DUPLICATE_NAME, f"{vw}: duplicate tag {tag!r}")
                ok = False
                continue
            tags.add(tag)
            text = rv.get("text")
            if not isinstance(text, str) or not text.strip():
                sink.error(E.MISSING_FIELD, f"{vw}: 'text' is required")
                ok = False
                continue
            variants.append((tag, text))
        if not ok or not variants:
            continue
        key: TemplateKey = (signature, concept, prop_field, stage)
        if key in entries:
            sink.error(E.DUPLICATE_NAME,
                       f"{where}: duplicate template key "
                       f"({signature or 'no relations'}, {concept}, {prop_field}, {stage})")
            continue
        entries[key] = tuple(variants)
    sink.raise_if_errors()
    return TemplateSet(distance_suffix=suffix, entries=entries)


def _key_sort(key: TemplateKey) -> tuple:
    signature, concept, prop, stage = key
    return (concept, signature, prop, STAGE_ORDER[stage])


def templates_to_doc(templates: TemplateSet) -> dict:
    raw_templates = []
    for key in sorted(templates.entries, key=_key_sort):
        signature, concept, prop, stage = key
        raw: dict = {}
        if signature:
            raw["relationships"] = signature
        raw.update(concept=concept, property=prop, stage=stage)
        raw["variants"] = [{"tag": tag, "text": text}
                           for tag, text in templates.entries[key]]
        raw_templates.append(raw)
    return {"schema": TEMPLATES_SCHEMA,
            "distance_suffix": templates.distance_suffix,
            "templates": raw_templates}


def serialize_templates(templates: TemplateSet, *, fmt: str = "yaml") -> str:
    return dump_document(templates_to_doc(templates), fmt=fmt)


def cross_validate_templates(templates: TemplateSet, ontology: SourceOntology,
                             sink: DiagnosticSink) -> None:
    """Template keys must name known concepts, owned properties and stages."""
    for signature, concept_name, prop_field, stage in templates.entries:
        concept = ontology.get(concept_name)
        if concept is None:
            sink.error(E.UNKNOWN_CONCEPT,
                       f"template names unknown concept {concept_name!r}")
            continue
        owned = set(concept.property_names())
        for prop in prop_field.split("/"):
            if prop not in owned:
                sink.error(E.UNKNOWN_PROPERTY,
                           f"template: {concept_name!r} has no property {prop!r}")
        for _form, focal, partner in split_signature(signature):
            for name in (focal, partner):
                if name != SENSOR_TARGET and ontology.get(name) is None:
                    sink.error(E.UNKNOWN_CONCEPT,
                               f"template signature names unknown concept {name!r}")
