"""Relationships between triggering sources and their compatibility rules.

Four relationship kinds exist: spatial position (overlay/occlusion), surface
treatment (cover/lighten), possession, and cognitive-feature similarity.
Whether a kind applies to a concrete pair of concepts is data: the
compatibility matrix maps (focal pattern, partner pattern) to a set of
permitted forms, where a pattern names either a concept or a whole kind, and
a name pattern always beats a kind pattern. The reserved focal name
``Sensor`` expresses relations that target the perceiving sensor itself
(droplets covering a lens, a bag pressed onto the housing).

Instantiating a relationship fixes which property categories of the focal
concept the partner perturbs; bundles collect the relations acting on one
focal concept and union those categories.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from . import errors as E
from .docio import check_schema, dump_document, parse_document, read_document
from .errors import DiagnosticSink, ToolkitError
from .naming import display_name, is_identifier
from .ontology import (
    SENSOR_TARGET,
    ConceptKind,
    PropertyCategory,
    SourceConcept,
    SourceOntology,
    legal_categories,
)

__all__ = [
    "RelationshipKind",
    "RelationForm",
    "RELATION_FORMS",
    "DEFAULT_PERTURBED",
    "MatrixPattern",
    "MatrixEntry",
    "CompatibilityMatrix",
    "RelationshipInstance",
    "RelationshipBundle",
    "MATRIX_SCHEMA",
    "parse_relation_form",
    "applicable_relationships",
    "instantiate_relationship",
    "instantiate_sensor_relationship",
    "compose_bundle",
    "load_compatibility_matrix",
    "read_compatibility_matrix",
    "matrix_to_doc",
    "serialize_compatibility_matrix",
]

MATRIX_SCHEMA = "compatibility-matrix@1"


class RelationshipKind(str, Enum):
    SPATIAL_POSITION = "SpatialPosition"
    SURFACE_TREATMENT = "SurfaceTreatment"
    POSSESS = "Possess"
    COGNITIVE_FEATURE = "CognitiveFeature"


_SUBKINDS: dict[RelationshipKind, tuple[str, ...]] = {
    RelationshipKind.SPATIAL_POSITION: ("Overlay", "Occlusion"),
    RelationshipKind.SURFACE_TREATMENT: ("Cover", "Lighten"),
    RelationshipKind.POSSESS: (),
    RelationshipKind.COGNITIVE_FEATURE: (),
}


@dataclass(frozen=True, order=True)
class RelationForm:
    """A kind plus subkind, e.g. ``SpatialPosition.Occlusion``."""

    kind: RelationshipKind
    subkind: str | None = None

    def __post_init__(self):
        subkinds = _SUBKINDS[self.kind]
        if subkinds and self.subkind not in subkinds:
            raise ToolkitError(E.UNKNOWN_RELATIONSHIP,
                               f"{self.kind.value} requires a subkind from {subkinds}")
        if not subkinds and self.subkind is not None:
            raise ToolkitError(E.UNKNOWN_RELATIONSHIP,
                               f"{self.kind.value} does not take a subkind")

    @property
    def label(self) -> str:
        return self.kind.value if self.subkind is None else f"{self.kind.value}.{self.subkind}"


def parse_relation_form(label: str) -> RelationForm:
    kind_part, _, sub_part = label.partition(".")
    try:
        kind = RelationshipKind(kind_part)
    except ValueError:
        raise ToolkitError(E.UNKNOWN_RELATIONSHIP,
                           f"unknown relationship {label!r}") from None
    return RelationForm(kind, sub_part or None)


#: Every legal form, in canonical order.
RELATION_FORMS: tuple[RelationForm, ...] = tuple(
    RelationForm(kind, sub)
    for kind in RelationshipKind
    for sub in (_SUBKINDS[kind] or (None,))
)

#: Property categories of the focal concept that each kind perturbs unless a
#: matrix entry overrides the set.
DEFAULT_PERTURBED: dict[RelationshipKind, frozenset[PropertyCategory]] = {
    RelationshipKind.SPATIAL_POSITION: frozenset({
        PropertyCategory.REFLECTION_AREA, PropertyCategory.FEATURE_VARIABILITY}),
    RelationshipKind.SURFACE_TREATMENT: frozenset({PropertyCategory.REFLECTIVITY}),
    RelationshipKind.POSSESS: frozenset({PropertyCategory.FEATURE_VARIABILITY}),
    RelationshipKind.COGNITIVE_FEATURE: frozenset({PropertyCategory.FEATURE_VARIABILITY}),
}

_RENDER_VERBS: dict[tuple[RelationshipKind, str | None], str] = {
    (RelationshipKind.SPATIAL_POSITION, "Overlay"): "Overlayedby",
    (RelationshipKind.SPATIAL_POSITION, "Occlusion"): "Occludedby",
    (RelationshipKind.SURFACE_TREATMENT, "Cover"): "Coveredby",
    (RelationshipKind.SURFACE_TREATMENT, "Lighten"): "Lightenedby",
    (RelationshipKind.POSSESS, None): "Possess",
    (RelationshipKind.COGNITIVE_FEATURE, None): "Similarwith",
}


# ---------------------------------------------------------------------------
# Compatibility matrix
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MatrixPattern:
    """Either a concept name, a concept kind, or the reserved sensor target."""

    name: str | None = None
    kind: ConceptKind | None = None

    def __post_init__(self):
        if (self.name is None) == (self.kind is None):
            raise ToolkitError(E.INVALID_VALUE,
                               "pattern must set exactly one of name/kind")

    @property
    def label(self) -> str:
        return self.name if self.name is not None else f"kind:{self.kind.value}"

    def matches(self, name: str, kind: ConceptKind | None) -> bool:
        if self.name is not None:
            return self.name == name
        return kind is not None and self.kind is kind


@dataclass(frozen=True)
class MatrixEntry:
    focal: MatrixPattern
    partner: MatrixPattern
    forms: tuple[RelationForm, ...]
    # optional per-form perturbed-category override, keyed by form label
    perturbs: tuple[tuple[str, tuple[PropertyCategory, ...]], ...] = ()
    source: str = ""

    def perturbed_for(self, form: RelationForm) -> frozenset[PropertyCategory] | None:
        for label, categories in self.perturbs:
            if label == form.label:
                return frozenset(categories)
        return None


@dataclass(frozen=True)
class CompatibilityMatrix:
    """Total over queried pairs: pairs without an entry map to the empty set."""

    entries: tuple[MatrixEntry, ...] = ()

    def resolve(self, focal_name: str, focal_kind: ConceptKind | None,
                partner_name: str, partner_kind: ConceptKind | None) -> MatrixEntry | None:
        """Most specific entry for the pair; name patterns beat kind patterns,
        the focal side weighing more than the partner side."""
        best: tuple[int, MatrixEntry] | None = None
        for entry in self.entries:
            if not entry.focal.matches(focal_name, focal_kind):
                continue
            if not entry.partner.matches(partner_name, partner_kind):
                continue
            score = (2 if entry.focal.name is not None else 0) \
                + (1 if entry.partner.name is not None else 0)
            if best is None or score > best[0]:
                best = (score, entry)
        return best[1] if best else None


def applicable_relationships(focal: SourceConcept, partner: SourceConcept,
                             matrix: CompatibilityMatrix) -> frozenset[RelationForm]:
    entry = matrix.resolve(focal.name, focal.kind, partner.name, partner.kind)
    return frozenset(entry.forms) if entry else frozenset()


def sensor_applicable_relationships(source: SourceConcept,
                                    matrix: CompatibilityMatrix) -> frozenset[RelationForm]:
    """Forms permitted between the sensor itself (focal) and ``source``."""
    entry = matrix.resolve(SENSOR_TARGET, None, source.name, source.kind)
    return frozenset(entry.forms) if entry else frozenset()


# ---------------------------------------------------------------------------
# Instances and bundles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RelationshipInstance:
    """A form applied to a concrete (focal, partner) pair.

    ``perturbed`` lists the focal-side property categories the relation can
    disturb. For sensor-targeting relations the focal is the reserved name
    ``Sensor`` and the partner is the triggering source doing the covering.
    """

    form: RelationForm
    focal: str
    partner: str
    perturbed: frozenset[PropertyCategory]
    source: str = ""

    def sort_key(self) -> tuple:
        return (self.form.label, self.focal, self.partner)

    def render(self) -> str:
        verb = _RENDER_VERBS[(self.form.kind, self.form.subkind)]
        return f"{verb}({display_name(self.focal)}, {display_name(self.partner)})"

    def targets_sensor(self) -> bool:
        return self.focal == SENSOR_TARGET


def instantiate_relationship(form: RelationForm, focal: SourceConcept,
                             partner: SourceConcept,
                             matrix: CompatibilityMatrix) -> RelationshipInstance:
    """Create a validated relationship instance between two concepts.

    Raises ``IncompatiblePair`` when the matrix does not permit the form for
    the pair and ``SelfRelation`` when focal equals partner for anything but
    possession.
    """
    entry = matrix.resolve(focal.name, focal.kind, partner.name, partner.kind)
    permitted = frozenset(entry.forms) if entry else frozenset()
    if form not in permitted:
        raise ToolkitError(E.INCOMPATIBLE_PAIR,
                           f"{form.label} is not permitted between {focal.name!r} "
                           f"and {partner.name!r}")
    if focal.name == partner.name and form.kind is not RelationshipKind.POSSESS:
        raise ToolkitError(E.SELF_RELATION,
                           f"{form.label} requires distinct focal and partner")
    perturbed = entry.perturbed_for(form) if entry else None
    if perturbed is None:
        perturbed = DEFAULT_PERTURBED[form.kind]
    illegal = perturbed - legal_categories(focal.kind)
    if illegal:
        names = ", ".join(sorted(c.value for c in illegal))
        raise ToolkitError(E.ILLEGAL_CATEGORY_FOR_KIND,
                           f"perturbed categories [{names}] are not legal for "
                           f"{focal.kind.value} focal {focal.name!r}")
    return RelationshipInstance(form=form, focal=focal.name, partner=partner.name,
                                perturbed=perturbed,
                                source=entry.source if entry else "")


def instantiate_sensor_relationship(form: RelationForm, source: SourceConcept,
                                    matrix: CompatibilityMatrix) -> RelationshipInstance:
    """Relation whose focal is the perceiving sensor and partner is ``source``."""
    entry = matrix.resolve(SENSOR_TARGET, None, source.name, source.kind)
    permitted = frozenset(entry.forms) if entry else frozenset()
    if form not in permitted:
        raise ToolkitError(E.INCOMPATIBLE_PAIR,
                           f"{form.label} is not permitted between the sensor "
                           f"and {source.name!r}")
    perturbed = entry.perturbed_for(form) if entry else None
    if perturbed is None:
        perturbed = DEFAULT_PERTURBED[form.kind]
    return RelationshipInstance(form=form, focal=SENSOR_TARGET, partner=source.name,
                                perturbed=perturbed,
                                source=entry.source if entry else "")


@dataclass(frozen=True)
class RelationshipBundle:
    """The relations considered together for one analyzed source concept.

    Regular relations share the source as their focal; sensor-targeting
    relations carry the source as their partner. ``perturbed`` is the union
    across relations.
    """

    source: str
    relations: tuple[RelationshipInstance, ...] = ()

    @property
    def perturbed(self) -> frozenset[PropertyCategory]:
        out: set[PropertyCategory] = set()
        for rel in self.relations:
            out |= rel.perturbed
        return frozenset(out)

    def signature(self) -> str:
        return ";".join(f"{r.form.label}({r.focal},{r.partner})"
                        for r in self.relations)


def compose_bundle(focal: SourceConcept, relations: Sequence[RelationshipInstance],
                   limit: int = 2) -> RelationshipBundle:
    """Deduplicate, validate and canonically order relations around ``focal``.

    Duplicates (same form/focal/partner) collapse to one. ``MixedFocal`` is
    raised when a regular relation names a different focal, ``BundleTooLarge``
    when more than ``limit`` distinct relations remain.
    """
    deduped: list[RelationshipInstance] = []
    seen: set[tuple] = set()
    for rel in relations:
        if rel.targets_sensor():
            if rel.partner != focal.name:
                raise ToolkitError(E.MIXED_FOCAL,
                                   f"sensor relation partner {rel.partner!r} does not "
                                   f"match bundle focal {focal.name!r}")
        elif rel.focal != focal.name:
            raise ToolkitError(E.MIXED_FOCAL,
                               f"relation focal {rel.focal!r} does not match bundle "
                               f"focal {focal.name!r}")
        key = (rel.form, rel.focal, rel.partner)
        if key in seen:
            continue
        seen.add(key)
        deduped.append(rel)
    if len(deduped) > limit:
        raise ToolkitError(E.BUNDLE_TOO_LARGE,
                           f"bundle holds {len(deduped)} relations, limit is {limit}")
    deduped.sort(key=lambda r: r.sort_key())
    return RelationshipBundle(source=focal.name, relations=tuple(deduped))


# ---------------------------------------------------------------------------
# Matrix documents
# ---------------------------------------------------------------------------

def load_compatibility_matrix(text: str, *, fmt: str = "yaml",
                              source: str = "<document>") -> CompatibilityMatrix:
    doc = parse_document(text, fmt=fmt, source=source)
    return matrix_from_doc(doc, source=source)


def read_compatibility_matrix(path: str | Path) -> CompatibilityMatrix:
    doc = read_document(path)
    return matrix_from_doc(doc, source=str(path))


def _pattern_from_doc(raw: object, where: str, sink: DiagnosticSink) -> MatrixPattern | None:
    if isinstance(raw, str):
        if raw.startswith("kind:"):
            try:
                return MatrixPattern(kind=ConceptKind(raw[len("kind:"):]))
            except ValueError:
                sink.error(E.UNKNOWN_KIND, f"{where}: unknown kind in pattern {raw!r}")
                return None
        if raw == SENSOR_TARGET or is_identifier(raw):
            return MatrixPattern(name=raw)
    sink.error(E.INVALID_VALUE, f"{where}: pattern must be a concept name, "
                                f"'{SENSOR_TARGET}', or 'kind:<ConceptKind>'")
    return None


def matrix_from_doc(doc: dict, *, source: str = "<document>") -> CompatibilityMatrix:
    check_schema(doc, MATRIX_SCHEMA, source=source)
    sink = DiagnosticSink(file=source)
    entries: list[MatrixEntry] = []
    seen_pairs: set[tuple[str, str]] = set()
    raw_entries = doc.get("entries", [])
    if not isinstance(raw_entries, list):
        sink.error(E.INVALID_VALUE, "'entries' must be a list")
        raw_entries = []
    for i, raw in enumerate(raw_entries):
        where = f"entries[{i}]"
        if not isinstance(raw, dict):
            sink.error(E.INVALID_VALUE, f"{where} must be a mapping")
            continue
        focal = _pattern_from_doc(raw.get("focal"), f"{where}.focal", sink)
        partner = _pattern_from_doc(raw.get("partner"), f"{where}.partner", sink)
        if focal is None or partner is None:
            continue
        pair = (focal.label, partner.label)
        if pair in seen_pairs:
            sink.error(E.DUPLICATE_NAME, f"{where}: duplicate pair {pair}")
            continue
        seen_pairs.add(pair)

        forms: list[RelationForm] = []
        raw_forms = raw.get("relationships", [])
        if not isinstance(raw_forms, list):
            sink.error(E.INVALID_VALUE, f"{where}: 'relationships' must be a list")
            raw_forms = []
        for label in raw_forms:
            try:
                form = parse_relation_form(label)
            except ToolkitError as exc:
                sink.error(exc.code, f"{where}: {exc.args[0]}")
                continue
            if form in forms:
                sink.error(E.DUPLICATE_NAME, f"{where}: duplicate relationship {label!r}")
            else:
                forms.append(form)

        perturbs: list[tuple[str, tuple[PropertyCategory, ...]]] = []
        raw_perturbs = raw.get("perturbs", {})
        if not isinstance(raw_perturbs, dict):
            sink.error(E.INVALID_VALUE, f"{where}: 'perturbs' must be a mapping")
            raw_perturbs = {}
        for label, cats in sorted(raw_perturbs.items()):
            try:
                form = parse_relation_form(label)
            except ToolkitError as exc:
                sink.error(exc.code, f"{where}.perturbs: {exc.args[0]}")
                continue
            if form not in forms:
                sink.error(E.INVALID_VALUE,
                           f"{where}.perturbs: {label!r} is not granted by this entry")
                continue
            parsed: list[PropertyCategory] = []
            ok = True
            if not isinstance(cats, list):
                sink.error(E.INVALID_VALUE, f"{where}.perturbs.{label} must be a list")
                continue
            for cat in cats:
                try:
                    parsed.append(PropertyCategory(cat))
                except ValueError:
                    sink.error(E.UNKNOWN_CATEGORY,
                               f"{where}.perturbs.{label}: unknown category {cat!r}")
                    ok = False
            if ok:
                perturbs.append((form.label, tuple(sorted(parsed, key=lambda c: c.value))))

        note = raw.get("source", "")
        if not isinstance(note, str):
            sink.error(E.INVALID_VALUE, f"{where}: 'source' must be a string")
            note = ""
        forms.sort()
        entries.append(MatrixEntry(focal=focal, partner=partner, forms=tuple(forms),
                                   perturbs=tuple(sorted(perturbs)), source=note))

    sink.raise_if_errors()
    entries.sort(key=lambda e: (e.focal.label, e.partner.label))
    return CompatibilityMatrix(entries=tuple(entries))


def matrix_to_doc(matrix: CompatibilityMatrix) -> dict:
    entries = []
    for entry in sorted(matrix.entries, key=lambda e: (e.focal.label, e.partner.label)):
        raw: dict = {
            "focal": entry.focal.label,
            "partner": entry.partner.label,
            "relationships": [f.label for f in sorted(entry.forms)],
        }
        if entry.perturbs:
            raw["perturbs"] = {label: [c.value for c in cats]
                               for label, cats in sorted(entry.perturbs)}
        if entry.source:
            raw["source"] = entry.source
        entries.append(raw)
    return {"schema": MATRIX_SCHEMA, "entries": entries}


def serialize_compatibility_matrix(matrix: CompatibilityMatrix, *, fmt: str = "yaml") -> str:
    return dump_document(matrix_to_doc(matrix), fmt=fmt)


def cross_validate_matrix(matrix: CompatibilityMatrix, ontology: SourceOntology,
                          sink: DiagnosticSink) -> None:
    """Name patterns must resolve; recognition-feature kinds need an
    interactive-capable focal (the sensor target is exempt)."""
    feature_kinds = {RelationshipKind.SPATIAL_POSITION, RelationshipKind.POSSESS,
                     RelationshipKind.COGNITIVE_FEATURE}
    for entry in matrix.entries:
        for side, pattern in (("focal", entry.focal), ("partner", entry.partner)):
            if pattern.name is not None and pattern.name != SENSOR_TARGET \
                    and ontology.get(pattern.name) is None:
                sink.error(E.UNKNOWN_CONCEPT,
                           f"matrix {side} pattern {pattern.name!r} does not resolve")
        if entry.focal.name == SENSOR_TARGET:
            continue
        if any(f.kind in feature_kinds for f in entry.forms):
            if entry.focal.kind is not None and entry.focal.kind is not ConceptKind.INTERACTIVE:
                sink.error(E.INVALID_VALUE,
                           f"matrix entry ({entry.focal.label}, {entry.partner.label}) "
                           "grants a feature-perturbing relationship to a "
                           "non-interactive focal kind")
            elif entry.focal.name is not None:
                concept = ontology.get(entry.focal.name)
                if concept is not None and concept.kind is not ConceptKind.INTERACTIVE:
                    sink.error(E.INVALID_VALUE,
                               f"matrix entry ({entry.focal.label}, {entry.partner.label}) "
                               "grants a feature-perturbing relationship to a "
                               "non-interactive focal concept")
