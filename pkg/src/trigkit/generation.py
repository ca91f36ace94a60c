"""Generation matrix, worst-case filtering, condition synthesis, assessment.

For one analyzed source (with its relationship bundle) and one declared
sensor, the generation matrix crosses source properties against the quality
properties of every affected stage. Cells are filled from an effect knowledge
base whose entries grade the worst-case influence of a property on a stage
quality with a signed degree in [-3, +3]; unfilled cells stay at 0
("unassessed"). Negative cells at or beyond the worst-case threshold survive
filtering and are grouped per (property row, stage) into triggering
conditions; positive cells are diagnostics only and never become conditions.

Each condition for a sensing stage also gets a distance-augmented companion:
a marginal target distance compounds any sensing degradation.

Assessment attaches an exposure/criticality pair (E1..E4 x C1..C4); priority
is the product of the two indexes and ranking is descending by (priority,
criticality, exposure) with ids as the final tiebreak. Conditions without a
rating sink to the bottom flagged "unrated".
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

from . import errors as E
from .docio import check_schema, dump_document, parse_document, read_document
from .errors import DiagnosticSink, ToolkitError
from .naming import display_name, display_property_key, is_identifier
from .ontology import SourceOntology
from .perception import (
    STAGE_BY_NAME,
    STAGE_ORDER,
    PerceptionSystemSpec,
    StagePhase,
    affected_stages,
)
from .relationships import (
    MatrixPattern,
    RelationForm,
    RelationshipBundle,
    RelationshipInstance,
    parse_relation_form,
)

__all__ = [
    "EFFECTS_SCHEMA",
    "RATINGS_SCHEMA",
    "EXPOSURE_LEVELS",
    "CRITICALITY_LEVELS",
    "RelationContext",
    "EffectRule",
    "EffectKnowledgeBase",
    "EffectEntry",
    "GenerationMatrix",
    "AssessmentClass",
    "TriggeringCondition",
    "render_degree",
    "parse_degree",
    "build_matrix",
    "worst_case_filter",
    "positive_cells",
    "synthesize_conditions",
    "condition_id",
    "assess",
    "rank",
    "load_effects",
    "read_effects",
    "effects_to_doc",
    "serialize_effects",
    "context_to_doc",
    "context_from_doc",
    "load_ratings",
    "read_ratings",
]

EFFECTS_SCHEMA = "effect-knowledge@1"
RATINGS_SCHEMA = "condition-ratings@1"

DEGREE_MIN, DEGREE_MAX = -3, 3
FIGURE_MINUS = "−"  # the spaced mark used in rendered matrices


# ---------------------------------------------------------------------------
# Effect degrees
# ---------------------------------------------------------------------------

def _check_degree(degree: int) -> int:
    if not isinstance(degree, int) or isinstance(degree, bool) \
            or not DEGREE_MIN <= degree <= DEGREE_MAX:
        raise ToolkitError(E.INVALID_VALUE,
                           f"effect degree must be an integer in "
                           f"[{DEGREE_MIN}, {DEGREE_MAX}], got {degree!r}")
    return degree


def render_degree(degree: int, *, style: str = "figure") -> str:
    """Render a degree as repeated marks; 0 renders blank.

    ``figure`` uses spaced typographic marks ("− − −", "+ +") as tabular
    sheets print them; ``ascii`` uses plain hyphen-minus/plus runs ("---").
    """
    _check_degree(degree)
    if degree == 0:
        return ""
    mark = ("+" if degree > 0 else (FIGURE_MINUS if style == "figure" else "-"))
    marks = [mark] * abs(degree)
    return " ".join(marks) if style == "figure" else "".join(marks)


def parse_degree(text: str) -> int:
    """Inverse of :func:`render_degree`; accepts both mark styles."""
    if not isinstance(text, str):
        raise ToolkitError(E.INVALID_VALUE, f"degree text must be a string, got {text!r}")
    stripped = text.strip()
    if not stripped:
        return 0
    marks = stripped.split() if " " in stripped else list(stripped)
    unique = set(marks)
    if unique <= {"+"}:
        sign = 1
    elif unique <= {FIGURE_MINUS} or unique <= {"-"}:
        sign = -1
    else:
        raise ToolkitError(E.INVALID_VALUE, f"unreadable degree marks {text!r}")
    if len(marks) > DEGREE_MAX:
        raise ToolkitError(E.INVALID_VALUE, f"degree {text!r} exceeds the scale")
    return sign * len(marks)


# ---------------------------------------------------------------------------
# Effect knowledge base
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RelationContext:
    """Restricts a rule to bundles holding a matching relation."""

    form: RelationForm | None = None
    focal: MatrixPattern | None = None
    partner: MatrixPattern | None = None

    def matches(self, rel: RelationshipInstance, ontology: SourceOntology) -> bool:
        if self.form is not None and rel.form != self.form:
            return False
        if self.focal is not None:
            kind = None
            concept = ontology.get(rel.focal)
            if concept is not None:
                kind = concept.kind
            if not self.focal.matches(rel.focal, kind):
                return False
        if self.partner is not None:
            kind = None
            concept = ontology.get(rel.partner)
            if concept is not None:
                kind = concept.kind
            if not self.partner.matches(rel.partner, kind):
                return False
        return True

    def satisfied_by(self, bundle: RelationshipBundle, ontology: SourceOntology) -> bool:
        return any(self.matches(rel, ontology) for rel in bundle.relations)

    def label(self) -> str:
        parts = []
        if self.form is not None:
            parts.append(self.form.label)
        if self.focal is not None:
            parts.append(f"focal={self.focal.label}")
        if self.partner is not None:
            parts.append(f"partner={self.partner.label}")
        return " ".join(parts)


@dataclass(frozen=True)
class EffectRule:
    """One authored worst-case grading in the knowledge base."""

    concept: str
    properties: tuple[str, ...]
    stage: str
    stage_property: str
    degree: int
    principle: str = ""
    worst_case: str = ""
    context: RelationContext | None = None
    source: str = ""

    @property
    def property_key(self) -> str:
        return "/".join(self.properties)

    def sort_key(self) -> tuple:
        return (self.concept, self.property_key, STAGE_ORDER[self.stage],
                self.stage_property, self.context.label() if self.context else "")


@dataclass(frozen=True)
class EffectKnowledgeBase:
    rules: tuple[EffectRule, ...] = ()

    def rules_for(self, concept: str) -> tuple[EffectRule, ...]:
        return tuple(r for r in self.rules if r.concept == concept)

    def group_rules(self) -> tuple[EffectRule, ...]:
        return tuple(r for r in self.rules if len(r.properties) > 1)


@dataclass(frozen=True)
class EffectEntry:
    """One matrix cell: a property row's graded influence on a stage quality."""

    concept: str
    properties: tuple[str, ...]
    stage: str
    stage_property: str
    degree: int
    principle: str = ""
    worst_case: str = ""
    context: RelationContext | None = None

    @property
    def property_key(self) -> str:
        return "/".join(self.properties)


RowKey = tuple[str, tuple[str, ...]]  # (concept, property names)


@dataclass(frozen=True)
class GenerationMatrix:
    """Dense property-by-stage-quality grid for one bundle on one sensor."""

    sensor: str
    bundle: RelationshipBundle
    rows: tuple[RowKey, ...]
    columns: tuple[tuple[str, str], ...]  # (stage, quality property)
    cells: tuple[EffectEntry, ...]  # row-major, len == len(rows) * len(columns)

    def cell(self, row: RowKey, column: tuple[str, str]) -> EffectEntry:
        i = self.rows.index(row)
        j = self.columns.index(column)
        return self.cells[i * len(self.columns) + j]

    def stages(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for stage, _q in self.columns:
            seen.setdefault(stage, None)
        return tuple(seen)


# ---------------------------------------------------------------------------
# Matrix construction
# ---------------------------------------------------------------------------

def _context_specificity(rule: EffectRule) -> int:
    """Order rules of equal degree: a narrower context beats a broader one."""
    if rule.context is None:
        return 0
    score = 1
    if rule.context.form is not None:
        score += 1
    for pattern in (rule.context.focal, rule.context.partner):
        if pattern is not None:
            score += 2 if pattern.name is not None else 1
    return score


def _matrix_rows(bundle: RelationshipBundle, kb: EffectKnowledgeBase,
                 ontology: SourceOntology) -> tuple[RowKey, ...]:
    source = ontology.get(bundle.source)
    rows: list[RowKey] = [(source.name, (p,)) for p in source.property_names()]
    for rel in bundle.relations:
        if rel.targets_sensor():
            continue
        partner = ontology.get(rel.partner)
        if partner is None:
            continue
        for prop in partner.property_names():
            if partner.categories_of(prop) & rel.perturbed:
                key = (partner.name, (prop,))
                if key not in rows:
                    rows.append(key)
    singles = {(concept, props[0]) for concept, props in rows}
    for rule in kb.group_rules():
        if all((rule.concept, p) in singles for p in rule.properties):
            key = (rule.concept, rule.properties)
            if key not in rows:
                rows.append(key)
    rows.sort(key=lambda r: (0 if r[0] == bundle.source else 1, r[0], len(r[1]), r[1]))
    return tuple(rows)


def build_matrix(bundle: RelationshipBundle, system: PerceptionSystemSpec,
                 kb: EffectKnowledgeBase, ontology: SourceOntology) -> GenerationMatrix:
    """Cross source properties with affected stage qualities for one sensor.

    Rows are the analyzed concept's own properties, partner properties in the
    relations' perturbed categories, and any knowledge-base joint rows whose
    members are all present. Every cell exists; cells with no matching rule
    stay at degree 0. When several rules match one cell, the worst survives.
    """
    source = ontology.get(bundle.source)
    if source is None:
        raise ToolkitError(E.UNKNOWN_CONCEPT,
                           f"bundle source {bundle.source!r} does not resolve")
    stage_names = sorted(affected_stages(source, bundle.relations, system, ontology),
                         key=lambda s: STAGE_ORDER[s])
    columns = tuple((stage, quality)
                    for stage in stage_names
                    for quality in STAGE_BY_NAME[stage].quality_properties)
    rows = _matrix_rows(bundle, kb, ontology)

    index: dict[tuple[str, tuple[str, ...], str, str], EffectRule] = {}
    for rule in kb.rules:
        if rule.context is not None and not rule.context.satisfied_by(bundle, ontology):
            continue
        key = (rule.concept, rule.properties, rule.stage, rule.stage_property)
        best = index.get(key)
        if best is None or rule.degree < best.degree \
                or (rule.degree == best.degree
                    and _context_specificity(rule) > _context_specificity(best)):
            index[key] = rule

    cells: list[EffectEntry] = []
    for concept, props in rows:
        for stage, quality in columns:
            rule = index.get((concept, props, stage, quality))
            if rule is None:
                cells.append(EffectEntry(concept, props, stage, quality, 0))
            else:
                cells.append(EffectEntry(concept, props, stage, quality, rule.degree,
                                         rule.principle, rule.worst_case, rule.context))
    return GenerationMatrix(sensor=system.sensor, bundle=bundle, rows=rows,
                            columns=columns, cells=tuple(cells))


def worst_case_filter(matrix: GenerationMatrix, threshold: int = 2) -> list[EffectEntry]:
    """Keep cells at or beyond the worst-case threshold, in row-major order.

    Only negative degrees qualify; positive cells are diagnostics (see
    :func:`positive_cells`).
    """
    if threshold not in (1, 2, 3):
        raise ToolkitError(E.INVALID_VALUE,
                           f"threshold must be 1, 2 or 3, got {threshold!r}")
    return [cell for cell in matrix.cells if cell.degree <= -threshold]


def positive_cells(matrix: GenerationMatrix) -> list[EffectEntry]:
    """Cells graded as beneficial; reported separately, never synthesized."""
    return [cell for cell in matrix.cells if cell.degree > 0]


# ---------------------------------------------------------------------------
# Triggering conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AssessmentClass:
    exposure: str  # E1..E4
    criticality: str  # C1..C4

    def __post_init__(self):
        if self.exposure not in EXPOSURE_LEVELS:
            raise ToolkitError(E.INVALID_VALUE, f"unknown exposure {self.exposure!r}")
        if self.criticality not in CRITICALITY_LEVELS:
            raise ToolkitError(E.INVALID_VALUE, f"unknown criticality {self.criticality!r}")

    @property
    def exposure_index(self) -> int:
        return int(self.exposure[1])

    @property
    def criticality_index(self) -> int:
        return int(self.criticality[1])

    @property
    def priority(self) -> int:
        return self.exposure_index * self.criticality_index


EXPOSURE_LEVELS = ("E1", "E2", "E3", "E4")
CRITICALITY_LEVELS = ("C1", "C2", "C3", "C4")


@dataclass(frozen=True)
class TriggeringCondition:
    """One synthesized worst-case condition for a catalog."""

    id: str
    sensor: str
    sources: tuple[str, ...]  # analyzed source first
    relationships: tuple[RelationshipInstance, ...]
    property_owner: str
    properties: tuple[str, ...]
    stage: str
    effects: tuple[EffectEntry, ...]
    degree: int
    description: str
    distance_augmented: bool = False
    variant: str = "default"
    templated: bool = True
    assessment: AssessmentClass | None = None
    priority: int | None = None

    @property
    def property_key(self) -> str:
        return "/".join(self.properties)

    def sources_rendered(self) -> str:
        regular = [r for r in self.relationships if not r.targets_sensor()]
        if not regular:
            return display_name(self.sources[0])
        return " + ".join(r.render() for r in regular)

    def stage_rendered(self) -> str:
        prefix = "S.-" if STAGE_BY_NAME[self.stage].phase is StagePhase.SENSING else "R.-"
        return prefix + display_name(self.stage)

    def properties_rendered(self) -> str:
        return display_property_key(self.properties)

    def rating_label(self) -> str:
        if self.assessment is None:
            return "unrated"
        return f"{self.assessment.exposure}/{self.assessment.criticality}"


def condition_id(sensor: str, bundle_source: str, relation_signature: str,
                 property_owner: str, property_key: str, stage: str,
                 variant: str, distance: bool) -> str:
    payload = "|".join([sensor, bundle_source, relation_signature, property_owner,
                        property_key, stage, variant, "D" if distance else "B"])
    return "c" + hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


def _bundle_sources(bundle: RelationshipBundle) -> tuple[str, ...]:
    names: dict[str, None] = {bundle.source: None}
    for rel in bundle.relations:
        if not rel.targets_sensor():
            names.setdefault(rel.partner, None)
    return tuple(names)


def _relation_contributes(rel: RelationshipInstance, group: Sequence[EffectEntry],
                          ontology: SourceOntology) -> bool:
    return any(cell.context is not None and cell.context.matches(rel, ontology)
               for cell in group)


def synthesize_conditions(entries: Sequence[EffectEntry], bundle: RelationshipBundle,
                          system: PerceptionSystemSpec, templates,
                          ontology: SourceOntology,
                          warnings: list | None = None) -> list[TriggeringCondition]:
    """Turn filtered matrix cells into catalog conditions.

    Cells are grouped per (property row, stage); every relation in the bundle
    must be demanded by the context of some cell in the group, otherwise the
    group's cells fire identically without that relation, the group belongs
    to a smaller bundle, and it is skipped here. Each matching
    description template variant yields one condition; a missing template
    falls back to a generic wording and reports a warning. Sensing-stage
    conditions additionally get a distance-augmented companion.
    """
    groups: dict[tuple[RowKey, str], list[EffectEntry]] = {}
    for cell in entries:
        groups.setdefault(((cell.concept, cell.properties), cell.stage), []).append(cell)

    relation_signature = bundle.signature()
    sources = _bundle_sources(bundle)
    out: list[TriggeringCondition] = []
    for (row, stage), group in groups.items():
        if not all(_relation_contributes(rel, group, ontology)
                   for rel in bundle.relations):
            continue
        group = sorted(group, key=lambda c: (c.degree, c.stage_property))
        worst = group[0].degree
        concept_name, props = row
        variants = templates.lookup(relation_signature, concept_name,
                                    "/".join(props), stage)
        templated = variants is not None
        if variants is None:
            variants = ((templates.GENERIC_TAG,
                         templates.generic_description(bundle, concept_name, props, stage)),)
            if warnings is not None:
                warnings.append(
                    f"{E.MISSING_TEMPLATE}: no description template for "
                    f"({relation_signature or 'no relations'}, {concept_name}, "
                    f"{'/'.join(props)}, {stage}); generic wording used")
        sensing = STAGE_BY_NAME[stage].phase is StagePhase.SENSING
        for tag, text in variants:
            base = TriggeringCondition(
                id=condition_id(system.sensor, bundle.source, relation_signature,
                                concept_name, "/".join(props), stage, tag, False),
                sensor=system.sensor,
                sources=sources,
                relationships=bundle.relations,
                property_owner=concept_name,
                properties=props,
                stage=stage,
                effects=tuple(group),
                degree=worst,
                description=text,
                distance_augmented=False,
                variant=tag,
                templated=templated,
            )
            out.append(base)
            if sensing:
                out.append(replace(
                    base,
                    id=condition_id(system.sensor, bundle.source, relation_signature,
                                    concept_name, "/".join(props), stage, tag, True),
                    description=text + templates.distance_suffix,
                    distance_augmented=True,
                ))
    return out


# ---------------------------------------------------------------------------
# Assessment and ranking
# ---------------------------------------------------------------------------

def assess(condition: TriggeringCondition,
           rating: AssessmentClass) -> TriggeringCondition:
    """Attach an exposure/criticality rating; priority is their index product."""
    return replace(condition, assessment=rating, priority=rating.priority)


def rank(conditions: Iterable[TriggeringCondition]) -> list[TriggeringCondition]:
    """Descending by (priority, criticality, exposure), id as final tiebreak.

    Ties on priority break toward higher criticality, then higher exposure.
    Unassessed conditions keep their relative order at the bottom.
    """
    rated: list[TriggeringCondition] = []
    unrated: list[TriggeringCondition] = []
    for condition in conditions:
        (rated if condition.assessment is not None else unrated).append(condition)
    rated.sort(key=lambda c: (-c.priority, -c.assessment.criticality_index,
                              -c.assessment.exposure_index, c.id))
    return rated + unrated


# ---------------------------------------------------------------------------
# Effect knowledge documents
# ---------------------------------------------------------------------------

def load_effects(text: str, *, fmt: str = "yaml",
                 source: str = "<document>") -> EffectKnowledgeBase:
    doc = parse_document(text, fmt=fmt, source=source)
    return effects_from_doc(doc, source=source)


def read_effects(path: str | Path) -> EffectKnowledgeBase:
    doc = read_document(path)
    return effects_from_doc(doc, source=str(path))


def context_to_doc(context: RelationContext) -> dict:
    ctx: dict = {}
    if context.form is not None:
        ctx["relationship"] = context.form.label
    if context.focal is not None:
        ctx["focal"] = context.focal.label
    if context.partner is not None:
        ctx["partner"] = context.partner.label
    return ctx


def context_from_doc(raw: object, where: str, sink: DiagnosticSink) -> RelationContext | None:
    if raw is None:
        return None
    if not isinstance(raw, dict):
        sink.error(E.INVALID_VALUE, f"{where}: 'context' must be a mapping")
        return None
    form = None
    if raw.get("relationship") is not None:
        try:
            form = parse_relation_form(raw["relationship"])
        except ToolkitError as exc:
            sink.error(exc.code, f"{where}: {exc.args[0]}")
            return None

    def pattern(field: str) -> MatrixPattern | None:
        value = raw.get(field)
        if value is None:
            return None
        from .relationships import _pattern_from_doc
        return _pattern_from_doc(value, f"{where}.{field}", sink)

    focal = pattern("focal")
    partner = pattern("partner")
    if form is None and focal is None and partner is None:
        sink.error(E.INVALID_VALUE, f"{where}: empty context")
        return None
    return RelationContext(form=form, focal=focal, partner=partner)


def effects_from_doc(doc: dict, *, source: str = "<document>") -> EffectKnowledgeBase:
    check_schema(doc, EFFECTS_SCHEMA, source=source)
    sink = DiagnosticSink(file=source)
    rules: list[EffectRule] = []
    raw_rules = doc.get("effects", [])
    if not isinstance(raw_rules, list):
        sink.error(E.INVALID_VALUE, "'effects' must be a list")
        raw_rules = []
    for i, raw in enumerate(raw_rules):
        where = f"effects[{i}]"
        if not isinstance(raw, dict):
            sink.error(E.INVALID_VALUE, f"{where} must be a mapping")
            continue
        concept = raw.get("concept")
        if not is_identifier(concept):
            sink.error(E.INVALID_IDENTIFIER, f"{where}: concept {concept!r} is invalid")
            continue
        prop_field = raw.get("property")
        if not isinstance(prop_field, str) or not prop_field:
            sink.error(E.MISSING_FIELD, f"{where}: 'property' is required")
            continue
        props = tuple(prop_field.split("/"))
        if not all(is_identifier(p) for p in props) or len(set(props)) != len(props):
            sink.error(E.INVALID_IDENTIFIER,
                       f"{where}: property key {prop_field!r} is invalid")
            continue
        stage = raw.get("stage")
        if stage not in STAGE_BY_NAME:
            sink.error(E.UNKNOWN_STAGE, f"{where}: unknown stage {stage!r}")
            continue
        quality = raw.get("stage_property")
        if quality not in STAGE_BY_NAME[stage].quality_properties:
            sink.error(E.UNKNOWN_STAGE_PROPERTY,
                       f"{where}: {quality!r} is not a quality property of {stage}")
            continue
        degree = raw.get("degree")
        try:
            _check_degree(degree)
        except ToolkitError as exc:
            sink.error(exc.code, f"{where}: {exc.args[0]}")
            continue
        if degree == 0:
            sink.error(E.INVALID_VALUE,
                       f"{where}: degree 0 means unassessed and cannot be authored")
            continue
        context = context_from_doc(raw.get("context"), where, sink)
        rules.append(EffectRule(
            concept=concept, properties=props, stage=stage, stage_property=quality,
            degree=degree, principle=str(raw.get("principle", "")),
            worst_case=str(raw.get("worst_case", "")), context=context,
            source=str(raw.get("source", "")),
        ))
    sink.raise_if_errors()
    rules.sort(key=lambda r: r.sort_key())
    return EffectKnowledgeBase(rules=tuple(rules))


def effects_to_doc(kb: EffectKnowledgeBase) -> dict:
    entries = []
    for rule in sorted(kb.rules, key=lambda r: r.sort_key()):
        raw: dict = {
            "concept": rule.concept,
            "property": rule.property_key,
            "stage": rule.stage,
            "stage_property": rule.stage_property,
            "degree": rule.degree,
        }
        if rule.principle:
            raw["principle"] = rule.principle
        if rule.worst_case:
            raw["worst_case"] = rule.worst_case
        if rule.context is not None:
            raw["context"] = context_to_doc(rule.context)
        if rule.source:
            raw["source"] = rule.source
        entries.append(raw)
    return {"schema": EFFECTS_SCHEMA, "effects": entries}


def serialize_effects(kb: EffectKnowledgeBase, *, fmt: str = "yaml") -> str:
    return dump_document(effects_to_doc(kb), fmt=fmt)


def cross_validate_effects(kb: EffectKnowledgeBase, ontology: SourceOntology,
                           sink: DiagnosticSink) -> None:
    """Rule concepts/properties must belong to the ontology."""
    for rule in kb.rules:
        concept = ontology.get(rule.concept)
        if concept is None:
            sink.error(E.UNKNOWN_CONCEPT,
                       f"effect rule names unknown concept {rule.concept!r}")
            continue
        owned = set(concept.property_names())
        for prop in rule.properties:
            if prop not in owned:
                sink.error(E.UNKNOWN_PROPERTY,
                           f"effect rule: {rule.concept!r} has no property {prop!r}")


# ---------------------------------------------------------------------------
# Ratings documents
# ---------------------------------------------------------------------------

def load_ratings(text: str, *, fmt: str = "yaml",
                 source: str = "<document>") -> dict[str, AssessmentClass]:
    doc = parse_document(text, fmt=fmt, source=source)
    return ratings_from_doc(doc, source=source)


def read_ratings(path: str | Path) -> dict[str, AssessmentClass]:
    doc = read_document(path)
    return ratings_from_doc(doc, source=str(path))


def ratings_from_doc(doc: dict, *, source: str = "<document>") -> dict[str, AssessmentClass]:
    check_schema(doc, RATINGS_SCHEMA, source=source)
    sink = DiagnosticSink(file=source)
    out: dict[str, AssessmentClass] = {}
    raw_ratings = doc.get("ratings", [])
    if not isinstance(raw_ratings, list):
        sink.error(E.INVALID_VALUE, "'ratings' must be a list")
        raw_ratings = []
    for i, raw in enumerate(raw_ratings):
        where = f"ratings[{i}]"
        if not isinstance(raw, dict) or not isinstance(raw.get("condition"), str):
            sink.error(E.INVALID_VALUE, f"{where} must be a mapping with 'condition'")
            continue
        cid = raw["condition"]
        if cid in out:
            sink.error(E.DUPLICATE_NAME, f"{where}: duplicate rating for {cid!r}")
            continue
        exposure, criticality = raw.get("exposure"), raw.get("criticality")
        if exposure not in EXPOSURE_LEVELS or criticality not in CRITICALITY_LEVELS:
            sink.error(E.UNKNOWN_RATING,
                       f"{where}: rating must pair E1..E4 with C1..C4")
            continue
        out[cid] = AssessmentClass(exposure=exposure, criticality=criticality)
    sink.raise_if_errors()
    return out
