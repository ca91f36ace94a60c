"""Rendering and round-trip serialization of generated artifacts.

Catalogs and test-case sets serialize to schema-tagged documents that parse
back into equal objects, so every pipeline stage can be driven from files.
Tabular views exist in two styles: CSV (machine-friendly, ASCII degree marks)
and Markdown (review-friendly, spaced typographic degree marks).
"""
from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from . import errors as E
from .docio import check_schema, dump_document, parse_document, read_document
from .errors import DiagnosticSink, ToolkitError
from .generation import (
    AssessmentClass,
    CRITICALITY_LEVELS,
    EXPOSURE_LEVELS,
    EffectEntry,
    GenerationMatrix,
    TriggeringCondition,
    context_from_doc,
    context_to_doc,
    rank,
    render_degree,
)
from .naming import display_name
from .ontology import PropertyCategory
from .perception import STAGE_BY_NAME
from .pipeline import Catalog
from .relationships import RelationshipInstance, parse_relation_form
from .testcases import TestCase

__all__ = [
    "CATALOG_SCHEMA",
    "CASES_SCHEMA",
    "MATRIX_DOC_SCHEMA",
    "CSV_HEADER",
    "catalog_to_doc",
    "catalog_from_doc",
    "load_catalog",
    "read_catalog",
    "serialize_catalog",
    "catalog_to_csv",
    "catalog_to_markdown",
    "matrix_to_doc",
    "matrix_to_csv",
    "matrix_to_markdown",
    "cases_to_doc",
    "cases_from_doc",
    "read_cases",
    "serialize_cases",
    "cases_to_markdown",
    "render_report",
    "report_to_doc",
]

CATALOG_SCHEMA = "condition-catalog@1"
CASES_SCHEMA = "test-cases@1"
MATRIX_DOC_SCHEMA = "generation-matrix@1"

CSV_HEADER = ("No.", "Sensor", "Triggering sources", "Properties",
              "Process stage", "Triggering condition")


# ---------------------------------------------------------------------------
# Catalog documents
# ---------------------------------------------------------------------------

def _relationship_to_doc(rel: RelationshipInstance) -> dict:
    raw = {"form": rel.form.label, "focal": rel.focal, "partner": rel.partner,
           "perturbs": sorted(c.value for c in rel.perturbed)}
    if rel.source:
        raw["source"] = rel.source
    return raw


def _relationship_from_doc(raw: object, where: str,
                           sink: DiagnosticSink) -> RelationshipInstance | None:
    if not isinstance(raw, dict):
        sink.error(E.INVALID_VALUE, f"{where} must be a mapping")
        return None
    try:
        form = parse_relation_form(str(raw.get("form")))
    except ToolkitError as exc:
        sink.error(exc.code, f"{where}: {exc.args[0]}")
        return None
    focal, partner = raw.get("focal"), raw.get("partner")
    if not isinstance(focal, str) or not isinstance(partner, str):
        sink.error(E.MISSING_FIELD, f"{where}: 'focal' and 'partner' are required")
        return None
    perturbed: set[PropertyCategory] = set()
    for value in raw.get("perturbs", []):
        try:
            perturbed.add(PropertyCategory(value))
        except ValueError:
            sink.error(E.UNKNOWN_CATEGORY, f"{where}: unknown category {value!r}")
            return None
    source = raw.get("source", "")
    if not isinstance(source, str):
        sink.error(E.INVALID_VALUE, f"{where}: 'source' must be a string")
        return None
    return RelationshipInstance(form=form, focal=focal, partner=partner,
                                perturbed=frozenset(perturbed), source=source)


def _effect_to_doc(cell: EffectEntry) -> dict:
    raw: dict = {"stage_property": cell.stage_property, "degree": cell.degree}
    if cell.principle:
        raw["principle"] = cell.principle
    if cell.worst_case:
        raw["worst_case"] = cell.worst_case
    if cell.context is not None:
        raw["context"] = context_to_doc(cell.context)
    return raw


def _condition_to_doc(condition: TriggeringCondition) -> dict:
    raw: dict = {
        "id": condition.id,
        "sensor": condition.sensor,
        "sources": list(condition.sources),
        "relationships": [_relationship_to_doc(r) for r in condition.relationships],
        "property_owner": condition.property_owner,
        "properties": list(condition.properties),
        "stage": condition.stage,
        "effects": [_effect_to_doc(c) for c in condition.effects],
        "degree": condition.degree,
        "description": condition.description,
        "distance_augmented": condition.distance_augmented,
        "variant": condition.variant,
        "templated": condition.templated,
    }
    if condition.assessment is not None:
        raw["assessment"] = {"exposure": condition.assessment.exposure,
                             "criticality": condition.assessment.criticality}
        raw["priority"] = condition.priority
    return raw


def catalog_to_doc(catalog: Catalog) -> dict:
    positives = []
    for sensor, cell in catalog.positives:
        raw: dict = {"sensor": sensor, "concept": cell.concept,
                     "properties": list(cell.properties), "stage": cell.stage,
                     "stage_property": cell.stage_property, "degree": cell.degree}
        if cell.principle:
            raw["principle"] = cell.principle
        if cell.worst_case:
            raw["worst_case"] = cell.worst_case
        if cell.context is not None:
            raw["context"] = context_to_doc(cell.context)
        positives.append(raw)
    return {
        "schema": CATALOG_SCHEMA,
        "vehicle": catalog.vehicle,
        "threshold": catalog.threshold,
        "bundle_limit": catalog.bundle_limit,
        "conditions": [_condition_to_doc(c) for c in catalog.conditions],
        "positives": positives,
        "warnings": list(catalog.warnings),
    }


def _condition_from_doc(raw: object, where: str,
                        sink: DiagnosticSink) -> TriggeringCondition | None:
    if not isinstance(raw, dict):
        sink.error(E.INVALID_VALUE, f"{where} must be a mapping")
        return None
    required = ("id", "sensor", "sources", "property_owner", "properties",
                "stage", "degree", "description")
    for field in required:
        if field not in raw:
            sink.error(E.MISSING_FIELD, f"{where}: '{field}' is required")
            return None
    stage = raw["stage"]
    if stage not in STAGE_BY_NAME:
        sink.error(E.UNKNOWN_STAGE, f"{where}: unknown stage {stage!r}")
        return None
    relationships: list[RelationshipInstance] = []
    for j, rel_raw in enumerate(raw.get("relationships", [])):
        rel = _relationship_from_doc(rel_raw, f"{where}.relationships[{j}]", sink)
        if rel is None:
            return None
        relationships.append(rel)
    owner = raw["property_owner"]
    properties = tuple(str(p) for p in raw["properties"])
    effects: list[EffectEntry] = []
    for j, cell_raw in enumerate(raw.get("effects", [])):
        cwhere = f"{where}.effects[{j}]"
        if not isinstance(cell_raw, dict):
            sink.error(E.INVALID_VALUE, f"{cwhere} must be a mapping")
            return None
        quality = cell_raw.get("stage_property")
        if quality not in STAGE_BY_NAME[stage].quality_properties:
            sink.error(E.UNKNOWN_STAGE_PROPERTY,
                       f"{cwhere}: {quality!r} is not a quality property of {stage}")
            return None
        context = context_from_doc(cell_raw.get("context"), cwhere, sink)
        effects.append(EffectEntry(
            concept=owner, properties=properties, stage=stage,
            stage_property=quality, degree=int(cell_raw.get("degree", 0)),
            principle=str(cell_raw.get("principle", "")),
            worst_case=str(cell_raw.get("worst_case", "")), context=context))
    assessment = None
    priority = None
    if raw.get("assessment") is not None:
        rating_raw = raw["assessment"]
        if not isinstance(rating_raw, dict) \
                or rating_raw.get("exposure") not in EXPOSURE_LEVELS \
                or rating_raw.get("criticality") not in CRITICALITY_LEVELS:
            sink.error(E.UNKNOWN_RATING, f"{where}: malformed 'assessment'")
            return None
        assessment = AssessmentClass(exposure=rating_raw["exposure"],
                                     criticality=rating_raw["criticality"])
        priority = assessment.priority
    return TriggeringCondition(
        id=str(raw["id"]), sensor=str(raw["sensor"]),
        sources=tuple(str(s) for s in raw["sources"]),
        relationships=tuple(relationships), property_owner=str(owner),
        properties=properties, stage=stage, effects=tuple(effects),
        degree=int(raw["degree"]), description=str(raw["description"]),
        distance_augmented=bool(raw.get("distance_augmented", False)),
        variant=str(raw.get("variant", "default")),
        templated=bool(raw.get("templated", True)),
        assessment=assessment, priority=priority)


def catalog_from_doc(doc: dict, *, source: str = "<document>") -> Catalog:
    check_schema(doc, CATALOG_SCHEMA, source=source)
    sink = DiagnosticSink(file=source)
    conditions: list[TriggeringCondition] = []
    raw_conditions = doc.get("conditions", [])
    if not isinstance(raw_conditions, list):
        sink.error(E.INVALID_VALUE, "'conditions' must be a list")
        raw_conditions = []
    seen: set[str] = set()
    for i, raw in enumerate(raw_conditions):
        condition = _condition_from_doc(raw, f"conditions[{i}]", sink)
        if condition is None:
            continue
        if condition.id in seen:
            sink.error(E.DUPLICATE_NAME,
                       f"conditions[{i}]: duplicate condition id {condition.id!r}")
            continue
        seen.add(condition.id)
        conditions.append(condition)
    positives: list[tuple[str, EffectEntry]] = []
    raw_positives = doc.get("positives", [])
    if not isinstance(raw_positives, list):
        sink.error(E.INVALID_VALUE, "'positives' must be a list")
        raw_positives = []
    for i, raw in enumerate(raw_positives):
        where = f"positives[{i}]"
        if not isinstance(raw, dict):
            sink.error(E.INVALID_VALUE, f"{where} must be a mapping")
            continue
        stage = raw.get("stage")
        if stage not in STAGE_BY_NAME:
            sink.error(E.UNKNOWN_STAGE, f"{where}: unknown stage {stage!r}")
            continue
        context = context_from_doc(raw.get("context"), where, sink)
        positives.append((str(raw.get("sensor", "")), EffectEntry(
            concept=str(raw.get("concept", "")),
            properties=tuple(str(p) for p in raw.get("properties", [])),
            stage=stage, stage_property=str(raw.get("stage_property", "")),
            degree=int(raw.get("degree", 0)),
            principle=str(raw.get("principle", "")),
            worst_case=str(raw.get("worst_case", "")), context=context)))
    sink.raise_if_errors()
    return Catalog(
        vehicle=str(doc.get("vehicle", "")),
        threshold=int(doc.get("threshold", 2)),
        bundle_limit=int(doc.get("bundle_limit", 2)),
        conditions=tuple(conditions), positives=tuple(positives),
        warnings=tuple(str(w) for w in doc.get("warnings", [])))


def load_catalog(text: str, *, fmt: str = "yaml",
                 source: str = "<document>") -> Catalog:
    return catalog_from_doc(parse_document(text, fmt=fmt, source=source), source=source)


def read_catalog(path: str | Path) -> Catalog:
    return catalog_from_doc(read_document(path), source=str(path))


def serialize_catalog(catalog: Catalog, *, fmt: str = "json") -> str:
    return dump_document(catalog_to_doc(catalog), fmt=fmt)


# ---------------------------------------------------------------------------
# Catalog tables
# ---------------------------------------------------------------------------

def _condition_row(index: int, condition: TriggeringCondition) -> tuple[str, ...]:
    return (str(index), condition.sensor, condition.sources_rendered(),
            condition.properties_rendered(), condition.stage_rendered(),
            condition.description)


def catalog_to_csv(catalog: Catalog) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for i, condition in enumerate(catalog.conditions, start=1):
        writer.writerow(_condition_row(i, condition))
    return buffer.getvalue()


def _md_escape(text: str) -> str:
    return text.replace("|", "\\|")


def _md_table(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |",
             "| " + " | ".join("---" for _ in header) + " |"]
    for row in rows:
        lines.append("| " + " | ".join(_md_escape(str(c)) for c in row) + " |")
    return "\n".join(lines) + "\n"


def catalog_to_markdown(catalog: Catalog) -> str:
    assessed = any(c.assessment is not None for c in catalog.conditions)
    header = list(CSV_HEADER) + ["Degree"]
    if assessed:
        header += ["Rating", "Priority"]
    rows = []
    for i, condition in enumerate(catalog.conditions, start=1):
        row = list(_condition_row(i, condition))
        row.append(render_degree(condition.degree, style="figure"))
        if assessed:
            row.append(condition.rating_label())
            row.append("" if condition.priority is None else str(condition.priority))
        rows.append(row)
    title = f"# Triggering conditions — {catalog.vehicle}" if catalog.vehicle \
        else "# Triggering conditions"
    parts = [title, "",
             f"{len(catalog.conditions)} conditions "
             f"(worst-case threshold {catalog.threshold}, "
             f"bundle limit {catalog.bundle_limit}).", "",
             _md_table(header, rows)]
    if catalog.positives:
        parts += ["", f"{len(catalog.positives)} beneficial cells were recorded "
                      f"for diagnostics and not synthesized."]
    if catalog.warnings:
        parts += ["", "## Warnings", ""]
        parts += [f"- {w}" for w in catalog.warnings]
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# Generation-matrix views
# ---------------------------------------------------------------------------

def matrix_to_doc(matrix: GenerationMatrix) -> dict:
    width = len(matrix.columns)
    grid = [[cell.degree for cell in matrix.cells[i * width:(i + 1) * width]]
            for i in range(len(matrix.rows))]
    return {
        "schema": MATRIX_DOC_SCHEMA,
        "sensor": matrix.sensor,
        "source": matrix.bundle.source,
        "relationships": matrix.bundle.signature(),
        "rows": [{"concept": concept, "properties": list(props)}
                 for concept, props in matrix.rows],
        "columns": [{"stage": stage, "stage_property": quality}
                    for stage, quality in matrix.columns],
        "degrees": grid,
    }


def _row_label(matrix: GenerationMatrix, row: tuple[str, tuple[str, ...]]) -> str:
    concept, props = row
    label = "/".join(display_name(p) for p in props)
    if concept != matrix.bundle.source:
        label += f" ({display_name(concept)})"
    return label


def _column_label(stage: str, quality: str) -> str:
    return f"{display_name(stage)}: {display_name(quality)}"


def matrix_to_csv(matrix: GenerationMatrix) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["Property"] + [_column_label(s, q) for s, q in matrix.columns])
    width = len(matrix.columns)
    for i, row in enumerate(matrix.rows):
        cells = matrix.cells[i * width:(i + 1) * width]
        writer.writerow([_row_label(matrix, row)]
                        + [render_degree(c.degree, style="ascii") for c in cells])
    return buffer.getvalue()


def matrix_to_markdown(matrix: GenerationMatrix) -> str:
    header = ["Property"] + [_column_label(s, q) for s, q in matrix.columns]
    width = len(matrix.columns)
    rows = []
    for i, row in enumerate(matrix.rows):
        cells = matrix.cells[i * width:(i + 1) * width]
        rows.append([_row_label(matrix, row)]
                    + [render_degree(c.degree, style="figure") for c in cells])
    relationships = matrix.bundle.signature() or "none"
    title = (f"# Generation matrix — {display_name(matrix.bundle.source)} "
             f"on {matrix.sensor}")
    return "\n".join([title, "", f"Relationships: {relationships}", "",
                      _md_table(header, rows)])


# ---------------------------------------------------------------------------
# Test-case documents
# ---------------------------------------------------------------------------

def cases_to_doc(cases: Sequence[TestCase], warnings: Sequence[str] = ()) -> dict:
    raw_cases = []
    for case in cases:
        raw_cases.append({
            "id": case.id,
            "condition": case.condition_id,
            "event": case.event_id,
            "sensor": case.sensor,
            "situation": case.situation,
            "trigger": case.trigger,
            "behavior": case.behavior,
            "fail_criterion": case.fail_criterion,
            "pass_criterion": case.pass_criterion,
            "odd": list(case.odd),
        })
    return {"schema": CASES_SCHEMA, "cases": raw_cases, "warnings": list(warnings)}


def cases_from_doc(doc: dict, *, source: str = "<document>") -> tuple[TestCase, ...]:
    check_schema(doc, CASES_SCHEMA, source=source)
    sink = DiagnosticSink(file=source)
    cases: list[TestCase] = []
    raw_cases = doc.get("cases", [])
    if not isinstance(raw_cases, list):
        sink.error(E.INVALID_VALUE, "'cases' must be a list")
        raw_cases = []
    seen: set[str] = set()
    text_fields = ("situation", "trigger", "behavior",
                   "fail_criterion", "pass_criterion")
    for i, raw in enumerate(raw_cases):
        where = f"cases[{i}]"
        if not isinstance(raw, dict):
            sink.error(E.INVALID_VALUE, f"{where} must be a mapping")
            continue
        ok = True
        for field in ("id", "condition", "event", "sensor") + text_fields:
            if not isinstance(raw.get(field), str):
                sink.error(E.MISSING_FIELD, f"{where}: '{field}' is required")
                ok = False
        if not ok:
            continue
        if raw["id"] in seen:
            sink.error(E.DUPLICATE_NAME, f"{where}: duplicate case id {raw['id']!r}")
            continue
        seen.add(raw["id"])
        cases.append(TestCase(
            id=raw["id"], condition_id=raw["condition"], event_id=raw["event"],
            sensor=raw["sensor"], situation=raw["situation"],
            trigger=raw["trigger"], behavior=raw["behavior"],
            fail_criterion=raw["fail_criterion"],
            pass_criterion=raw["pass_criterion"],
            odd=tuple(str(t) for t in raw.get("odd", []))))
    sink.raise_if_errors()
    return tuple(cases)


def read_cases(path: str | Path) -> tuple[TestCase, ...]:
    return cases_from_doc(read_document(path), source=str(path))


def serialize_cases(cases: Sequence[TestCase], warnings: Sequence[str] = (), *,
                    fmt: str = "json") -> str:
    return dump_document(cases_to_doc(cases, warnings), fmt=fmt)


def cases_to_markdown(cases: Sequence[TestCase]) -> str:
    header = ["No.", "Case", "Sensor", "Event", "Triggering condition",
              "Fail criterion", "Pass criterion"]
    rows = [(str(i), case.id, case.sensor, case.event_id, case.trigger,
             case.fail_criterion, case.pass_criterion)
            for i, case in enumerate(cases, start=1)]
    return "\n".join([f"# Test cases ({len(cases)})", "", _md_table(header, rows)])


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def _result_counts(results: Sequence[Mapping]) -> dict[str, int]:
    counts = {"pass": 0, "marginal": 0, "fail": 0}
    for record in results:
        outcome = record.get("outcome")
        if outcome in counts:
            counts[outcome] += 1
    return counts


def report_to_doc(catalog: Catalog, cases: Sequence[TestCase] = (),
                  results: Sequence[Mapping] = ()) -> dict:
    ranked = rank(catalog.conditions)
    return {
        "schema": "assessment-report@1",
        "vehicle": catalog.vehicle,
        "totals": {
            "conditions": len(catalog.conditions),
            "by_sensor": catalog.count_by_sensor(),
            "unrated": sum(1 for c in ranked if c.assessment is None),
            "test_cases": len(cases),
        },
        "ranking": [{
            "id": c.id,
            "description": c.description,
            "rating": c.rating_label(),
            "priority": c.priority,
        } for c in ranked],
        "results": _result_counts(results),
    }


def render_report(catalog: Catalog, cases: Sequence[TestCase] = (),
                  results: Sequence[Mapping] = ()) -> str:
    ranked = rank(catalog.conditions)
    unrated = sum(1 for c in ranked if c.assessment is None)
    by_sensor = ", ".join(f"{sensor}: {count}"
                          for sensor, count in sorted(catalog.count_by_sensor().items()))
    parts = [f"# Assessment report — {catalog.vehicle}" if catalog.vehicle
             else "# Assessment report", "",
             f"{len(catalog.conditions)} triggering conditions ({by_sensor}).",
             f"{len(cases)} composed test cases; {unrated} conditions unrated.", ""]
    header = ["Rank", "Condition", "Sensor", "Triggering condition",
              "Rating", "Priority"]
    rows = []
    for i, condition in enumerate(ranked, start=1):
        rows.append((str(i), condition.id, condition.sensor, condition.description,
                     condition.rating_label(),
                     "" if condition.priority is None else str(condition.priority)))
    parts.append(_md_table(header, rows))
    if results:
        counts = _result_counts(results)
        parts += ["", "## Executed results", "",
                  f"pass: {counts['pass']}, marginal: {counts['marginal']}, "
                  f"fail: {counts['fail']}"]
        fails = [r for r in results if r.get("outcome") == "fail"]
        if fails:
            parts += ["", _md_table(["Test case", "Behavior"],
                                    [(r.get("test_case", "?"), r.get("behavior", "?"))
                                     for r in fails])]
    return "\n".join(parts) + "\n"
