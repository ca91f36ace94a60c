"""Document input/output.

Every data set the toolkit consumes or emits exists in two interchangeable
encodings with identical field names: a human-editable YAML form and a JSON
form for machine interchange. Each document carries an explicit ``schema``
string (``family@version``); loaders reject unknown families and versions so
stale files fail loudly instead of half-parsing.

Syntax errors are reported with their line/column. Canonical dumps are fully
deterministic: fixed key order, sorted collections (the per-family
serializers sort before calling in here), UTF-8, ``\\n`` line ends.
"""
from __future__ import annotations

import json
from pathlib import Path

import yaml

from .errors import (
    SYNTAX_ERROR,
    UNSUPPORTED_SCHEMA_VERSION,
    WRONG_SCHEMA,
    Diagnostic,
    DocumentError,
)

__all__ = [
    "parse_document",
    "read_document",
    "dump_document",
    "write_document",
    "detect_format",
    "check_schema",
]

FORMATS = ("yaml", "json")


def detect_format(path: str | Path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix in (".yaml", ".yml"):
        return "yaml"
    if suffix == ".json":
        return "json"
    raise DocumentError([
        Diagnostic("error", SYNTAX_ERROR,
                   f"cannot infer document format from suffix {suffix!r}",
                   str(path)),
    ])


def parse_document(text: str, *, fmt: str = "yaml", source: str = "<document>") -> dict:
    """Parse ``text`` into a mapping, reporting syntax errors with positions."""
    if fmt == "yaml":
        try:
            doc = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            line = col = None
            mark = getattr(exc, "problem_mark", None)
            if mark is not None:
                line, col = mark.line + 1, mark.column + 1
            problem = getattr(exc, "problem", None) or str(exc)
            msg = problem if col is None else f"{problem} (column {col})"
            raise DocumentError([
                Diagnostic("error", SYNTAX_ERROR, msg, source, line),
            ]) from exc
    elif fmt == "json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DocumentError([
                Diagnostic("error", SYNTAX_ERROR,
                           f"{exc.msg} (column {exc.colno})", source, exc.lineno),
            ]) from exc
    else:
        raise ValueError(f"unsupported format: {fmt!r}")
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise DocumentError([
            Diagnostic("error", WRONG_SCHEMA,
                       f"top level must be a mapping, got {type(doc).__name__}",
                       source),
        ])
    return doc


def read_document(path: str | Path) -> dict:
    p = Path(path)
    text = p.read_text(encoding="utf-8")
    return parse_document(text, fmt=detect_format(p), source=str(p))


def check_schema(doc: dict, expected: str, *, source: str = "<document>") -> None:
    """Validate the ``schema`` marker against ``expected`` (``family@version``)."""
    declared = doc.get("schema")
    if not isinstance(declared, str):
        raise DocumentError([
            Diagnostic("error", WRONG_SCHEMA,
                       f"missing 'schema' marker; expected {expected!r}", source),
        ])
    if declared == expected:
        return
    family = expected.split("@", 1)[0]
    if declared.split("@", 1)[0] == family:
        raise DocumentError([
            Diagnostic("error", UNSUPPORTED_SCHEMA_VERSION,
                       f"schema {declared!r} is not supported; this build reads {expected!r}",
                       source),
        ])
    raise DocumentError([
        Diagnostic("error", WRONG_SCHEMA,
                   f"expected schema {expected!r}, found {declared!r}", source),
    ])


# ---------------------------------------------------------------------------
# Canonical dumps
# ---------------------------------------------------------------------------

def dump_document(doc: dict, *, fmt: str = "yaml") -> str:
    if fmt == "yaml":
        text = yaml.safe_dump(
            doc,
            sort_keys=False,
            allow_unicode=True,
            default_flow_style=False,
            width=88,
        )
        return text if text.endswith("\n") else text + "\n"
    if fmt == "json":
        return json.dumps(doc, indent=2, ensure_ascii=False, sort_keys=False) + "\n"
    raise ValueError(f"unsupported format: {fmt!r}")


def write_document(doc: dict, path: str | Path) -> None:
    p = Path(path)
    p.write_text(dump_document(doc, fmt=detect_format(p)), encoding="utf-8")
