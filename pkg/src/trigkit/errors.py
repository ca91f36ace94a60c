"""Error codes and exception types shared across the toolkit.

Every failure surfaced to callers carries a stable, machine-readable code so
scripts and the CLI can branch on it without parsing prose. Loaders that can
report several problems at once attach a list of :class:`Diagnostic` records.
"""
from __future__ import annotations

from dataclasses import dataclass, field

__all__ = [
    "Diagnostic",
    "ToolkitError",
    "DocumentError",
    "format_diagnostic",
]

# ---------------------------------------------------------------------------
# Stable error codes
# ---------------------------------------------------------------------------
# Document and schema level
SYNTAX_ERROR = "SyntaxError"
UNSUPPORTED_SCHEMA_VERSION = "UnsupportedSchemaVersion"
WRONG_SCHEMA = "WrongSchema"
MISSING_FIELD = "MissingField"
INVALID_VALUE = "InvalidValue"
INVALID_IDENTIFIER = "InvalidIdentifier"
# Ontology
UNKNOWN_KIND = "UnknownKind"
UNKNOWN_CATEGORY = "UnknownCategory"
ILLEGAL_CATEGORY_FOR_KIND = "IllegalCategoryForKind"
DUPLICATE_NAME = "DuplicateName"
DANGLING_PARENT = "DanglingParent"
KIND_MISMATCH = "KindMismatch"
TAXONOMY_CYCLE = "TaxonomyCycle"
RESERVED_NAME = "ReservedName"
UNKNOWN_CONCEPT = "UnknownConcept"
UNKNOWN_PROPERTY = "UnknownProperty"
# Perception model
UNKNOWN_STAGE = "UnknownStage"
UNKNOWN_STAGE_PROPERTY = "UnknownStageProperty"
ILLEGAL_STAGE_FOR_CLASS = "IllegalStageForClass"
EMPTY_STAGES = "EmptyStages"
UNKNOWN_SENSOR_CLASS = "UnknownSensorClass"
# Relationships
UNKNOWN_RELATIONSHIP = "UnknownRelationship"
INCOMPATIBLE_PAIR = "IncompatiblePair"
MIXED_FOCAL = "MixedFocal"
BUNDLE_TOO_LARGE = "BundleTooLarge"
SELF_RELATION = "SelfRelation"
# Generation and assessment
UNKNOWN_RATING = "UnknownRating"
MISSING_TEMPLATE = "MissingTemplate"
# Test-case composition
UNKNOWN_SENSOR = "UnknownSensor"
NO_COMPATIBLE_EVENT = "NoCompatibleEvent"
UNKNOWN_EVENT = "UnknownEvent"
UNKNOWN_TEST_CASE = "UnknownTestCase"
UNKNOWN_CONDITION = "UnknownCondition"
# CLI / configuration
USAGE_ERROR = "UsageError"
EMPTY_CONFIG = "EmptyConfig"
MISSING_INPUT = "MissingInput"
UNKNOWN_FORMAT = "UnknownFormat"


@dataclass(frozen=True)
class Diagnostic:
    """One validation finding, pinned to a source location when known."""

    severity: str  # "error" or "warning"
    code: str
    message: str
    file: str | None = None
    line: int | None = None

    def __str__(self) -> str:  # pragma: no cover - convenience
        return format_diagnostic(self)


def format_diagnostic(diag: Diagnostic) -> str:
    loc = ""
    if diag.file:
        loc = diag.file if diag.line is None else f"{diag.file}:{diag.line}"
        loc = f" {loc}:"
    return f"{diag.severity} {diag.code}{loc} {diag.message}"


class ToolkitError(Exception):
    """Base error. ``code`` is stable and machine readable."""

    def __init__(self, code: str, message: str, *, file: str | None = None,
                 line: int | None = None):
        super().__init__(message)
        self.code = code
        self.file = file
        self.line = line

    def __str__(self) -> str:
        loc = ""
        if self.file:
            loc = self.file if self.line is None else f"{self.file}:{self.line}"
            loc = f" [{loc}]"
        return f"{self.code}: {super().__str__()}{loc}"


class DocumentError(ToolkitError):
    """A document failed to parse or validate.

    Carries every diagnostic collected before the loader gave up; ``code`` is
    the code of the first error-severity diagnostic.
    """

    def __init__(self, diagnostics: list[Diagnostic]):
        errors = [d for d in diagnostics if d.severity == "error"]
        first = errors[0] if errors else diagnostics[0]
        super().__init__(first.code, first.message, file=first.file, line=first.line)
        self.diagnostics = list(diagnostics)


@dataclass
class DiagnosticSink:
    """Accumulates findings while a loader walks a document."""

    file: str | None = None
    items: list[Diagnostic] = field(default_factory=list)

    def error(self, code: str, message: str, *, line: int | None = None) -> None:
        self.items.append(Diagnostic("error", code, message, self.file, line))

    def warning(self, code: str, message: str, *, line: int | None = None) -> None:
        self.items.append(Diagnostic("warning", code, message, self.file, line))

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.items if d.severity == "error"]

    @property
    def warnings(self) -> list[Diagnostic]:
        return [d for d in self.items if d.severity == "warning"]

    def raise_if_errors(self) -> None:
        if self.errors:
            raise DocumentError(self.items)
