"""Project configuration and run manifests.

A project config points at the input documents (ontology, perception system,
compatibility matrix, effect knowledge, templates, events, compose policy)
and fixes the generation parameters. Input paths resolve relative to the
config file's directory; the output directory resolves relative to the
working directory at run time.

Every CLI run that writes outputs also writes a run manifest recording input
and output digests, the parameters used, result totals and timing. Apart
from the timing block, rerunning with unchanged inputs reproduces the
manifest byte for byte.
"""
from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass
from pathlib import Path

from . import errors as E
from .docio import check_schema, dump_document, read_document
from .errors import DiagnosticSink, ToolkitError
from .generation import EffectKnowledgeBase, cross_validate_effects, effects_from_doc
from .ontology import SourceOntology, ontology_from_doc
from .perception import SensorSuite, cross_validate_suite, suite_from_doc
from .relationships import CompatibilityMatrix, cross_validate_matrix, matrix_from_doc
from .templates import TemplateSet, cross_validate_templates, templates_from_doc
from .testcases import (
    ComposePolicy,
    HazardousEvent,
    cross_validate_events,
    events_from_doc,
    policy_from_doc,
)

__all__ = [
    "CONFIG_SCHEMA",
    "MANIFEST_SCHEMA",
    "ENV_CONFIG",
    "TOOL_NAME",
    "TOOL_VERSION",
    "ProjectConfig",
    "ProjectInputs",
    "read_config",
    "config_from_doc",
    "resolve_config_path",
    "load_inputs",
    "sha256_file",
    "build_manifest",
    "write_manifest",
    "strip_timing",
]

CONFIG_SCHEMA = "project-config@1"
MANIFEST_SCHEMA = "run-manifest@1"
ENV_CONFIG = "TRIGKIT_CONFIG"
TOOL_NAME = "trigkit"
TOOL_VERSION = "0.1.0"

_REQUIRED_INPUTS = ("ontology", "system", "matrix", "effects", "templates")
_OPTIONAL_INPUTS = ("events", "policy")


@dataclass(frozen=True)
class ProjectConfig:
    """Resolved input paths plus generation parameters."""

    path: Path  # the config file itself
    ontology: Path
    system: Path
    matrix: Path
    effects: Path
    templates: Path
    events: Path | None = None
    policy: Path | None = None
    output_dir: Path = Path("out")
    threshold: int = 2
    bundle_limit: int = 2
    expected_total: int | None = None

    def input_paths(self) -> list[Path]:
        paths = [self.ontology, self.system, self.matrix, self.effects,
                 self.templates]
        for optional in (self.events, self.policy):
            if optional is not None:
                paths.append(optional)
        return paths


def resolve_config_path(cli_value: str | None) -> Path:
    """CLI flag wins over the environment variable; neither set is an error."""
    if cli_value:
        return Path(cli_value)
    env_value = os.environ.get(ENV_CONFIG)
    if env_value:
        return Path(env_value)
    raise ToolkitError(E.MISSING_INPUT,
                       f"no project config given; pass --config or set {ENV_CONFIG}")


def read_config(path: str | Path) -> ProjectConfig:
    path = Path(path)
    doc = read_document(path)
    return config_from_doc(doc, base_dir=path.parent, source=str(path), path=path)


def config_from_doc(doc: dict, *, base_dir: Path, source: str = "<document>",
                    path: Path | None = None) -> ProjectConfig:
    if not doc:
        raise ToolkitError(E.EMPTY_CONFIG, "project config is empty", file=source)
    check_schema(doc, CONFIG_SCHEMA, source=source)
    sink = DiagnosticSink(file=source)

    inputs = doc.get("inputs")
    if not isinstance(inputs, dict):
        sink.error(E.MISSING_FIELD, "'inputs' must be a mapping")
        inputs = {}
    resolved: dict[str, Path | None] = {}
    for field in _REQUIRED_INPUTS + _OPTIONAL_INPUTS:
        value = inputs.get(field)
        if value is None:
            if field in _REQUIRED_INPUTS:
                sink.error(E.MISSING_FIELD, f"inputs.{field} is required")
            resolved[field] = None
        elif not isinstance(value, str) or not value:
            sink.error(E.INVALID_VALUE, f"inputs.{field} must be a path string")
            resolved[field] = None
        else:
            resolved[field] = (base_dir / value).resolve()

    parameters = doc.get("parameters", {})
    if not isinstance(parameters, dict):
        sink.error(E.INVALID_VALUE, "'parameters' must be a mapping")
        parameters = {}
    threshold = parameters.get("threshold", 2)
    if threshold not in (1, 2, 3):
        sink.error(E.INVALID_VALUE, f"parameters.threshold must be 1, 2 or 3, "
                                    f"got {threshold!r}")
        threshold = 2
    bundle_limit = parameters.get("bundle_limit", 2)
    if not isinstance(bundle_limit, int) or isinstance(bundle_limit, bool) \
            or bundle_limit < 0:
        sink.error(E.INVALID_VALUE, "parameters.bundle_limit must be a "
                                    "non-negative integer")
        bundle_limit = 2
    expected_total = parameters.get("expected_total")
    if expected_total is not None and (not isinstance(expected_total, int)
                                       or isinstance(expected_total, bool)
                                       or expected_total < 0):
        sink.error(E.INVALID_VALUE, "parameters.expected_total must be a "
                                    "non-negative integer")
        expected_total = None

    output_dir = doc.get("output_dir", "out")
    if not isinstance(output_dir, str) or not output_dir:
        sink.error(E.INVALID_VALUE, "'output_dir' must be a path string")
        output_dir = "out"

    sink.raise_if_errors()
    return ProjectConfig(
        path=path if path is not None else base_dir / "<config>",
        ontology=resolved["ontology"], system=resolved["system"],
        matrix=resolved["matrix"], effects=resolved["effects"],
        templates=resolved["templates"], events=resolved["events"],
        policy=resolved["policy"], output_dir=Path(output_dir),
        threshold=threshold, bundle_limit=bundle_limit,
        expected_total=expected_total)


# ---------------------------------------------------------------------------
# Input loading and cross-validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProjectInputs:
    ontology: SourceOntology
    suite: SensorSuite
    matrix: CompatibilityMatrix
    effects: EffectKnowledgeBase
    templates: TemplateSet
    events: tuple[HazardousEvent, ...] | None = None
    policy: ComposePolicy | None = None
    warnings: tuple[str, ...] = ()


def _read_required(path: Path | None, label: str):
    if path is None:
        raise ToolkitError(E.MISSING_INPUT, f"config names no {label} input")
    if not path.exists():
        raise ToolkitError(E.MISSING_INPUT, f"{label} input {path} does not exist")
    return read_document(path)


def load_inputs(config: ProjectConfig, *, need_events: bool = False) -> ProjectInputs:
    """Load and cross-validate every document the config points at.

    Structural errors in any document raise immediately; cross-document
    dangling references are collected and raised together.
    """
    ontology = ontology_from_doc(_read_required(config.ontology, "ontology"),
                                 source=str(config.ontology))
    suite = suite_from_doc(_read_required(config.system, "system"),
                           source=str(config.system))
    matrix = matrix_from_doc(_read_required(config.matrix, "matrix"),
                             source=str(config.matrix))
    effects = effects_from_doc(_read_required(config.effects, "effects"),
                               source=str(config.effects))
    templates = templates_from_doc(_read_required(config.templates, "templates"),
                                   source=str(config.templates))
    events = None
    policy = None
    if need_events or config.events is not None:
        events = events_from_doc(_read_required(config.events, "events"),
                                 source=str(config.events))
    if need_events or config.policy is not None:
        policy = policy_from_doc(_read_required(config.policy, "policy"),
                                 source=str(config.policy))

    sink = DiagnosticSink(file=str(config.path))
    cross_validate_suite(suite, ontology, sink)
    cross_validate_matrix(matrix, ontology, sink)
    cross_validate_effects(effects, ontology, sink)
    cross_validate_templates(templates, ontology, sink)
    if events is not None:
        cross_validate_events(events, ontology, sink)
    sink.raise_if_errors()
    return ProjectInputs(ontology=ontology, suite=suite, matrix=matrix,
                         effects=effects, templates=templates, events=events,
                         policy=policy,
                         warnings=tuple(str(w) for w in sink.warnings))


# ---------------------------------------------------------------------------
# Run manifests
# ---------------------------------------------------------------------------

def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def build_manifest(command: str, parameters: dict, inputs: list[Path],
                   outputs: list[Path], totals: dict, warnings: int,
                   seconds: float) -> dict:
    return {
        "schema": MANIFEST_SCHEMA,
        "tool": {"name": TOOL_NAME, "version": TOOL_VERSION},
        "command": command,
        "parameters": parameters,
        "inputs": [{"path": str(p), "sha256": sha256_file(p)} for p in inputs],
        "outputs": [{"path": str(p), "sha256": sha256_file(p)} for p in outputs],
        "totals": totals,
        "warnings": warnings,
        "timing": {"seconds": round(seconds, 6)},
    }


def write_manifest(doc: dict, path: str | Path) -> None:
    Path(path).write_text(dump_document(doc, fmt="json"), encoding="utf-8")


def strip_timing(doc: dict) -> dict:
    """Manifest comparison helper: everything but the timing block."""
    return {key: value for key, value in doc.items() if key != "timing"}
