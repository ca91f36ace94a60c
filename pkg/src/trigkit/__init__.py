"""Ontology-driven generation of perception triggering conditions.

The toolkit walks the insufficiency-analysis pipeline end to end: a source
ontology (interactive entities, disturbing entities, environmental
modifications) is crossed with a declared perception system through a
relationship compatibility matrix; worst-case effects are filtered from a
generation matrix; surviving cells are synthesized into a triggering
condition catalog, rated by exposure and criticality, and composed with
hazardous events into executable test cases.
"""
from .config import (
    CONFIG_SCHEMA,
    ENV_CONFIG,
    MANIFEST_SCHEMA,
    ProjectConfig,
    ProjectInputs,
    build_manifest,
    load_inputs,
    read_config,
    sha256_file,
    strip_timing,
    write_manifest,
)
from .docio import (
    check_schema,
    detect_format,
    dump_document,
    parse_document,
    read_document,
    write_document,
)
from .errors import Diagnostic, DiagnosticSink, DocumentError, ToolkitError
from .generation import (
    CRITICALITY_LEVELS,
    EFFECTS_SCHEMA,
    EXPOSURE_LEVELS,
    RATINGS_SCHEMA,
    AssessmentClass,
    EffectEntry,
    EffectKnowledgeBase,
    EffectRule,
    GenerationMatrix,
    RelationContext,
    TriggeringCondition,
    assess,
    build_matrix,
    condition_id,
    load_effects,
    load_ratings,
    parse_degree,
    positive_cells,
    rank,
    read_effects,
    read_ratings,
    render_degree,
    synthesize_conditions,
    worst_case_filter,
)
from .naming import display_name, display_property_key, is_identifier
from .ontology import (
    ENTITY_CATEGORIES,
    MODIFICATION_CATEGORIES,
    ONTOLOGY_SCHEMA,
    SENSOR_TARGET,
    ConceptKind,
    PropertyCategory,
    SourceConcept,
    SourceOntology,
    SourceProperty,
    is_kind_of,
    legal_categories,
    load_source_ontology,
    lookup_concept,
    read_source_ontology,
    serialize_source_ontology,
)
from .perception import (
    ALL_STAGES,
    STAGE_BY_NAME,
    SYSTEM_SCHEMA,
    ChainEvent,
    PerceptionStage,
    PerceptionSystemSpec,
    PropagationPattern,
    SensorClass,
    SensorSuite,
    StagePhase,
    affected_stages,
    load_sensor_suite,
    read_sensor_suite,
    recognition_stage_names,
    sensor_obstruction_stages,
    serialize_sensor_suite,
    stages_for_class,
    trace_propagation,
)
from .pipeline import Catalog, candidate_relations, enumerate_bundles, generate_catalog
from .relationships import (
    DEFAULT_PERTURBED,
    MATRIX_SCHEMA,
    RELATION_FORMS,
    CompatibilityMatrix,
    MatrixEntry,
    MatrixPattern,
    RelationForm,
    RelationshipBundle,
    RelationshipInstance,
    RelationshipKind,
    applicable_relationships,
    compose_bundle,
    instantiate_relationship,
    instantiate_sensor_relationship,
    load_compatibility_matrix,
    parse_relation_form,
    read_compatibility_matrix,
    sensor_applicable_relationships,
    serialize_compatibility_matrix,
)
from .render import (
    CASES_SCHEMA,
    CATALOG_SCHEMA,
    CSV_HEADER,
    catalog_from_doc,
    catalog_to_csv,
    catalog_to_doc,
    catalog_to_markdown,
    cases_from_doc,
    cases_to_doc,
    cases_to_markdown,
    matrix_to_csv,
    matrix_to_doc,
    matrix_to_markdown,
    read_catalog,
    render_report,
    report_to_doc,
    serialize_catalog,
    serialize_cases,
)
from .templates import (
    TEMPLATES_SCHEMA,
    TemplateSet,
    load_templates,
    read_templates,
    serialize_templates,
    split_signature,
)
from .testcases import (
    EVENTS_SCHEMA,
    OUTCOME_BY_BEHAVIOR,
    POLICY_SCHEMA,
    BehaviorClass,
    ComposePolicy,
    HazardousEvent,
    ResultsLedger,
    TestCase,
    compose,
    load_events,
    load_policy,
    outcome_record,
    read_events,
    read_policy,
    serialize_events,
    serialize_policy,
    test_case_id,
)

__version__ = "0.1.0"
