"""Identity tracing over categorical populations.

Quantifies identity uncertainty in bits, finds core identification sets,
and recommends which attribute to acquire next so the candidate search
space shrinks fastest. Ships a library, a CLI, a benchmark harness, and
an HTTP service for interactive sessions.
"""

__version__ = "0.1.0"

from .entropy import (
    ObservationSet,
    attribute_discriminability,
    avg_conditional_discriminability,
    conditional_discriminability,
    conditional_identity_entropy,
    identity_entropy,
    set_discriminability,
)
from .coreset import (
    CoreSetReport,
    enumerate_core_sets,
    greedy_core_set,
    is_core_identification_set,
    is_identification_set,
)
from .errors import (
    CsvFormatError,
    EmptySearchSpaceError,
    GenerationError,
    IdTraceError,
    InconsistentObservationsError,
    InvalidSetError,
    NotDistinguishableError,
    ProbabilityZeroError,
    ResourceLimitError,
    UndefinedAttributeError,
    UsageError,
    ValidationError,
)
from .generator import GeneratorConfig, default_benchmark_config, generate_universe
from .tracing import (
    Recommendation,
    SessionState,
    SessionStatus,
    TraceResult,
    observe,
    recommend_next,
    run_random_baseline,
    run_titf,
    start_session,
    whatif,
)
from .universe import (
    MISSING,
    Attribute,
    AttributeSchema,
    CandidateSet,
    Observation,
    Universe,
    filter_candidates,
    load_csv,
    load_csv_text,
    load_dataset,
    load_index,
    save_csv,
    save_index,
    value_counts,
)

__all__ = [
    "__version__",
    "MISSING",
    "Attribute",
    "AttributeSchema",
    "CandidateSet",
    "CoreSetReport",
    "CsvFormatError",
    "EmptySearchSpaceError",
    "GenerationError",
    "GeneratorConfig",
    "IdTraceError",
    "InconsistentObservationsError",
    "InvalidSetError",
    "NotDistinguishableError",
    "Observation",
    "ObservationSet",
    "ProbabilityZeroError",
    "Recommendation",
    "ResourceLimitError",
    "SessionState",
    "SessionStatus",
    "TraceResult",
    "UndefinedAttributeError",
    "Universe",
    "UsageError",
    "ValidationError",
    "attribute_discriminability",
    "avg_conditional_discriminability",
    "conditional_discriminability",
    "conditional_identity_entropy",
    "default_benchmark_config",
    "enumerate_core_sets",
    "filter_candidates",
    "generate_universe",
    "greedy_core_set",
    "identity_entropy",
    "is_core_identification_set",
    "is_identification_set",
    "load_csv",
    "load_csv_text",
    "load_dataset",
    "load_index",
    "observe",
    "recommend_next",
    "run_random_baseline",
    "run_titf",
    "save_csv",
    "save_index",
    "set_discriminability",
    "start_session",
    "value_counts",
    "whatif",
]
