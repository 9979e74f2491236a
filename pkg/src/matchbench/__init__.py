"""Schema-matching curation and benchmarking: profiling, an adaptive matcher
ensemble, value mapping, live evaluation, and event-sourced sessions."""

from .engine import (
    BUILTIN_MATCHER_IDS,
    Candidate,
    EngineConfig,
    MatcherSpec,
    WeightVector,
    detect_easy_matches,
    generate_candidates,
    update_weights,
)
from .errors import (
    ConflictError,
    CsvParseError,
    EngineError,
    ExportError,
    MatchbenchError,
    NoFitError,
    PluginError,
    UnknownAttributeError,
    UnknownCandidateError,
    UnknownMatcherError,
    UnknownSessionError,
    ValidationError,
)
from .explain import Explanation, diagnose, explain_candidate, llm_narrative
from .ingest import (
    Attribute,
    Dataset,
    Ontology,
    Profile,
    infer_ontology,
    infer_type,
    load_csv,
    profile_attribute,
    profile_dataset,
)
from .metrics import (
    ConsensusReport,
    GroundTruth,
    MetricsReport,
    RankBreakdown,
    compute_metrics,
    consensus_sets,
    rank_breakdown,
)
from .session import ProvenanceEvent, Session, SessionStore, load_session_dir
from .valuemap import ValueMapping, fit_affine_transform, harmonize, propose_value_mapping

__version__ = "0.1.0"

__all__ = [
    "Attribute",
    "BUILTIN_MATCHER_IDS",
    "Candidate",
    "ConflictError",
    "ConsensusReport",
    "CsvParseError",
    "Dataset",
    "EngineConfig",
    "EngineError",
    "Explanation",
    "ExportError",
    "GroundTruth",
    "MatchbenchError",
    "MatcherSpec",
    "MetricsReport",
    "NoFitError",
    "Ontology",
    "PluginError",
    "Profile",
    "ProvenanceEvent",
    "RankBreakdown",
    "Session",
    "SessionStore",
    "UnknownAttributeError",
    "UnknownCandidateError",
    "UnknownMatcherError",
    "UnknownSessionError",
    "ValidationError",
    "ValueMapping",
    "WeightVector",
    "compute_metrics",
    "consensus_sets",
    "detect_easy_matches",
    "diagnose",
    "explain_candidate",
    "fit_affine_transform",
    "generate_candidates",
    "harmonize",
    "infer_ontology",
    "infer_type",
    "llm_narrative",
    "load_csv",
    "load_session_dir",
    "profile_attribute",
    "profile_dataset",
    "propose_value_mapping",
    "rank_breakdown",
    "update_weights",
    "__version__",
]
