"""Ontology-driven terminology compilation and corpus mention mining.

The pipeline: parse an OWL/RDF-XML ontology, extract its leaf classes,
rank UMLS-style concept candidates for each leaf, curate the mapping by
hand, merge with project-defined concepts into an NLP-ready terminology,
then surface concept mentions from clinical-note and social-media corpora
and report per-concept frequencies across configurations.
"""

from .annotator import (
    CompiledMatcher,
    Mention,
    annotate_corpus,
    annotate_document,
)
from .corpus import Document, ReaderConfig, read_mimic_notes, read_reddit_posts
from .errors import AceminerError
from .lexicon import (
    Candidate,
    CandidateList,
    Lexicon,
    LexiconMatcher,
    load_lexicon,
    match_candidates,
    normalize,
    remote_match,
)
from .ontology import (
    OntologyClass,
    OntologyGraph,
    class_context,
    extract_leaf_nodes,
    parse_ontology,
)
from .report import ComparisonReport, FrequencyReport, aggregate, compare, emit
from .terminology import (
    CurationDecision,
    MappingCandidateSet,
    TermEntry,
    Terminology,
    apply_decisions,
    build_candidates,
    load_project_terms,
    load_terminology,
    merge_terminologies,
    save_terminology,
)

__version__ = "0.1.0"

__all__ = [
    "AceminerError",
    "Candidate",
    "CandidateList",
    "CompiledMatcher",
    "ComparisonReport",
    "CurationDecision",
    "Document",
    "FrequencyReport",
    "Lexicon",
    "LexiconMatcher",
    "MappingCandidateSet",
    "Mention",
    "OntologyClass",
    "OntologyGraph",
    "ReaderConfig",
    "TermEntry",
    "Terminology",
    "aggregate",
    "annotate_corpus",
    "annotate_document",
    "apply_decisions",
    "build_candidates",
    "class_context",
    "compare",
    "emit",
    "extract_leaf_nodes",
    "load_lexicon",
    "load_project_terms",
    "load_terminology",
    "match_candidates",
    "merge_terminologies",
    "normalize",
    "parse_ontology",
    "read_mimic_notes",
    "read_reddit_posts",
    "remote_match",
    "save_terminology",
]
