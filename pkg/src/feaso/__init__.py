"""Expert-system shell and knowledge base for screening proposed
knowledge-based systems: certainty-factor inference, a diffable knowledge
base format, consultation sessions with how/why explanations, reports,
a CLI and an HTTP API.
"""

from .engine import (
    Answer,
    Comparison,
    Conjunction,
    Derivation,
    Disjunction,
    Fact,
    Membership,
    Negation,
    ProofNode,
    Rule,
    combine_parallel,
    evaluate_condition,
    replay_proof,
)
from .kb import CaseFixture, InvalidAnswerError, fixture, fixture_names, load_bundled_kb
from .kbdsl import (
    AttributeDecl,
    Diagnostic,
    KnowledgeBase,
    KnowledgeBaseError,
    load_kb,
    parse_kb,
    serialize_kb,
    validate_kb,
)
from .session import Assessment, Session, WhatIf, run_assessment

__version__ = "0.1.0"

__all__ = [
    "Answer",
    "Assessment",
    "AttributeDecl",
    "CaseFixture",
    "Comparison",
    "Conjunction",
    "Derivation",
    "Diagnostic",
    "Disjunction",
    "Fact",
    "InvalidAnswerError",
    "KnowledgeBase",
    "KnowledgeBaseError",
    "Membership",
    "Negation",
    "ProofNode",
    "Rule",
    "Session",
    "WhatIf",
    "combine_parallel",
    "evaluate_condition",
    "fixture",
    "fixture_names",
    "load_bundled_kb",
    "load_kb",
    "parse_kb",
    "replay_proof",
    "run_assessment",
    "serialize_kb",
    "validate_kb",
    "__version__",
]
