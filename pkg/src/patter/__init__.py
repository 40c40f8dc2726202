"""Dialogue development framework: pattern NLU compiled to regexes, a
state-machine dialogue manager, information-state update rules, and
composition of independent dialogue modules."""

from patter.composite import CompositeFlow, load_composite
from patter.diagnostics import Code, Diagnostic, NatexError, Severity, Span
from patter.engine import ChatEngine, ConversationEnded, TurnReport
from patter.flow import (
    DialogueFlow,
    Session,
    Transition,
    TurnOutcome,
    default_registry,
    load_flow,
    system_turn,
    user_turn,
)
from patter.generation import GeneratedUtterance, generate, productions
from patter.knowledge import (
    Bool,
    FunctionRegistry,
    Ontology,
    StringSet,
    Text,
    load_ontology,
    ont_query,
)
from patter.matching import (
    CompiledMatcher,
    MatchResult,
    compile_matcher,
    match,
    to_reference_regex,
)
from patter.natex import Kind, Node, format, parse, static_check
from patter.rules import UpdateRule, arbitrate, evaluate, parse_rules
from patter.textnorm import normalize

__all__ = [
    "Bool", "ChatEngine", "Code", "CompiledMatcher", "CompositeFlow",
    "ConversationEnded", "Diagnostic", "DialogueFlow", "FunctionRegistry",
    "GeneratedUtterance", "Kind", "MatchResult", "NatexError", "Node",
    "Ontology", "Session", "Severity", "Span", "StringSet", "Text",
    "Transition", "TurnOutcome", "TurnReport", "UpdateRule", "arbitrate",
    "compile_matcher", "default_registry", "evaluate", "format", "generate",
    "load_composite", "load_flow", "load_ontology", "match", "normalize",
    "ont_query", "parse", "parse_rules", "productions", "static_check",
    "system_turn", "to_reference_regex", "user_turn",
]
