"""Compiling a natex into a regular-expression matcher.

Compilation is dynamic: it happens per utterance, because function calls are
evaluated at compile time and set-returning functions are filtered down to
the elements actually present in the input before entering the pattern.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from typing import Mapping

from patter import generation
from patter.diagnostics import Code, NatexError, Span, error
from patter.knowledge import (
    Bool,
    CallContext,
    FunctionRegistry,
    FunctionResult,
    Ontology,
    StringSet,
    Text,
)
from patter.natex import Kind, Node
from patter.textnorm import normalize

NEVER = "(?!)"  # a pattern that cannot match anything


@dataclass
class CallRecord:
    """One function evaluated while compiling, with its filtered elements."""

    name: str
    result: FunctionResult
    filtered: tuple[str, ...] | None = None  # only for set results


@dataclass
class MatchResult:
    matched: bool
    bindings: dict[str, str] = field(default_factory=dict)
    span: tuple[int, int] | None = None
    # staged #ASSIGN writes; committed by the caller on success
    pending: dict[str, str] = field(default_factory=dict)


@dataclass
class CompiledMatcher:
    pattern: str
    ast: Node
    calls: list[CallRecord]
    utterance: str
    pending: dict[str, str]
    # regex group name -> variable name (group names must be identifiers)
    groups: dict[str, str] = field(default_factory=dict)

    def run(self) -> MatchResult:
        m = re.fullmatch(self.pattern, self.utterance)
        if m is None:
            return MatchResult(False)
        bindings = {}
        for group, variable in self.groups.items():
            value = m.group(group)
            if value is not None:
                bindings[variable] = normalize(value)
        return MatchResult(True, bindings, (m.start(), m.end()), dict(self.pending))


def _word_bounded(phrase: str) -> str:
    return rf"\b(?:{re.escape(phrase)})\b"


class _Compiler:
    def __init__(
        self,
        bindings: Mapping[str, str],
        registry: FunctionRegistry | None,
        utterance: str | None,
        rng: random.Random | None,
        ontology: Ontology | None,
    ):
        self.registry = registry
        self.utterance = utterance
        self.calls: list[CallRecord] = []
        self.groups: dict[str, str] = {}
        self.ctx = CallContext(
            table=bindings,
            pending={},
            utterance=utterance,
            rng=rng or random.Random(0),
            ontology=ontology,
        )
        if registry is not None:
            self.ctx.generate_value = self._generate_value

    def _generate_value(self, node: Node) -> str:
        result = generation.generate(
            node, self.ctx.table, self.registry, self.ctx.rng,
            self.ctx.ontology, self.utterance,
        )
        self.ctx.pending.update(result.pending)
        return result.text

    def top(self, ast: Node) -> str:
        body = self.rx(ast)
        if body == "":
            # a purely zero-width pattern constrains nothing but the predicates
            return ".*"
        if ast.kind is Kind.RIGID:
            return "^" + body + "$"
        return body

    def rx(self, node: Node) -> str:
        k = node.kind
        if k is Kind.LITERAL:
            token = normalize(node.text)
            return _word_bounded(token) if token else ""
        if k is Kind.VARIABLE:
            value = self.ctx.lookup(node.text)
            if value is None:
                raise NatexError(
                    error(Code.UNBOUND_VARIABLE,
                          f"reference to a non-existing variable: ${node.text}",
                          node.span or Span(0, 0))
                )
            token = normalize(value)
            return _word_bounded(token) if token else ""
        if k is Kind.ASSIGNMENT:
            return self._group(node.text, self.rx(node.children[0]))
        if k is Kind.DISJUNCTION:
            return "(?:" + "|".join(self.rx(c) for c in node.children) + ")"
        if k is Kind.CALL:
            return self._call(node)
        if k is Kind.FLEX:
            parts = [p for p in (self.rx(c) for c in node.children) if p != ""]
            if not parts:
                return ""
            return ".*?" + "".join(p + ".*?" for p in parts)
        # RIGID
        parts = [p for p in (self.rx(c) for c in node.children) if p != ""]
        return " ".join(parts)

    def _group(self, variable: str, body: str) -> str:
        name = variable
        if not name.isidentifier() or name in self.groups:
            name = f"g{len(self.groups)}"
        self.groups[name] = variable
        return f"(?P<{name}>{body})"

    def _call(self, node: Node) -> str:
        if self.registry is None:
            raise ValueError(
                "function calls require dynamic compilation against an utterance"
            )
        result = self.registry.invoke(node.text, node.children, self.ctx, node.span)
        if isinstance(result, Text):
            raise NatexError(
                error(Code.TYPE_MISMATCH,
                      f"#{node.text} returned text in matcher position",
                      node.span or Span(0, 0))
            )
        if isinstance(result, Bool):
            self.calls.append(CallRecord(node.text, result))
            return "" if result.value else NEVER
        assert isinstance(result, StringSet)
        elements = sorted({e for e in map(normalize, result.values) if e})
        if self.utterance is not None:
            elements = [
                e for e in elements if re.search(_word_bounded(e), self.utterance)
            ]
        self.calls.append(CallRecord(node.text, result, tuple(elements)))
        if not elements:
            return NEVER
        return "(?:" + "|".join(_word_bounded(e) for e in elements) + ")"


def to_reference_regex(ast: Node, bindings: Mapping[str, str] | None = None) -> str:
    """Static translation for function-free patterns; the debugging surface."""
    compiler = _Compiler(bindings or {}, None, None, None, None)
    return compiler.top(ast)


def compile_matcher(
    ast: Node,
    bindings: Mapping[str, str] | None = None,
    registry: FunctionRegistry | None = None,
    utterance: str = "",
    rng: random.Random | None = None,
    ontology: Ontology | None = None,
) -> CompiledMatcher:
    """Compile against one normalized utterance, evaluating function calls."""
    compiler = _Compiler(bindings or {}, registry or FunctionRegistry(), utterance, rng, ontology)
    pattern = compiler.top(ast)
    re.compile(pattern)  # the pattern must always be a clean host regex
    return CompiledMatcher(
        pattern, ast, compiler.calls, utterance, compiler.ctx.pending, compiler.groups
    )


def match(
    ast: Node,
    bindings: Mapping[str, str] | None = None,
    registry: FunctionRegistry | None = None,
    utterance: str = "",
    rng: random.Random | None = None,
    ontology: Ontology | None = None,
) -> MatchResult:
    """Normalize, compile, and run; bindings are returned, never committed."""
    normalized = normalize(utterance)
    compiled = compile_matcher(ast, bindings, registry, normalized, rng, ontology)
    return compiled.run()
