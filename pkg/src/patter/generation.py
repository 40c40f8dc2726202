"""Evaluating a natex as a response generator.

Disjunctions become random choices (top-down, one production each), variable
references substitute their bound values, assignments record the chosen
production, and function calls contribute their returned text or a random
element of their returned set.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping

from patter.diagnostics import Code, NatexError, Span, error
from patter.knowledge import (
    Bool,
    CallContext,
    FunctionRegistry,
    Ontology,
    StringSet,
    Text,
)
from patter.natex import Kind, Node
from patter.textnorm import normalize


@dataclass
class GeneratedUtterance:
    text: str
    # variable name -> normalized chosen production, one entry per `$VAR=`
    assignments: dict[str, str] = field(default_factory=dict)
    # staged writes made by #ASSIGN during generation
    pending: dict[str, str] = field(default_factory=dict)


def _unbound(name: str, span: Span | None) -> NatexError:
    return NatexError(
        error(Code.UNBOUND_VARIABLE, f"reference to a non-existing variable: ${name}",
              span or Span(0, 0))
    )


def _adjacent(prev: Node | None, nxt: Node) -> bool:
    return (
        prev is not None
        and prev.span is not None
        and nxt.span is not None
        and nxt.span.start == prev.span.end
    )


class _Generator:
    def __init__(
        self,
        bindings: Mapping[str, str],
        registry: FunctionRegistry | None,
        rng: random.Random,
        ontology: Ontology | None,
        utterance: str | None,
    ):
        self.assignments: dict[str, str] = {}
        self.registry = registry
        self.rng = rng
        self.ctx = CallContext(
            table=bindings,
            pending={},
            utterance=utterance,
            rng=rng,
            ontology=ontology,
            generate_value=self.gen,
        )

    def lookup(self, name: str) -> str | None:
        if name in self.assignments:
            return self.assignments[name]
        return self.ctx.lookup(name)

    def gen(self, node: Node) -> str:
        k = node.kind
        if k is Kind.LITERAL:
            return node.text
        if k is Kind.VARIABLE:
            value = self.lookup(node.text)
            if value is None:
                raise _unbound(node.text, node.span)
            return value
        if k is Kind.ASSIGNMENT:
            surface = self.gen(node.children[0])
            self.assignments[node.text] = normalize(surface)
            return surface
        if k is Kind.DISJUNCTION:
            choice = node.children[self.rng.randrange(len(node.children))]
            return self.gen(choice)
        if k is Kind.CALL:
            return self._call(node)
        # FLEX and RIGID: sequences read the same when generating
        prev: Node | None = None
        out = ""
        for child in node.children:
            piece = self.gen(child)
            if piece == "":
                continue
            if out and not _adjacent(prev, child):
                out += " "
            out += piece
            prev = child
        return out

    def _call(self, node: Node) -> str:
        if self.registry is None:
            raise NatexError(
                error(Code.UNKNOWN_FUNCTION, f"no function registry for #{node.text}",
                      node.span or Span(0, 0))
            )
        result = self.registry.invoke(node.text, node.children, self.ctx, node.span)
        if isinstance(result, Text):
            return result.value
        if isinstance(result, StringSet):
            options = sorted(result.values)
            if not options:
                raise NatexError(
                    error(Code.FUNCTION_FAILURE,
                          f"#{node.text} returned an empty set in generation",
                          node.span or Span(0, 0))
                )
            return options[self.rng.randrange(len(options))]
        # booleans are zero-width side effects (#ASSIGN / #IF) when generating
        assert isinstance(result, Bool)
        return ""


def generate(
    ast: Node,
    bindings: Mapping[str, str],
    registry: FunctionRegistry | None = None,
    rng: random.Random | None = None,
    ontology: Ontology | None = None,
    utterance: str | None = None,
) -> GeneratedUtterance:
    """Produce one surface string; deterministic given the rng state."""
    gen = _Generator(bindings, registry, rng or random.Random(0), ontology, utterance)
    text = gen.gen(ast)
    return GeneratedUtterance(text, gen.assignments, gen.ctx.pending)


def productions(ast: Node, bindings: Mapping[str, str]) -> set[str]:
    """All surface strings generate() can emit, for function-free patterns.

    Oracle-grade enumeration: assignments made earlier in a sequence are
    visible to later variable references, so the environment is threaded
    through every combination.
    """
    return {text for text, _env in _enumerate(ast, bindings, {})}


def _enumerate(
    node: Node, bindings: Mapping[str, str], env: dict[str, str]
) -> list[tuple[str, dict[str, str]]]:
    k = node.kind
    if k is Kind.LITERAL:
        return [(node.text, env)]
    if k is Kind.VARIABLE:
        value = env.get(node.text, bindings.get(node.text))
        if value is None:
            raise _unbound(node.text, node.span)
        return [(value, env)]
    if k is Kind.ASSIGNMENT:
        return [
            (text, {**child_env, node.text: normalize(text)})
            for text, child_env in _enumerate(node.children[0], bindings, env)
        ]
    if k is Kind.DISJUNCTION:
        out: list[tuple[str, dict[str, str]]] = []
        for child in node.children:
            out.extend(_enumerate(child, bindings, env))
        return out
    if k is Kind.CALL:
        raise ValueError("productions() requires a function-free pattern")
    # sequences: fold a cross product, mirroring the generator's joining
    combos: list[tuple[str, dict[str, str], Node | None]] = [("", env, None)]
    for child in node.children:
        nxt: list[tuple[str, dict[str, str], Node | None]] = []
        for acc, acc_env, prev in combos:
            for piece, piece_env in _enumerate(child, bindings, acc_env):
                if piece == "":
                    nxt.append((acc, piece_env, prev))
                    continue
                sep = "" if not acc or _adjacent(prev, child) else " "
                nxt.append((acc + sep + piece, piece_env, child))
        combos = nxt
    return [(text, final_env) for text, final_env, _prev in combos]
