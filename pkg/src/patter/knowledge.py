"""Function registry, built-in functions, and the ontology store.

Patterns can call out to arbitrary functions with ``#NAME(...)``.  A function
receives its evaluated arguments plus read access to the variable table and
the normalized utterance, and returns one of three result kinds:

* a set of phrases (matched against / drawn from),
* a single text (substituted verbatim),
* a boolean (a zero-width predicate).

Built-ins: ``#ONT`` queries the ontology, ``#ASSIGN`` stages variable writes,
``#IF`` tests variable conditions.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from patter import natex
from patter.diagnostics import Code, NatexError, Span, error
from patter.natex import Kind, Node
from patter.textnorm import normalize

BUILTINS = ("ONT", "ASSIGN", "IF")


@dataclass(frozen=True)
class StringSet:
    values: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "values", frozenset(self.values))


@dataclass(frozen=True)
class Text:
    value: str


@dataclass(frozen=True)
class Bool:
    value: bool


FunctionResult = StringSet | Text | Bool


def coerce_result(raw: object) -> FunctionResult:
    """Lift plain python values returned by user functions."""
    if isinstance(raw, (StringSet, Text, Bool)):
        return raw
    if isinstance(raw, bool):
        return Bool(raw)
    if isinstance(raw, str):
        return Text(raw)
    if isinstance(raw, (set, frozenset, list, tuple)):
        return StringSet(frozenset(str(v) for v in raw))
    raise TypeError(f"unsupported function result: {type(raw).__name__}")


class OntologyError(ValueError):
    pass


class Ontology:
    """Labelled DAG; queries return the strict descendants of a node."""

    def __init__(self, children: Mapping[str, Iterable[str]]):
        self.children: dict[str, tuple[str, ...]] = {
            str(k): tuple(str(c) for c in v) for k, v in children.items()
        }
        self.labels: set[str] = set(self.children)
        for kids in self.children.values():
            self.labels.update(kids)
        self._check_acyclic()

    def _check_acyclic(self):
        WHITE, GREY, BLACK = 0, 1, 2
        color = {label: WHITE for label in self.labels}
        for root in self.children:
            if color[root] != WHITE:
                continue
            stack: list[tuple[str, int]] = [(root, 0)]
            color[root] = GREY
            while stack:
                node, idx = stack[-1]
                kids = self.children.get(node, ())
                if idx == len(kids):
                    color[node] = BLACK
                    stack.pop()
                    continue
                stack[-1] = (node, idx + 1)
                child = kids[idx]
                if color[child] == GREY:
                    raise OntologyError(f"ontology cycle involving {child!r}")
                if color[child] == WHITE:
                    color[child] = GREY
                    stack.append((child, 0))

    def query(self, label: str, warnings: list[str] | None = None) -> frozenset[str]:
        """All labels strictly below ``label``; empty (plus a warning) if unknown."""
        if label not in self.labels:
            if warnings is not None:
                warnings.append(f"unknown ontology node: {label!r}")
            return frozenset()
        seen: set[str] = set()
        frontier = list(self.children.get(label, ()))
        while frontier:
            node = frontier.pop()
            if node in seen:
                continue
            seen.add(node)
            frontier.extend(self.children.get(node, ()))
        return frozenset(seen)


def load_ontology(document: str | dict) -> Ontology:
    """Load the `{"ontology": {parent: [children]}}` JSON document."""
    data = json.loads(document) if isinstance(document, str) else document
    if not isinstance(data, dict) or not isinstance(data.get("ontology"), dict):
        raise OntologyError('expected an object with an "ontology" mapping')
    mapping = data["ontology"]
    for parent, kids in mapping.items():
        if not isinstance(kids, list) or not all(isinstance(k, str) for k in kids):
            raise OntologyError(f"children of {parent!r} must be a list of strings")
    return Ontology(mapping)


def ont_query(
    ontology: Ontology | None, label: str, warnings: list[str] | None = None
) -> frozenset[str]:
    if ontology is None:
        if warnings is not None:
            warnings.append("no ontology loaded")
        return frozenset()
    return ontology.query(label, warnings)


@dataclass
class CallContext:
    """What a function invocation may see and touch."""

    table: Mapping[str, str]
    pending: dict[str, str]
    utterance: str | None
    rng: random.Random
    ontology: Ontology | None = None
    # evaluates a sub-pattern in generation mode; wired in by the evaluator
    generate_value: Callable[[Node], str] | None = None
    warnings: list[str] = field(default_factory=list)

    def lookup(self, name: str) -> str | None:
        if name in self.pending:
            return self.pending[name]
        return self.table.get(name)


UserFunction = Callable[[list[str], CallContext], object]


def commit(table: dict[str, str], values: Mapping[str, str]) -> dict[str, str]:
    """Write normalized, non-empty values into the table; returns what stuck."""
    written = {}
    for name, value in values.items():
        value = normalize(value)
        if value:
            table[name] = value
            written[name] = value
    return written


class FunctionRegistry:
    """Named external functions; built-ins are always present."""

    def __init__(self):
        self._functions: dict[str, UserFunction] = {}

    def register(self, name: str, fn: UserFunction) -> None:
        self._functions[name] = fn

    def __contains__(self, name: str) -> bool:
        return name in BUILTINS or name in self._functions

    def names(self) -> set[str]:
        return set(BUILTINS) | set(self._functions)

    def invoke(self, name: str, args: list[Node], ctx: CallContext, span: Span | None = None) -> FunctionResult:
        span = span or Span(0, 0)
        if name == "ONT":
            return self._ont(args, ctx, span)
        if name == "ASSIGN":
            return self._assign(args, ctx, span)
        if name == "IF":
            return self._if(args, ctx, span)
        fn = self._functions.get(name)
        if fn is None:
            raise NatexError(
                error(Code.UNKNOWN_FUNCTION, f"call to a non-existing function: #{name}", span)
            )
        try:
            raw = fn([self._value(a, ctx, span) for a in args], ctx)
            return coerce_result(raw)
        except NatexError:
            raise
        except Exception as exc:
            raise NatexError(
                error(Code.FUNCTION_FAILURE, f"#{name} raised {type(exc).__name__}: {exc}", span)
            ) from exc

    # -- built-ins --------------------------------------------------------

    def _value(self, node: Node, ctx: CallContext, span: Span) -> str:
        """Evaluate an argument to plain text (literals and variables)."""
        if node.kind is Kind.LITERAL:
            return node.text
        if node.kind is Kind.VARIABLE:
            value = ctx.lookup(node.text)
            if value is None:
                raise NatexError(
                    error(
                        Code.UNBOUND_VARIABLE,
                        f"reference to a non-existing variable: ${node.text}",
                        node.span or span,
                    )
                )
            return value
        if ctx.generate_value is not None:
            return ctx.generate_value(node)
        raise NatexError(
            error(Code.TYPE_MISMATCH, "unsupported function argument", node.span or span)
        )

    def _ont(self, args: list[Node], ctx: CallContext, span: Span) -> StringSet:
        if len(args) != 1:
            raise NatexError(error(Code.TYPE_MISMATCH, "#ONT takes one node label", span))
        label = self._value(args[0], ctx, span)
        return StringSet(ont_query(ctx.ontology, label, ctx.warnings))

    def _assign(self, args: list[Node], ctx: CallContext, span: Span) -> Bool:
        for arg in args:
            if arg.kind is not Kind.ASSIGNMENT:
                raise NatexError(
                    error(Code.TYPE_MISMATCH, "#ASSIGN takes $VAR=value arguments", arg.span or span)
                )
            if ctx.generate_value is None:
                raise NatexError(
                    error(Code.FUNCTION_FAILURE, "#ASSIGN needs a generation context", span)
                )
            value = normalize(ctx.generate_value(arg.children[0]))
            if value:
                ctx.pending[arg.text] = value
        return Bool(True)

    def _if(self, args: list[Node], ctx: CallContext, span: Span) -> Bool:
        return Bool(all(self._condition(a, ctx, span) for a in args))

    def _condition(self, node: Node, ctx: CallContext, span: Span) -> bool:
        if node.kind is Kind.VARIABLE:
            return ctx.lookup(node.text) is not None
        if natex.is_comparison(node):
            lhs = self._operand(node.children[0], ctx)
            rhs = self._operand(node.children[1], ctx)
            return (lhs == rhs) if node.text == "==" else (lhs != rhs)
        raise NatexError(
            error(Code.TYPE_MISMATCH, "#IF takes $VAR or comparison conditions", node.span or span)
        )

    def _operand(self, node: Node, ctx: CallContext) -> str | None:
        if node.kind is Kind.LITERAL:
            # `None` is the reserved unset marker
            return None if node.text == "None" else normalize(node.text)
        if node.kind is Kind.VARIABLE:
            value = ctx.lookup(node.text)
            return None if value is None else normalize(value)
        raise NatexError(
            error(Code.TYPE_MISMATCH, "comparison operands must be literals or variables",
              node.span or Span(0, 0))
        )


def word_set_function(words: Iterable[str]) -> UserFunction:
    """A function returning a fixed phrase set, e.g. loaded from JSON."""
    values = frozenset(str(w) for w in words)

    def fn(args: list[str], ctx: CallContext) -> StringSet:
        return StringSet(values)

    return fn


def load_word_list(path: str) -> list[str]:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise ValueError(f"{path}: expected a JSON array of phrases")
    return [str(w) for w in data]
