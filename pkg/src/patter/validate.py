"""Pre-runtime validation of flow and composite documents.

Beyond schema and syntax checks this performs the pattern-level checks
(unknown functions, unbound variables) and a trial invocation of every
user-defined function so that functions that raise, or return the wrong
kind for their position, are reported before any conversation starts.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from patter.composite import CompositeFlow, load_composite
from patter.diagnostics import Code, Diagnostic, NatexError, Severity, Span
from patter.flow import (
    SYSTEM,
    USER,
    DialogueFlow,
    FlowLoadError,
    load_flow,
)
from patter.knowledge import (
    BUILTINS,
    CallContext,
    FunctionRegistry,
    Ontology,
    OntologyError,
    Text,
)
from patter.matching import to_reference_regex
from patter.natex import Kind, Node, is_comparison
from patter.rules import RuleLoadError


@dataclass
class Report:
    diagnostics: list[Diagnostic]
    loaded: DialogueFlow | CompositeFlow | None = None

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity is Severity.ERROR]

    @property
    def ok(self) -> bool:
        return not self.errors


def load_any(
    path: str | Path, registry: FunctionRegistry | None = None
) -> DialogueFlow | CompositeFlow:
    """Load a flow or, when the document has a "modules" key, a composite."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    document = json.loads(text)
    if isinstance(document, dict) and "modules" in document:
        return load_composite(document, base_dir=path.parent)
    return load_flow(document, registry=registry, base_dir=path.parent)


def _load_diag(message: str, path: str = "$") -> Diagnostic:
    return Diagnostic(Severity.ERROR, Code.SYNTAX_ERROR, message, Span(0, 0), path)


def _patterns(flow: DialogueFlow) -> list[tuple[Node, str, str]]:
    """(ast, position, where) triples; position is 'matcher' or 'generator'."""
    out = []
    for t in flow.transitions:
        if t.natex is None:
            continue
        position = "matcher" if t.speaker == USER else "generator"
        out.append((t.natex, position, f"{t.source} -> {t.target}: {t.source_text!r}"))
    for rule in flow.rules:
        out.append((rule.precondition, "matcher", f"rule {rule.rule_id} precondition"))
        out.append((rule.postcondition, "generator", f"rule {rule.rule_id} postcondition"))
    return out


def _trial_invocations(flow: DialogueFlow) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    for ast, position, where in _patterns(flow):
        for node in ast.walk():
            if node.kind is not Kind.CALL or is_comparison(node):
                continue
            if node.text in ("ASSIGN", "IF"):  # side-effect built-ins, trial-safe
                continue
            if node.text not in flow.registry:  # already reported by static checks
                continue
            diags.extend(_trial_call(flow, node, position, where))
    return diags


def _trial_call(
    flow: DialogueFlow, node: Node, position: str, where: str
) -> list[Diagnostic]:
    ctx = CallContext(
        table={}, pending={}, utterance="", rng=random.Random(0),
        ontology=flow.ontology, generate_value=None,
    )
    span = node.span or Span(0, 0)
    try:
        result = flow.registry.invoke(node.text, node.children, ctx, span)
    except NatexError as exc:
        diag = exc.diagnostic
        if diag.code in (Code.FUNCTION_FAILURE, Code.UNKNOWN_FUNCTION):
            return [Diagnostic(diag.severity, diag.code, diag.message, diag.span, where)]
        # arguments not statically evaluable; nothing to conclude
        return []
    diags = [
        Diagnostic(Severity.WARNING, Code.FUNCTION_FAILURE, message, span, where)
        for message in ctx.warnings
    ]
    if position == "matcher" and isinstance(result, Text):
        diags.append(
            Diagnostic(
                Severity.ERROR, Code.TYPE_MISMATCH,
                f"#{node.text} returns text in matcher position", span, where,
            )
        )
    return diags


def validate_path(
    path: str | Path, registry: FunctionRegistry | None = None
) -> Report:
    try:
        loaded = load_any(path, registry)
    except (FlowLoadError, RuleLoadError, OntologyError, OSError) as exc:
        return Report([_load_diag(str(exc))])
    except json.JSONDecodeError as exc:
        return Report([_load_diag(f"invalid JSON: {exc}")])
    diagnostics: list[Diagnostic] = []
    flows = (
        loaded.modules.items() if isinstance(loaded, CompositeFlow) else [("", loaded)]
    )
    for namespace, flow in flows:
        prefix = f"{namespace}: " if namespace else ""
        for diag in flow.diagnostics + _trial_invocations(flow):
            diagnostics.append(
                Diagnostic(diag.severity, diag.code, diag.message, diag.span,
                           prefix + (diag.path or "")),
            )
    if isinstance(loaded, CompositeFlow):
        for t in loaded.cross:
            for diag in _cross_checks(loaded, t):
                diagnostics.append(diag)
    return Report(diagnostics, loaded)


def _cross_checks(composite: CompositeFlow, transition) -> list[Diagnostic]:
    flow, _, _ = composite.resolve(transition.source)
    from patter.natex import static_check  # local to avoid an import knot

    return [
        Diagnostic(d.severity, d.code, d.message, d.span,
                   f"cross {transition.source} -> {transition.target}")
        for d in static_check(transition.natex, flow.registry.names(), set())
    ]


def reference_regexes(loaded: DialogueFlow | CompositeFlow) -> list[tuple[str, str]]:
    """(where, regex) for every function-free matcher pattern; for --emit-regex."""
    flows = (
        list(loaded.modules.values()) if isinstance(loaded, CompositeFlow) else [loaded]
    )
    out = []
    for flow in flows:
        for ast, position, where in _patterns(flow):
            if position != "matcher":
                continue
            if any(n.kind is Kind.CALL for n in ast.walk()):
                continue
            try:
                out.append((where, to_reference_regex(ast)))
            except NatexError:
                continue
    return out
