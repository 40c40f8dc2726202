"""Information-state update rules.

A rule pairs a precondition pattern with a postcondition pattern.  Once per
user turn, before the state machine moves, the rule set is scanned in
declaration order; the first unfired rule whose precondition matches fires:
its bindings commit, its postcondition runs in generation mode, and if the
postcondition carries a trailing parenthesized priority the generated text
becomes a candidate system response and the pass ends.  Otherwise the scan
restarts from the top.  Each rule fires at most once per turn, so a pass
performs at most ``len(rules)`` firings.
"""

from __future__ import annotations

import dataclasses
import json
import random
import re
from dataclasses import dataclass, field

from patter.diagnostics import NatexError
from patter.generation import generate
from patter.knowledge import FunctionRegistry, Ontology, commit
from patter.matching import match
from patter.natex import Node, parse

_PRIORITY = re.compile(r"\s*\(\s*([+-]?\d+(?:\.\d+)?)\s*\)\s*$")


class RuleLoadError(ValueError):
    pass


@dataclass
class UpdateRule:
    precondition: Node
    postcondition: Node
    precondition_text: str
    postcondition_text: str
    priority: float | None
    rule_id: int


@dataclass
class Candidate:
    text: str
    priority: float


@dataclass
class RulePassResult:
    fired: list[int] = field(default_factory=list)
    committed: dict[str, str] = field(default_factory=dict)
    candidate: Candidate | None = None


def split_priority(postcondition: str) -> tuple[str, float | None]:
    """Strip a trailing `(x)` real number; non-numeric parens are plain text."""
    m = _PRIORITY.search(postcondition)
    if m is None:
        return postcondition, None
    return postcondition[: m.start()].rstrip(), float(m.group(1))


def parse_rules(document: str | dict) -> list[UpdateRule]:
    """Parse the `{precondition: postcondition}` JSON document, in order."""
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise RuleLoadError(f"invalid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise RuleLoadError("rules document must be a JSON object")
    rules: list[UpdateRule] = []
    for index, (pre_text, post_raw) in enumerate(document.items()):
        if not isinstance(post_raw, str):
            raise RuleLoadError(f"$.{pre_text!r}: postcondition must be a string")
        post_text, priority = split_priority(post_raw)
        try:
            pre = parse(pre_text)
            post = parse(post_text)
        except NatexError as exc:
            raise RuleLoadError(f"$.{pre_text!r}: {exc.diagnostic.message}") from exc
        rules.append(UpdateRule(pre, post, pre_text, post_text, priority, index))
    return rules


def evaluate(
    rules: list[UpdateRule],
    user_input: str,
    table: dict[str, str],
    registry: FunctionRegistry,
    rng: random.Random,
    ontology: Ontology | None = None,
) -> RulePassResult:
    """Run one rule pass over the input; commits assignments into ``table``."""
    result = RulePassResult()
    fired: set[int] = set()
    while True:
        progressed = False
        for rule in rules:
            if rule.rule_id in fired:
                continue
            try:
                m = match(rule.precondition, table, registry, user_input, rng, ontology)
            except NatexError as exc:
                raise NatexError(
                    dataclasses.replace(exc.diagnostic, path=f"rule {rule.rule_id}")
                ) from exc
            if not m.matched:
                continue
            fired.add(rule.rule_id)
            result.fired.append(rule.rule_id)
            result.committed.update(commit(table, {**m.bindings, **m.pending}))
            generated = generate(rule.postcondition, table, registry, rng, ontology)
            result.committed.update(
                commit(table, {**generated.assignments, **generated.pending})
            )
            if rule.priority is not None:
                result.candidate = Candidate(generated.text, rule.priority)
            progressed = True
            break  # restart the scan from the top
        if result.candidate is not None or not progressed:
            return result


def arbitrate(candidate: Candidate | None, system_max_priority: float) -> str:
    """Strictly-higher candidate priority suppresses the state machine."""
    if candidate is not None and candidate.priority > system_max_priority:
        return "UseCandidate"
    return "UseStateMachine"
