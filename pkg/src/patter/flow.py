"""State-machine dialogue management.

A dialogue is a graph of states whose transitions alternate speakers: user
transitions carry matcher patterns, system transitions carry generator
patterns.  The streamlined JSON syntax nests states inside the transitions
that reach them; reserved keys are ``"state"`` (names the reached state),
``"score"`` (transition priority) and ``"error"`` (user-level catch-all).
A plain string value is a goto to a state declared elsewhere.
"""

from __future__ import annotations

import dataclasses
import json
import random
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from patter import rules as rules_mod
from patter.diagnostics import Diagnostic, NatexError
from patter.generation import generate
from patter.knowledge import (
    FunctionRegistry,
    Ontology,
    commit,
    load_ontology,
    word_set_function,
)
from patter.matching import MatchResult, match
from patter.natex import Node, assigned_names, parse, static_check
from patter.textnorm import normalize

USER, SYSTEM = "user", "system"
DEFAULT_PRIORITY = 1.0
ERROR_PRIORITY = float("-inf")
RESERVED_KEYS = ("state", "score", "error")
RESERVED_TOP_KEYS = ("ontology", "rules")


class FlowLoadError(ValueError):
    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


class NoErrorTransition(RuntimeError):
    """No pattern matched and the state has no error transition."""

    def __init__(self, state: str):
        super().__init__(f"no transition matched at state {state!r} and no error transition is defined")
        self.state = state


class DeadEnd(RuntimeError):
    def __init__(self, state: str):
        super().__init__(f"system state {state!r} has no outgoing transitions")
        self.state = state


@dataclass
class Transition:
    source: str
    target: str
    speaker: str
    natex: Node | None  # None only for error transitions
    source_text: str
    priority: float = DEFAULT_PRIORITY
    is_error: bool = False
    key: str = ""  # unique id, used for recency bookkeeping


@dataclass
class TurnOutcome:
    kind: str  # Matched | ErrorTransition | RuleResponse
    transition: Transition | None = None
    committed: dict[str, str] = field(default_factory=dict)
    text: str | None = None
    input: str | None = None


@dataclass
class Session:
    """Per-conversation mutable state; one owner, one turn at a time."""

    state: str
    rng: random.Random
    table: dict[str, str] = field(default_factory=dict)
    last_taken: dict[str, int] = field(default_factory=dict)
    turn: int = 0
    error_log: list[str] = field(default_factory=list)
    log_path: str | None = None
    log_warnings: list[str] = field(default_factory=list)
    ended: bool = False


def log_error(session: Session, state: str, user_input: str) -> str:
    """Append one JSON-lines record for an unmatched input; never raises."""
    record = json.dumps(
        {"turn": session.turn, "state": state, "input": user_input},
        separators=(",", ":"),
    )
    session.error_log.append(record)
    if session.log_path:
        try:
            with open(session.log_path, "a", encoding="utf-8") as fh:
                fh.write(record + "\n")
        except OSError as exc:
            session.log_warnings.append(f"error log write failed: {exc}")
    return record


class DialogueFlow:
    """Immutable after loading; shareable across concurrent sessions."""

    def __init__(
        self,
        registry: FunctionRegistry,
        ontology: Ontology | None = None,
        initial: str = "start",
    ):
        self.registry = registry
        self.ontology = ontology
        self.initial = initial
        self.speakers: dict[str, str] = {}
        self.transitions: list[Transition] = []
        self.rules: list[rules_mod.UpdateRule] = []
        self.diagnostics: list[Diagnostic] = []
        self._by_source: dict[str, list[Transition]] = {}

    def add_state(self, name: str, speaker: str, path: str = "$") -> None:
        existing = self.speakers.get(name)
        if existing is not None and existing != speaker:
            raise FlowLoadError(
                f"state {name!r} is both {existing}- and {speaker}-speaker", path
            )
        self.speakers.setdefault(name, speaker)

    def add_transition(self, transition: Transition) -> Transition:
        if not transition.key:
            transition.key = f"t{len(self.transitions)}"
        if transition.is_error and self.error_transition(transition.source):
            raise FlowLoadError(
                f"state {transition.source!r} already has an error transition"
            )
        self.transitions.append(transition)
        self._by_source.setdefault(transition.source, []).append(transition)
        return transition

    def outgoing(self, state: str) -> list[Transition]:
        return self._by_source.get(state, [])

    def error_transition(self, state: str) -> Transition | None:
        for t in self.outgoing(state):
            if t.is_error:
                return t
        return None

    def speaker(self, state: str) -> str:
        return self.speakers[state]

    def is_terminal(self, state: str) -> bool:
        return self.speakers.get(state) == USER and not self.outgoing(state)

    def new_session(self, seed=None, log_path: str | None = None) -> Session:
        return Session(state=self.initial, rng=random.Random(seed), log_path=log_path)


def default_registry() -> FunctionRegistry:
    """Built-ins plus the bundled example lookup functions #MDB and #PET."""
    registry = FunctionRegistry()
    data = resources.files("patter") / "data"
    registry.register("MDB", word_set_function(json.loads((data / "movies.json").read_text())))
    registry.register("PET", word_set_function(json.loads((data / "pets.json").read_text())))
    return registry


class _Loader:
    def __init__(self, flow: DialogueFlow):
        self.flow = flow
        self.fresh = 0
        self.gotos: list[tuple[str, str]] = []  # (target, json path)

    def fresh_state(self) -> str:
        self.fresh += 1
        return f"_s{self.fresh}"

    def walk(self, obj: dict, state: str, speaker: str, path: str) -> None:
        self.flow.add_state(state, speaker, path)
        for key, value in obj.items():
            if key in ("state", "score"):
                continue
            kpath = f"{path}.{key!r}"
            if key == "error":
                self.error_transition(value, state, speaker, kpath)
                continue
            self.natex_transition(key, value, state, speaker, kpath)

    def error_transition(self, value, state: str, speaker: str, path: str) -> None:
        if speaker != USER:
            raise FlowLoadError("error transitions belong to user states", path)
        target = self.target_of(value, SYSTEM, path)
        self.flow.add_transition(
            Transition(state, target, USER, None, "error", ERROR_PRIORITY, True)
        )

    def natex_transition(self, key: str, value, state: str, speaker: str, path: str) -> None:
        try:
            ast = parse(key)
        except NatexError as exc:
            raise FlowLoadError(f"invalid pattern: {exc.diagnostic.message}", path) from exc
        priority = DEFAULT_PRIORITY
        if isinstance(value, dict) and "score" in value:
            try:
                priority = float(value["score"])
            except (TypeError, ValueError):
                raise FlowLoadError('"score" must be a real number', path) from None
        target = self.target_of(value, _other(speaker), path)
        self.flow.add_transition(
            Transition(state, target, speaker, ast, key, priority)
        )

    def target_of(self, value, next_speaker: str, path: str) -> str:
        if isinstance(value, str):
            self.gotos.append((value, path))
            return value
        if isinstance(value, dict):
            name = value.get("state")
            if name is not None and not isinstance(name, str):
                raise FlowLoadError('"state" must be a string', path)
            name = name or self.fresh_state()
            self.walk(value, name, next_speaker, path)
            return name
        raise FlowLoadError(
            "transition value must be an object or a goto state name", path
        )

    def resolve(self) -> None:
        for target, path in self.gotos:
            if target not in self.flow.speakers:
                raise FlowLoadError(f"goto to undeclared state {target!r}", path)


def load_flow(
    document: str | dict,
    registry: FunctionRegistry | None = None,
    base_dir: str | Path | None = None,
) -> DialogueFlow:
    """Build a DialogueFlow from its JSON document (text or parsed object)."""
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise FlowLoadError(f"invalid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise FlowLoadError("flow document must be a JSON object")

    ontology = None
    ont_spec = document.get("ontology")
    if isinstance(ont_spec, str):
        path = Path(base_dir or ".") / ont_spec
        ontology = load_ontology(path.read_text(encoding="utf-8"))
    elif isinstance(ont_spec, dict):
        ontology = load_ontology({"ontology": ont_spec})
    elif ont_spec is not None:
        raise FlowLoadError('"ontology" must be an object or a file path', "$.ontology")

    flow = DialogueFlow(registry or default_registry(), ontology)
    body = {k: v for k, v in document.items() if k not in RESERVED_TOP_KEYS}
    loader = _Loader(flow)
    loader.walk(body, flow.initial, SYSTEM, "$")
    loader.resolve()

    if "rules" in document:
        flow.rules = rules_mod.parse_rules(document["rules"])

    flow.diagnostics = run_static_checks(flow)
    return flow


def run_static_checks(flow: DialogueFlow) -> list[Diagnostic]:
    """Pattern-level checks over every transition and rule in the flow."""
    assignable: set[str] = set()
    patterns: list[tuple[Node, str]] = []
    for t in flow.transitions:
        if t.natex is not None:
            patterns.append((t.natex, f"{t.source} -> {t.target}: {t.source_text!r}"))
    for rule in flow.rules:
        patterns.append((rule.precondition, f"rule {rule.rule_id} precondition"))
        patterns.append((rule.postcondition, f"rule {rule.rule_id} postcondition"))
    for ast, _where in patterns:
        assignable |= assigned_names(ast)
    diagnostics = []
    for ast, where in patterns:
        for diag in static_check(ast, flow.registry.names(), assignable):
            diagnostics.append(dataclasses.replace(diag, path=where))
    return diagnostics


# -- turn taking ----------------------------------------------------------


def _other(speaker: str) -> str:
    return SYSTEM if speaker == USER else USER


def select_user_transition(
    flow: DialogueFlow,
    session: Session,
    user_input: str,
    extra: list[Transition] = (),
) -> tuple[Transition, MatchResult] | None:
    """Pick the winning user transition; highest priority, ties by RNG."""
    candidates: list[tuple[Transition, MatchResult]] = []
    for t in [t for t in flow.outgoing(session.state) if not t.is_error] + list(extra):
        try:
            result = match(
                t.natex, session.table, flow.registry, user_input,
                session.rng, flow.ontology,
            )
        except NatexError as exc:
            session.log_warnings.append(f"{t.source_text!r}: {exc.diagnostic.render()}")
            continue
        if result.matched:
            candidates.append((t, result))
    if not candidates:
        return None
    best = max(t.priority for t, _ in candidates)
    pool = [c for c in candidates if c[0].priority == best]
    if len(pool) == 1:
        return pool[0]
    return pool[session.rng.randrange(len(pool))]


def commit_user_turn(
    flow: DialogueFlow,
    session: Session,
    selection: tuple[Transition, MatchResult] | None,
    user_input: str,
) -> TurnOutcome:
    session.turn += 1
    if selection is not None:
        transition, result = selection
        committed = commit(session.table, {**result.bindings, **result.pending})
        session.last_taken[transition.key] = session.turn
        session.state = transition.target
        return TurnOutcome("Matched", transition, committed)
    error = flow.error_transition(session.state)
    if error is None:
        raise NoErrorTransition(session.state)
    log_error(session, session.state, user_input)
    session.last_taken[error.key] = session.turn
    session.state = error.target
    return TurnOutcome("ErrorTransition", error, {}, input=user_input)


def user_turn(
    flow: DialogueFlow,
    session: Session,
    user_input: str,
    extra: list[Transition] = (),
) -> TurnOutcome:
    """One user half-turn: match, commit bindings, advance (or error)."""
    selection = select_user_transition(flow, session, user_input, extra)
    return commit_user_turn(flow, session, selection, user_input)


def max_system_priority(flow: DialogueFlow, state: str) -> float:
    outgoing = [t for t in flow.outgoing(state) if t.speaker == SYSTEM]
    if not outgoing:
        return float("-inf")
    return max(t.priority for t in outgoing)


def select_system_transition(flow: DialogueFlow, session: Session) -> Transition:
    """Max priority first, then least-recently taken, then RNG."""
    outgoing = [t for t in flow.outgoing(session.state) if t.speaker == SYSTEM]
    if not outgoing:
        raise DeadEnd(session.state)
    best = max(t.priority for t in outgoing)
    pool = [t for t in outgoing if t.priority == best]
    least = min(session.last_taken.get(t.key, -1) for t in pool)
    pool = [t for t in pool if session.last_taken.get(t.key, -1) == least]
    if len(pool) == 1:
        return pool[0]
    return pool[session.rng.randrange(len(pool))]


def system_turn(flow: DialogueFlow, session: Session) -> TurnOutcome:
    """One system half-turn: pick a response pattern, generate, advance."""
    transition = select_system_transition(flow, session)
    generated = generate(
        transition.natex, session.table, flow.registry, session.rng, flow.ontology
    )
    session.turn += 1
    committed = commit(session.table, {**generated.assignments, **generated.pending})
    session.last_taken[transition.key] = session.turn
    session.state = transition.target
    return TurnOutcome("Matched", transition, committed, text=generated.text)
