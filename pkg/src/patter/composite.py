"""Combining independent dialogue flows under unique namespaces.

Each module keeps its own states, registry, ontology, and rules; states are
addressed as ``NS.state`` and variables live in one shared table under
``NS.``-prefixed keys, so ``$NS.VAR`` reads across namespaces while bare
``$VAR`` stays inside the active module.  Cross-module transitions compete
with native user transitions and, when taken, switch the active namespace.
"""

from __future__ import annotations

import json
import random
from collections.abc import MutableMapping
from pathlib import Path
from typing import Iterator

from patter import flow as flow_mod
from patter import rules as rules_mod
from patter.diagnostics import NatexError
from patter.flow import (
    DEFAULT_PRIORITY,
    SYSTEM,
    USER,
    DeadEnd,
    DialogueFlow,
    FlowLoadError,
    NoErrorTransition,
    Session,
    Transition,
    TurnOutcome,
    load_flow,
    log_error,
)
from patter.generation import generate
from patter.knowledge import commit
from patter.matching import MatchResult, match
from patter.natex import parse


class DuplicateNamespace(ValueError):
    pass


class UnknownState(ValueError):
    pass


class ScopedTable(MutableMapping):
    """View of the shared table as seen from one namespace.

    Bare names resolve inside the active namespace; ``NS.VAR`` names pass
    through when NS is a registered module.
    """

    def __init__(self, backing: dict[str, str], namespace: str, namespaces: set[str]):
        self.backing = backing
        self.namespace = namespace
        self.namespaces = namespaces

    def _key(self, name: str) -> str:
        if "." in name:
            ns = name.split(".", 1)[0]
            if ns in self.namespaces:
                return name
        return f"{self.namespace}.{name}"

    def __getitem__(self, name: str) -> str:
        return self.backing[self._key(name)]

    def __setitem__(self, name: str, value: str) -> None:
        self.backing[self._key(name)] = value

    def __delitem__(self, name: str) -> None:
        del self.backing[self._key(name)]

    def __iter__(self) -> Iterator[str]:
        return iter(self.backing)

    def __len__(self) -> int:
        return len(self.backing)


def split_qualified(state: str) -> tuple[str, str]:
    if "." not in state:
        raise UnknownState(f"state id {state!r} is not namespace-qualified")
    namespace, local = state.split(".", 1)
    return namespace, local


class CompositeFlow:
    """Several flows behind one session, with inter-module transitions."""

    def __init__(self, start: str | None = None):
        self.modules: dict[str, DialogueFlow] = {}
        self.cross: list[Transition] = []
        self.start = start

    # -- assembly ---------------------------------------------------------

    def add_module(self, flow: DialogueFlow, namespace: str) -> None:
        if not namespace:
            raise DuplicateNamespace("namespace must be non-empty")
        if namespace in self.modules:
            raise DuplicateNamespace(f"namespace {namespace!r} already registered")
        self.modules[namespace] = flow
        if self.start is None:
            self.start = f"{namespace}.{flow.initial}"

    def resolve(self, qualified: str) -> tuple[DialogueFlow, str, str]:
        namespace, local = split_qualified(qualified)
        flow = self.modules.get(namespace)
        if flow is None or local not in flow.speakers:
            raise UnknownState(f"unknown state {qualified!r}")
        return flow, namespace, local

    def add_cross_transition(
        self, source: str, target: str, natex_text: str, priority: float = DEFAULT_PRIORITY
    ) -> Transition:
        src_flow, _, src_local = self.resolve(source)
        self.resolve(target)
        if src_flow.speaker(src_local) != USER:
            raise UnknownState(f"cross-transition source {source!r} is not a user state")
        transition = Transition(
            source, target, USER, parse(natex_text), natex_text, priority,
            key=f"cross{len(self.cross)}",
        )
        self.cross.append(transition)
        return transition

    # -- session plumbing -------------------------------------------------

    def new_session(self, seed=None, log_path: str | None = None) -> Session:
        if self.start is None:
            raise FlowLoadError("composite has no modules")
        self.resolve(self.start)
        return Session(state=self.start, rng=random.Random(seed), log_path=log_path)

    def scoped(self, session: Session, namespace: str) -> ScopedTable:
        return ScopedTable(session.table, namespace, set(self.modules))

    def speaker(self, state: str) -> str:
        flow, _, local = self.resolve(state)
        return flow.speaker(local)

    def is_terminal(self, state: str) -> bool:
        flow, _, local = self.resolve(state)
        has_cross = any(t.source == state for t in self.cross)
        return flow.is_terminal(local) and not has_cross

    def active_parts(self, session: Session):
        flow, namespace, local = self.resolve(session.state)
        return flow, namespace, local, self.scoped(session, namespace)

    # -- turn taking (mirrors flow.py so a one-module composite is
    #    transcript-identical to the bare flow under a shared seed) --------

    def select_user_transition(
        self, session: Session, user_input: str
    ) -> tuple[Transition, MatchResult, str, str] | None:
        """Returns (transition, match, qualified target, recency key)."""
        flow, namespace, local, table = self.active_parts(session)
        candidates = []
        native = [t for t in flow.outgoing(local) if not t.is_error]
        merged = [
            (t, f"{namespace}.{t.target}", f"{namespace}:{t.key}") for t in native
        ] + [
            (t, t.target, t.key) for t in self.cross if t.source == session.state
        ]
        for transition, target, key in merged:
            try:
                result = match(
                    transition.natex, table, flow.registry, user_input,
                    session.rng, flow.ontology,
                )
            except NatexError as exc:
                session.log_warnings.append(
                    f"[{namespace}] {transition.source_text!r}: {exc.diagnostic.render()}"
                )
                continue
            if result.matched:
                candidates.append((transition, result, target, key))
        if not candidates:
            return None
        best = max(c[0].priority for c in candidates)
        pool = [c for c in candidates if c[0].priority == best]
        if len(pool) == 1:
            return pool[0]
        return pool[session.rng.randrange(len(pool))]

    def commit_user_turn(
        self, session: Session, selection, user_input: str
    ) -> TurnOutcome:
        flow, namespace, local, table = self.active_parts(session)
        session.turn += 1
        if selection is not None:
            transition, result, target, key = selection
            committed = commit(table, {**result.bindings, **result.pending})
            session.last_taken[key] = session.turn
            session.state = target
            return TurnOutcome("Matched", transition, committed)
        error = flow.error_transition(local)
        if error is None:
            raise NoErrorTransition(session.state)
        log_error(session, session.state, user_input)
        session.last_taken[f"{namespace}:{error.key}"] = session.turn
        session.state = f"{namespace}.{error.target}"
        return TurnOutcome("ErrorTransition", error, {}, input=user_input)

    def user_turn(self, session: Session, user_input: str) -> TurnOutcome:
        selection = self.select_user_transition(session, user_input)
        return self.commit_user_turn(session, selection, user_input)

    def max_system_priority(self, state: str) -> float:
        flow, _, local = self.resolve(state)
        return flow_mod.max_system_priority(flow, local)

    def system_turn(self, session: Session) -> TurnOutcome:
        flow, namespace, local, table = self.active_parts(session)
        outgoing = [t for t in flow.outgoing(local) if t.speaker == SYSTEM]
        if not outgoing:
            raise DeadEnd(session.state)
        best = max(t.priority for t in outgoing)
        pool = [t for t in outgoing if t.priority == best]
        least = min(
            session.last_taken.get(f"{namespace}:{t.key}", -1) for t in pool
        )
        pool = [
            t for t in pool
            if session.last_taken.get(f"{namespace}:{t.key}", -1) == least
        ]
        transition = pool[session.rng.randrange(len(pool))] if len(pool) > 1 else pool[0]
        generated = generate(
            transition.natex, table, flow.registry, session.rng, flow.ontology
        )
        session.turn += 1
        committed = commit(table, {**generated.assignments, **generated.pending})
        session.last_taken[f"{namespace}:{transition.key}"] = session.turn
        session.state = f"{namespace}.{transition.target}"
        return TurnOutcome("Matched", transition, committed, text=generated.text)

    def active_rules(self, session: Session):
        flow, _, _, table = self.active_parts(session)
        return flow.rules, table, flow.registry, flow.ontology


def load_composite(
    document: str | dict, base_dir: str | Path | None = None
) -> CompositeFlow:
    """Load the composite manifest: start state, module files, cross links."""
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise FlowLoadError(f"invalid JSON: {exc}") from exc
    if not isinstance(document, dict) or not isinstance(document.get("modules"), dict):
        raise FlowLoadError('composite manifest needs a "modules" object')
    base = Path(base_dir or ".")
    composite = CompositeFlow(document.get("start"))
    for namespace, ref in document["modules"].items():
        if isinstance(ref, str):
            path = base / ref
            flow = load_flow(path.read_text(encoding="utf-8"), base_dir=path.parent)
        elif isinstance(ref, dict):
            flow = load_flow(ref, base_dir=base)
        else:
            raise FlowLoadError(f"module {namespace!r} must be a path or inline flow")
        composite.add_module(flow, namespace)
    for link in document.get("cross", []):
        composite.add_cross_transition(
            link["from"], link["to"], link["natex"],
            float(link.get("score", DEFAULT_PRIORITY)),
        )
    if composite.start is not None:
        composite.resolve(composite.start)
    return composite
