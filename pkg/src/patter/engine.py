"""One full conversation exchange: update rules, arbitration, state machine.

The engine owns a session over either a single flow or a composite and turns
one user utterance into one system reply.  Per exchange it (1) runs the
update-rule pass, (2) peeks at the user transition the state machine would
take, (3) arbitrates the rule candidate against the priorities of the system
transitions at the would-be next state, and (4) either answers with the
candidate (state untouched) or commits the user and system turns.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from patter import rules as rules_mod
from patter.composite import CompositeFlow
from patter.flow import (
    DialogueFlow,
    Session,
    commit_user_turn,
    max_system_priority,
    select_user_transition,
    system_turn,
)


class ConversationEnded(RuntimeError):
    pass


@dataclass
class TurnReport:
    """What one exchange produced; mirrors the chat API response."""

    text: str
    kind: str  # Matched | ErrorTransition | RuleResponse
    state: str
    turn: int
    fired_rules: list[int] = field(default_factory=list)
    committed: dict[str, str] = field(default_factory=dict)


class ChatEngine:
    def __init__(
        self,
        flow: DialogueFlow | CompositeFlow,
        seed=None,
        log_path: str | None = None,
    ):
        self.flow = flow
        self.composite = isinstance(flow, CompositeFlow)
        self.session: Session = flow.new_session(seed, log_path)

    # -- helpers over the two flow kinds ----------------------------------

    def _system_turn(self):
        if self.composite:
            return self.flow.system_turn(self.session)
        return system_turn(self.flow, self.session)

    def _select_user(self, text: str):
        if self.composite:
            return self.flow.select_user_transition(self.session, text)
        return select_user_transition(self.flow, self.session, text)

    def _commit_user(self, selection, text: str):
        if self.composite:
            return self.flow.commit_user_turn(self.session, selection, text)
        return commit_user_turn(self.flow, self.session, selection, text)

    def _would_be_state(self, selection) -> str | None:
        if selection is not None:
            if self.composite:
                return selection[2]  # already qualified
            return selection[0].target
        if self.composite:
            flow, namespace, local, _ = self.flow.active_parts(self.session)
            error = flow.error_transition(local)
            return f"{namespace}.{error.target}" if error else None
        error = self.flow.error_transition(self.session.state)
        return error.target if error else None

    def _max_system_priority(self, state: str) -> float:
        if self.composite:
            return self.flow.max_system_priority(state)
        return max_system_priority(self.flow, state)

    def _rules_context(self):
        if self.composite:
            return self.flow.active_rules(self.session)
        return (
            self.flow.rules,
            self.session.table,
            self.flow.registry,
            self.flow.ontology,
        )

    def _is_terminal(self, state: str) -> bool:
        return self.flow.is_terminal(state)

    # -- public API -------------------------------------------------------

    @property
    def ended(self) -> bool:
        return self.session.ended

    def start(self) -> TurnReport:
        """Open the conversation with the initial system utterance."""
        outcome = self._system_turn()
        if self._is_terminal(self.session.state):
            self.session.ended = True
        return TurnReport(
            outcome.text or "", outcome.kind, self.session.state, self.session.turn,
            committed=outcome.committed,
        )

    def respond(self, text: str) -> TurnReport:
        """Consume one user utterance and produce the system reply."""
        if self.session.ended:
            raise ConversationEnded("the conversation has ended")
        fired: list[int] = []
        candidate = None
        rules, table, registry, ontology = self._rules_context()
        if rules:
            pass_result = rules_mod.evaluate(
                rules, text, table, registry, self.session.rng, ontology
            )
            fired = pass_result.fired
            candidate = pass_result.candidate

        selection = self._select_user(text)
        would_be = self._would_be_state(selection)
        system_max = (
            self._max_system_priority(would_be) if would_be is not None else float("-inf")
        )
        if rules_mod.arbitrate(candidate, system_max) == "UseCandidate":
            # the candidate answers the whole turn; the state machine stands still
            self.session.turn += 1
            return TurnReport(
                candidate.text, "RuleResponse", self.session.state,
                self.session.turn, fired,
            )

        user_outcome = self._commit_user(selection, text)
        reply = self._system_turn()
        if self._is_terminal(self.session.state):
            self.session.ended = True
        committed = {**user_outcome.committed, **reply.committed}
        return TurnReport(
            reply.text or "", user_outcome.kind, self.session.state,
            self.session.turn, fired, committed,
        )

    def variables(self) -> dict[str, str]:
        return dict(self.session.table)
