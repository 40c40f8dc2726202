"""Composing independent flows under namespaces with cross transitions."""

from pathlib import Path

import pytest

from patter.composite import (
    CompositeFlow,
    DuplicateNamespace,
    ScopedTable,
    UnknownState,
    load_composite,
    split_qualified,
)
from patter.flow import default_registry, load_flow, system_turn, user_turn

FLOWS = Path(__file__).resolve().parent.parent / "flows"

MUSIC_DOC = {
    "Let's talk about music. Who do you listen to?": {
        "state": "stateX",
        "[$TOPIC={rock, jazz, pop}]": {"$TOPIC is a fine taste.": "stateX"},
        "error": {"We can talk about anything you like.": "stateX"},
    }
}


def load_example():
    return load_composite((FLOWS / "composite.json").read_text(encoding="utf-8"),
                          base_dir=FLOWS)


class TestScopedTable:
    def test_bare_names_stay_in_namespace(self):
        backing = {}
        table = ScopedTable(backing, "DF1", {"DF1", "DF2"})
        table["TOPIC"] = "rock"
        assert backing == {"DF1.TOPIC": "rock"}
        assert table["TOPIC"] == "rock"

    def test_qualified_names_cross_namespaces(self):
        backing = {"DF2.MOVIE": "parasite"}
        table = ScopedTable(backing, "DF1", {"DF1", "DF2"})
        assert table["DF2.MOVIE"] == "parasite"

    def test_unknown_namespace_prefix_is_a_plain_name(self):
        backing = {}
        table = ScopedTable(backing, "DF1", {"DF1"})
        table["X.Y"] = "v"
        assert backing == {"DF1.X.Y": "v"}

    def test_split_qualified(self):
        assert split_qualified("DF1.stateX") == ("DF1", "stateX")
        with pytest.raises(UnknownState):
            split_qualified("bare")


class TestAssembly:
    def test_first_module_initial_becomes_start(self):
        composite = CompositeFlow()
        composite.add_module(load_flow(MUSIC_DOC, default_registry()), "M")
        assert composite.start == "M.start"

    def test_duplicate_namespace(self):
        composite = CompositeFlow()
        composite.add_module(load_flow(MUSIC_DOC, default_registry()), "M")
        with pytest.raises(DuplicateNamespace):
            composite.add_module(load_flow(MUSIC_DOC, default_registry()), "M")

    def test_cross_transition_endpoints_validated(self):
        composite = load_example()
        with pytest.raises(UnknownState):
            composite.add_cross_transition("DF1.nowhere", "DF2.start", "[x]")
        with pytest.raises(UnknownState):
            composite.add_cross_transition("DF1.stateX", "DF3.start", "[x]")

    def test_cross_transition_source_must_be_user_state(self):
        composite = load_example()
        with pytest.raises(UnknownState, match="user state"):
            composite.add_cross_transition("DF1.start", "DF2.start", "[x]")

    def test_manifest_requires_modules(self):
        with pytest.raises(Exception, match="modules"):
            load_composite({"start": "A.start"})

    def test_inline_module_document(self):
        composite = load_composite({"modules": {"M": MUSIC_DOC}})
        assert composite.start == "M.start"
        assert composite.speaker("M.stateX") == "user"


class TestTurns:
    def test_namespace_switch_on_cross_match(self):
        composite = load_example()
        session = composite.new_session(seed=0)
        assert composite.system_turn(session).text == (
            "Let's talk about music. Who do you listen to?"
        )
        outcome = composite.user_turn(session, "actually let's discuss a movie")
        assert outcome.kind == "Matched"
        assert session.state == "DF2.start"
        assert composite.system_turn(session).text == (
            "Movies then! Have you seen anything good?"
        )

    def test_variables_scoped_per_namespace(self):
        composite = load_example()
        session = composite.new_session(seed=0)
        composite.system_turn(session)
        composite.user_turn(session, "mostly jazz")
        assert session.table == {"DF1.TOPIC": "jazz"}
        composite.system_turn(session)  # "jazz is a fine taste."
        composite.user_turn(session, "how about a film")
        composite.system_turn(session)
        composite.user_turn(session, "I loved parasite")
        assert session.table == {"DF1.TOPIC": "jazz", "DF2.MOVIE": "parasite"}

    def test_qualified_variable_readable_across_modules(self):
        composite = load_example()
        # a DF2 response that quotes what DF1 recorded
        flow2 = composite.modules["DF2"]
        session = composite.new_session(seed=0)
        composite.system_turn(session)
        composite.user_turn(session, "jazz for sure")
        scoped = composite.scoped(session, "DF2")
        assert scoped["DF1.TOPIC"] == "jazz"

    def test_error_transition_stays_in_namespace(self):
        composite = load_example()
        session = composite.new_session(seed=0)
        composite.system_turn(session)
        outcome = composite.user_turn(session, "zzz qqq")
        assert outcome.kind == "ErrorTransition"
        assert session.state.startswith("DF1.")
        assert '"state":"DF1.stateX"' in session.error_log[0]

    def test_terminal_accounts_for_cross_transitions(self):
        composite = CompositeFlow()
        composite.add_module(
            load_flow({"bye": {"state": "end"}}, default_registry()), "A"
        )
        composite.add_module(load_flow(MUSIC_DOC, default_registry()), "B")
        assert composite.is_terminal("A.end")
        composite.add_cross_transition("A.end", "B.start", "[more]")
        assert not composite.is_terminal("A.end")

    def test_single_module_matches_bare_flow_transcript(self):
        """Wrapping one flow in a composite changes nothing observable."""
        script = ["rock and roll", "garbage input", "some pop", "jazz", "pop"]
        for seed in range(20):
            flow = load_flow(MUSIC_DOC, default_registry())
            bare_session = flow.new_session(seed=seed)
            composite = CompositeFlow()
            composite.add_module(load_flow(MUSIC_DOC, default_registry()), "M")
            comp_session = composite.new_session(seed=seed)
            bare, comp = [], []
            for line in script:
                bare.append(system_turn(flow, bare_session).text)
                comp.append(composite.system_turn(comp_session).text)
                bare.append(user_turn(flow, bare_session, line).kind)
                comp.append(composite.user_turn(comp_session, line).kind)
            assert bare == comp, seed
            assert {f"M.{k}": v for k, v in bare_session.table.items()} == (
                comp_session.table
            )
