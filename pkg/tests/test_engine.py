"""Full exchanges: rule pass, arbitration, then the state machine."""

import json
from pathlib import Path

import pytest

from patter.composite import load_composite
from patter.engine import ChatEngine, ConversationEnded
from patter.flow import default_registry, load_flow

FLOWS = Path(__file__).resolve().parent.parent / "flows"


def movie_engine(seed=0, log_path=None):
    flow = load_flow((FLOWS / "movies.json").read_text(encoding="utf-8"),
                     default_registry(), base_dir=FLOWS)
    return ChatEngine(flow, seed=seed, log_path=log_path)


class TestMovieConversation:
    def test_happy_path(self):
        engine = movie_engine()
        assert engine.start().text == "Have you seen any movies lately?"
        report = engine.respond("I watched avengers recently")
        assert report.text == "avengers is one of my favorites!"
        assert report.kind == "Matched"
        assert report.committed.get("MOVIE") == "avengers"
        assert engine.ended  # the reached state has no way out

    def test_ontology_branch(self):
        engine = movie_engine()
        engine.start()
        report = engine.respond("I mostly watch tv")
        assert report.text == "What's your favorite tv?"
        assert engine.variables()["ENT"] == "tv"

    def test_error_branch_logs_and_recovers(self, tmp_path):
        log = tmp_path / "errors.jsonl"
        engine = movie_engine(log_path=str(log))
        engine.start()
        report = engine.respond("asdf qwerty")
        assert report.kind == "ErrorTransition"
        assert report.text == (
            "Sorry, I didn't catch that. Have you seen any movies lately?"
        )
        assert json.loads(log.read_text(encoding="utf-8")) == {
            "turn": 2, "state": "c", "input": "asdf qwerty"
        }
        # the conversation keeps going after the apology
        assert engine.respond("I saw parasite").text == (
            "parasite is one of my favorites!"
        )

    def test_respond_after_end_raises(self):
        engine = movie_engine()
        engine.start()
        engine.respond("I watched avengers")
        with pytest.raises(ConversationEnded):
            engine.respond("hello again")

    def test_same_seed_same_transcript(self):
        def transcript(seed):
            engine = movie_engine(seed=seed)
            lines = [engine.start().text]
            for text in ["hmm", "I like movie nights", "star wars"]:
                lines.append(engine.respond(text).text)
            return lines

        for seed in range(10):
            assert transcript(seed) == transcript(seed)


ARBITRATION_DOC = {
    "rules": {
        "[I have $USER_PET=#PET()]": "#ASSIGN($USER_LIKE=$USER_PET)",
        "#IF($USER_LIKE != None)": "I like $USER_LIKE too! (%s)",
    },
    "Do you have any pets?": {
        "state": "ask",
        "[{yes, yeah, I have}]": {"Pets make the best company.": "ask"},
        "error": {"Tell me about your animals sometime.": "ask"},
    },
}


def pet_engine(candidate_priority):
    doc = json.loads(json.dumps(ARBITRATION_DOC) % candidate_priority)
    return ChatEngine(load_flow(doc, default_registry()), seed=0)


class TestArbitration:
    def test_higher_candidate_suppresses_state_machine(self):
        engine = pet_engine(2.0)
        engine.start()
        report = engine.respond("I have a dog")
        assert report.kind == "RuleResponse"
        assert report.text == "I like dog too!"
        assert report.fired_rules == [0, 1]
        assert engine.session.state == "ask"  # the machine stood still
        assert engine.variables()["USER_LIKE"] == "dog"

    def test_equal_priority_prefers_state_machine(self):
        engine = pet_engine(1.0)
        engine.start()
        report = engine.respond("I have a dog")
        assert report.kind == "Matched"
        assert report.text == "Pets make the best company."
        assert report.fired_rules == [0, 1]  # the rules still ran and committed
        assert engine.variables()["USER_LIKE"] == "dog"

    def test_candidate_beats_error_transition(self):
        # no state-machine pattern matches; the would-be state comes from the
        # error transition and the 0.5 candidate still loses to its 1.0 reply
        engine = pet_engine(0.5)
        engine.start()
        engine.respond("I have a dog")  # sets USER_LIKE
        report = engine.respond("qqq zzz")  # only the 0.5 rule applies
        assert report.fired_rules == [1]
        assert report.kind == "ErrorTransition"
        assert report.text == "Tell me about your animals sometime."

    def test_rule_response_advances_turn_counter(self):
        engine = pet_engine(2.0)
        engine.start()
        before = engine.session.turn
        report = engine.respond("I have a cat")
        assert report.turn == before + 1


class TestCompositeEngine:
    def test_cross_module_conversation(self):
        composite = load_composite(
            (FLOWS / "composite.json").read_text(encoding="utf-8"), base_dir=FLOWS
        )
        engine = ChatEngine(composite, seed=0)
        assert engine.start().state == "DF1.stateX"
        engine.respond("jazz mostly")
        report = engine.respond("let's switch to a movie")
        assert report.state == "DF2.stateY"
        assert report.text == "Movies then! Have you seen anything good?"
        engine.respond("parasite was great")
        assert engine.variables() == {"DF1.TOPIC": "jazz", "DF2.MOVIE": "parasite"}
