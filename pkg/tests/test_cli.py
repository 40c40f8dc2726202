"""The chat, validate, and serve command line entry points."""

import json
from pathlib import Path

from click.testing import CliRunner

from patter.cli import main

FLOWS = Path(__file__).resolve().parent.parent / "flows"
MOVIES = str(FLOWS / "movies.json")


def run(*args, **kwargs):
    return CliRunner().invoke(main, list(args), **kwargs)


class TestValidateCommand:
    def test_clean_flow_exits_zero(self):
        result = run("validate", MOVIES)
        assert result.exit_code == 0
        assert "0 error(s), 0 warning(s)" in result.output

    def test_unknown_function_exits_nonzero(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(
            {"hi": {"state": "u", "[#NOPE()]": {"state": "x"}, "error": "start"}}
        ), encoding="utf-8")
        result = run("validate", str(path))
        assert result.exit_code == 1
        assert "NOPE" in result.output and "1 error(s)" in result.output

    def test_warnings_do_not_fail(self, tmp_path):
        path = tmp_path / "warn.json"
        path.write_text(json.dumps(
            {"nice $THING you have": {"state": "u", "error": "start"}}
        ), encoding="utf-8")
        result = run("validate", str(path))
        assert result.exit_code == 0
        assert "0 error(s), 1 warning(s)" in result.output

    def test_functions_file_extends_registry(self, tmp_path):
        flow = tmp_path / "flow.json"
        flow.write_text(json.dumps(
            {"hi": {"state": "u", "[#COLORS()]": {"state": "x"}, "error": "start"}}
        ), encoding="utf-8")
        helpers = tmp_path / "fns.py"
        helpers.write_text(
            "FUNCTIONS = {'COLORS': lambda args, ctx: {'red', 'blue'}}\n",
            encoding="utf-8",
        )
        assert run("validate", str(flow)).exit_code == 1  # unknown without it
        assert run("validate", str(flow), "--functions", str(helpers)).exit_code == 0

    def test_raising_function_reported(self, tmp_path):
        flow = tmp_path / "flow.json"
        flow.write_text(json.dumps(
            {"hi": {"state": "u", "[#BAD()]": {"state": "x"}, "error": "start"}}
        ), encoding="utf-8")
        helpers = tmp_path / "fns.py"
        helpers.write_text(
            "def _bad(args, ctx):\n    raise RuntimeError('offline')\n"
            "FUNCTIONS = {'BAD': _bad}\n",
            encoding="utf-8",
        )
        result = run("validate", str(flow), "--functions", str(helpers))
        assert result.exit_code == 1
        assert "BAD" in result.output

    def test_emit_regex(self, tmp_path):
        path = tmp_path / "flow.json"
        path.write_text(json.dumps(
            {"hi": {"state": "u",
                    "[I {watched, saw} $MOVIE={Avengers, Star Wars}]":
                        {"state": "x"},
                    "error": "start"}}
        ), encoding="utf-8")
        result = run("validate", str(path), "--emit-regex")
        assert result.exit_code == 0
        assert r"(?P<MOVIE>" in result.output
        assert r"\b(?:watched)\b" in result.output


class TestChatCommand:
    def test_scripted_conversation(self):
        result = run("chat", MOVIES, "--seed", "0",
                     input="I watched avengers\n")
        assert result.exit_code == 0
        lines = result.output.splitlines()
        assert lines[0] == "bot: Have you seen any movies lately?"
        assert "bot: avengers is one of my favorites!" in result.output

    def test_repl_inspection_commands(self):
        result = run("chat", MOVIES, "--seed", "0",
                     input="I like tv\n:state\n:vars\n:quit\n")
        assert "[state] favorite" in result.output
        assert "[var] ENT = tv" in result.output

    def test_seeded_runs_are_byte_identical(self):
        script = "hello there\nsomething about movie\nparasite\n:quit\n"
        first = run("chat", MOVIES, "--seed", "7", input=script)
        second = run("chat", MOVIES, "--seed", "7", input=script)
        assert first.output == second.output

    def test_error_log_written(self, tmp_path):
        log = tmp_path / "err.jsonl"
        run("chat", MOVIES, "--seed", "0", "--log", str(log),
            input="qqq zzz\n:quit\n")
        record = json.loads(log.read_text(encoding="utf-8"))
        assert record == {"turn": 2, "state": "c", "input": "qqq zzz"}

    def test_refuses_invalid_spec(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(
            {"hi": {"state": "u", "[#NOPE()]": {"state": "x"}, "error": "start"}}
        ), encoding="utf-8")
        result = run("chat", str(path), input=":quit\n")
        assert result.exit_code == 1
