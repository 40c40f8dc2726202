"""Parser, formatter, and static-check behaviour."""

import pytest
from hypothesis import given, settings

from patter import natex
from patter.diagnostics import Code, NatexError, Severity
from patter.natex import Kind, format, parse, static_check

from strategies import roundtrip_asts


def kinds(node):
    return [c.kind for c in node.children]


class TestParse:
    def test_movie_pattern_shape(self):
        ast = parse("[I {watched, saw} $MOVIE={Avengers, Star Wars}]")
        assert ast.kind is Kind.FLEX
        assert kinds(ast) == [Kind.LITERAL, Kind.DISJUNCTION, Kind.ASSIGNMENT]
        assert ast.children[0].text == "I"
        assert [c.text for c in ast.children[1].children] == ["watched", "saw"]
        movie = ast.children[2]
        assert movie.text == "MOVIE"
        assert [c.text for c in movie.children[0].children] == ["Avengers", "Star Wars"]

    def test_single_token_is_rigid(self):
        ast = parse("hello")
        assert ast.kind is Kind.RIGID
        assert kinds(ast) == [Kind.LITERAL]
        assert ast.children[0].text == "hello"

    def test_function_call_assignment(self):
        ast = parse("[I {watched, saw} $MOVIE=#MDB()]")
        movie = ast.children[2]
        assert movie.kind is Kind.ASSIGNMENT
        fn = movie.children[0]
        assert fn.kind is Kind.CALL and fn.text == "MDB" and fn.children == []

    def test_commas_and_spaces_inside_brackets(self):
        assert parse("[a, b]") == parse("[a b]")

    def test_comparison_argument(self):
        ast = parse("#IF($USER_LIKE != None)")
        cond = ast.children[0].children[0]
        assert natex.is_comparison(cond) and cond.text == "!="
        lhs, rhs = cond.children
        assert lhs.kind is Kind.VARIABLE and lhs.text == "USER_LIKE"
        assert rhs.kind is Kind.LITERAL and rhs.text == "None"

    def test_top_level_comma_is_text(self):
        ast = parse("Sorry, I didn't catch that.")
        assert [c.text for c in ast.children][:2] == ["Sorry", ","]

    def test_escaped_metacharacter(self):
        ast = parse(r"a \{ b")
        assert [c.text for c in ast.children] == ["a", "{", "b"]

    @pytest.mark.parametrize(
        "source",
        ["{a,", "[a", "{}", "$", "#F", "#F(a", "a } b", "[]", ""],
    )
    def test_syntax_errors(self, source):
        with pytest.raises(NatexError) as exc:
            parse(source)
        assert exc.value.diagnostic.code is Code.SYNTAX_ERROR

    def test_unbalanced_brace_span_points_at_brace(self):
        with pytest.raises(NatexError) as exc:
            parse("{a,")
        assert exc.value.diagnostic.span.start == 0

    def test_trailing_garbage(self):
        with pytest.raises(NatexError):
            parse("[a] ]")

    def test_depth_limit(self):
        deep = "[" * 70 + "a" + "]" * 70
        with pytest.raises(NatexError):
            parse(deep)

    def test_spans_nest_within_parent(self):
        source = "[I {watched, saw} $MOVIE={Avengers, Star Wars}]"
        ast = parse(source)
        for node in ast.walk():
            assert node.span is not None
            for child in node.children:
                assert node.span.contains(child.span)
            assert 0 <= node.span.start <= node.span.end <= len(source)

    def test_deterministic(self):
        src = "[I {watched, saw} $MOVIE={Avengers, Star Wars}]"
        assert parse(src) == parse(src)


class TestFormat:
    def test_flex_identity(self):
        assert format(natex.flex([natex.lit("I")])) == "[I]"

    def test_movie_pattern_roundtrip_text(self):
        src = "[I {watched, saw} $MOVIE={Avengers, Star Wars}]"
        assert format(parse(src)) == src

    def test_genre_assignment(self):
        ast = natex.assign("GENRE", natex.disj(
            [natex.lit("action"), natex.lit("horror"), natex.lit("drama")]
        ))
        assert format(ast) == "$GENRE={action, horror, drama}"

    @settings(max_examples=200)
    @given(roundtrip_asts())
    def test_parse_format_roundtrip(self, ast):
        assert parse(format(ast)) == ast


class TestStaticCheck:
    def test_unknown_function(self):
        diags = static_check(parse("[#NOPE()]"), {"ONT"}, set())
        assert [d.code for d in diags] == [Code.UNKNOWN_FUNCTION]
        assert diags[0].severity is Severity.ERROR
        assert "NOPE" in diags[0].message

    def test_bound_variable_clean(self):
        assert static_check(parse("[$X]"), set(), {"X"}) == []

    def test_unbound_variable_warning(self):
        diags = static_check(parse("What's your favorite $ENT?"), set(), set())
        assert [d.code for d in diags] == [Code.UNBOUND_VARIABLE]
        assert diags[0].severity is Severity.WARNING
        assert "ENT" in diags[0].message

    def test_assignment_in_same_pattern_counts_as_bound(self):
        diags = static_check(parse("[$X={a, b} $X]"), set(), set())
        assert diags == []

    def test_ordering_by_span(self):
        diags = static_check(parse("[$A $B #NO()]"), set(), set())
        assert [d.span.start for d in diags] == sorted(d.span.start for d in diags)
        assert len(diags) == 3
