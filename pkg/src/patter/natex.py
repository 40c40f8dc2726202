"""The natex pattern language: AST, parser, formatter, and static checks.

A natex is a pattern over natural-language utterances.  The same expression
doubles as a matcher (compiled to a regular expression) and as a response
generator (disjunctions become random choices).  Surface syntax:

    [t1 t2 ...]        flexible sequence: terms in order, arbitrary gaps
    {a, b, c}          disjunction; alternatives may be multi-word
    $NAME              variable reference
    $NAME=expr         assignment of the matched/generated text
    #NAME(a1, a2)      function call; args may include `x == y` / `x != y`
    word               literal token; backslash escapes metacharacters
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from patter.diagnostics import Code, Diagnostic, NatexError, Span, error, warning

METACHARS = "{}[]$#=,"
MAX_DEPTH = 64

# Comparison pseudo-calls produced for `lhs != rhs` / `lhs == rhs` inside
# function argument lists.
COMPARISON_OPS = ("!=", "==")


class Kind(enum.Enum):
    LITERAL = "Literal"
    FLEX = "FlexSequence"
    RIGID = "RigidSequence"
    DISJUNCTION = "Disjunction"
    ASSIGNMENT = "Assignment"
    VARIABLE = "VariableRef"
    CALL = "FunctionCall"


@dataclass
class Node:
    """One natex parse-tree node.

    ``text`` carries the payload: the token for literals, the variable name
    for references/assignments, the function name (or comparison operator)
    for calls.  ``span`` is None for synthesized nodes and excluded from
    equality.
    """

    kind: Kind
    children: list["Node"] = field(default_factory=list)
    text: str = ""
    span: Span | None = field(default=None, compare=False)

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()

    def __repr__(self) -> str:  # compact, for test failure output
        payload = f"({self.text!r})" if self.text else ""
        kids = f"[{', '.join(map(repr, self.children))}]" if self.children else ""
        return f"{self.kind.value}{payload}{kids}"


def lit(text: str, span: Span | None = None) -> Node:
    return Node(Kind.LITERAL, [], text, span)


def flex(children: list[Node], span: Span | None = None) -> Node:
    return Node(Kind.FLEX, children, "", span)


def rigid(children: list[Node], span: Span | None = None) -> Node:
    return Node(Kind.RIGID, children, "", span)


def disj(children: list[Node], span: Span | None = None) -> Node:
    return Node(Kind.DISJUNCTION, children, "", span)


def assign(name: str, value: Node, span: Span | None = None) -> Node:
    return Node(Kind.ASSIGNMENT, [value], name, span)


def var(name: str, span: Span | None = None) -> Node:
    return Node(Kind.VARIABLE, [], name, span)


def call(name: str, args: list[Node], span: Span | None = None) -> Node:
    return Node(Kind.CALL, args, name, span)


def is_comparison(node: Node) -> bool:
    return node.kind is Kind.CALL and node.text in COMPARISON_OPS


def _is_name_char(ch: str) -> bool:
    return ch.isalnum() or ch in "_."


class _Parser:
    def __init__(self, source: str):
        self.src = source
        self.i = 0
        self.depth = 0

    # -- low-level helpers ------------------------------------------------

    def _fail(self, message: str, start: int, end: int | None = None) -> NatexError:
        span = Span(start, self.i if end is None else end)
        return NatexError(error(Code.SYNTAX_ERROR, message, span))

    def _peek(self) -> str:
        return self.src[self.i] if self.i < len(self.src) else ""

    def _skip_ws(self):
        while self.i < len(self.src) and self.src[self.i].isspace():
            self.i += 1

    def _at_word(self, in_call: bool) -> bool:
        ch = self._peek()
        if not ch or ch.isspace() or ch in METACHARS:
            return False
        if in_call and ch in "()":
            return False
        return True

    # -- grammar ----------------------------------------------------------

    def parse(self) -> Node:
        start = self.i
        # at top level commas are ordinary text (think generated sentences);
        # they only separate terms inside bracketed constructs
        terms = self._term_sequence(stop="", in_call=False, comma_separates=False)
        self._skip_ws()
        if self.i < len(self.src):
            raise self._fail("trailing input after pattern", self.i, len(self.src))
        if not terms:
            raise self._fail("empty pattern", start, len(self.src))
        if len(terms) == 1 and terms[0].kind is Kind.FLEX:
            return terms[0]
        return rigid(terms, Span(terms[0].span.start, terms[-1].span.end))

    def _term_sequence(
        self, stop: str, in_call: bool, comma_separates: bool = True
    ) -> list[Node]:
        terms: list[Node] = []
        while True:
            self._skip_ws()
            ch = self._peek()
            if not ch or (stop and ch in stop):
                return terms
            if ch == ",":
                if comma_separates:
                    # commas separate terms inside [...] just like whitespace
                    self.i += 1
                else:
                    terms.append(lit(",", Span(self.i, self.i + 1)))
                    self.i += 1
                continue
            terms.append(self._term(in_call))

    def _enter(self, at: int):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise self._fail(f"nesting deeper than {MAX_DEPTH}", at)

    def _term(self, in_call: bool) -> Node:
        ch = self._peek()
        if ch == "[":
            return self._flex()
        if ch == "{":
            return self._disjunction()
        if ch == "$":
            return self._variable_or_assignment(in_call)
        if ch == "#":
            return self._call()
        if ch in "]})" or ch in METACHARS:
            raise self._fail(f"unexpected {ch!r}", self.i, self.i + 1)
        return self._word(in_call)

    def _flex(self) -> Node:
        start = self.i
        self._enter(start)
        self.i += 1  # [
        terms = self._term_sequence(stop="]", in_call=False)
        if self._peek() != "]":
            raise self._fail("unbalanced '['", start)
        if not terms:
            raise self._fail("empty sequence", start, self.i + 1)
        self.i += 1
        self.depth -= 1
        return flex(terms, Span(start, self.i))

    def _disjunction(self) -> Node:
        start = self.i
        self._enter(start)
        self.i += 1  # {
        alternatives: list[Node] = []
        while True:
            alt_terms = self._term_sequence(stop="},", in_call=False)
            self._skip_ws()
            ch = self._peek()
            if alt_terms:
                alternatives.append(self._merge_alternative(alt_terms))
            elif ch == ",":
                raise self._fail("empty disjunction alternative", self.i, self.i + 1)
            if ch == ",":
                self.i += 1
                continue
            if ch == "}":
                break
            raise self._fail("unbalanced '{'", start)
        if not alternatives:
            raise self._fail("empty disjunction", start, self.i + 1)
        self.i += 1
        self.depth -= 1
        return disj(alternatives, Span(start, self.i))

    def _merge_alternative(self, terms: list[Node]) -> Node:
        if len(terms) == 1:
            return terms[0]
        span = Span(terms[0].span.start, terms[-1].span.end)
        if all(t.kind is Kind.LITERAL for t in terms):
            return lit(" ".join(t.text for t in terms), span)
        return rigid(terms, span)

    def _name(self, what: str) -> tuple[str, int]:
        start = self.i
        while self.i < len(self.src) and _is_name_char(self.src[self.i]):
            self.i += 1
        # a trailing period is sentence punctuation, not part of the name
        while self.i > start and self.src[self.i - 1] == ".":
            self.i -= 1
        name = self.src[start : self.i]
        if not name or name.startswith("."):
            raise self._fail(f"dangling {what!r}", start - 1, start)
        return name, start

    def _variable_or_assignment(self, in_call: bool) -> Node:
        sigil = self.i
        self.i += 1  # $
        name, _ = self._name("$")
        if self._peek() == "=" and not self.src.startswith("==", self.i):
            self._enter(sigil)
            self.i += 1
            self._skip_ws()
            if not self._peek():
                raise self._fail("assignment missing a value", sigil)
            value = self._term(in_call)
            self.depth -= 1
            return assign(name, value, Span(sigil, self.i))
        return var(name, Span(sigil, self.i))

    def _call(self) -> Node:
        sigil = self.i
        self.i += 1  # '#'
        name, _ = self._name("#")
        if self._peek() != "(":
            raise self._fail(f"function #{name} missing '('", sigil, self.i)
        self._enter(sigil)
        self.i += 1
        args: list[Node] = []
        while True:
            self._skip_ws()
            ch = self._peek()
            if ch == ")":
                break
            if not ch:
                raise self._fail("unbalanced '(' in function call", sigil)
            args.append(self._argument())
            self._skip_ws()
            if self._peek() == ",":
                self.i += 1
        self.i += 1  # ')'
        self.depth -= 1
        return call(name, args, Span(sigil, self.i))

    def _argument(self) -> Node:
        """One function argument: a term sequence, optionally a comparison."""
        items: list[Node] = []
        operator: str | None = None
        op_at = self.i
        while True:
            self._skip_ws()
            if self.src.startswith("!=", self.i) or self.src.startswith("==", self.i):
                if operator is not None:
                    raise self._fail("chained comparison", self.i, self.i + 2)
                operator, op_at = self.src[self.i : self.i + 2], self.i
                items.append(lit(operator, Span(self.i, self.i + 2)))
                self.i += 2
                continue
            ch = self._peek()
            if not ch or ch in ",)":
                break
            items.append(self._term(in_call=True))
        if not items:
            raise self._fail("empty function argument", self.i, self.i + 1)
        if operator is None:
            return self._merge_alternative(items)
        at = items.index(next(t for t in items if t.text == operator))
        lhs, rhs = items[:at], items[at + 1 :]
        if not lhs or not rhs:
            raise self._fail(f"comparison missing an operand", op_at, op_at + 2)
        span = Span(items[0].span.start, items[-1].span.end)
        return call(operator, [self._merge_alternative(lhs), self._merge_alternative(rhs)], span)

    def _word(self, in_call: bool) -> Node:
        start = self.i
        chars: list[str] = []
        while self.i < len(self.src):
            ch = self.src[self.i]
            if ch == "\\" and self.i + 1 < len(self.src):
                chars.append(self.src[self.i + 1])
                self.i += 2
                continue
            if ch.isspace() or ch in METACHARS:
                break
            if in_call and ch in "()":
                break
            if in_call and (
                self.src.startswith("!=", self.i) or self.src.startswith("==", self.i)
            ):
                break
            chars.append(ch)
            self.i += 1
        return lit("".join(chars), Span(start, self.i))


def parse(source: str) -> Node:
    """Parse natex source into an AST; raises NatexError on syntax errors."""
    return _Parser(source).parse()


def format(ast: Node) -> str:
    """Render an AST back to natex source; inverse of parse up to spans."""
    return _format(ast, top=True)


def _escape(text: str) -> str:
    out = []
    for ch in text:
        if ch in METACHARS or ch == "\\":
            out.append("\\")
        out.append(ch)
    return "".join(out)


def _format(node: Node, top: bool = False) -> str:
    k = node.kind
    if k is Kind.LITERAL:
        return _escape(node.text)
    if k is Kind.FLEX:
        return "[" + " ".join(_format(c) for c in node.children) + "]"
    if k is Kind.RIGID:
        return " ".join(_format(c) for c in node.children)
    if k is Kind.DISJUNCTION:
        return "{" + ", ".join(_format(c) for c in node.children) + "}"
    if k is Kind.ASSIGNMENT:
        return f"${node.text}=" + _format(node.children[0])
    if k is Kind.VARIABLE:
        return f"${node.text}"
    if is_comparison(node):
        left, right = node.children
        return f"{_format(left)} {node.text} {_format(right)}"
    return f"#{node.text}(" + ", ".join(_format(a) for a in node.children) + ")"


def assigned_names(ast: Node) -> set[str]:
    """Variable names written by this pattern ($V= and #ASSIGN targets)."""
    return {n.text for n in ast.walk() if n.kind is Kind.ASSIGNMENT}


def static_check(
    ast: Node,
    known_functions: set[str],
    assignable_variables: set[str],
) -> list[Diagnostic]:
    """Pre-runtime checks: unknown functions, unbound variable references."""
    bound = assignable_variables | assigned_names(ast)
    diags: list[Diagnostic] = []
    for node in ast.walk():
        span = node.span or Span(0, 0)
        if node.kind is Kind.CALL and not is_comparison(node):
            if node.text not in known_functions:
                diags.append(
                    error(
                        Code.UNKNOWN_FUNCTION,
                        f"call to a non-existing function: #{node.text}",
                        span,
                    )
                )
        elif node.kind is Kind.VARIABLE and node.text not in bound:
            diags.append(
                warning(
                    Code.UNBOUND_VARIABLE,
                    f"reference to a non-existing variable: ${node.text}",
                    span,
                )
            )
    diags.sort(key=lambda d: (d.span.start, d.span.end))
    return diags
