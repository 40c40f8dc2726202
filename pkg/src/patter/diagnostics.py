"""Diagnostics shared across the parser, compiler, and validators."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"


class Code(enum.Enum):
    SYNTAX_ERROR = "SyntaxError"
    UNKNOWN_FUNCTION = "UnknownFunction"
    UNBOUND_VARIABLE = "UnboundVariable"
    TYPE_MISMATCH = "TypeMismatch"
    FUNCTION_FAILURE = "FunctionFailure"


@dataclass(frozen=True)
class Span:
    """Half-open character range into the source the node came from."""

    start: int
    end: int

    def contains(self, other: "Span") -> bool:
        return self.start <= other.start and other.end <= self.end


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: Code
    message: str
    span: Span
    path: str | None = field(default=None)

    def render(self) -> str:
        where = f"{self.path}: " if self.path else ""
        return (
            f"{self.severity.value}[{self.code.value}] {where}{self.message}"
            f" (at {self.span.start}..{self.span.end})"
        )


class NatexError(Exception):
    """Raised when an operation cannot proceed; carries one diagnostic."""

    def __init__(self, diagnostic: Diagnostic):
        super().__init__(diagnostic.render())
        self.diagnostic = diagnostic


def error(code: Code, message: str, span: Span, path: str | None = None) -> Diagnostic:
    return Diagnostic(Severity.ERROR, code, message, span, path)


def warning(code: Code, message: str, span: Span, path: str | None = None) -> Diagnostic:
    return Diagnostic(Severity.WARNING, code, message, span, path)
