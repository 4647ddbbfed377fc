"""Exception hierarchy shared by the grounder pipeline."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SourceSpan:
    """Location of a token in the source text (1-based line and column)."""

    start: int
    end: int
    line: int
    column: int

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError("span start must not exceed end")

    def __str__(self):
        return f"{self.line}:{self.column}"


class ASPError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(ASPError):
    def __init__(self, span: SourceSpan, message: str, source: str | None = None):
        self.span = span
        self.message = message
        self.source = source
        where = f"{source}:{span}" if source else str(span)
        super().__init__(f"{where}: {message}")


class UnsupportedFeature(ParseError):
    """Syntax that exists in ASP-Core-2 but is outside the supported dialect."""


class SafetyError(ASPError):
    def __init__(self, rule, variables):
        self.rule = rule
        self.variables = frozenset(variables)
        names = ", ".join(sorted(self.variables))
        super().__init__(f"unsafe rule `{rule}`: unbound variables {names}")


class EvaluationError(ASPError, ArithmeticError):
    """Integer overflow, division by zero or arithmetic over non-integers."""


class BudgetExceeded(ASPError):
    pass


class GroundingTimeout(BudgetExceeded):
    pass


class MissingStats(ASPError, KeyError):
    """No statistics are available for a predicate signature."""

    def __init__(self, signature):
        self.signature = signature
        super().__init__(signature)

    def __str__(self):
        name, arity = self.signature
        return f"no statistics for predicate {name}/{arity}"


class DecompositionDegenerate(ASPError):
    """A tree decomposition that would reproduce the input rule unchanged."""


class InternalError(ASPError, AssertionError):
    pass
