"""Parser and printer for the supported ASP-Core-2 subset.

Accepted: disjunctive heads (``|``), ``:-``, default negation ``not``,
comparisons, integer arithmetic, functional terms, ``_`` and intervals in
facts, ``%`` line comments.  Aggregates, choice rules, weak constraints,
queries, directives, strings and classical negation are rejected with
:class:`UnsupportedFeature`.
"""

from __future__ import annotations

import re

from .errors import ParseError, SourceSpan, UnsupportedFeature
from .syntax import (
    AnonymousVariable,
    ArithmeticTerm,
    Atom,
    Comparison,
    Constant,
    FunctionalTerm,
    IntervalTerm,
    Literal,
    Program,
    Rule,
    Variable,
)

_TOKEN_SPEC = [
    ("WS", r"[ \t\r\n]+"),
    ("COMMENT", r"%[^\n]*"),
    ("IF", r":-"),
    ("WEAK", r":~"),
    ("DOTS", r"\.\."),
    ("DOT", r"\."),
    ("COMMA", r","),
    ("BAR", r"\|"),
    ("LPAREN", r"\("),
    ("RPAREN", r"\)"),
    ("CMP", r"!=|<>|<=|>=|==|=|<|>"),
    ("ARITH", r"[+\-*/]"),
    ("INT", r"\d+"),
    ("VAR", r"[A-Z][A-Za-z0-9_']*"),
    ("ANON", r"_(?![A-Za-z0-9_])"),
    ("IDENT", r"[a-z][A-Za-z0-9_']*"),
    ("UNSUPPORTED", r"[{}#?\"@;:\[\]\\&~^]|_[A-Za-z0-9_]+"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in _TOKEN_SPEC))

_FEATURES = {
    "{": "choice rules", "}": "choice rules", "#": "aggregates and directives",
    "?": "queries", '"': "strings", ":~": "weak constraints", "@": "external terms",
    ";": "pooling", ":": "conditional literals",
}


class _Token:
    __slots__ = ("kind", "text", "span")

    def __init__(self, kind, text, span):
        self.kind = kind
        self.text = text
        self.span = span

    def __repr__(self):
        return f"{self.kind}({self.text!r})"


def _tokenize(text: str, source):
    tokens = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        span_at = SourceSpan(pos, pos + 1, line, pos - line_start + 1)
        if m is None:
            raise ParseError(span_at, f"unexpected character {text[pos]!r}", source)
        kind, value = m.lastgroup, m.group()
        span = SourceSpan(pos, m.end(), line, pos - line_start + 1)
        if kind == "UNSUPPORTED" or kind == "WEAK":
            feature = _FEATURES.get(value, f"token {value!r}")
            raise UnsupportedFeature(span, f"unsupported syntax: {feature}", source)
        if kind not in ("WS", "COMMENT"):
            tokens.append(_Token(kind, value, span))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rindex("\n") + 1
        pos = m.end()
    end = SourceSpan(len(text), len(text), line, len(text) - line_start + 1)
    tokens.append(_Token("EOF", "", end))
    return tokens


class _Parser:
    def __init__(self, text, source):
        self.tokens = _tokenize(text, source)
        self.i = 0
        self.source = source

    # token helpers
    def peek(self, offset=0):
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def next(self):
        tok = self.tokens[self.i]
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def error(self, tok, message):
        if tok.kind == "EOF":
            message = f"{message} at end of input"
        return ParseError(tok.span, message, self.source)

    def expect(self, kind, what=None):
        tok = self.next()
        if tok.kind != kind:
            raise self.error(tok, f"expected {what or kind}, found {tok.text or 'nothing'!r}")
        return tok

    # grammar
    def program(self):
        rules = []
        while self.peek().kind != "EOF":
            rules.append(self.statement())
        return Program(tuple(rules))

    def statement(self):
        first = self.peek()
        head = []
        if first.kind != "IF":
            head = self.head()
        body = []
        if self.peek().kind == "IF":
            self.next()
            if self.peek().kind != "DOT":
                body = self.body()
            elif head:
                raise self.error(self.peek(), "empty rule body")
        elif not head:
            raise self.error(first, "expected a rule")
        self.expect("DOT", "'.'")
        rule = Rule(tuple(head), tuple(body))
        self.check_placement(rule, first)
        return rule

    def check_placement(self, rule, tok):
        fact = rule.is_fact
        for atom in rule.head:
            for arg in atom.args:
                if _contains(arg, IntervalTerm) and not fact:
                    raise self.error(tok, "intervals are only supported in facts")
                if _contains(arg, IntervalTerm) and not isinstance(arg, IntervalTerm):
                    raise UnsupportedFeature(tok.span, "nested intervals are not supported", self.source)
                if _contains(arg, AnonymousVariable):
                    raise self.error(tok, "anonymous variable in rule head")
        for lit in rule.body:
            terms = (lit.left, lit.right) if isinstance(lit, Comparison) else lit.atom.args
            for term in terms:
                if _contains(term, IntervalTerm):
                    raise self.error(tok, "intervals are only supported in facts")
                if _contains(term, AnonymousVariable) and (
                        isinstance(lit, Comparison) or lit.negated or isinstance(term, ArithmeticTerm)):
                    raise UnsupportedFeature(
                        tok.span, "anonymous variables are only supported in positive atoms", self.source)

    def head(self):
        atoms = [self.atom()]
        while self.peek().kind == "BAR":
            self.next()
            atoms.append(self.atom())
        return atoms

    def body(self):
        elems = [self.body_element()]
        while self.peek().kind == "COMMA":
            self.next()
            elems.append(self.body_element())
        return elems

    def body_element(self):
        tok = self.peek()
        if tok.kind == "IDENT" and tok.text == "not" and self.peek(1).kind in ("IDENT", "ARITH"):
            self.next()
            if self.peek().kind == "IDENT" and self.peek().text == "not":
                raise UnsupportedFeature(self.peek().span, "double negation", self.source)
            return Literal(self.atom(), negated=True)
        if tok.kind == "ARITH" and tok.text == "-" and self.peek(1).kind == "IDENT":
            raise UnsupportedFeature(tok.span, "classical negation", self.source)
        left = self.term()
        if self.peek().kind == "CMP":
            op = self.next().text
            op = {"==": "=", "<>": "!="}.get(op, op)
            right = self.term()
            return Comparison(op, left, right)
        return Literal(self._as_atom(left, tok))

    def _as_atom(self, term, tok):
        if isinstance(term, Constant) and isinstance(term.value, str):
            return Atom(term.value, ())
        if isinstance(term, FunctionalTerm):
            return Atom(term.name, term.args)
        raise self.error(tok, f"expected an atom or comparison, found {term}")

    def atom(self):
        tok = self.peek()
        if tok.kind == "ARITH" and tok.text == "-":
            raise UnsupportedFeature(tok.span, "classical negation", self.source)
        name = self.expect("IDENT", "a predicate name").text
        return Atom(name, tuple(self.arguments()))

    def arguments(self):
        if self.peek().kind != "LPAREN":
            return []
        self.next()
        args = [self.term()]
        while self.peek().kind == "COMMA":
            self.next()
            args.append(self.term())
        self.expect("RPAREN", "')'")
        return args

    def term(self):
        left = self.product()
        while self.peek().kind == "ARITH" and self.peek().text in "+-":
            op_tok = self.next()
            right = self.product()
            left = self._arith(op_tok, left, right)
        return left

    def product(self):
        left = self.unary()
        while self.peek().kind == "ARITH" and self.peek().text in "*/":
            op_tok = self.next()
            right = self.unary()
            left = self._arith(op_tok, left, right)
        return left

    def _arith(self, tok, left, right):
        try:
            return ArithmeticTerm(tok.text, left, right)
        except ValueError as exc:
            raise self.error(tok, str(exc)) from None

    def unary(self):
        tok = self.peek()
        if tok.kind == "ARITH" and tok.text == "-":
            self.next()
            operand = self.unary()
            if isinstance(operand, Constant) and isinstance(operand.value, int):
                return Constant(-operand.value)
            return self._arith(tok, Constant(0), operand)
        return self.primary()

    def primary(self):
        tok = self.next()
        if tok.kind == "INT":
            low = int(tok.text)
            if self.peek().kind == "DOTS":
                self.next()
                neg = self.peek().kind == "ARITH" and self.peek().text == "-"
                if neg:
                    self.next()
                high_tok = self.expect("INT", "an integer")
                high = -int(high_tok.text) if neg else int(high_tok.text)
                if low > high:
                    raise self.error(tok, f"empty interval {low}..{high}")
                return IntervalTerm(low, high)
            return Constant(low)
        if tok.kind == "VAR":
            return Variable(tok.text)
        if tok.kind == "ANON":
            return AnonymousVariable()
        if tok.kind == "IDENT":
            if tok.text == "not":
                raise self.error(tok, "unexpected 'not'")
            if self.peek().kind == "LPAREN":
                return FunctionalTerm(tok.text, tuple(self.arguments()))
            return Constant(tok.text)
        if tok.kind == "LPAREN":
            inner = self.term()
            self.expect("RPAREN", "')'")
            return inner
        raise self.error(tok, f"expected a term, found {tok.text or 'nothing'!r}")


def _contains(term, kind) -> bool:
    if isinstance(term, kind):
        return True
    if isinstance(term, FunctionalTerm):
        return any(_contains(a, kind) for a in term.args)
    if isinstance(term, ArithmeticTerm):
        return _contains(term.left, kind) or _contains(term.right, kind)
    return False


def parse_program(text: str, source: str | None = None) -> Program:
    """Parse program text; ``source`` names the input in error messages."""
    return _Parser(text, source).program()


def parse_rule(text: str) -> Rule:
    program = parse_program(text)
    if len(program.rules) != 1:
        raise ValueError(f"expected exactly one rule, got {len(program.rules)}")
    return program.rules[0]


def render_program(program: Program) -> str:
    """One rule per line, in program order; empty program renders as ''."""
    if not program.rules:
        return ""
    return "\n".join(str(rule) for rule in program.rules) + "\n"
