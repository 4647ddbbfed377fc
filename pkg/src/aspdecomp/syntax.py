"""Non-ground program representation and structural checks.

All AST values are frozen dataclasses, so rules and programs can be hashed,
compared structurally and shared freely.  Variables are identified by name;
the anonymous variable ``_`` is its own term type and never enters a
variable set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterator, NamedTuple, Union

from .errors import EvaluationError

INT_MIN = -(2 ** 63)
INT_MAX = 2 ** 63 - 1

ARITH_OPS = ("+", "-", "*", "/")
COMPARISON_OPS = ("=", "!=", "<", "<=", ">", ">=")
_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}


# -- terms -----------------------------------------------------------------

@dataclass(frozen=True)
class Constant:
    value: Union[int, str]

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Variable:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class AnonymousVariable:
    def __str__(self):
        return "_"


@dataclass(frozen=True)
class FunctionalTerm:
    name: str
    args: tuple

    def __str__(self):
        return f"{self.name}({','.join(map(str, self.args))})"


@dataclass(frozen=True)
class ArithmeticTerm:
    op: str
    left: "Term"
    right: "Term"

    def __post_init__(self):
        if self.op not in ARITH_OPS:
            raise ValueError(f"unknown arithmetic operator {self.op!r}")
        for operand in (self.left, self.right):
            if not isinstance(operand, (Constant, Variable, ArithmeticTerm)):
                raise ValueError("arithmetic operands must be integers, variables or arithmetic terms")
            if isinstance(operand, Constant) and not isinstance(operand.value, int):
                raise ValueError("arithmetic over symbolic constants")

    def __str__(self):
        prec = _PRECEDENCE[self.op]
        left = str(self.left)
        if isinstance(self.left, ArithmeticTerm) and _PRECEDENCE[self.left.op] < prec:
            left = f"({left})"
        right = str(self.right)
        if isinstance(self.right, ArithmeticTerm) and _PRECEDENCE[self.right.op] <= prec:
            right = f"({right})"
        elif isinstance(self.right, Constant) and self.right.value < 0:
            right = f"({right})"
        return f"{left}{self.op}{right}"


@dataclass(frozen=True)
class IntervalTerm:
    low: int
    high: int

    def __post_init__(self):
        if self.low > self.high:
            raise ValueError(f"empty interval {self.low}..{self.high}")

    def __str__(self):
        return f"{self.low}..{self.high}"

    def values(self):
        return range(self.low, self.high + 1)


Term = Union[Constant, Variable, AnonymousVariable, FunctionalTerm, ArithmeticTerm, IntervalTerm]


def term_variables(term) -> Iterator[str]:
    """Names of all named variables occurring in ``term``."""
    if isinstance(term, Variable):
        yield term.name
    elif isinstance(term, FunctionalTerm):
        for arg in term.args:
            yield from term_variables(arg)
    elif isinstance(term, ArithmeticTerm):
        yield from term_variables(term.left)
        yield from term_variables(term.right)


def binding_variables(term) -> Iterator[str]:
    """Variables that matching ``term`` against a ground value would bind.

    Arithmetic subterms bind nothing; they must be evaluable beforehand.
    """
    if isinstance(term, Variable):
        yield term.name
    elif isinstance(term, FunctionalTerm):
        for arg in term.args:
            yield from binding_variables(arg)


def arithmetic_variables(term) -> Iterator[str]:
    """Variables that occur inside arithmetic subterms of ``term``."""
    if isinstance(term, ArithmeticTerm):
        yield from term_variables(term)
    elif isinstance(term, FunctionalTerm):
        for arg in term.args:
            yield from arithmetic_variables(arg)


def has_arithmetic(term) -> bool:
    if isinstance(term, ArithmeticTerm):
        return True
    if isinstance(term, FunctionalTerm):
        return any(has_arithmetic(a) for a in term.args)
    return False


def is_ground_term(term) -> bool:
    return not isinstance(term, (Variable, AnonymousVariable)) and not any(True for _ in term_variables(term))


# -- ground values ---------------------------------------------------------

class GroundFunction(NamedTuple):
    """A ground functional term; constants are plain ``int``/``str`` values."""

    name: str
    args: tuple

    def __str__(self):
        return f"{self.name}({','.join(map(format_value, self.args))})"


def format_value(value) -> str:
    return str(value)


def value_key(value):
    """Total order on ground values: integers, then constants and functions."""
    if isinstance(value, int):
        return (0, value)
    if isinstance(value, str):
        return (1, 0, value, ())
    return (1, len(value.args), value.name, tuple(value_key(a) for a in value.args))


def _checked(n: int) -> int:
    if n < INT_MIN or n > INT_MAX:
        raise EvaluationError(f"integer overflow: {n}")
    return n


def apply_arith(op: str, a, b) -> int:
    if not isinstance(a, int) or not isinstance(b, int):
        raise EvaluationError(f"arithmetic on non-integer values {a!r} {op} {b!r}")
    if op == "+":
        return _checked(a + b)
    if op == "-":
        return _checked(a - b)
    if op == "*":
        return _checked(a * b)
    if b == 0:
        raise EvaluationError("division by zero")
    q = abs(a) // abs(b)
    return _checked(q if (a >= 0) == (b >= 0) else -q)


def evaluate(term, env) -> object:
    """Ground value of ``term`` under the substitution ``env``."""
    if isinstance(term, Variable):
        return env[term.name]
    if isinstance(term, Constant):
        return term.value
    if isinstance(term, ArithmeticTerm):
        return apply_arith(term.op, evaluate(term.left, env), evaluate(term.right, env))
    if isinstance(term, FunctionalTerm):
        return GroundFunction(term.name, tuple(evaluate(a, env) for a in term.args))
    raise EvaluationError(f"cannot evaluate {term}")


def compare(op: str, a, b) -> bool:
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    ka, kb = value_key(a), value_key(b)
    if op == "<":
        return ka < kb
    if op == "<=":
        return ka <= kb
    if op == ">":
        return ka > kb
    return ka >= kb


# -- atoms, literals, rules ------------------------------------------------

@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def signature(self) -> tuple:
        return (self.predicate, len(self.args))

    def variables(self) -> frozenset:
        return frozenset(v for t in self.args for v in term_variables(t))

    def __str__(self):
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(map(str, self.args))})"


@dataclass(frozen=True)
class Literal:
    atom: Atom
    negated: bool = False

    @property
    def positive(self) -> bool:
        return not self.negated

    def variables(self) -> frozenset:
        return self.atom.variables()

    def __str__(self):
        return f"not {self.atom}" if self.negated else str(self.atom)


@dataclass(frozen=True)
class Comparison:
    op: str
    left: Term
    right: Term

    def __post_init__(self):
        if self.op not in COMPARISON_OPS:
            raise ValueError(f"unknown comparison operator {self.op!r}")

    def variables(self) -> frozenset:
        return frozenset(term_variables(self.left)) | frozenset(term_variables(self.right))

    def assigned_variable(self, bound) -> str | None:
        """The variable this equality binds once the other side is bound."""
        if self.op != "=":
            return None
        for side, other in ((self.left, self.right), (self.right, self.left)):
            if (isinstance(side, Variable) and side.name not in bound
                    and set(term_variables(other)) <= set(bound)):
                return side.name
        return None

    def __str__(self):
        return f"{self.left}{self.op}{self.right}"


BodyElement = Union[Literal, Comparison]


@dataclass(frozen=True)
class Rule:
    head: tuple = ()
    body: tuple = ()

    @property
    def positive_body(self) -> tuple:
        return tuple(l for l in self.body if isinstance(l, Literal) and not l.negated)

    @property
    def negative_body(self) -> tuple:
        return tuple(l for l in self.body if isinstance(l, Literal) and l.negated)

    @property
    def comparisons(self) -> tuple:
        return tuple(l for l in self.body if isinstance(l, Comparison))

    @property
    def is_fact(self) -> bool:
        return len(self.head) == 1 and not self.body

    @property
    def is_constraint(self) -> bool:
        return not self.head

    def head_variables(self) -> frozenset:
        return frozenset().union(*(a.variables() for a in self.head))

    def body_variables(self) -> frozenset:
        return frozenset().union(*(l.variables() for l in self.body))

    def variables(self) -> frozenset:
        return self.head_variables() | self.body_variables()

    def predicates(self) -> set:
        sigs = {a.signature for a in self.head}
        sigs.update(l.atom.signature for l in self.body if isinstance(l, Literal))
        return sigs

    def __str__(self):
        head = " | ".join(map(str, self.head))
        if not self.body:
            return f"{head}." if head else ":- ."
        body = ", ".join(map(str, self.body))
        return f"{head} :- {body}." if head else f":- {body}."


@dataclass(frozen=True)
class Program:
    rules: tuple = ()

    @property
    def facts(self) -> tuple:
        return tuple(r for r in self.rules if r.is_fact)

    def defined_predicates(self) -> set:
        return {a.signature for r in self.rules for a in r.head}

    def idb_predicates(self) -> set:
        return {a.signature for r in self.rules if not r.is_fact for a in r.head}

    def edb_predicates(self) -> set:
        return {r.head[0].signature for r in self.rules if r.is_fact} - self.idb_predicates()

    def predicates(self) -> set:
        sigs = set()
        for r in self.rules:
            sigs |= r.predicates()
        return sigs

    def __str__(self):
        return "\n".join(map(str, self.rules))


def expand_fact(atom: Atom) -> Iterator[tuple]:
    """Ground argument tuples of a fact, expanding interval arguments."""
    choices = []
    for arg in atom.args:
        if isinstance(arg, IntervalTerm):
            choices.append(tuple(arg.values()))
        else:
            choices.append((evaluate(arg, {}),))
    yield from product(*choices)


# -- variable sets and safety ----------------------------------------------

@dataclass(frozen=True)
class VariableSets:
    head: frozenset
    body: frozenset
    all: frozenset


def variable_sets(rule: Rule) -> VariableSets:
    return VariableSets(rule.head_variables(), rule.body_variables(), rule.variables())


@dataclass(frozen=True)
class SafetyReport:
    safe: bool
    unsafe_variables: frozenset = field(default_factory=frozenset)


def _atom_ready(atom: Atom, bound) -> bool:
    return all(v in bound for t in atom.args for v in arithmetic_variables(t))


def _atom_binds(atom: Atom) -> set:
    return {v for t in atom.args for v in binding_variables(t)}


def plan_body(body, bound=()):
    """Execution order for a rule body.

    Returns ``(order, bound, stuck)``.  Filters (comparisons, negative
    literals) run as soon as their variables are bound; an equality with a
    lone unbound variable on one side acts as an assignment; positive atoms
    run in textual order, except that an atom whose arithmetic arguments are
    not yet evaluable is deferred.  ``stuck`` lists the literals that never
    became ready; it is empty exactly when the body is safe.
    """
    bound = set(bound)
    pending = list(body)
    order = []
    while pending:
        progress = True
        while progress:
            progress = False
            for lit in list(pending):
                if isinstance(lit, Comparison):
                    target = lit.assigned_variable(bound)
                    if lit.variables() <= bound:
                        pass
                    elif target is not None:
                        bound.add(target)
                    else:
                        continue
                elif lit.negated:
                    if not lit.variables() <= bound:
                        continue
                else:
                    continue
                order.append(lit)
                pending.remove(lit)
                progress = True
        for lit in pending:
            if isinstance(lit, Literal) and lit.positive and _atom_ready(lit.atom, bound):
                order.append(lit)
                pending.remove(lit)
                bound |= _atom_binds(lit.atom)
                break
        else:
            break
    return order, bound, pending


def safety_check(rule: Rule) -> SafetyReport:
    """Every variable must be bound through the positive body.

    Binding happens through plain positions of positive atoms, and through
    equalities ``X = expr`` whose right side is already bound.
    """
    _, bound, _ = plan_body(rule.body)
    unsafe = rule.variables() - bound
    return SafetyReport(not unsafe, frozenset(unsafe))
