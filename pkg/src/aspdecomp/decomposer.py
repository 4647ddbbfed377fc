"""Turn a tree decomposition of a rule into an equivalent set of rules."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .errors import DecompositionDegenerate, InternalError, MissingStats
from .syntax import (
    AnonymousVariable,
    Atom,
    Comparison,
    FunctionalTerm,
    Literal,
    Rule,
    Variable,
    arithmetic_variables,
    binding_variables,
    has_arithmetic,
    safety_check,
)

FRESH_PREFIX = "fresh_pred_"
_FRESH_RE = re.compile(rf"{FRESH_PREFIX}(\d+)$")


class FreshNamer:
    """Sequential ``fresh_pred_N`` names that avoid reserved predicates."""

    def __init__(self, reserved=(), start=1):
        self.reserved = frozenset(reserved)
        self.counter = start

    @classmethod
    def for_program(cls, program):
        return cls(name for name, _ in program.predicates())

    def next(self) -> str:
        while True:
            name = f"{FRESH_PREFIX}{self.counter}"
            self.counter += 1
            if name not in self.reserved:
                return name

    def copy(self) -> "FreshNamer":
        return FreshNamer(self.reserved, self.counter)

    def sync(self, other: "FreshNamer"):
        self.counter = max(self.counter, other.counter)


@dataclass(frozen=True)
class RuleDecomposition:
    """Replacement rules for ``origin``; ``rules[0]`` carries the origin head.

    ``fresh`` maps each fresh predicate name to the index of its defining
    rule, in creation order.
    """

    origin: Rule
    rules: tuple
    fresh: dict = field(default_factory=dict)

    def fresh_signatures(self) -> set:
        return {r.head[0].signature for r in self.rules if r.head and r.head[0].predicate in self.fresh}

    def is_fresh(self, predicate: str) -> bool:
        return predicate in self.fresh


def _stats_size(stats, signature):
    if stats is None:
        return math.inf
    try:
        return stats[signature].size
    except (KeyError, MissingStats):
        return math.inf


def _binder_requirements(lit) -> set:
    return {v for t in lit.atom.args for v in arithmetic_variables(t)}


def _binds(lit) -> set:
    return {v for t in lit.atom.args for v in binding_variables(t)}


def _pick_binder(var, origin: Rule, stats, taken):
    """Index of the body literal of ``origin`` chosen to bind ``var``."""
    standard, arithmetic, comparisons = [], [], []
    for i, lit in enumerate(origin.body):
        if i in taken:
            continue
        if isinstance(lit, Literal):
            if lit.negated or var not in _binds(lit):
                continue
            if any(has_arithmetic(t) for t in lit.atom.args):
                arithmetic.append(i)
            else:
                standard.append(i)
        elif lit.op == "=" and any(isinstance(s, Variable) and s.name == var for s in (lit.left, lit.right)):
            comparisons.append(i)
    if standard:
        return min(standard, key=lambda i: (_stats_size(stats, origin.body[i].atom.signature), i))
    if arithmetic:
        return arithmetic[0]
    if comparisons:
        return comparisons[0]
    raise InternalError(f"no literal of `{origin}` binds {var}")


def select_saviours(variables, origin: Rule, stats=None) -> list:
    """Indices (in body order) of the saviour literals binding ``variables``.

    Per variable: a positive atom without arithmetic terms, smallest known
    extension first; otherwise the first positive atom with arithmetic
    terms, then the first equality.  Literals of the last two kinds pull in
    binders for the variables they need themselves.
    """
    taken = set()
    bound = set()
    needed = sorted(variables)
    while needed:
        var = needed.pop(0)
        if var in bound:
            continue
        i = _pick_binder(var, origin, stats, taken)
        taken.add(i)
        lit = origin.body[i]
        if isinstance(lit, Comparison):
            bound.add(var)
            reqs = lit.variables() - {var}
        else:
            bound |= _binds(lit)
            reqs = _binder_requirements(lit)
        needed.extend(sorted(v for v in reqs if v not in bound and v not in needed))
    return sorted(taken)


def _anonymize_singletons(rule: Rule) -> Rule:
    counts = {}

    def count(term):
        if isinstance(term, Variable):
            counts[term.name] = counts.get(term.name, 0) + 1
        elif isinstance(term, FunctionalTerm):
            for a in term.args:
                count(a)
        elif hasattr(term, "left"):
            count(term.left)
            count(term.right)

    for atom in rule.head:
        for t in atom.args:
            count(t)
    for lit in rule.body:
        for t in ((lit.left, lit.right) if isinstance(lit, Comparison) else lit.atom.args):
            count(t)

    def rewrite(term):
        if isinstance(term, Variable) and counts[term.name] == 1:
            return AnonymousVariable()
        if isinstance(term, FunctionalTerm):
            return FunctionalTerm(term.name, tuple(rewrite(a) for a in term.args))
        return term

    body = []
    for lit in rule.body:
        if isinstance(lit, Literal) and lit.positive:
            lit = Literal(Atom(lit.atom.predicate, tuple(rewrite(t) for t in lit.atom.args)))
        body.append(lit)
    return Rule(rule.head, tuple(body))


def restore_safety(rule: Rule, origin: Rule, namer: FreshNamer, stats=None):
    """Return ``(amended_rule, extra_rules)``.

    A safe rule comes back unchanged with no extras.  Otherwise an atom over
    a fresh predicate holding the unsafe variables is appended to the body,
    and one extra rule defines that atom from saviour literals of ``origin``.
    """
    report = safety_check(rule)
    if report.safe:
        return rule, []
    unsafe = sorted(report.unsafe_variables)
    link = Atom(namer.next(), tuple(Variable(v) for v in unsafe))
    amended = Rule(rule.head, rule.body + (Literal(link),))
    chosen = select_saviours(unsafe, origin, stats)
    saviour = _anonymize_singletons(Rule((link,), tuple(origin.body[i] for i in chosen)))
    if not safety_check(saviour).safe or not safety_check(amended).safe:
        raise InternalError(f"could not restore safety of `{rule}` from `{origin}`")
    return amended, [saviour]


def _root_node(td, head_vars) -> int:
    covering = [i for i, bag in enumerate(td.bags) if head_vars <= bag]
    if not covering:
        raise InternalError("no bag covers the head variables")
    return min(covering, key=lambda i: (-len(td.bags[i]), i))


def to_rules(td, rule: Rule, namer: FreshNamer, stats=None) -> RuleDecomposition:
    """One replacement rule per tree-decomposition node that receives literals.

    Body literals go to the deepest node whose bag covers them; comparisons
    to the shallowest.  Each kept child is linked to its parent by a fresh
    atom over the variables shared between the child's subtree and the rest
    of the rule.
    """
    if len(td.bags) <= 1:
        raise DecompositionDegenerate(f"single-bag decomposition of `{rule}`")
    adj = td.neighbors()
    root = _root_node(td, rule.head_variables())
    parent = {root: None}
    depth = {root: 0}
    stack = [root]
    children = {i: [] for i in adj}
    while stack:
        n = stack.pop()
        for m in adj[n]:
            if m not in parent:
                parent[m] = n
                depth[m] = depth[n] + 1
                children[n].append(m)
                stack.append(m)
    # preorder with children in index order
    preorder = []
    stack = [root]
    while stack:
        n = stack.pop()
        preorder.append(n)
        stack.extend(reversed(children[n]))
    rank = {n: i for i, n in enumerate(preorder)}

    placement = {n: [] for n in preorder}
    for pos, lit in enumerate(rule.body):
        vs = lit.variables()
        holders = [n for n in preorder if vs <= td.bags[n]]
        if not holders:
            raise InternalError(f"literal {lit} is not covered by the decomposition")
        if isinstance(lit, Comparison):
            target = min(holders, key=lambda n: (depth[n], rank[n]))
        else:
            target = min(holders, key=lambda n: (-depth[n], rank[n]))
        placement[target].append(pos)

    subtree_vars = {}
    subtree_has = {}
    for n in reversed(preorder):
        vs = set()
        has = bool(placement[n])
        for pos in placement[n]:
            vs |= rule.body[pos].variables()
        for c in children[n]:
            vs |= subtree_vars[c]
            has = has or subtree_has[c]
        subtree_vars[n] = vs
        subtree_has[n] = has
    occurrences = {n: set() for n in preorder}
    for n in preorder:
        for pos in placement[n]:
            occurrences[n] |= rule.body[pos].variables()

    def outside_vars(n):
        inside = set()
        stack = [n]
        while stack:
            m = stack.pop()
            inside.add(m)
            stack.extend(children[m])
        vs = set(rule.head_variables())
        for m in preorder:
            if m not in inside:
                vs |= occurrences[m]
        return vs

    kept = [n for n in preorder if n == root or subtree_has[n]]
    if len(kept) <= 1:
        raise DecompositionDegenerate(f"decomposition of `{rule}` places every literal in one node")
    link_vars = {n: sorted(subtree_vars[n] & outside_vars(n)) for n in kept if n != root}
    link_atoms = {}
    rules = []
    fresh = {}
    for n in kept:
        for c in children[n]:
            if c in link_vars:
                name = namer.next()
                link_atoms[c] = Atom(name, tuple(Variable(v) for v in link_vars[c]))
        body = tuple(rule.body[pos] for pos in placement[n])
        body += tuple(Literal(link_atoms[c]) for c in children[n] if c in link_atoms)
        head = rule.head if n == root else (link_atoms[n],)
        amended, extra = restore_safety(Rule(head, body), rule, namer, stats)
        if n != root:
            fresh[link_atoms[n].predicate] = len(rules)
        rules.append(amended)
        for r in extra:
            fresh[r.head[0].predicate] = len(rules)
            rules.append(r)
    # definitions listed in creation order
    fresh = dict(sorted(fresh.items(), key=lambda kv: _creation_index(kv[0])))
    return RuleDecomposition(rule, tuple(rules), fresh)


def _creation_index(name: str) -> int:
    m = _FRESH_RE.match(name)
    return int(m.group(1)) if m else 0


def grounding_order(rd: RuleDecomposition) -> list:
    """Topological order: a rule comes after the rules defining its fresh body predicates.

    Among ready rules the one whose head predicate was created first wins;
    the origin-headed rule comes last among ties.
    """
    creation = {name: k for k, name in enumerate(rd.fresh)}
    deps = []
    for r in rd.rules:
        deps.append({l.atom.predicate for l in r.body
                     if isinstance(l, Literal) and l.atom.predicate in rd.fresh})
    defined = set()
    remaining = list(range(len(rd.rules)))
    order = []
    while remaining:
        ready = [i for i in remaining if deps[i] <= defined]
        if not ready:
            raise InternalError("cyclic rule decomposition")

        def key(i):
            r = rd.rules[i]
            if r.head and r.head[0].predicate in creation:
                return (0, creation[r.head[0].predicate])
            return (1, i)

        pick = min(ready, key=key)
        remaining.remove(pick)
        order.append(rd.rules[pick])
        r = rd.rules[pick]
        if r.head and r.head[0].predicate in rd.fresh:
            defined.add(r.head[0].predicate)
    return order
