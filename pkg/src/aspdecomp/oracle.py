"""Reference implementations used to check the grounder.

``naive_ground`` builds the full instantiation of a program over its
Herbrand universe without any simplification; ``brute_force_answer_sets``
computes answer sets of a small ground program by exhaustive search.
"""

from __future__ import annotations

from itertools import product

from .errors import BudgetExceeded, EvaluationError
from .grounder import Counters, GroundProgram, GroundRule, atom_key
from .syntax import (
    AnonymousVariable,
    Comparison,
    Constant,
    FunctionalTerm,
    IntervalTerm,
    Literal,
    Variable,
    compare,
    evaluate,
    expand_fact,
    plan_body,
    value_key,
)

DEFAULT_INSTANCE_BUDGET = 10**6
DEFAULT_ATOM_BUDGET = 20


def _constants(term, out):
    if isinstance(term, Constant):
        out.add(term.value)
    elif isinstance(term, IntervalTerm):
        out.update(term.values())
    elif isinstance(term, FunctionalTerm):
        for a in term.args:
            _constants(a, out)
    elif hasattr(term, "left"):
        _constants(term.left, out)
        _constants(term.right, out)


def herbrand_constants(program) -> set:
    values = set()
    for rule in program.rules:
        for atom in rule.head:
            for t in atom.args:
                _constants(t, values)
        for lit in rule.body:
            for t in ((lit.left, lit.right) if isinstance(lit, Comparison) else lit.atom.args):
                _constants(t, values)
    return values


class _Instantiator:
    """All substitutions of one rule over a universe, with anonymous positions expanded."""

    def __init__(self, rule):
        self.rule = rule
        order, _, _ = plan_body(rule.body)
        assigned = []
        bound = set()
        for lit in order:
            if isinstance(lit, Comparison):
                target = lit.assigned_variable(bound)
                if target is not None and not lit.variables() <= bound:
                    assigned.append((target, lit))
                    bound.add(target)
            elif lit.positive:
                bound |= lit.variables()
        self.assigned = assigned
        targets = {t for t, _ in assigned}
        self.free = sorted(rule.variables() - targets)
        self.order = order

    def instances(self, universe, counters, budget):
        """Yield ``(head, positive, negative)`` ground atom tuples."""
        rule = self.rule
        for values in product(universe, repeat=len(self.free)):
            counters.substitution_attempts += 1
            if counters.substitution_attempts > budget:
                raise BudgetExceeded(f"naive instantiation exceeds {budget} candidates")
            env = dict(zip(self.free, values))
            try:
                ok = True
                for target, cmp in self.assigned:
                    other = cmp.right if isinstance(cmp.left, Variable) and cmp.left.name == target else cmp.left
                    env[target] = evaluate(other, env)
                for lit in rule.body:
                    if isinstance(lit, Comparison) and not compare(lit.op, evaluate(lit.left, env),
                                                                   evaluate(lit.right, env)):
                        ok = False
                        break
                if not ok:
                    continue
                head = tuple((a.predicate, tuple(evaluate(t, env) for t in a.args)) for a in rule.head)
                lits = [l for l in rule.body if isinstance(l, Literal)]
                choices = []
                for lit in lits:
                    # each anonymous position ranges over the universe on its own
                    slots = [universe if isinstance(t, AnonymousVariable) else (evaluate(t, env),)
                             for t in lit.atom.args]
                    choices.append([(lit.atom.predicate, args) for args in product(*slots)])
            except EvaluationError:
                continue
            for atoms in product(*choices):
                pos = tuple(a for a, l in zip(atoms, lits) if l.positive)
                neg = tuple(a for a, l in zip(atoms, lits) if l.negated)
                yield head, pos, neg


def naive_ground(program, budget: int = DEFAULT_INSTANCE_BUDGET) -> GroundProgram:
    """Every ground instance of every rule over the Herbrand universe.

    The universe starts with the program's constants and is closed under
    head values of instances whose positive body could become true; values
    produced by arithmetic in bodies alone do not extend it.  Built-in
    comparisons are evaluated; nothing else is simplified.  Counters record
    the candidate substitutions of the final pass.
    """
    facts = set()
    for rule in program.rules:
        if rule.is_fact:
            for tup in expand_fact(rule.head[0]):
                facts.add((rule.head[0].predicate, tup))
    universe = herbrand_constants(program)
    for _, args in facts:
        universe.update(args)
    rules = [_Instantiator(r) for r in program.rules if not r.is_fact]
    possible = set(facts)
    scratch = Counters()
    while True:
        ordered = sorted(universe, key=value_key)
        grown = False
        for inst in rules:
            for head, pos, _ in inst.instances(ordered, scratch, budget):
                if all(a in possible for a in pos):
                    for atom in head:
                        if atom not in possible:
                            possible.add(atom)
                            grown = True
                            for v in atom[1]:
                                if v not in universe:
                                    universe.add(v)
        if not grown:
            break
        scratch = Counters()
    counters = Counters()
    ordered = sorted(universe, key=value_key)
    out = set()
    for inst in rules:
        for head, pos, neg in inst.instances(ordered, counters, budget):
            out.add(GroundRule(head, pos, neg))
    counters.instances = len(out)
    return GroundProgram(sorted(facts, key=atom_key), sorted(out, key=str), {}, counters)


def _possibly_true(facts, rules) -> set:
    """Least model of the rules with negation ignored and disjunction read as conjunction."""
    true = set(facts)
    changed = True
    while changed:
        changed = False
        for r in rules:
            if all(a in true for a in r.positive):
                for a in r.head:
                    if a not in true:
                        true.add(a)
                        changed = True
    return true


def brute_force_answer_sets(gp: GroundProgram, max_atoms: int = DEFAULT_ATOM_BUDGET) -> set:
    """Answer sets of a ground program as frozensets of ground atoms.

    Atoms that can never be derived are false in every answer set and are
    removed first; at most ``max_atoms`` remaining non-fact atoms are
    allowed.  Each candidate interpretation is checked to be a model and a
    minimal model of its reduct.
    """
    facts = set(gp.facts)
    rules = [r for r in gp.rules if not r.is_fact]
    facts |= {r.head[0] for r in gp.rules if r.is_fact}
    possible = _possibly_true(facts, rules)
    unknown = sorted(possible - facts, key=atom_key)
    if len(unknown) > max_atoms:
        raise BudgetExceeded(f"{len(unknown)} undecided atoms exceed the budget of {max_atoms}")
    bit = {a: 1 << i for i, a in enumerate(unknown)}
    compiled = []
    for r in rules:
        if any(a not in possible for a in r.positive):
            continue
        if any(a in facts for a in r.negative):
            continue
        if any(a in facts for a in r.head):
            continue
        head = sum(bit[a] for a in r.head if a in bit)
        pos = sum(bit[a] for a in set(r.positive) if a in bit)
        neg = sum(bit[a] for a in set(r.negative) if a in bit)
        compiled.append((head, pos, neg, len(r.head)))
    disjunctive = any(n > 1 for *_, n in compiled)

    def is_model(m, reduct_of=None):
        for head, pos, neg, _ in compiled:
            if reduct_of is None:
                if neg & m:
                    continue
            elif neg & reduct_of:
                continue
            if pos & m == pos and not head & m:
                return False
        return True

    def least_model(m):
        # least model of the reduct for a normal program
        rules_m = [(h, p) for h, p, n, _ in compiled if not n & m and h]
        lm = 0
        changed = True
        while changed:
            changed = False
            for h, p in rules_m:
                if p & lm == p and not h & lm:
                    lm |= h
                    changed = True
        return lm

    results = set()
    for m in range(1 << len(unknown)):
        if not is_model(m):
            continue
        if disjunctive:
            minimal = True
            sub = (m - 1) & m
            while True:
                if sub != m and is_model(sub, reduct_of=m):
                    minimal = False
                    break
                if sub == 0:
                    break
                sub = (sub - 1) & m
            if not minimal:
                continue
        elif least_model(m) != m:
            continue
        results.add(frozenset(facts | {a for a in unknown if bit[a] & m}))
    return results


def project(answer_sets, predicates) -> set:
    """Restrict every answer set to atoms over the given predicate names."""
    keep = set(predicates)
    return {frozenset(a for a in s if a[0] in keep) for s in answer_sets}
