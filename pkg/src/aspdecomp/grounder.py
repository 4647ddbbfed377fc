"""Bottom-up grounding with module scheduling and semi-naive evaluation.

The program is split into strongly connected components of its predicate
dependency graph.  Components are instantiated in topological order, so the
extensions a rule reads are final (or, inside a recursive component, grow by
semi-naive iterations).  Ground rules are simplified against the facts known
so far and once more after the last component.
"""

from __future__ import annotations

import logging
import time
from collections.abc import Mapping
from dataclasses import asdict, dataclass, field
from operator import itemgetter
from typing import NamedTuple

import networkx as nx

from .cost import PredicateStats, estimate_rule, index_position
from .decomposer import FreshNamer, grounding_order
from .errors import BudgetExceeded, EvaluationError, GroundingTimeout, SafetyError
from .smart import MODES, SDConfig, rewrite_rules, smart_decompose
from .syntax import (
    AnonymousVariable,
    Comparison,
    Constant,
    FunctionalTerm,
    GroundFunction,
    Literal,
    Program,
    Variable,
    compare,
    evaluate,
    expand_fact,
    format_value,
    plan_body,
    safety_check,
    term_variables,
    value_key,
)

log = logging.getLogger(__name__)

_TICK = 4096


# -- ground rules ----------------------------------------------------------

def render_atom(atom) -> str:
    name, args = atom
    if not args:
        return name
    return f"{name}({','.join(map(format_value, args))})"


def atom_key(atom):
    name, args = atom
    return (name, len(args), tuple(value_key(v) for v in args))


class GroundRule(NamedTuple):
    """A variable-free rule; atoms are ``(predicate, argument_tuple)`` pairs."""

    head: tuple
    positive: tuple = ()
    negative: tuple = ()

    @property
    def is_fact(self) -> bool:
        return len(self.head) == 1 and not self.positive and not self.negative

    def atoms(self):
        return self.head + self.positive + self.negative

    def __str__(self):
        head = " | ".join(map(render_atom, self.head))
        body = [render_atom(a) for a in self.positive] + [f"not {render_atom(a)}" for a in self.negative]
        if not body:
            return f"{head}." if head else ":- ."
        return f"{head} :- {', '.join(body)}." if head else f":- {', '.join(body)}."


@dataclass
class Counters:
    substitution_attempts: int = 0
    index_probes: int = 0
    instances: int = 0

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class GroundProgram:
    """Facts and rules of a ground program, in output order."""

    facts: list = field(default_factory=list)
    rules: list = field(default_factory=list)
    by_origin: dict = field(default_factory=dict)
    counters: Counters = field(default_factory=Counters)

    def ground_rules(self) -> list:
        return [GroundRule((a,)) for a in self.facts] + list(self.rules)

    def __len__(self):
        return len(self.facts) + len(self.rules)

    def render(self) -> str:
        lines = [f"{render_atom(a)}." for a in self.facts] + [str(r) for r in self.rules]
        return "".join(line + "\n" for line in lines)

    __str__ = render


# -- store -----------------------------------------------------------------

class GroundStore:
    """Predicate extensions, lazily built single-position indexes and counters."""

    def __init__(self):
        self.extensions = {}
        self.facts = {}
        self.complete = set()
        self.counters = Counters()
        self._indexes = {}
        self._indexed = {}
        self._stats = {}

    def extension(self, sig) -> dict:
        return self.extensions.get(sig, {})

    def fact_set(self, sig) -> set:
        return self.facts.setdefault(sig, set())

    def add(self, sig, tup) -> bool:
        ext = self.extensions.setdefault(sig, {})
        if tup in ext:
            return False
        ext[tup] = None
        for pos in self._indexed.get(sig, ()):
            self._indexes[sig, pos].setdefault(tup[pos], []).append(tup)
        return True

    def add_fact(self, sig, tup):
        self.fact_set(sig).add(tup)
        return self.add(sig, tup)

    def is_fact(self, atom) -> bool:
        name, args = atom
        return args in self.facts.get((name, len(args)), ())

    def index(self, sig, pos) -> dict:
        idx = self._indexes.get((sig, pos))
        if idx is None:
            idx = {}
            for tup in self.extension(sig):
                idx.setdefault(tup[pos], []).append(tup)
            self._indexes[sig, pos] = idx
            self._indexed.setdefault(sig, []).append(pos)
        return idx

    def stats(self, sig) -> PredicateStats:
        ext = self.extension(sig)
        cached = self._stats.get(sig)
        if cached is not None and cached[0] == len(ext):
            return cached[1]
        st = PredicateStats.from_tuples(ext, sig[1])
        self._stats[sig] = (len(ext), st)
        return st

    def stats_view(self) -> "StatsView":
        return StatsView(self)


class StatsView(Mapping):
    """Live statistics; unknown predicates have an empty extension."""

    def __init__(self, store: GroundStore):
        self.store = store

    def __getitem__(self, sig):
        return self.store.stats(sig)

    def __iter__(self):
        return iter(self.store.extensions)

    def __len__(self):
        return len(self.store.extensions)

    def __contains__(self, sig):
        return True


# -- module plan -----------------------------------------------------------

@dataclass(frozen=True)
class Component:
    predicates: frozenset
    rules: tuple
    recursive: bool
    negative_cycle: bool = False


@dataclass(frozen=True)
class ModulePlan:
    components: tuple

    def rule_order(self) -> list:
        return [i for c in self.components for i in c.rules]


def build_module_plan(program: Program) -> ModulePlan:
    """Strongly connected components of the dependency graph, in topological order.

    Ties are broken by the position of the first rule defining a component.
    A disjunctive rule belongs to the component of its first head predicate,
    which is scheduled before the components of the other head predicates.
    Constraints come last, one component each.
    """
    graph = nx.DiGraph()
    first_def = {}
    negative_edges = set()
    for i, rule in enumerate(program.rules):
        if rule.is_fact or not rule.head:
            continue
        heads = [a.signature for a in rule.head]
        for h in heads:
            graph.add_node(h)
            first_def.setdefault(h, i)
        # the rule is grounded with its first head predicate, before readers of the others
        for b in heads[1:]:
            graph.add_edge(heads[0], b)
    idb = set(graph.nodes)
    for rule in program.rules:
        if rule.is_fact or not rule.head:
            continue
        for lit in rule.body:
            if isinstance(lit, Literal) and lit.atom.signature in idb:
                for h in rule.head:
                    graph.add_edge(lit.atom.signature, h.signature)
                    if lit.negated:
                        negative_edges.add((lit.atom.signature, h.signature))
    sccs = list(nx.strongly_connected_components(graph))
    condensed = nx.condensation(graph, sccs)
    members = condensed.graph["mapping"]
    first = {c: min(first_def[p] for p in condensed.nodes[c]["members"]) for c in condensed.nodes}
    rules_of = {c: [] for c in condensed.nodes}
    for i, rule in enumerate(program.rules):
        if not rule.is_fact and rule.head:
            rules_of[members[rule.head[0].signature]].append(i)
    components = []
    for c in nx.lexicographical_topological_sort(condensed, key=lambda c: first[c]):
        preds = frozenset(condensed.nodes[c]["members"])
        recursive = len(preds) > 1 or any(graph.has_edge(p, p) for p in preds)
        negative = any(a in preds and b in preds for a, b in negative_edges)
        components.append(Component(preds, tuple(rules_of[c]), recursive, negative))
    for i, rule in enumerate(program.rules):
        if not rule.head:
            components.append(Component(frozenset(), (i,), False))
    return ModulePlan(tuple(components))


# -- rule compilation ------------------------------------------------------

def _producer(term):
    """A function computing the ground value of a bound term from the environment."""
    if isinstance(term, Variable):
        name = term.name
        return lambda env: env[name]
    if isinstance(term, Constant):
        value = term.value
        return lambda env: value
    return lambda env: evaluate(term, env)


def _unify(term, value, env) -> bool:
    if isinstance(term, Variable):
        if term.name in env:
            return env[term.name] == value
        env[term.name] = value
        return True
    if isinstance(term, AnonymousVariable):
        return True
    if isinstance(term, Constant):
        return term.value == value
    if isinstance(term, FunctionalTerm):
        if not isinstance(value, GroundFunction) or value.name != term.name or len(value.args) != len(term.args):
            return False
        return all(_unify(t, v, env) for t, v in zip(term.args, value.args))
    return evaluate(term, env) == value


class _AtomStep:
    __slots__ = ("sig", "atom", "index_pos", "index_value", "check", "expected", "frees",
                 "dups", "structs", "struct_vars", "source", "position", "skip_fact_check")


class _FilterStep:
    __slots__ = ("kind", "sig", "args", "op", "left", "right", "target")


def _compile_atom(atom, bound, stats, source):
    step = _AtomStep()
    step.sig = atom.signature
    step.atom = atom
    step.source = source
    checks = []
    frees = []
    seen = {}
    dups = []
    structs = []
    struct_vars = set()
    for pos, term in enumerate(atom.args):
        if isinstance(term, AnonymousVariable):
            continue
        if isinstance(term, Variable):
            if term.name in bound:
                checks.append((pos, _producer(term)))
            elif term.name in seen:
                dups.append((pos, seen[term.name]))
            else:
                seen[term.name] = pos
                frees.append((pos, term.name))
        elif isinstance(term, Constant):
            checks.append((pos, _producer(term)))
        elif set(term_variables(term)) <= bound:
            checks.append((pos, _producer(term)))
        else:
            structs.append((pos, term))
    for _, term in structs:
        struct_vars |= set(term_variables(term)) - bound
    pos = index_position(atom, bound, stats)
    if pos is None:
        pos = next((p for p, t in enumerate(atom.args) if isinstance(t, Constant)), None)
    step.index_pos = pos
    step.index_value = dict(checks).get(pos) if pos is not None else None
    rest = [(p, f) for p, f in checks if p != pos]
    if rest:
        getter = itemgetter(*(p for p, _ in rest))
        funcs = [f for _, f in rest]
        step.check = getter
        if len(funcs) == 1:
            f0 = funcs[0]
            step.expected = f0
        else:
            step.expected = lambda env: tuple(f(env) for f in funcs)
    else:
        step.check = step.expected = None
    step.frees = tuple(frees)
    step.dups = tuple(dups)
    step.structs = tuple(structs)
    step.struct_vars = tuple(sorted(struct_vars))
    step.skip_fact_check = False
    return step


class _CompiledRule:
    __slots__ = ("rule", "origin", "steps", "heads")


def _compile_rule(rule, origin, stats, sources=None, fact_sigs=()):
    order, _, stuck = plan_body(rule.body)
    if stuck:
        raise SafetyError(rule, safety_check(rule).unsafe_variables)
    steps = []
    bound = set()
    k = 0
    for lit in order:
        if isinstance(lit, Comparison):
            f = _FilterStep()
            target = lit.assigned_variable(bound)
            if target is not None and not lit.variables() <= bound:
                f.kind = "assign"
                f.target = target
                other = lit.right if isinstance(lit.left, Variable) and lit.left.name == target else lit.left
                f.left = _producer(other)
                bound.add(target)
            else:
                f.kind = "cmp"
                f.op = lit.op
                f.left = _producer(lit.left)
                f.right = _producer(lit.right)
            steps.append(f)
        elif lit.negated:
            f = _FilterStep()
            f.kind = "neg"
            f.sig = lit.atom.signature
            f.args = tuple(_producer(t) for t in lit.atom.args)
            steps.append(f)
        else:
            source = sources[k] if sources else "full"
            step = _compile_atom(lit.atom, bound, stats, source)
            step.position = k
            step.skip_fact_check = step.sig in fact_sigs
            steps.append(step)
            bound |= {v for v in lit.atom.variables()}
            k += 1
    cr = _CompiledRule()
    cr.rule = rule
    cr.origin = origin
    cr.steps = steps
    cr.heads = tuple((a.predicate, a.signature, tuple(_producer(t) for t in a.args)) for a in rule.head)
    return cr



# -- the grounder ----------------------------------------------------------

@dataclass
class GroundConfig:
    sd: SDConfig = field(default_factory=SDConfig)
    timeout_ms: int | None = None
    max_ground_rules: int | None = None
    explain: list | None = None


@dataclass
class RunReport:
    rules_in: int
    rules_out: int
    ground_rules: int
    counters: Counters
    per_rule_decisions: list
    wall_time_ms: float
    mode: str = "smart"
    rewritten: Program | None = None
    replaced: frozenset = frozenset()

    def to_json(self) -> dict:
        return {
            "rules_in": self.rules_in,
            "rules_out": self.rules_out,
            "ground_rules": self.ground_rules,
            "counters": self.counters.to_json(),
            "per_rule_decisions": [d.to_json() for d in self.per_rule_decisions],
            "wall_time_ms": self.wall_time_ms,
        }


class _Grounder:
    def __init__(self, config: GroundConfig):
        self.config = config
        self.store = GroundStore()
        self.counters = self.store.counters
        self.output = {}
        self.total = 0
        self.deadline = (time.monotonic() + config.timeout_ms / 1000.0) if config.timeout_ms else None
        self.ticks = 0
        self.reported_errors = set()
        self.pending = None

    # budget checks
    def tick(self):
        self.ticks += 1
        if self.deadline is not None and self.ticks % _TICK == 0 and time.monotonic() > self.deadline:
            raise GroundingTimeout(f"grounding exceeded {self.config.timeout_ms} ms")

    def arithmetic_failed(self, rule, exc):
        if rule not in self.reported_errors:
            self.reported_errors.add(rule)
            log.warning("arithmetic error while grounding `%s`: %s", rule, exc)

    # output
    def record(self, origin, grule):
        bucket = self.output.setdefault(origin, {})
        if grule in bucket:
            return
        bucket[grule] = None
        self.total += 1
        limit = self.config.max_ground_rules
        if limit is not None and self.total > limit:
            raise BudgetExceeded(f"more than {limit} ground rules")

    def derive(self, sig, tup, fact):
        store = self.store
        if fact:
            store.fact_set(sig).add(tup)
        if self.pending is None:
            store.add(sig, tup)
        elif tup not in store.extension(sig):
            self.pending.setdefault(sig, {})[tup] = None

    def load_facts(self, rules, origins):
        for rule, origin in zip(rules, origins):
            if not rule.is_fact:
                continue
            atom = rule.head[0]
            for tup in expand_fact(atom):
                self.store.add_fact(atom.signature, tup)
                self.record(origin, GroundRule(((atom.predicate, tup),)))

    # instantiation
    def instantiate(self, cr, delta=None, delta_sets=None):
        store = self.store
        counters = self.counters
        steps = cr.steps
        n = len(steps)
        env = {}
        matched = [None] * n
        negs = []
        complete = store.complete
        rule = cr.rule
        origin = cr.origin
        atom_steps = [(i, s) for i, s in enumerate(steps) if isinstance(s, _AtomStep)]
        delta_index = {}

        def candidates(step):
            src = step.source
            pos = step.index_pos
            if src == "delta":
                tuples = delta[step.sig]
                if pos is None:
                    return tuples
                idx = delta_index.get((step.sig, pos))
                if idx is None:
                    idx = {}
                    for t in tuples:
                        idx.setdefault(t[pos], []).append(t)
                    delta_index[step.sig, pos] = idx
                counters.index_probes += 1
                return idx.get(step.index_value(env), ())
            if pos is None:
                tuples = store.extension(step.sig)
            else:
                counters.index_probes += 1
                tuples = store.index(step.sig, pos).get(step.index_value(env), ())
            if src == "old":
                new = delta_sets.get(step.sig, ())
                return [t for t in tuples if t not in new]
            return tuples

        def emit():
            head = []
            for name, sig, producers in cr.heads:
                head.append((name, tuple(p(env) for p in producers)))
            pos_atoms = []
            for i, s in atom_steps:
                if s.skip_fact_check:
                    continue
                tup = matched[i]
                if tup in store.facts.get(s.sig, ()):
                    continue
                atom = (s.atom.predicate, tup)
                if atom not in pos_atoms:
                    pos_atoms.append(atom)
            counters.instances += 1
            neg_atoms = tuple(dict.fromkeys(negs))
            head = tuple(dict.fromkeys(head))
            fact = len(head) == 1 and not pos_atoms and not neg_atoms
            for name, args in head:
                self.derive((name, len(args)), args, fact)
            self.record(origin, GroundRule(head, tuple(pos_atoms), neg_atoms))

        def extend(i):
            if i == n:
                emit()
                return
            step = steps[i]
            if isinstance(step, _AtomStep):
                self.tick()
                try:
                    cands = candidates(step)
                    expected = step.expected(env) if step.check is not None else None
                except EvaluationError as exc:
                    self.arithmetic_failed(rule, exc)
                    return
                counters.substitution_attempts += len(cands)
                check = step.check
                frees = step.frees
                dups = step.dups
                structs = step.structs
                for t in cands:
                    if check is not None and check(t) != expected:
                        continue
                    if dups and any(t[a] != t[b] for a, b in dups):
                        continue
                    for p, name in frees:
                        env[name] = t[p]
                    if structs:
                        for name in step.struct_vars:
                            env.pop(name, None)
                        try:
                            if not all(_unify(term, t[p], env) for p, term in structs):
                                continue
                        except EvaluationError as exc:
                            self.arithmetic_failed(rule, exc)
                            continue
                    matched[i] = t
                    extend(i + 1)
                return
            try:
                if step.kind == "cmp":
                    if not compare(step.op, step.left(env), step.right(env)):
                        return
                    extend(i + 1)
                elif step.kind == "assign":
                    env[step.target] = step.left(env)
                    extend(i + 1)
                else:
                    args = tuple(p(env) for p in step.args)
                    if args in store.facts.get(step.sig, ()):
                        return
                    if step.sig in complete and args not in store.extension(step.sig):
                        extend(i + 1)
                        return
                    negs.append((step.sig[0], args))
                    extend(i + 1)
                    negs.pop()
            except EvaluationError as exc:
                self.arithmetic_failed(rule, exc)

        extend(0)

    def fact_sigs(self):
        store = self.store
        return {sig for sig in store.complete
                if len(store.facts.get(sig, ())) == len(store.extension(sig))}

    def compile(self, rule, origin, sources=None):
        return _compile_rule(rule, origin, self.store.stats_view(), sources, self.fact_sigs())

    def explain(self, rule, origin):
        if self.config.explain is None:
            return
        trace = []
        cost = estimate_rule(rule, self.store.stats_view(), trace)
        self.config.explain.append({"origin": origin, "rule": str(rule), "estimate": cost, "steps": trace})

    def ground_nonrecursive(self, rules, predicates):
        for rule, origin in rules:
            self.explain(rule, origin)
            self.instantiate(self.compile(rule, origin))
            # a fresh predicate has exactly one defining rule
            self.store.complete |= {a.signature for a in rule.head if a.signature not in predicates}

    def ground_recursive(self, rules, recursive_sigs):
        store = self.store
        for rule, origin in rules:
            self.explain(rule, origin)
        self.pending = {}
        for rule, origin in rules:
            self.instantiate(self.compile(rule, origin))
        compiled = {}
        while self.pending:
            delta = {}
            for sig, tuples in self.pending.items():
                new = [t for t in tuples if store.add(sig, t)]
                if new:
                    delta[sig] = new
            self.pending = {}
            if not delta:
                break
            delta_sets = {sig: set(ts) for sig, ts in delta.items()}
            for j, (rule, origin) in enumerate(rules):
                body_atoms = [l.atom for l in plan_body(rule.body)[0]
                              if isinstance(l, Literal) and l.positive]
                rec = [k for k, a in enumerate(body_atoms) if a.signature in recursive_sigs]
                for k in rec:
                    if body_atoms[k].signature not in delta:
                        continue
                    # index choices are fixed on first use to keep iterations cheap
                    cr = compiled.get((j, k))
                    if cr is None:
                        sources = ["full"] * len(body_atoms)
                        for i in rec:
                            if i < k:
                                sources[i] = "old"
                        sources[k] = "delta"
                        cr = compiled[j, k] = self.compile(rule, origin, sources)
                    self.instantiate(cr, delta, delta_sets)
        self.pending = None

    def simplify_all(self):
        """Fixpoint of fact-based simplification over everything emitted."""
        store = self.store
        changed = True
        while changed:
            changed = False
            for origin, bucket in self.output.items():
                new_bucket = {}
                for g in bucket:
                    s = simplify(g, store, final=True)
                    if s is None:
                        changed = True
                        continue
                    if s != g:
                        changed = True
                        if s.is_fact:
                            name, args = s.head[0]
                            store.fact_set((name, len(args))).add(args)
                    new_bucket[s] = None
                self.output[origin] = new_bucket


def simplify(g: GroundRule, store: GroundStore, final: bool = False):
    """Fact-based simplification of one ground rule; ``None`` if it is deleted.

    Positive body atoms that are facts are dropped.  A negative literal over
    a fact deletes the rule; one over an atom outside every extension (once
    its predicate is complete, or at the end when ``final``) is dropped.
    """
    for atom in g.negative:
        if store.is_fact(atom):
            return None
    pos = tuple(a for a in g.positive if not store.is_fact(a))
    neg = []
    for atom in g.negative:
        name, args = atom
        sig = (name, len(args))
        if (final or sig in store.complete) and args not in store.extension(sig):
            continue
        neg.append(atom)
    return GroundRule(g.head, pos, tuple(neg))


def _check_safety(program):
    for rule in program.rules:
        report = safety_check(rule)
        if not report.safe:
            raise SafetyError(rule, report.unsafe_variables)


def ground_program(program: Program, mode: str = "smart", config: GroundConfig | None = None):
    """Ground ``program``; returns ``(GroundProgram, RunReport)``.

    ``mode`` selects how rules are decomposed: ``off`` keeps them,
    ``always`` replaces each decomposable rule by its first decomposition
    before grounding, ``smart`` decides per rule from live statistics just
    before the rule is first instantiated.
    """
    if mode not in MODES:
        raise ValueError(f"unknown decomposition mode {mode!r}")
    config = config or GroundConfig()
    started = time.perf_counter()
    _check_safety(program)
    decisions = []
    namer = FreshNamer.for_program(program)
    if mode == "always":
        entries = list(rewrite_rules(program, "always", None, config.sd, namer, decisions))
    else:
        entries = [(r, i, False) for i, r in enumerate(program.rules)]
    working = Program(tuple(r for r, _, _ in entries))
    origins = [o for _, o, _ in entries]
    replaced = {o for _, o, flag in entries if flag}

    g = _Grounder(config)
    g.load_facts(working.rules, origins)
    g.store.complete |= working.predicates() - working.idb_predicates()
    output_rules = [r for r in working.rules if r.is_fact]
    plan = build_module_plan(working)
    stats = g.store.stats_view()
    for comp in plan.components:
        rules = [(working.rules[j], origins[j]) for j in comp.rules]
        if comp.negative_cycle:
            log.warning("component %s is cyclic through negation",
                        ", ".join(f"{n}/{a}" for n, a in sorted(comp.predicates)))
        if mode == "smart" and comp.recursive:
            rules = _decide(rules, stats, config, namer, decisions, replaced)
        if comp.recursive:
            rec = set(comp.predicates)
            for rule, _ in rules:
                rec |= {a.signature for a in rule.head}
            g.ground_recursive(rules, rec)
            output_rules.extend(r for r, _ in rules)
        else:
            for rule, origin in rules:
                chosen = [(rule, origin)]
                if mode == "smart":
                    chosen = _decide(chosen, stats, config, namer, decisions, replaced)
                g.ground_nonrecursive(chosen, comp.predicates)
                output_rules.extend(r for r, _ in chosen)
        g.store.complete |= set(comp.predicates)
        for rule, _ in rules:
            g.store.complete |= {a.signature for a in rule.head}
    g.simplify_all()

    facts = set()
    rules = set()
    by_origin = {}
    for origin, bucket in g.output.items():
        texts = []
        for grule in bucket:
            if grule.is_fact:
                facts.add(grule.head[0])
            else:
                rules.add(grule)
            texts.append(str(grule))
        by_origin[origin] = sorted(texts)
    for sig, tuples in g.store.facts.items():
        facts.update((sig[0], t) for t in tuples)
    gp = GroundProgram(sorted(facts, key=atom_key), sorted(rules, key=str), by_origin, g.counters)
    report = RunReport(len(program.rules), len(output_rules), len(gp), g.counters, decisions,
                       round((time.perf_counter() - started) * 1000.0, 3), mode, Program(tuple(output_rules)),
                       frozenset(replaced))
    return gp, report


def _decide(rules, stats, config, namer, decisions, replaced):
    out = []
    for rule, origin in rules:
        rd = smart_decompose(rule, stats, config.sd, namer, decisions) if not rule.is_fact else None
        if rd is None:
            out.append((rule, origin))
        else:
            out.extend((r, origin) for r in grounding_order(rd))
            replaced.add(origin)
    return out
