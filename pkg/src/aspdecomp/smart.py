"""Cost-guided choice between a rule and its candidate decompositions."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from .cost import estimate_decomposition, estimate_rule
from .decomposer import FreshNamer, RuleDecomposition, to_rules
from .errors import DecompositionDegenerate
from .hypergraph import TDConfig, generate_tree_decompositions, to_hypergraph
from .syntax import Program

MODES = ("off", "always", "smart")


@dataclass(frozen=True)
class SDConfig:
    ratio_threshold: float = 0.5
    max_generations: int = 5
    non_improving_limit: int = 3
    body_length_fitness_limit: int = 10
    td: TDConfig = field(default_factory=TDConfig)

    def __post_init__(self):
        if not self.ratio_threshold > 0:
            raise ValueError("ratio_threshold must be positive")
        for name in ("max_generations", "non_improving_limit", "body_length_fitness_limit"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")


@dataclass
class Decision:
    """Why a rule was or was not replaced."""

    rule: str
    decomposed: bool
    reason: str
    rule_cost: float | None = None
    candidate_costs: list = field(default_factory=list)
    chosen: int | None = None
    ratio: float | None = None
    replacement: list = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)


def is_preferable(rule_cost: float, decomposition_cost: float, threshold: float) -> bool:
    return rule_cost / decomposition_cost >= threshold


def smart_decompose(rule, stats, config: SDConfig = SDConfig(), namer: FreshNamer | None = None,
                    log: list | None = None, *, estimate=estimate_rule,
                    estimate_rd=estimate_decomposition,
                    generate=generate_tree_decompositions) -> RuleDecomposition | None:
    """Return the cheapest candidate decomposition of ``rule`` if it pays off.

    Candidates are requested one at a time.  Generation stops after
    ``max_generations`` tree decompositions, or after ``non_improving_limit``
    consecutive ones that do not strictly lower the best estimate.  Rules
    with more than ``body_length_fitness_limit`` body literals get a single
    candidate.  The winner replaces the rule iff rule cost / candidate cost
    reaches ``ratio_threshold``.  ``namer`` advances only when a
    decomposition is returned.
    """
    if namer is None:
        namer = FreshNamer(name for name, _ in rule.predicates())

    def record(decision):
        if log is not None:
            log.append(decision)

    if len(rule.body) <= 1:
        record(Decision(str(rule), False, "not decomposable: at most one body literal"))
        return None
    rule_cost = estimate(rule, stats)
    limit = 1 if len(rule.body) > config.body_length_fitness_limit else config.max_generations
    costs = []
    best = best_cost = best_namer = None
    best_index = None
    stale = 0
    generated = 0
    for td in generate(to_hypergraph(rule), config.td):
        generated += 1
        trial = namer.copy()
        try:
            rd = to_rules(td, rule, trial, stats)
        except DecompositionDegenerate:
            rd = None
        if rd is not None:
            cost = estimate_rd(rd, stats)
            costs.append(cost)
            if best is None or cost < best_cost:
                best, best_cost, best_namer, best_index = rd, cost, trial, len(costs) - 1
                stale = 0
            else:
                stale += 1
        else:
            stale += 1
        if generated >= limit or stale >= config.non_improving_limit:
            break
    if best is None:
        record(Decision(str(rule), False, "not decomposable: no multi-node decomposition",
                        rule_cost, costs))
        return None
    ratio = rule_cost / best_cost
    if ratio >= config.ratio_threshold:
        namer.sync(best_namer)
        record(Decision(str(rule), True, "estimated cost ratio reaches threshold", rule_cost, costs,
                        best_index, ratio, [str(r) for r in best.rules]))
        return best
    record(Decision(str(rule), False, "estimated cost ratio below threshold", rule_cost, costs,
                    best_index, ratio))
    return None


def first_decomposition(rule, config: SDConfig, namer: FreshNamer, stats=None):
    """The black-box baseline: the first generated decomposition, unevaluated."""
    for td in generate_tree_decompositions(to_hypergraph(rule), config.td):
        try:
            return to_rules(td, rule, namer, stats)
        except DecompositionDegenerate:
            return None
    return None


def rewrite_rules(program: Program, mode: str, stats=None, config: SDConfig = SDConfig(),
                  namer: FreshNamer | None = None, log: list | None = None):
    """Yield ``(rule, origin_index, replaced)`` for every output rule."""
    if mode not in MODES:
        raise ValueError(f"unknown decomposition mode {mode!r}")
    if mode == "smart" and stats is None:
        raise ValueError("smart mode needs predicate statistics")
    if namer is None:
        namer = FreshNamer.for_program(program)
    for i, rule in enumerate(program.rules):
        rd = None
        if mode == "always" and len(rule.body) > 1:
            rd = first_decomposition(rule, config, namer, stats)
            if log is not None:
                log.append(Decision(str(rule), rd is not None,
                                    "black-box decomposition" if rd else "not decomposable",
                                    replacement=[str(r) for r in rd.rules] if rd else []))
        elif mode == "smart" and not rule.is_fact:
            rd = smart_decompose(rule, stats, config, namer, log)
        if rd is None:
            yield rule, i, False
        else:
            for r in rd.rules:
                yield r, i, True


def rewrite_program(program: Program, mode: str, stats=None, config: SDConfig = SDConfig(),
                    namer: FreshNamer | None = None):
    """Rewrite every rule up front; returns ``(program, decision_log)``.

    Mode ``off`` is the identity, ``always`` replaces each decomposable rule
    by its first decomposition.  ``smart`` here uses the given fixed
    statistics; the grounder instead decides rule by rule with live ones.
    """
    log = []
    rules = tuple(r for r, _, _ in rewrite_rules(program, mode, stats, config, namer, log))
    return Program(rules), log
