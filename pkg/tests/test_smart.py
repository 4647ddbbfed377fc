import json
import random

import pytest

from aspdecomp import parse_program, parse_rule
from aspdecomp.cost import PredicateStats
from aspdecomp.decomposer import FreshNamer
from aspdecomp.hypergraph import generate_tree_decompositions
from aspdecomp.smart import SDConfig, is_preferable, rewrite_program, smart_decompose
from aspdecomp.synthetic import chain_rule

from conftest import EXAMPLE3_FACTS, R1


def _stub(e_r, costs):
    it = iter(costs)
    return dict(estimate=lambda rule, stats: e_r, estimate_rd=lambda rd, stats: next(it))


def _chain_stats(k):
    return {(f"e{i}", 2): PredicateStats(200, (50, 50)) for i in range(1, k + 1)}


def test_single_literal_rule_is_not_decomposable():
    log = []
    assert smart_decompose(parse_rule("p(X) :- q(X)."), {}, log=log) is None
    assert log[0].reason.startswith("not decomposable")


@pytest.mark.parametrize("e_rd,decomposed", [(15, True), (25, False), (20, True)])
def test_threshold_with_stubbed_costs(r1, e_rd, decomposed):
    rd = smart_decompose(r1, {}, SDConfig(), FreshNamer(), **_stub(10, [e_rd] * 5))
    assert (rd is not None) == decomposed


def test_is_preferable_boundary():
    assert is_preferable(10, 20, 0.5)
    assert not is_preferable(10, 20.000001, 0.5)


def test_namer_advances_only_on_acceptance(r1):
    namer = FreshNamer()
    smart_decompose(r1, {}, SDConfig(), namer, **_stub(10, [100] * 5))
    assert namer.counter == 1
    smart_decompose(r1, {}, SDConfig(), namer, **_stub(10, [1] * 5))
    assert namer.counter == 3


def test_picks_cheapest_candidate():
    rule = chain_rule(6)
    log = []
    costs = [50, 40, 45, 30, 60]
    rd = smart_decompose(rule, {}, SDConfig(), FreshNamer(), log, **_stub(100, costs))
    assert rd is not None
    assert log[0].chosen == 3
    assert log[0].candidate_costs == costs


def test_config_validation():
    with pytest.raises(ValueError):
        SDConfig(ratio_threshold=0)
    with pytest.raises(ValueError):
        SDConfig(max_generations=0)


def test_rewrite_off_is_identity():
    prog = parse_program(EXAMPLE3_FACTS + "\n" + R1)
    out, log = rewrite_program(prog, "off")
    assert out == prog and log == []


def test_rewrite_always_replaces_r1():
    prog = parse_program(R1)
    out, log = rewrite_program(prog, "always")
    assert len(out.rules) == 3
    assert log[0].decomposed
    assert sum(1 for r in out.rules if r.head[0].predicate == "p") == 1


def test_rewrite_smart_on_facts_only():
    prog = parse_program(EXAMPLE3_FACTS)
    out, _ = rewrite_program(prog, "smart", {})
    assert out == prog


def test_rewrite_smart_needs_stats():
    with pytest.raises(ValueError):
        rewrite_program(parse_program(R1), "smart")


def test_never_worse_keeps_program_identical():
    prog = parse_program("h(X,Z) :- e1(X,Y), e2(Y,Z).\nq(X) :- h(X,Y), h(Y,X), e1(X,X).")
    stats = {("e1", 2): PredicateStats(2, (2, 2)), ("e2", 2): PredicateStats(2, (2, 2)),
             ("h", 2): PredicateStats(4, (2, 2))}
    out, log = rewrite_program(prog, "smart", stats, SDConfig(ratio_threshold=1e9))
    assert out == prog
    assert not any(d.decomposed for d in log)


def test_decision_log_is_deterministic():
    prog = parse_program("h(X0,X5) :- e1(X0,X1), e2(X1,X2), e3(X2,X3), e4(X3,X4), e5(X4,X5).")
    stats = _chain_stats(5)
    runs = []
    for _ in range(2):
        _, log = rewrite_program(prog, "smart", stats, SDConfig())
        runs.append(json.dumps([d.to_json() for d in log], sort_keys=True))
    assert runs[0] == runs[1]


def test_generation_bounds_on_real_candidates():
    for k, limit in ((6, 5), (12, 1)):
        rule = chain_rule(k)
        seen = []

        def counting(hg, cfg):
            for td in generate_tree_decompositions(hg, cfg):
                seen.append(td)
                yield td

        log = []
        smart_decompose(rule, _chain_stats(k), SDConfig(), FreshNamer(), log, generate=counting)
        assert len(seen) <= limit
        if k > 10:
            assert len(seen) == 1


def test_random_rules_respect_generation_limit():
    rng = random.Random(3)
    from randprog import random_rule
    for _ in range(40):
        rule = random_rule(rng)
        seen = []

        def counting(hg, cfg):
            for td in generate_tree_decompositions(hg, cfg):
                seen.append(td)
                yield td

        stats = {sig: PredicateStats(20, (5,) * sig[1]) for sig in rule.predicates()}
        smart_decompose(rule, stats, SDConfig(), FreshNamer(), generate=counting)
        assert len(seen) <= (1 if len(rule.body) > 10 else 5)
