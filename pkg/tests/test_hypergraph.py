import random
from itertools import permutations

import pytest

from aspdecomp import parse_rule
from aspdecomp.hypergraph import (
    Hyperedge,
    Hypergraph,
    TDConfig,
    TreeDecomposition,
    decomposition_from_ordering,
    generate_tree_decompositions,
    to_hypergraph,
    validate_td,
)

from conftest import R1
from randprog import random_rule

TD1_BAGS = {frozenset("DPYZ"), frozenset("PSXYZ")}
TD2_BAGS = {frozenset("DSXYZ"), frozenset("DPSX")}


def _hg(*edges):
    es = tuple(Hyperedge(frozenset(e), ()) for e in edges)
    return Hypergraph(frozenset().union(*map(frozenset, edges)), es, (), len(edges))


def test_running_example_hypergraph():
    hg = to_hypergraph(parse_rule(R1))
    assert hg.vertices == set("XYZSDP")
    assert sorted(map(sorted, (e.vertices for e in hg.edges))) == sorted(
        map(sorted, ["S", "XYS", "DYZ", "XPS", "PD", "XYZS"]))
    assert sum(e.head for e in hg.edges) == 1


def test_ground_rule_has_empty_hypergraph():
    hg = to_hypergraph(parse_rule("p :- q."))
    assert not hg.vertices and not hg.edges
    assert len(hg.ground_literals) == 1
    assert list(generate_tree_decompositions(hg)) == []


def test_single_variable_rule():
    hg = to_hypergraph(parse_rule("p(X) :- q(X)."))
    assert hg.vertices == {"X"}
    assert [e.vertices for e in hg.edges] == [{"X"}, {"X"}]
    # one body literal: not decomposable
    assert list(generate_tree_decompositions(hg)) == []


def test_min_fill_reaches_running_example_decompositions():
    hg = to_hypergraph(parse_rule(R1))
    tds = list(generate_tree_decompositions(hg, TDConfig("min-fill", 0)))
    bag_sets = [set(td.bags) for td in tds]
    assert TD1_BAGS in bag_sets
    assert TD2_BAGS in bag_sets
    assert all(validate_td(hg, td) for td in tds)


def test_running_example_td1_is_valid():
    hg = to_hypergraph(parse_rule(R1))
    td = TreeDecomposition((frozenset("PSXYZ"), frozenset("DPYZ")), ((0, 1),))
    assert validate_td(hg, td)


def test_single_edge_gives_one_bag():
    hg = _hg("XY")
    td = decomposition_from_ordering(hg, ["X", "Y"])
    assert td.bags == (frozenset("XY"),) and td.width == 1


def test_path_has_width_one():
    hg = to_hypergraph(parse_rule("h :- p(X,Y), q(Y,Z)."))
    # oracle: exhaustive search over all elimination orders
    widths = [decomposition_from_ordering(hg, list(order)).width for order in permutations("XYZ")]
    assert min(widths) == 1
    td = next(generate_tree_decompositions(hg))
    assert td.width == 1
    assert set(td.bags) == {frozenset("XY"), frozenset("YZ")}


def test_uncovered_edge_is_invalid():
    hg = _hg("XY", "YZ")
    assert not validate_td(hg, TreeDecomposition((frozenset("XY"), frozenset("Z")), ((0, 1),)))


def test_disconnected_occurrences_are_invalid():
    hg = _hg("XY", "YZ")
    td = TreeDecomposition((frozenset("XY"), frozenset("W"), frozenset("YZ")), ((0, 1), (1, 2)))
    assert not validate_td(hg, td)
    ok = TreeDecomposition((frozenset("XY"), frozenset("YZ")), ((0, 1),))
    assert validate_td(hg, ok)


def test_not_a_tree_is_invalid():
    hg = _hg("XY")
    assert not validate_td(hg, TreeDecomposition((frozenset("XY"), frozenset("XY")), ()))


@pytest.mark.parametrize("heuristic", ["min-fill", "min-degree", "max-cardinality"])
def test_heuristics_produce_valid_and_deterministic_output(heuristic):
    rng = random.Random(7)
    for _ in range(30):
        hg = to_hypergraph(random_rule(rng))
        cfg = TDConfig(heuristic, seed=3)
        first = list(generate_tree_decompositions(hg, cfg))
        assert first == list(generate_tree_decompositions(hg, cfg))
        assert all(validate_td(hg, td) for td in first)
        assert len({td.canonical() for td in first}) == len(first)


def test_width_bounds():
    rng = random.Random(11)
    for _ in range(50):
        hg = to_hypergraph(random_rule(rng))
        for td in generate_tree_decompositions(hg):
            assert td.width <= len(hg.vertices) - 1


def test_disjoint_literals_width_is_max_arity_minus_one():
    hg = to_hypergraph(parse_rule("h :- p(X,Y), q(Z), r(U,V,W)."))
    assert min(td.width for td in generate_tree_decompositions(hg)) == 2


def test_config_validation():
    with pytest.raises(ValueError):
        TDConfig("best-first")
    with pytest.raises(ValueError):
        TDConfig(max_attempts=0)
