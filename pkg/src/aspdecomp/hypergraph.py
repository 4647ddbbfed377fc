"""Rule hypergraphs and tree decompositions by bucket elimination."""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import combinations

from .syntax import Rule

HEURISTICS = ("min-fill", "min-degree", "max-cardinality")


@dataclass(frozen=True)
class Hyperedge:
    vertices: frozenset
    literals: tuple
    head: bool = False


@dataclass(frozen=True)
class Hypergraph:
    vertices: frozenset
    edges: tuple
    ground_literals: tuple = ()
    body_size: int = 0

    def primal_adjacency(self) -> dict:
        adj = {v: set() for v in self.vertices}
        for edge in self.edges:
            for a, b in combinations(edge.vertices, 2):
                adj[a].add(b)
                adj[b].add(a)
        return adj


def to_hypergraph(rule: Rule) -> Hypergraph:
    """One hyperedge per body literal plus one for the head.

    All head atoms share a single edge so that the head variables always end
    up together in some bag.  Variable-free literals get no edge.
    """
    edges = []
    ground = []
    head_vars = rule.head_variables()
    if head_vars:
        edges.append(Hyperedge(head_vars, tuple(rule.head), head=True))
    for lit in rule.body:
        vs = lit.variables()
        if vs:
            edges.append(Hyperedge(vs, (lit,)))
        else:
            ground.append(lit)
    return Hypergraph(rule.variables(), tuple(edges), tuple(ground), len(rule.body))


@dataclass(frozen=True)
class TreeDecomposition:
    bags: tuple
    edges: tuple = ()

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0) - 1

    def neighbors(self) -> dict:
        adj = {i: [] for i in range(len(self.bags))}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        for i in adj:
            adj[i].sort()
        return adj

    def canonical(self):
        return (frozenset(self.bags),
                frozenset(frozenset((self.bags[a], self.bags[b])) for a, b in self.edges))

    def __str__(self):
        bags = "; ".join("{" + ",".join(sorted(b)) + "}" for b in self.bags)
        return f"TD[{bags}] edges={list(self.edges)}"


@dataclass(frozen=True)
class TDConfig:
    heuristic: str = "min-fill"
    seed: int = 0
    max_attempts: int = 64

    def __post_init__(self):
        if self.heuristic not in HEURISTICS:
            raise ValueError(f"unknown ordering heuristic {self.heuristic!r}")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be positive")


def _is_tree(n: int, edges) -> bool:
    if len(edges) != n - 1:
        return False
    if n == 0:
        return False
    seen = {0}
    stack = [0]
    adj = {i: [] for i in range(n)}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    while stack:
        for m in adj[stack.pop()]:
            if m not in seen:
                seen.add(m)
                stack.append(m)
    return len(seen) == n


def validate_td(hg: Hypergraph, td: TreeDecomposition) -> bool:
    """Coverage of every hyperedge and connectedness of every vertex."""
    n = len(td.bags)
    if n == 0 or not _is_tree(n, td.edges):
        return False
    if any(_covering(edge, td) is None for edge in hg.edges):
        return False
    adj = td.neighbors()
    for v in hg.vertices:
        holders = {i for i, bag in enumerate(td.bags) if v in bag}
        if not holders:
            return False
        start = next(iter(holders))
        seen = {start}
        stack = [start]
        while stack:
            for m in adj[stack.pop()]:
                if m in holders and m not in seen:
                    seen.add(m)
                    stack.append(m)
        if seen != holders:
            return False
    return True


def _covering(edge, td):
    for bag in td.bags:
        if edge.vertices <= bag:
            return bag
    return None


def _fill_in(adj, v) -> int:
    nbrs = list(adj[v])
    return sum(1 for a, b in combinations(nbrs, 2) if b not in adj[a])


def elimination_ordering(hg: Hypergraph, heuristic: str, rng: random.Random) -> list:
    adj = {v: set(n) for v, n in hg.primal_adjacency().items()}
    vertices = sorted(hg.vertices)
    if heuristic == "max-cardinality":
        numbered = []
        weight = {v: 0 for v in vertices}
        remaining = set(vertices)
        while remaining:
            best = max(weight[v] for v in remaining)
            pick = rng.choice(sorted(v for v in remaining if weight[v] == best))
            remaining.discard(pick)
            numbered.append(pick)
            for m in adj[pick]:
                if m in remaining:
                    weight[m] += 1
        return numbered[::-1]
    order = []
    remaining = set(vertices)
    while remaining:
        if heuristic == "min-fill":
            scores = {v: _fill_in(adj, v) for v in remaining}
        else:
            scores = {v: len(adj[v]) for v in remaining}
        best = min(scores.values())
        pick = rng.choice(sorted(v for v in remaining if scores[v] == best))
        order.append(pick)
        nbrs = adj[pick]
        for a, b in combinations(nbrs, 2):
            adj[a].add(b)
            adj[b].add(a)
        for m in nbrs:
            adj[m].discard(pick)
        del adj[pick]
        remaining.discard(pick)
    return order


def decomposition_from_ordering(hg: Hypergraph, order) -> TreeDecomposition:
    """Bucket elimination followed by absorption of subsumed bags."""
    adj = {v: set(n) for v, n in hg.primal_adjacency().items()}
    position = {v: i for i, v in enumerate(order)}
    bags = []
    for v in order:
        later = {m for m in adj[v] if position[m] > position[v]}
        bags.append(frozenset(later | {v}))
        for a, b in combinations(later, 2):
            adj[a].add(b)
            adj[b].add(a)
    parent = {}
    for i, v in enumerate(order):
        rest = bags[i] - {v}
        if rest:
            parent[i] = min(position[m] for m in rest)
        elif i < len(order) - 1:
            # disconnected component: hang it below the last bucket
            parent[i] = len(order) - 1
    nodes = {i: bags[i] for i in range(len(bags))}
    nbrs = {i: set() for i in nodes}
    for c, p in parent.items():
        nbrs[c].add(p)
        nbrs[p].add(c)
    changed = True
    while changed:
        changed = False
        for i in sorted(nodes):
            for j in sorted(nbrs[i]):
                if nodes[i] <= nodes[j]:
                    for k in nbrs[i] - {j}:
                        nbrs[k].discard(i)
                        nbrs[k].add(j)
                        nbrs[j].add(k)
                    nbrs[j].discard(i)
                    del nbrs[i]
                    del nodes[i]
                    changed = True
                    break
            if changed:
                break
    ids = sorted(nodes, reverse=True)  # last bucket (elimination root) first
    index = {old: new for new, old in enumerate(ids)}
    edges = sorted({tuple(sorted((index[a], index[b]))) for a in nodes for b in nbrs[a]})
    return TreeDecomposition(tuple(nodes[i] for i in ids), tuple(edges))


def generate_tree_decompositions(hg: Hypergraph, config: TDConfig = TDConfig()):
    """Lazily yield distinct tree decompositions of ``hg``.

    Attempt ``i`` breaks heuristic ties with ``Random(seed, i)``; duplicates
    are skipped and generation stops after ``config.max_attempts`` attempts.
    Hypergraphs of rules with at most one body literal yield nothing.
    """
    if not hg.vertices or hg.body_size <= 1:
        return
    seen = set()
    for attempt in range(config.max_attempts):
        rng = random.Random(config.seed * 1_000_003 + attempt)
        order = elimination_ordering(hg, config.heuristic, rng)
        td = decomposition_from_ordering(hg, order)
        key = td.canonical()
        if key in seen:
            continue
        seen.add(key)
        yield td
