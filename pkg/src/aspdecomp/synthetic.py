"""Synthetic benchmark programs."""

from __future__ import annotations

import random

from .syntax import Atom, Constant, Literal, Program, Rule, Variable


def chain_rule(k: int) -> Rule:
    """``h(X0,Xk) :- e1(X0,X1), ..., ek(X(k-1),Xk).``"""
    if k < 1:
        raise ValueError("chain length must be at least 1")
    body = tuple(Literal(Atom(f"e{i}", (Variable(f"X{i - 1}"), Variable(f"X{i}")))) for i in range(1, k + 1))
    return Rule((Atom("h", (Variable("X0"), Variable(f"X{k}"))),), body)


def random_relation(rng: random.Random, tuples: int, domain: int) -> list:
    """``tuples`` distinct pairs over ``1..domain``, sorted."""
    if tuples > domain * domain:
        raise ValueError("more tuples requested than the domain allows")
    pairs = set()
    while len(pairs) < tuples:
        pairs.add((rng.randint(1, domain), rng.randint(1, domain)))
    return sorted(pairs)


def chain_program(k: int, tuples: int = 200, domain: int = 50, seed: int = 0) -> Program:
    """Chain join of ``k`` random binary relations, facts first."""
    rng = random.Random(seed)
    rules = []
    for i in range(1, k + 1):
        for a, b in random_relation(rng, tuples, domain):
            rules.append(Rule((Atom(f"e{i}", (Constant(a), Constant(b))),)))
    rules.append(chain_rule(k))
    return Program(tuple(rules))
