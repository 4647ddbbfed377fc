"""Random safe rules and small stratified programs for property tests."""

import random

from aspdecomp.syntax import Atom, Comparison, Constant, Literal, Program, Rule, Variable

VARS = ["X", "Y", "Z", "W", "U", "V", "T", "R"]


def random_rule(rng: random.Random, body_len=(3, 10), n_vars=(2, 8)) -> Rule:
    """A safe rule with only positive atoms (plus the odd comparison)."""
    nv = rng.randint(*n_vars)
    pool = VARS[:nv]
    k = rng.randint(*body_len)
    body = []
    used = set()
    for i in range(k):
        arity = rng.randint(1, 3)
        args = []
        for _ in range(arity):
            if rng.random() < 0.1:
                args.append(Constant(rng.randint(1, 3)))
            else:
                args.append(Variable(rng.choice(pool)))
        used |= {a.name for a in args if isinstance(a, Variable)}
        body.append(Literal(Atom(f"q{rng.randint(0, 4)}", tuple(args))))
    if not used:
        body.append(Literal(Atom("q9", (Variable("X"),))))
        used.add("X")
    if len(used) >= 2 and rng.random() < 0.3:
        a, b = rng.sample(sorted(used), 2)
        body.insert(rng.randrange(len(body) + 1), Comparison(rng.choice(["<", "!=", "<="]), Variable(a), Variable(b)))
    head_vars = rng.sample(sorted(used), rng.randint(0, min(3, len(used))))
    head = (Atom("h", tuple(Variable(v) for v in head_vars)),)
    return Rule(head, tuple(body))


def random_program(rng: random.Random, n_constants=None):
    """A small program with stratified negation, disjunction and constraints.

    EDB: e/2, d/1 over up to three constants.  IDB: p0/1, p1/1, p2/1 and
    the nullary g, which no body reads; negation only refers to strictly
    lower strata.
    """
    nc = n_constants or rng.randint(2, 3)
    consts = list(range(1, nc + 1))
    rules = []
    for x in consts:
        for y in consts:
            if rng.random() < 0.45:
                rules.append(Rule((Atom("e", (Constant(x), Constant(y))),)))
        if rng.random() < 0.6:
            rules.append(Rule((Atom("d", (Constant(x),)),)))
    idb = ["p0", "p1", "p2"]
    n_rules = rng.randint(2, 7 - (1 if rng.random() < 0.5 else 0))
    for _ in range(n_rules):
        level = rng.randrange(len(idb))
        head_pred = idb[level]
        body = []
        bound = []
        for _ in range(rng.randint(2, 4)):
            if rng.random() < 0.5:
                x, y = rng.choice("XYZ"), rng.choice("XYZ")
                body.append(Literal(Atom("e", (Variable(x), Variable(y)))))
                bound += [x, y]
            elif rng.random() < 0.5 or level == 0:
                x = rng.choice("XYZ")
                body.append(Literal(Atom("d", (Variable(x),))))
                bound.append(x)
            else:
                # positive references may reach the same stratum (recursion)
                x = rng.choice("XYZ")
                body.append(Literal(Atom(idb[rng.randint(0, level)], (Variable(x),))))
                bound.append(x)
        bound = sorted(set(bound))
        if level > 0 and rng.random() < 0.5:
            body.append(Literal(Atom(idb[rng.randrange(level)], (Variable(rng.choice(bound)),)), negated=True))
        if len(bound) >= 2 and rng.random() < 0.25:
            a, b = rng.sample(bound, 2)
            body.append(Comparison(rng.choice(["<", "!="]), Variable(a), Variable(b)))
        if rng.random() < 0.1:
            y = rng.choice(bound)
            body.append(Comparison("=", Variable("A"), Variable(y)))
            body.append(Literal(Atom("d", (Variable("A"),))))
        hv = Variable(rng.choice(bound))
        head = [Atom(head_pred, (hv,))]
        if rng.random() < 0.2:
            # g is never read, so disjunction cannot close a cycle through negation
            head.append(Atom("g", ()))
        elif rng.random() < 0.1:
            head = [Atom("g", ())]
        rng.shuffle(body)
        rules.append(Rule(tuple(head), tuple(body)))
    if rng.random() < 0.4:
        x = Variable("X")
        rules.append(Rule((), (Literal(Atom(rng.choice(idb), (x,))), Literal(Atom("d", (x,)), negated=True))))
    return Program(tuple(rules))
