"""Grounding-cost estimation from predicate statistics.

A rule's cost is the size of its first atom times one step factor per
further atom; each step factor is the number of tuples an index probe is
expected to return, scaled by how much the shared variables restrict the
search.  Selectivities of the intermediate join are propagated after every
step.
"""

from __future__ import annotations

import math
from collections import ChainMap
from dataclasses import dataclass, field

from .decomposer import grounding_order
from .errors import MissingStats
from .syntax import ArithmeticTerm, Comparison, Literal, Variable, plan_body, term_variables

COST_MIN = 1.0
COST_MAX = 1e300
INEQUALITY_SELECTIVITY = 1.0 / 3.0


@dataclass(frozen=True)
class PredicateStats:
    """Extension size ``size`` (T) and per-position distinct counts (V)."""

    size: float
    selectivity: tuple = ()
    exact: bool = True

    @classmethod
    def from_tuples(cls, tuples, arity: int) -> "PredicateStats":
        tuples = list(tuples)
        distinct = tuple(len({t[i] for t in tuples}) for i in range(arity))
        return cls(len(tuples), distinct, True)


def lookup(stats, signature) -> PredicateStats:
    try:
        return stats[signature]
    except KeyError:
        raise MissingStats(signature) from None


def fresh_pred_stats(size: float, arity: int) -> PredicateStats:
    """Estimated statistics of a fresh predicate: every position gets the k-th root of T."""
    if size < 0:
        raise ValueError("extension size must be non-negative")
    if arity == 0:
        return PredicateStats(min(size, 1), (), exact=False)
    if size == 0:
        return PredicateStats(0, (0,) * arity, exact=False)
    root = size ** (1.0 / arity)
    nearest = round(root)
    if nearest >= 1 and math.isclose(nearest ** arity, size, rel_tol=1e-12):
        v = nearest
    else:
        v = math.ceil(root)
    return PredicateStats(size, (min(v, max(size, 1)),) * arity, exact=False)


def _position(atom, var):
    for i, t in enumerate(atom.args):
        if var in set(term_variables(t)):
            return i
    return None


def atom_selectivity(atom, var, stats) -> float:
    """V(var, atom): distinct values at the first position mentioning ``var``."""
    st = lookup(stats, atom.signature)
    pos = _position(atom, var)
    if pos is None or pos >= len(st.selectivity):
        return 1.0
    return st.selectivity[pos]


def domains(atoms, stats) -> dict:
    """dom(X): the largest selectivity of X over the given body atoms."""
    dom = {}
    for atom in atoms:
        for var in atom.variables():
            dom[var] = max(dom.get(var, 0), atom_selectivity(atom, var, stats))
    return dom


def index_position(atom, bound, stats):
    """The single argument position used for index lookups, or ``None``.

    Candidates are bound arguments that are a variable or an arithmetic term
    over exactly one variable; the one with the most distinct values wins,
    earliest position on ties.
    """
    st = lookup(stats, atom.signature)
    best, best_v = None, -1.0
    for i, t in enumerate(atom.args):
        if isinstance(t, Variable):
            ok = t.name in bound
        elif isinstance(t, ArithmeticTerm):
            vs = set(term_variables(t))
            ok = len(vs) == 1 and vs <= set(bound)
        else:
            ok = False
        if ok:
            v = st.selectivity[i] if i < len(st.selectivity) else 0
            if v > best_v:
                best, best_v = i, v
    return best


@dataclass
class JoinState:
    """Selectivities V(X, A_j) of the join so far and the running cost."""

    selectivity: dict = field(default_factory=dict)
    cost: float = 0.0

    @property
    def variables(self) -> set:
        return set(self.selectivity)


def step_estimate(state: JoinState, atom, stats, dom) -> float:
    """Expected tuples produced when joining ``atom`` onto the current join."""
    st = lookup(stats, atom.signature)
    if st.size == 0:
        return 0.0
    shared = atom.variables() & state.variables
    pos = index_position(atom, shared, stats)
    divisor = max(st.selectivity[pos], 1) if pos is not None else 1
    factor = st.size / divisor
    for var in sorted(shared):
        factor *= state.selectivity[var] / max(dom.get(var, 1), 1)
    return factor


def propagate_selectivity(state: JoinState, atom, stats, dom) -> JoinState:
    """Selectivities after ``atom`` has been joined, floored at 1."""
    new = dict(state.selectivity)
    for var in atom.variables():
        v_atom = atom_selectivity(atom, var, stats)
        if var in state.selectivity:
            value = state.selectivity[var] * v_atom / max(dom.get(var, 1), 1)
        else:
            value = v_atom
        new[var] = max(value, 1.0)
    return JoinState(new, state.cost)


def _clamp(x: float) -> float:
    return min(max(x, COST_MIN), COST_MAX)


def estimate_rule(rule, stats, trace=None) -> float:
    """Estimated number of operations needed to ground ``rule``.

    Atoms are taken in execution order; comparisons and negative literals
    only filter and contribute a factor of 1.  ``trace``, when a list,
    receives one record per step.
    """
    order, _, _ = plan_body(rule.body)
    atoms = [l.atom for l in order if isinstance(l, Literal) and l.positive]
    if not atoms:
        if trace is not None:
            trace.append({"atom": None, "factor": 1.0, "cost": 1.0})
        return 1.0
    dom = domains(atoms, stats)
    state = None
    for lit in order:
        if isinstance(lit, Comparison):
            if state is not None:
                _bind_assignment(state, lit, dom)
            continue
        if lit.negated:
            continue
        atom = lit.atom
        if state is None:
            st = lookup(stats, atom.signature)
            state = JoinState({}, float(st.size))
            state = propagate_selectivity(state, atom, stats, dom)
            state.cost = float(st.size)
            factor = float(st.size)
        else:
            factor = step_estimate(state, atom, stats, dom)
            cost = min(state.cost * factor, COST_MAX)
            state = propagate_selectivity(state, atom, stats, dom)
            state.cost = cost
        if trace is not None:
            trace.append({"atom": str(atom), "factor": factor, "cost": state.cost})
    return _clamp(state.cost)


def _bind_assignment(state: JoinState, cmp: Comparison, dom):
    target = cmp.assigned_variable(state.variables)
    if target is None:
        return
    sources = cmp.variables() - {target}
    value = max((state.selectivity.get(v, 1.0) for v in sources), default=1.0)
    state.selectivity[target] = value
    dom.setdefault(target, value)


def estimate_join_size(body, head_vars, stats) -> float:
    """Size of the projection of the body join onto ``head_vars``.

    Left-deep estimate T(A)·T(B) / prod max(V(X,A), V(X,B)) over shared X;
    inequalities keep a third of the tuples, equalities 1/dom.  Capped at the
    product of the head variables' domains and floored at 1.
    """
    order, _, _ = plan_body(body)
    atoms = [l.atom for l in order if isinstance(l, Literal) and l.positive]
    dom = domains(atoms, stats)
    size = None
    sel = {}
    for lit in order:
        if isinstance(lit, Comparison):
            target = lit.assigned_variable(set(sel))
            if target is not None:
                value = max((sel.get(v, 1.0) for v in lit.variables() - {target}), default=1.0)
                sel[target] = value
                dom.setdefault(target, value)
            elif size is not None:
                if lit.op == "=":
                    size /= max([dom.get(v, 1) for v in lit.variables()] + [1])
                else:
                    size *= INEQUALITY_SELECTIVITY
            continue
        if lit.negated:
            continue
        atom = lit.atom
        st = lookup(stats, atom.signature)
        if size is None:
            size = float(st.size)
            sel = {v: atom_selectivity(atom, v, stats) for v in atom.variables()}
            continue
        denom = 1.0
        for var in atom.variables():
            v_atom = atom_selectivity(atom, var, stats)
            if var in sel:
                denom *= max(sel[var], v_atom, 1)
                sel[var] = min(sel[var], v_atom)
            else:
                sel[var] = v_atom
        size = size * st.size / denom
    if size is None:
        size = 1.0
    cap = 1.0
    for var in head_vars:
        cap *= max(dom.get(var, sel.get(var, 1)), 1)
    return min(max(min(size, cap), 1.0), COST_MAX)


def inject_fresh_stats(rd, stats) -> dict:
    """Estimated statistics for the fresh predicates of ``rd``, in grounding order."""
    overlay = {}
    view = ChainMap(overlay, stats)
    for r in grounding_order(rd):
        if len(r.head) == 1 and rd.is_fresh(r.head[0].predicate):
            head = r.head[0]
            size = estimate_join_size(r.body, head.variables(), view)
            overlay[head.signature] = fresh_pred_stats(size, head.arity)
    return overlay


def estimate_decomposition(rd, stats, trace=None) -> float:
    """Sum of the rule estimates of ``rd`` under injected fresh-predicate statistics."""
    view = ChainMap(inject_fresh_stats(rd, stats), stats)
    total = 0.0
    for r in grounding_order(rd):
        steps = [] if trace is not None else None
        cost = estimate_rule(r, view, steps)
        if trace is not None:
            trace.append({"rule": str(r), "steps": steps, "cost": cost})
        total += cost
    return min(total, COST_MAX)
