import pytest
from hypothesis import given, settings, strategies as st

from aspdecomp import parse_program, parse_rule, render_program
from aspdecomp.errors import ParseError, UnsupportedFeature
from aspdecomp.syntax import AnonymousVariable, Comparison, IntervalTerm

RD1 = """p(X,Y,Z,S) :- s(S), a(X,Y,S-1), f(X,P,S-1), fresh_pred_1(P,Y,Z).
fresh_pred_1(P,Y,Z) :- c(D,Y,Z), P>=D, fresh_pred_2(P).
fresh_pred_2(P) :- s(S), f(_,P,S-1).
"""


def test_interval_fact_is_kept_lazy():
    prog = parse_program("s(1..5).")
    assert len(prog.rules) == 1 and prog.rules[0].is_fact
    assert prog.rules[0].head[0].args == (IntervalTerm(1, 5),)
    assert render_program(prog) == "s(1..5).\n"


def test_empty_input():
    assert parse_program("").rules == ()
    assert parse_program("  % only a comment\n").rules == ()
    assert render_program(parse_program("")) == ""


def test_missing_period_reports_end_of_input():
    with pytest.raises(ParseError) as exc:
        parse_program("p(X) :- q(X)")
    assert "end of input" in str(exc.value)
    assert exc.value.span.line == 1


def test_error_span_points_at_token():
    with pytest.raises(ParseError) as exc:
        parse_program("p(1).\nq(X) :- r(X) s(X).")
    assert exc.value.span.line == 2
    assert exc.value.span.column == 14


def test_rewritten_rules_round_trip():
    prog = parse_program(RD1)
    assert render_program(prog) == RD1
    assert len(prog.rules) == 3
    assert isinstance(prog.rules[2].body[1].atom.args[0], AnonymousVariable)


@pytest.mark.parametrize("text", [
    "a :- #count{X : p(X)} > 1.",
    "{a; b}.",
    "a? ",
    ":~ a. [1@1]",
    "p(\"s\").",
    "-a :- b.",
    "a :- not not b.",
    "#show a/0.",
    "p(X) :- q(X); r(X).",
])
def test_unsupported_syntax_is_rejected(text):
    with pytest.raises(UnsupportedFeature):
        parse_program(text)


def test_placement_rules():
    with pytest.raises(ParseError):
        parse_program("p(X) :- q(1..3), r(X).")
    with pytest.raises(ParseError):
        parse_program("p(_) :- q(X).")
    with pytest.raises(UnsupportedFeature):
        parse_program("p(X) :- q(X), not r(_).")


def test_comparison_spellings_normalised():
    rule = parse_rule("p(X) :- q(X,Y), X == Y, X <> 3.")
    cmps = [l for l in rule.body if isinstance(l, Comparison)]
    assert [c.op for c in cmps] == ["=", "!="]


def test_rendering_of_special_rules():
    text = "a | b :- c.\n:- a, not b.\n:- .\np(-3).\nq(X) :- r(X,Y), X=Y*(2-1).\nq(X) :- r(X,Y), X=Y-(-1).\n"
    assert render_program(parse_program(text)) == text


def test_unary_minus_on_variable():
    rule = parse_rule("p(Y) :- q(X), Y = -X.")
    again = parse_rule(str(rule))
    assert again == rule


def test_empty_body_only_for_constraints():
    with pytest.raises(ParseError):
        parse_program("p :- .")


_term = st.recursive(
    st.one_of(st.integers(-20, 20).map(str), st.sampled_from(["X", "Y", "a", "b"])),
    lambda inner: st.one_of(
        st.tuples(inner, st.sampled_from("+-*/"), inner).map(lambda t: f"({t[0]}{t[1]}{t[2]})"),
        st.lists(inner, min_size=1, max_size=2).map(lambda xs: f"f({','.join(xs)})"),
    ),
    max_leaves=6,
)


def _valid(text):
    try:
        return parse_program(text)
    except ParseError:
        return None


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["p", "q"]), st.lists(_term, min_size=0, max_size=3)),
                min_size=1, max_size=3),
       st.booleans())
def test_render_parse_round_trip(atoms, negate_last):
    body = [f"{n}({','.join(args)})" if args else n for n, args in atoms]
    if negate_last and len(body) > 1:
        body[-1] = "not " + body[-1]
    text = f"h :- {', '.join(body)}."
    prog = _valid(text)
    if prog is None:
        return
    rendered = render_program(prog)
    again = parse_program(rendered)
    assert again == prog
    assert render_program(again) == rendered
