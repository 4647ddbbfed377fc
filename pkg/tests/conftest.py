import pytest

from aspdecomp import parse_program, parse_rule
from aspdecomp.cost import PredicateStats

R1 = "p(X,Y,Z,S) :- s(S), a(X,Y,S-1), c(D,Y,Z), f(X,P,S-1), P>=D."
EXAMPLE3_FACTS = "s(1..5). a(1..5,1..5,1..5). c(1..5,1..5,1..5). f(1..5,1..5,1..5)."

# filled by the acceptance tests, printed after the run
ACCEPTANCE_LINES = []


@pytest.fixture
def r1():
    return parse_rule(R1)


@pytest.fixture
def example3_program():
    return parse_program(EXAMPLE3_FACTS + "\n" + R1)


@pytest.fixture
def example3_stats():
    return {
        ("s", 1): PredicateStats(5, (5,)),
        ("a", 3): PredicateStats(125, (5, 5, 5)),
        ("c", 3): PredicateStats(125, (5, 5, 5)),
        ("f", 3): PredicateStats(125, (5, 5, 5)),
    }


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
