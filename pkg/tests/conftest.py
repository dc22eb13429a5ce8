import itertools

import pytest

from max2qubo.formula import parse_dimacs

EQ1_CNF = "p cnf 2 4\n1 2 0\n-1 2 0\n1 -2 0\n-1 -2 0\n"


@pytest.fixture
def eq1():
    return parse_dimacs(EQ1_CNF)


def satisfied_by_hand(f, bits):
    """Reference clause evaluation, kept apart from the package's evaluators."""
    total = 0
    for c in f.clauses:
        if any((bits[l.variable] == 1) != l.negated for l in c.literals):
            total += c.weight
    return total


def best_satisfied_by_hand(f):
    return max(satisfied_by_hand(f, bits) for bits in itertools.product((0, 1), repeat=f.num_vars))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
