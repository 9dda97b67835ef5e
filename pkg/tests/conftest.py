import random
from fractions import Fraction
from pathlib import Path

import pytest

from singsys import RationalExpr, VarTable, build_system, legendre, parse

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"

FIXTURES = {
    "EX-A": "1/2*(v1 - v2)^2",
    "EX-B": "1/2*v1^2 + q1*v2",
    "EX-C": "1/2*(v1 - q2)^2",
    "EX-R": "1/2*(v1^2 + v2^2) - q1^2",
}


def lagrangian(name):
    return parse(FIXTURES[name], VarTable(2))


def system(name):
    return build_system(lagrangian(name), 2)


def legendre_data(name):
    return legendre(system(name))


def E(text):
    return parse(text)


def same_up_to_constant(a, b):
    """a = c*b for some nonzero rational c."""
    a, b = RationalExpr._coerce(a), RationalExpr._coerce(b)
    if a.is_zero() or b.is_zero():
        return a.is_zero() and b.is_zero()
    r = a / b
    return r.is_constant()


def random_poly(rng, names, degree=2, terms=3):
    out = RationalExpr.const(0)
    for _ in range(rng.randint(0, terms)):
        mono = RationalExpr.const(Fraction(rng.randint(-5, 5), rng.randint(1, 3)))
        for _ in range(rng.randint(0, degree)):
            mono = mono * RationalExpr.var(rng.choice(names))
        out = out + mono
    return out


def random_quadratic_lagrangian(rng, n, *, singular=False):
    """(1/2) v.W(q).v + a(q).v - V(q) with entries of degree <= 2."""
    table = VarTable(n)
    qs = [x.name for x in table.q]
    vs = [RationalExpr.var(x) for x in table.v]
    W = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            W[i][j] = W[j][i] = random_poly(rng, qs)
    if singular and n > 1:
        for i in range(n):
            W[i][n - 1] = W[n - 1][i] = RationalExpr.const(0)
    a = [random_poly(rng, qs) for _ in range(n)]
    V = random_poly(rng, qs)
    L = RationalExpr.const(0)
    for i in range(n):
        for j in range(n):
            L = L + vs[i] * W[i][j] * vs[j] / 2
        L = L + a[i] * vs[i]
    return L - V


@pytest.fixture
def rng():
    return random.Random(0)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
