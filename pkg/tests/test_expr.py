from fractions import Fraction

import pytest

from singsys import ParseError, RationalExpr, Var, VarTable, ZeroDenominatorError, parse
from singsys.expr import Polynomial, differentiate, evaluate, normalize_constraint, substitute


def test_parse_expands_square():
    e = parse("(1/2)*(v1-v2)^2")
    assert e.is_polynomial()
    assert e == parse("1/2*v1^2 - v1*v2 + 1/2*v2^2")
    assert str(e) == "1/2*v2^2 - v1*v2 + 1/2*v1^2"


def test_parse_cancels_identical_factor():
    e = parse("q1/(q1+1) + 1/(q1+1)")
    assert e.is_constant() and e.constant() == 1
    assert e.den == Polynomial.constant(1)


@pytest.mark.parametrize("text, message", [
    ("v1^(1/2)", "non-integer exponent"),
    ("q1 + x", "unknown identifier 'x'"),
    ("q1/0", "division by zero"),
    ("q1 +", "line 1"),
    ("(q1", "line 1"),
])
def test_parse_errors(text, message):
    with pytest.raises(ParseError) as info:
        parse(text, VarTable(2))
    assert message in str(info.value)


def test_parse_error_position():
    with pytest.raises(ParseError) as info:
        parse("q1 +\n  * q2")
    assert info.value.line == 2 and info.value.column == 3


def test_unary_minus_and_negative_power():
    assert parse("-q1^2") == -(parse("q1") ** 2)
    assert parse("q1^-1") == 1 / parse("q1")


def test_differentiate_examples():
    assert differentiate(parse("1/2*(v1-v2)^2"), Var("v1")) == parse("v1 - v2")
    assert differentiate(parse("q1*v2"), "q1") == parse("v2")
    assert differentiate(parse("1/q1"), "q1") == parse("-1/q1^2")


def test_substitute_examples():
    assert substitute(parse("v1 - q2"), {"v1": parse("p1 + q2")}) == parse("p1")
    e = parse("q1/(q2+1)")
    assert substitute(e, {"q1": parse("q1"), "q2": parse("q2")}) == e
    with pytest.raises(ZeroDenominatorError):
        substitute(parse("1/q1"), {"q1": 0})


def test_substitute_rational_bindings():
    e = parse("q1^2 + q2/q1")
    got = e.substitute({"q1": parse("1/(q2+1)")})
    assert got == parse("1/(q2+1)^2 + q2*(q2+1)")


def test_evaluate_examples():
    assert evaluate(parse("1/2*(v1-v2)^2"), {"v1": 3, "v2": 1}) == 2
    assert evaluate(parse("q1/(q1+1)"), {"q1": 1}) == Fraction(1, 2)
    with pytest.raises(ZeroDenominatorError):
        evaluate(parse("1/q1"), {"q1": 0})


def test_equality_is_mathematical_and_hash_consistent():
    a = parse("(q1^2 - 1)/(q1 - 1)")
    b = parse("q1 + 1")
    assert a == b and hash(a) == hash(b)
    c = parse("(q1*q2 + q2)/(q1^2 + 2*q1 + 1)")
    d = parse("q2/(q1 + 1)")
    assert c == d and hash(c) == hash(d)


def test_denominator_sign_normalized():
    e = parse("1/(-q1 - 1)")
    assert e.den.leading()[1] > 0
    assert e == parse("-1/(q1 + 1)")


def test_normalize_constraint_sign_and_content():
    assert str(normalize_constraint(parse("-2*p2 + 2*q1"))) == "p2 - q1"
    assert str(normalize_constraint(parse("(p1 - 1/2*q1)/(q2^2 + 1)"))) == "2*p1 - q1"


def test_var_kinds():
    assert Var("q3").kind == "position" and Var("q3").index == 3
    assert Var("v1").kind == "velocity"
    assert Var("p2").kind == "momentum"
    assert Var("lam1").kind == "multiplier"
    assert Var("tau").kind == "parameter"
    assert Var("q1") < Var("v1") < Var("p1") < Var("lam1") < Var("x")


def test_vartable():
    t = VarTable(2, momenta=True)
    assert [x.name for x in t] == ["q1", "q2", "v1", "v2", "p1", "p2"]
    assert "p2" in t and "p3" not in t
    with pytest.raises(ParseError):
        parse("p1", VarTable(2))
    assert parse("p1", t) == RationalExpr.var("p1")
