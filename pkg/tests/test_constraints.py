import pytest

from singsys import (IndeterminateError, classify, diagram_containment, dirac_run, fl_projectable,
                     lagrangian_run, poisson_bracket, projectability_report, weak_vanishing)

from conftest import E, legendre_data, same_up_to_constant, system

SINGULAR = ["EX-A", "EX-B", "EX-C"]


def chain_strings(chain):
    return [[str(c) for c in g] for g in chain.generations]


def test_poisson_bracket_examples():
    assert poisson_bracket(E("q1"), E("p1")) == E("1")
    assert poisson_bracket(E("p1"), E("p2 - q1")) == E("1")
    f = E("q1*p2^2 + p1*q2")
    assert poisson_bracket(f, f).is_zero()


def test_weak_vanishing_examples():
    assert weak_vanishing(E("p1 + p2"), [E("p1 + p2")])
    assert not weak_vanishing(E("p1"), [E("p1 + p2")])
    assert weak_vanishing(E("q2*(p2 - q1) + p1 - p1"), [E("p2 - q1")])


def test_weak_vanishing_on_nonlinear_surface():
    circle = [E("q1^2 + q2^2 - 25")]
    assert weak_vanishing(E("(q1^2 + q2^2 - 25)*p1"), circle)
    assert not weak_vanishing(E("q1 - 3"), circle)


def test_weak_vanishing_without_rational_points_is_indeterminate():
    with pytest.raises(IndeterminateError):
        weak_vanishing(E("q1"), [E("q1^2 + q2^2 + 1")])


def test_dirac_ex_a():
    ch = classify(dirac_run(legendre_data("EX-A")))
    assert ch.stabilized
    assert chain_strings(ch) == [["p2 + p1"]]
    assert [c.klass for c in ch.constraints] == ["first"]
    assert ch.multiplier_resolution == {"lam1": "free"}


def test_dirac_ex_b():
    ch = classify(dirac_run(legendre_data("EX-B")))
    assert chain_strings(ch) == [["p2 - q1"], ["p1"]]
    assert [(c.generation, c.origin, c.klass) for c in ch.constraints] == [
        (1, "primary", "second"), (2, "tangency", "second")]
    assert ch.multiplier_resolution == {"lam1": E("0")}


def test_dirac_ex_c():
    ch = classify(dirac_run(legendre_data("EX-C")))
    assert chain_strings(ch) == [["p2"], ["p1"]]
    assert [c.klass for c in ch.constraints] == ["first", "first"]
    assert ch.multiplier_resolution == {"lam1": "free"}


def test_dirac_regular_is_empty():
    ch = dirac_run(legendre_data("EX-R"))
    assert ch.stabilized and ch.constraints == [] and ch.multiplier_resolution == {}


def test_dirac_generation_cap():
    ch = dirac_run(legendre_data("EX-B"), max_generations=1)
    assert not ch.stabilized
    assert chain_strings(ch) == [["p2 - q1"]]


def test_lagrangian_ex_b():
    s = lagrangian_run(system("EX-B"), True)
    assert chain_strings(s) == [["v1"], ["v2"]]
    assert [(c.generation, c.origin) for c in s.constraints] == [(2, "dynamical"), (3, "sode")]
    assert same_up_to_constant(s.constraints[0].expr, E("-v1"))
    p = lagrangian_run(system("EX-B"), False)
    assert chain_strings(p) == [["v1"]]


def test_lagrangian_ex_c():
    s = lagrangian_run(system("EX-C"), True)
    assert [(str(c), c.generation, c.origin) for c in s.constraints] == [("v1 - q2", 2, "dynamical")]
    assert s.multiplier_resolution == {"lam1": "free"}


def test_lagrangian_ex_a_and_regular_are_empty():
    for name in ("EX-A", "EX-R"):
        for with_sode in (True, False):
            ch = lagrangian_run(system(name), with_sode)
            assert ch.stabilized and ch.constraints == []


def test_projectability_report():
    ld = legendre_data("EX-B")
    rep = projectability_report(lagrangian_run(ld.system, True), ld, classify(dirac_run(ld)))
    dyn, sode = rep
    assert dyn.matched and dyn.representative == E("p1")
    assert [str(h.expr) for h in dyn.matches] == ["p1"]
    assert not sode.matched and not sode.representative_projectable and sode.witness == E("1")

    ld = legendre_data("EX-C")
    (only,) = projectability_report(lagrangian_run(ld.system, True), ld, classify(dirac_run(ld)))
    assert only.matched and same_up_to_constant(only.representative, E("p1"))


@pytest.mark.parametrize("name", SINGULAR)
def test_second_class_count_is_even(name):
    ch = classify(dirac_run(legendre_data(name)))
    assert sum(c.klass == "second" for c in ch.constraints) % 2 == 0


@pytest.mark.parametrize("name", SINGULAR)
def test_diagram_containment(name):
    s = system(name)
    assert all(ok for _, ok in diagram_containment(lagrangian_run(s, False), lagrangian_run(s, True)))


@pytest.mark.parametrize("name", SINGULAR)
def test_sode_tangency_fixes_multipliers_only(name):
    s = lagrangian_run(system(name), True)
    last = s.generations[-1] if s.generations else ()
    if any(c.origin == "sode" for c in last):
        assert s.stabilized
        assert any(v != "free" for v in s.multiplier_resolution.values())


@pytest.mark.parametrize("name", SINGULAR)
def test_tags_agree_with_projectability(name):
    ld = legendre_data(name)
    s = lagrangian_run(ld.system, True)
    rep = {id(e.constraint): e for e in projectability_report(s, ld, classify(dirac_run(ld)))}
    for c in s.constraints:
        if c.origin == "sode":
            assert not fl_projectable(ld.system, c.expr)
        else:
            assert fl_projectable(ld.system, c.expr) or rep[id(c)].matched


def test_inconsistent_lagrangian():
    # primary p2, and {p2, h0} = 1 for h0 = p1^2/2 - q2
    from singsys import InconsistentDynamics, VarTable, build_system, legendre, parse
    ld = legendre(build_system(parse("1/2*v1^2 + q2", VarTable(2)), 2))
    with pytest.raises(InconsistentDynamics):
        dirac_run(ld)
