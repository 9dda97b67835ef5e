import warnings

import pytest

from singsys import InputError, NotQuadraticError, RfMatrix, build_system, fl_projectable, parse
from singsys.mechanics import (RankIdentityWarning, VectorFieldTQ, contract, is_sode, kernel_omegaL,
                               lagrangian_residual, sode_defect, vertical_kernel)

from conftest import E, FIXTURES, legendre_data, system


def test_ex_a_system():
    s = system("EX-A")
    assert s.W == RfMatrix([[E("1"), E("-1")], [E("-1"), E("1")]])
    assert list(s.a) == [E("0"), E("0")]
    assert s.E_L == E("1/2*(v1 - v2)^2")
    assert list(s.alpha) == [E("0"), E("0")]


def test_ex_b_system():
    s = system("EX-B")
    assert s.W == RfMatrix([[E("1"), E("0")], [E("0"), E("0")]])
    assert list(s.a) == [E("0"), E("q1")]
    assert s.E_L == E("1/2*v1^2")
    assert list(s.alpha) == [E("v2"), E("-v1")]


def test_rejects_non_quadratic():
    with pytest.raises(NotQuadraticError, match="not quadratic in velocities"):
        build_system(parse("v1^3"), 1)
    with pytest.raises(NotQuadraticError):
        build_system(parse("q1*v1^2*v2"), 2)


def test_rejects_stray_variables():
    with pytest.raises(InputError):
        build_system(parse("v1^2 + v2^2"), 1)


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_structural_invariants(name):
    s = system(name)
    n = s.n
    assert s.omegaL.is_antisymmetric()
    for i in range(n):
        for j in range(n):
            assert s.omegaL[i, n + j] == s.W[i, j]
    assert s.rank_omegaL == 2 * s.rank_W
    vv = [E(v.name) for v in s.v]
    quad = sum((vv[i] * s.W[i, j] * vv[j] for i in range(n) for j in range(n)), E("0")) / 2
    assert s.E_L == quad + s.V


def test_kernel_omegaL_ex_a():
    ks = kernel_omegaL(system("EX-A"))
    assert [k.components for k in ks] == [[E("1"), E("1"), E("0"), E("0")],
                                         [E("0"), E("0"), E("1"), E("1")]]
    for k in ks:
        assert all(c.is_zero() for c in contract(k.components, system("EX-A").omegaL))


def test_kernel_omegaL_ex_b_has_vertical_field():
    ks = kernel_omegaL(system("EX-B"))
    assert len(ks) == 2
    assert [E("0"), E("0"), E("0"), E("1")] in [k.components for k in ks]


def test_kernel_omegaL_regular_empty():
    assert kernel_omegaL(system("EX-R")) == []
    assert vertical_kernel(system("EX-R")) == []


def test_vertical_kernel():
    assert vertical_kernel(system("EX-A")) == [[E("1"), E("1")]]
    assert vertical_kernel(system("EX-B")) == [[E("0"), E("1")]]


def test_sode_defect():
    s = system("EX-B")
    sode = VectorFieldTQ((E("v1"), E("v2")), (E("0"), E("0")))
    assert is_sode(s, sode)
    d_q1 = VectorFieldTQ((E("1"), E("0")), (E("0"), E("0")))
    assert sode_defect(s, d_q1) == [E("1 - v1"), E("-v2")]
    vert = VectorFieldTQ((E("0"), E("0")), (E("q1"), E("1")))
    assert sode_defect(s, vert) == [E("-v1"), E("-v2")]


def test_regular_euler_lagrange_field_solves_the_equation():
    s = system("EX-R")
    gamma = VectorFieldTQ((E("v1"), E("v2")), (E("-2*q1"), E("0")))
    assert all(c.is_zero() for c in lagrangian_residual(s, gamma))


def test_fl_projectable_examples():
    c = system("EX-C")
    assert fl_projectable(c, E("v1 - q2"))
    b = system("EX-B")
    res = fl_projectable(b, E("v2"))
    assert not res and res.witness == E("1")
    assert fl_projectable(b, E("q1^2 + q2"))


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_pullbacks_are_projectable(name):
    ld = legendre_data(name)
    for g in ["p1", "p2", "p1*p2 + q1", "p1^2 - q2*p2"]:
        assert fl_projectable(ld.system, ld.pullback(E(g)))


def test_rank_identity_warning():
    with pytest.warns(RankIdentityWarning):
        build_system(parse("q1*v2"), 2)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        build_system(parse("1/2*v1^2 + q1*v2"), 2)
