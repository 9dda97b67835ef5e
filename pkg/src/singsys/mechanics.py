"""Lagrangian-side geometry in natural coordinates (q, v) on TQ.

Only velocity-quadratic Lagrangians are accepted::

    L = (1/2) v.W(q).v + a(q).v - V(q)

All 2-forms are stored as antisymmetric matrices in the ordered basis
(q1..qn, v1..vn); contraction uses ``i(X)w = sum_i X^i w_ij dx^j``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

from .errors import InputError, NotQuadraticError, ZeroDenominatorError
from .expr import ZERO, RationalExpr, Var, VarTable, as_expr
from .ratlinalg import RfMatrix, dot, nullspace, rank


class RankIdentityWarning(UserWarning):
    """rank(omega_L) differs from 2 rank(W) for this Lagrangian."""


@dataclass(frozen=True)
class VectorFieldTQ:
    """Vector field X^A d/dq^A + Y^A d/dv^A on TQ."""

    qdot: tuple
    vdot: tuple

    @classmethod
    def from_components(cls, comps: Sequence) -> "VectorFieldTQ":
        comps = [as_expr(c) for c in comps]
        n = len(comps) // 2
        return cls(tuple(comps[:n]), tuple(comps[n:]))

    @property
    def components(self) -> list[RationalExpr]:
        return list(self.qdot) + list(self.vdot)

    def is_vertical(self) -> bool:
        return all(c.is_zero() for c in self.qdot)

    def apply(self, f: RationalExpr, q: Sequence[Var], v: Sequence[Var]) -> RationalExpr:
        """Directional derivative X(f)."""
        total = ZERO
        for c, x in zip(self.components, list(q) + list(v)):
            if not c.is_zero():
                total = total + c * f.diff(x)
        return total


@dataclass(frozen=True)
class LagrangianSystem:
    vars: VarTable
    L: RationalExpr
    W: RfMatrix
    a: tuple
    V: RationalExpr
    E_L: RationalExpr
    omegaL: RfMatrix
    alpha: tuple
    dL_dq: tuple = field(repr=False)
    dL_dv: tuple = field(repr=False)

    @property
    def n(self) -> int:
        return self.vars.n

    @property
    def q(self) -> tuple:
        return self.vars.q

    @property
    def v(self) -> tuple:
        return self.vars.v

    @property
    def coords(self) -> list[Var]:
        return list(self.vars.q) + list(self.vars.v)

    @cached_property
    def dE_L(self) -> list[RationalExpr]:
        return [self.E_L.diff(x) for x in self.coords]

    @cached_property
    def rank_W(self) -> int:
        return rank(self.W)

    @cached_property
    def rank_omegaL(self) -> int:
        return rank(self.omegaL)

    @property
    def rank_identity_holds(self) -> bool:
        return self.rank_omegaL == 2 * self.rank_W

    @property
    def is_regular(self) -> bool:
        return self.rank_W == self.n


def build_system(L, n: int, *, check_rank: bool = True) -> LagrangianSystem:
    """Derive W, a, V, E_L, omega_L and the force terms from ``L``."""
    L = as_expr(L)
    if n < 1:
        raise InputError("dimension must be positive")
    table = VarTable(n)
    allowed = set(table.q) | set(table.v)
    stray = sorted(x.name for x in L.variables() - allowed)
    if stray:
        raise InputError(f"Lagrangian uses variables outside (q, v) for n = {n}: {', '.join(stray)}")
    q, v = table.q, table.v

    dL_dv = [L.diff(x) for x in v]
    dL_dq = [L.diff(x) for x in q]
    W = [[dL_dv[i].diff(v[j]) for j in range(n)] for i in range(n)]
    vset = set(v)
    if any(e.variables() & vset for row in W for e in row):
        raise NotQuadraticError("not quadratic in velocities: the velocity Hessian depends on v")
    at_rest = {x: 0 for x in v}
    try:
        a = [e.substitute(at_rest) for e in dL_dv]
        V = -L.substitute(at_rest)
    except ZeroDenominatorError:
        raise NotQuadraticError("not quadratic in velocities: singular at v = 0") from None
    Wm = RfMatrix(W, n)
    vv = [RationalExpr.var(x) for x in v]
    quad = dot(vv, Wm @ vv) / 2
    if not (L - (quad + dot(a, vv) - V)).is_zero():
        raise NotQuadraticError("not quadratic in velocities")
    if not Wm.is_symmetric():
        raise NotQuadraticError("velocity Hessian is not symmetric")

    E_L = dot(vv, dL_dv) - L
    if not (E_L - (quad + V)).is_zero():
        raise AssertionError("energy identity failed")

    # omega_L = -d(dL/dv^A dq^A)
    omega = [[ZERO] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        for j in range(n):
            omega[i][j] = dL_dv[i].diff(q[j]) - dL_dv[j].diff(q[i])
            omega[i][n + j] = W[i][j]
            omega[n + i][j] = -W[j][i]
    omegaL = RfMatrix(omega, 2 * n)
    if not omegaL.is_antisymmetric():
        raise AssertionError("omega_L is not antisymmetric")

    alpha = []
    for A in range(n):
        acc = dL_dq[A]
        for B in range(n):
            acc = acc - vv[B] * dL_dv[A].diff(q[B])
        alpha.append(acc)

    sys_ = LagrangianSystem(table, L, Wm, tuple(a), V, E_L, omegaL, tuple(alpha),
                            tuple(dL_dq), tuple(dL_dv))
    if check_rank and not sys_.rank_identity_holds:
        warnings.warn(
            f"rank(omega_L) = {sys_.rank_omegaL} but 2 rank(W) = {2 * sys_.rank_W}",
            RankIdentityWarning, stacklevel=2)
    return sys_


def contract(X: Sequence[RationalExpr], omega: RfMatrix) -> list[RationalExpr]:
    """Components of i(X)omega."""
    return omega.T() @ list(X)


def lagrangian_residual(sys: LagrangianSystem, gamma: VectorFieldTQ) -> list[RationalExpr]:
    """Components of i(Gamma)omega_L - dE_L."""
    return [a - b for a, b in zip(contract(gamma.components, sys.omegaL), sys.dE_L)]


def kernel_omegaL(sys: LagrangianSystem) -> list[VectorFieldTQ]:
    return [VectorFieldTQ.from_components(k) for k in nullspace(sys.omegaL)]


def vertical_kernel(sys: LagrangianSystem) -> list[list[RationalExpr]]:
    """Basis of ker W; as vertical fields gamma^A d/dv^A these span ker FL_*."""
    return nullspace(sys.W)


def sode_defect(sys: LagrangianSystem, gamma: VectorFieldTQ) -> list[RationalExpr]:
    """Components of S(Gamma) - Delta, i.e. X^A - v^A."""
    return [x - RationalExpr.var(v) for x, v in zip(gamma.qdot, sys.v)]


def is_sode(sys: LagrangianSystem, gamma: VectorFieldTQ) -> bool:
    return all(c.is_zero() for c in sode_defect(sys, gamma))


@dataclass(frozen=True)
class Projectability:
    projectable: bool
    witness: RationalExpr | None = None
    direction: int | None = None

    def __bool__(self):
        return self.projectable


def fl_projectable(sys: LagrangianSystem, f, kernel=None) -> Projectability:
    """Is ``f`` constant along the fibres of the Legendre map?

    Checks gamma^A df/dv^A = 0 for every basis vector of ker W; on failure
    the first nonzero derivative is returned as witness.
    """
    f = as_expr(f)
    basis = vertical_kernel(sys) if kernel is None else kernel
    grads = [f.diff(x) for x in sys.v]
    for i, gamma in enumerate(basis):
        d = dot(gamma, grads)
        if not d.is_zero():
            return Projectability(False, d, i)
    return Projectability(True)
