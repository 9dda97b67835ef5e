"""Legendre map, primary constraints and the projected Hamiltonian h0."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .errors import SingsysError
from .expr import RationalExpr, VarTable, as_expr, normalize_constraint
from .mechanics import LagrangianSystem, vertical_kernel
from .ratlinalg import RfMatrix, dot, solve
from .surface import Surface


class NotAlmostRegularError(SingsysError, ValueError):
    """h0 depends on the choice of velocity representative."""


@dataclass(frozen=True)
class LegendreData:
    system: LagrangianSystem
    vars: VarTable
    momentum_exprs: tuple
    primary_constraints: tuple
    kernel: tuple
    v_star: tuple
    h0: RationalExpr

    @property
    def n(self) -> int:
        return self.system.n

    @property
    def q(self):
        return self.vars.q

    @property
    def p(self):
        return self.vars.p

    @cached_property
    def omega0(self) -> RfMatrix:
        return RfMatrix.canonical(self.n)

    @cached_property
    def _fl(self) -> dict:
        return dict(zip(self.vars.p, self.momentum_exprs))

    def pullback(self, g) -> RationalExpr:
        return as_expr(g).substitute(self._fl)


def legendre(sys: LagrangianSystem, *, trials: int = 20, seed: int = 0) -> LegendreData:
    """Momenta p = W v + a, primary constraints gamma.(p - a), and h0.

    Raises :class:`NotAlmostRegularError` if h0 is not independent of the
    velocity representative modulo the primary constraints.
    """
    table = sys.vars.extend(momenta=True)
    p = [RationalExpr.var(x) for x in table.p]
    momenta = tuple(sys.dL_dv)
    kernel = tuple(vertical_kernel(sys))
    shifted = [pi - ai for pi, ai in zip(p, sys.a)]
    primaries = tuple(normalize_constraint(dot(g, shifted)) for g in kernel)

    sol = solve(sys.W, shifted)
    v_star = tuple(sol.weak_particular)
    # W v* = p - a on the primary surface, so E_L(v*) = v*.(p - a)/2 + V there
    h0 = dot(v_star, shifted) / 2 + sys.V

    fl = dict(zip(table.p, momenta))
    for phi in primaries:
        if not phi.substitute(fl).is_zero():
            raise AssertionError(f"primary constraint {phi} does not vanish on the image of FL")
    if not (h0.substitute(fl) - sys.E_L).is_zero():
        raise AssertionError("h0 does not pull back to E_L")

    if kernel:
        params = [f"tau{k + 1}" for k in range(len(kernel))]
        t = [RationalExpr.var(s) for s in params]
        moved = [vs + sum((tk * g[A] for tk, g in zip(t, kernel)), RationalExpr.const(0))
                 for A, vs in enumerate(v_star)]
        h_moved = sys.E_L.substitute(dict(zip(sys.v, moved)))
        if not Surface(primaries, trials=trials, seed=seed).vanishes(h_moved - h0):
            raise NotAlmostRegularError(
                "h0 depends on the velocity representative; the Lagrangian is not almost-regular")

    return LegendreData(sys, table, momenta, primaries, kernel, v_star, h0)


def pullback(ld: LegendreData, g) -> RationalExpr:
    """Compose a phase-space function with the Legendre map."""
    return ld.pullback(g)
