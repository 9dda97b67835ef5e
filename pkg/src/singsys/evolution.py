"""The time-evolution operator K along the Legendre map.

In natural coordinates::

    K = v^A (d/dq^A o FL) + (dL/dq^A) (d/dp_A o FL)

``apply_k`` is the action of K as a derivation from functions on T*Q to
functions on TQ; it sends Hamiltonian constraints of one generation to
Lagrangian constraints of the next.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .constraints import Constraint, ConstraintChain, _combination
from .expr import ZERO, RationalExpr, as_expr
from .legendre import LegendreData
from .mechanics import LagrangianSystem, fl_projectable
from .surface import Surface

__all__ = ["KOperator", "KVerdict", "build_k", "verify_k", "apply_k", "ShiftEntry",
           "ShiftReport", "generation_shift_check"]


@dataclass(frozen=True)
class KOperator:
    qdot: tuple
    pdot: tuple

    @property
    def n(self) -> int:
        return len(self.qdot)


def build_k(sys: LagrangianSystem) -> KOperator:
    return KOperator(tuple(RationalExpr.var(x) for x in sys.v), tuple(sys.dL_dq))


@dataclass(frozen=True)
class KVerdict:
    structural: bool
    dynamical: bool
    sode: bool
    structural_residual: tuple
    dynamical_residual: tuple   # components along (dq^1..dq^n, dv^1..dv^n)
    sode_residual: tuple

    @property
    def all_true(self) -> bool:
        return self.structural and self.dynamical and self.sode

    def __iter__(self):
        return iter((self.structural, self.dynamical, self.sode))


def verify_k(k: KOperator, sys: LagrangianSystem, ld: LegendreData) -> KVerdict:
    """Check the structural, dynamical and SODE conditions, returning residuals.

    The dynamical residual is dE_L - FL*[i(K)Omega] with Omega = dq^A ^ dp_A:
    i(K)Omega = qdot^A dp_A - pdot_A dq^A, and dp_A pulls back to
    d(dL/dv^A).
    """
    n = sys.n
    coords = sys.coords
    # base point: the momenta composed with FL must be dL/dv
    structural = tuple(ld.pullback(RationalExpr.var(p)) - m
                       for p, m in zip(ld.p, sys.dL_dv))

    contracted = []
    for x in coords:
        comp = ZERO
        for A in range(n):
            comp = comp + k.qdot[A] * sys.dL_dv[A].diff(x)
        if x in sys.q:
            comp = comp - k.pdot[sys.q.index(x)]
        contracted.append(comp)
    dynamical = tuple(e - c for e, c in zip(sys.dE_L, contracted))
    sode = tuple(qd - RationalExpr.var(v) for qd, v in zip(k.qdot, sys.v))

    def ok(res):
        return all(r.is_zero() for r in res)

    return KVerdict(ok(structural), ok(dynamical), ok(sode), structural, dynamical, sode)


def apply_k(k: KOperator, ld: LegendreData, xi) -> RationalExpr:
    """L(K) xi = qdot^A (dxi/dq^A o FL) + pdot_A (dxi/dp_A o FL)."""
    xi = as_expr(xi)
    total = ZERO
    for A in range(ld.n):
        dq = xi.diff(ld.q[A])
        if not dq.is_zero():
            total = total + k.qdot[A] * ld.pullback(dq)
        dp = xi.diff(ld.p[A])
        if not dp.is_zero():
            total = total + k.pdot[A] * ld.pullback(dp)
    return total


@dataclass
class ShiftEntry:
    source: Constraint
    image: RationalExpr
    target_generation: int
    zero_image: bool
    contained: bool            # image weakly zero on the generation <= i+1 surface
    matches: list = field(default_factory=list)   # generation i+1 constraints equal to the image up to a constant
    combination: list | None = None               # q-dependent coefficients over generation i+1
    reverse_contained: bool | None = None         # generation i+1 constraints weakly zero on the image surface
    image_projectable: bool | None = None
    class_expected: str | None = None             # what the class map would predict
    class_observed: str | None = None

    @property
    def holds(self) -> bool:
        return self.zero_image or self.contained


@dataclass
class ShiftReport:
    entries: list

    @property
    def holds(self) -> bool:
        return all(e.holds for e in self.entries)


def _constant_ratio(a: RationalExpr, b: RationalExpr):
    if b.is_zero():
        return None
    r = a / b
    return r.constant() if r.is_constant() else None


def generation_shift_check(k: KOperator, ld: LegendreData, ham_chain: ConstraintChain,
                           lag_chain: ConstraintChain, *, trials: int = 20,
                           seed: int = 0) -> ShiftReport:
    """Test that K maps generation-i Hamiltonian constraints into generation i+1.

    The pass/fail verdict is the forward containment. Matches, the reverse
    containment and the first-class/dynamical correspondence are recorded
    for reporting only.
    """
    sys = ld.system
    entries = []
    for xi in ham_chain.constraints:
        target = xi.generation + 1
        image = apply_k(k, ld, xi.expr)
        upto = [c.expr for c in lag_chain.upto(target)]
        level = lag_chain.at(target)
        entry = ShiftEntry(xi, image, target, image.is_zero(), False)
        if xi.klass in ("first", "second"):
            entry.class_expected = "dynamical" if xi.klass == "first" else "sode"
        if entry.zero_image:
            entry.contained = True
            entries.append(entry)
            continue
        entry.contained = Surface(upto, trials=trials, seed=seed).vanishes(image)
        entry.matches = [c for c in level if _constant_ratio(image, c.expr) is not None]
        earlier = [c.expr for c in lag_chain.upto(target - 1)]
        surf_prev = Surface(earlier, trials=trials, seed=seed)
        if level:
            entry.combination = _combination(surf_prev.reduce(image),
                                             [surf_prev.reduce(c.expr) for c in level], sys.v)
            image_surf = Surface(earlier + [image], trials=trials, seed=seed)
            entry.reverse_contained = all(image_surf.vanishes(c.expr) for c in level)
        proj = bool(fl_projectable(sys, image)) or bool(fl_projectable(sys, surf_prev.reduce(image)))
        entry.image_projectable = proj
        entry.class_observed = "dynamical" if proj else "sode"
        entries.append(entry)
    return ShiftReport(entries)
