"""Hamiltonian (Dirac) and Lagrangian constraint chains, and their classification.

Generation numbering is shared by both sides: the primary Hamiltonian
constraints defining M0 are generation 1, and the Lagrangian constraints
defining S_k (or P_k) are generation k + 1. Under this convention K maps
generation i on the Hamiltonian side to generation i + 1 on the Lagrangian side.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

from .expr import ZERO, RationalExpr, Var, as_expr, lcm_approx
from .legendre import LegendreData
from .mechanics import LagrangianSystem, fl_projectable, kernel_omegaL, vertical_kernel
from .presymplectic import (DEFAULT_MAX_GENERATIONS, PresymplecticSystem, accept_new, pca_run,
                            stabilize)
from .ratlinalg import RfMatrix, dot, rank, solve
from .surface import Surface, weak_vanishing

__all__ = [
    "Constraint", "ConstraintChain", "poisson_bracket", "weak_vanishing", "dirac_run",
    "classify", "lagrangian_run", "projectability_report", "diagram_containment",
    "LAGRANGIAN_OFFSET",
]

LAGRANGIAN_OFFSET = 1


@dataclass(frozen=True)
class Constraint:
    expr: RationalExpr
    side: str           # "hamiltonian" | "lagrangian"
    generation: int
    origin: str         # "primary" | "tangency" | "dynamical" | "sode"
    klass: str = "unknown"

    def __str__(self):
        return str(self.expr)


@dataclass(frozen=True)
class ConstraintChain:
    side: str
    generations: tuple          # tuple of tuples of Constraint, ordered by generation
    stabilized: bool
    multiplier_resolution: dict  # multiplier name -> RationalExpr or "free"
    multipliers: tuple = ()
    with_sode: bool | None = None
    total_hamiltonian: RationalExpr | None = None
    tangency_rows: tuple = field(default=(), repr=False)

    @property
    def constraints(self) -> list[Constraint]:
        return [c for g in self.generations for c in g]

    @property
    def exprs(self) -> list[RationalExpr]:
        return [c.expr for c in self.constraints]

    def at(self, generation: int) -> list[Constraint]:
        return [c for c in self.constraints if c.generation == generation]

    def upto(self, generation: int) -> list[Constraint]:
        return [c for c in self.constraints if c.generation <= generation]

    @property
    def max_generation(self) -> int:
        return max((c.generation for c in self.constraints), default=0)


def poisson_bracket(f, g, n: int | None = None) -> RationalExpr:
    """{f, g} = sum_A df/dq^A dg/dp_A - df/dp_A dg/dq^A."""
    f, g = as_expr(f), as_expr(g)
    if n is None:
        idx = [x.index for x in f.variables() | g.variables() if x.kind in ("position", "momentum")]
        n = max(idx, default=0)
    total = ZERO
    for A in range(1, n + 1):
        q, p = Var(f"q{A}"), Var(f"p{A}")
        fq, gp = f.diff(q), g.diff(p)
        if not fq.is_zero() and not gp.is_zero():
            total = total + fq * gp
        fp, gq = f.diff(p), g.diff(q)
        if not fp.is_zero() and not gq.is_zero():
            total = total - fp * gq
    return total


def _resolution(multipliers: Sequence[Var], values) -> dict:
    return {m.name: ("free" if v is None else v) for m, v in zip(multipliers, values)}


# --------------------------------------------------------------------------
# Hamiltonian side


def dirac_run(ld: LegendreData, *, max_generations: int = DEFAULT_MAX_GENERATIONS,
              trials: int = 20, seed: int = 0) -> ConstraintChain:
    """Dirac-Bergmann algorithm with H_T = h0 + lam^mu phi_mu on the full T*Q chart."""
    n = ld.n
    primaries = [c for _, c in accept_new(ld.primary_constraints, [], trials=trials, seed=seed)]
    lam = [Var(f"lam{i + 1}") for i in range(len(primaries))]
    h0 = ld.h0
    h_total = h0
    for l, phi in zip(lam, primaries):
        h_total = h_total + RationalExpr.var(l) * phi

    def evolve(c):
        return poisson_bracket(c, h0, n), [poisson_bracket(c, phi, n) for phi in primaries]

    st = stabilize(primaries, evolve, lam, max_generations=max_generations, trials=trials, seed=seed)
    gens = tuple(
        tuple(Constraint(c, "hamiltonian", k + 1, "primary" if k == 0 else "tangency") for c in g)
        for k, g in enumerate(st.generations))
    rows = tuple(zip(st.constraints, (tuple(r) for r in st.coupling)))
    return ConstraintChain("hamiltonian", gens, st.stabilized, _resolution(lam, st.multipliers),
                           tuple(lam), None, h_total, rows)


def classify(chain: ConstraintChain, *, trials: int = 20, seed: int = 0) -> ConstraintChain:
    """First class iff every bracket with the final constraints weakly vanishes."""
    if chain.side != "hamiltonian":
        raise ValueError("classification applies to Hamiltonian chains")
    finals = chain.exprs
    surf = Surface(finals, trials=trials, seed=seed)
    n = max((x.index for c in finals for x in c.variables()), default=0)
    gens = []
    for g in chain.generations:
        out = []
        for c in g:
            first = all(surf.vanishes(poisson_bracket(c.expr, o, n)) for o in finals)
            out.append(replace(c, klass="first" if first else "second"))
        gens.append(tuple(out))
    return replace(chain, generations=tuple(gens))


# --------------------------------------------------------------------------
# Lagrangian side


def _independent_extension(base: list[list[RationalExpr]], extra: list[list[RationalExpr]]):
    """Vectors of ``extra`` that raise the rank of ``base`` one at a time."""
    chosen = []
    current = list(base)
    r = rank(RfMatrix(current, len(extra[0]))) if current and extra else 0
    for vec in extra:
        trial = current + [vec]
        r2 = rank(RfMatrix(trial, len(vec)))
        if r2 > r:
            chosen.append(vec)
            current, r = trial, r2
    return chosen


def _split_first_generation(sys: LagrangianSystem):
    """Gen-1 directions: q-parts of ker omega_L (dynamical), then the rest of ker W (sode)."""
    gammas = vertical_kernel(sys)
    if not gammas:
        return [], []
    qparts = [list(k.qdot) for k in kernel_omegaL(sys) if not all(c.is_zero() for c in k.qdot)]
    dyn = _independent_extension([], qparts) if qparts else []
    sode = _independent_extension(dyn, gammas)
    return dyn, sode


def _tag(sys: LagrangianSystem, c: RationalExpr, prior: Sequence[RationalExpr],
         trials: int, seed: int) -> str:
    if fl_projectable(sys, c):
        return "dynamical"
    if prior:
        reduced = Surface(prior, trials=trials, seed=seed).reduce(c)
        if fl_projectable(sys, reduced):
            return "dynamical"
    return "sode"


def lagrangian_run(sys: LagrangianSystem, with_sode: bool = True, *,
                   max_generations: int = DEFAULT_MAX_GENERATIONS, trials: int = 20,
                   seed: int = 0) -> ConstraintChain:
    """Lagrangian constraint algorithm producing the S-chain or the P-chain.

    Without the SODE condition this is the presymplectic algorithm applied
    to (TQ, omega_L, dE_L); every constraint is dynamical. With it, the
    candidate field is Gamma = v d/dq + a d/dv with W a = alpha modulo ker W.
    """
    if not with_sode:
        psys = PresymplecticSystem(tuple(sys.coords), sys.omegaL, tuple(sys.dE_L))
        res = pca_run(psys, max_generations, trials=trials, seed=seed)
        lam = [Var(f"lam{i + 1}") for i in range(len(res.kernel))]
        gens = tuple(
            tuple(Constraint(c, "lagrangian", k + 1 + LAGRANGIAN_OFFSET, "dynamical") for c in g)
            for k, g in enumerate(res.generations))
        rows = tuple(zip(res.final_constraints, (tuple(r) for r in res.coupling)))
        return ConstraintChain("lagrangian", gens, res.stabilized,
                               _resolution(lam, res.multipliers), tuple(lam), False, None, rows)

    dyn_dirs, sode_dirs = _split_first_generation(sys)
    raw = [dot(u, sys.alpha) for u in dyn_dirs] + [dot(g, sys.alpha) for g in sode_dirs]
    origins = ["dynamical"] * len(dyn_dirs) + ["sode"] * len(sode_dirs)
    kept = accept_new(raw, [], trials=trials, seed=seed)
    first = [c for _, c in kept]
    first_tags = [origins[i] for i, _ in kept]

    accel = solve(sys.W, list(sys.alpha))
    a_p = accel.weak_particular
    gammas = vertical_kernel(sys)
    lam = [Var(f"lam{i + 1}") for i in range(len(gammas))]
    vv = [RationalExpr.var(x) for x in sys.v]

    def evolve(c):
        dq = [c.diff(x) for x in sys.q]
        dv = [c.diff(x) for x in sys.v]
        return dot(vv, dq) + dot(a_p, dv), [dot(g, dv) for g in gammas]

    st = stabilize(first, evolve, lam, max_generations=max_generations, trials=trials, seed=seed)
    gens = []
    prior: list[RationalExpr] = []
    for k, g in enumerate(st.generations):
        level = []
        for j, c in enumerate(g):
            origin = first_tags[j] if k == 0 else _tag(sys, c, prior, trials, seed)
            level.append(Constraint(c, "lagrangian", k + 1 + LAGRANGIAN_OFFSET, origin))
        gens.append(tuple(level))
        prior.extend(g)
    rows = tuple(zip(st.constraints, (tuple(r) for r in st.coupling)))
    return ConstraintChain("lagrangian", tuple(gens), st.stabilized,
                           _resolution(lam, st.multipliers), tuple(lam), True, None, rows)


# --------------------------------------------------------------------------
# cross-formalism reports


@dataclass
class ProjectabilityEntry:
    constraint: Constraint
    representative_projectable: bool
    witness: RationalExpr | None
    representative: RationalExpr | None   # g(q, p) with pullback(g) weakly equal
    matches: list                          # Hamiltonian constraints used in g

    @property
    def matched(self) -> bool:
        return self.representative is not None


def _combination(target: RationalExpr, basis: Sequence[RationalExpr], fiber_vars) -> list | None:
    """Coefficients c_j free of ``fiber_vars`` with sum c_j basis_j == target."""
    if not basis:
        return [] if target.is_zero() else None
    exprs = list(basis) + [target]
    D = lcm_approx(e.den for e in exprs if not e.is_zero())
    polys = [e.num * D.divide_exact(e.den) if not e.is_zero() else e.num for e in exprs]
    splits = [p.split(fiber_vars) for p in polys]
    monos = sorted({m for s in splits for m in s}, key=lambda m: tuple((x.key, e) for x, e in m))
    if not monos:
        return [ZERO] * len(basis)
    zero_poly = RationalExpr.const(0).num
    A = RfMatrix([[RationalExpr(s.get(m, zero_poly)) for s in splits[:-1]] for m in monos],
                 len(basis))
    b = [RationalExpr(splits[-1].get(m, zero_poly)) for m in monos]
    res = solve(A, b)
    return res.particular


def projectability_report(chain: ConstraintChain, ld: LegendreData, ham: ConstraintChain, *,
                          trials: int = 20, seed: int = 0) -> list[ProjectabilityEntry]:
    """Exhibit FL-projectable representatives of Lagrangian constraints.

    For each constraint f at generation k, search g = sum_j c_j(q) xi_j over
    the Hamiltonian constraints xi_j with pullback(g) = f on the surface of
    Lagrangian constraints of generation < k.
    """
    sys = ld.system
    entries = []
    ham_cons = ham.constraints
    fiber = [x for x in sys.v]
    for c in chain.constraints:
        proj = fl_projectable(sys, c.expr)
        prior = [o.expr for o in chain.constraints if o.generation < c.generation]
        surf = Surface(prior, trials=trials, seed=seed)
        pulled = [surf.reduce(ld.pullback(h.expr)) for h in ham_cons]
        target = surf.reduce(c.expr)
        coeffs = _combination(target, pulled, fiber)
        rep, matches = None, []
        if coeffs is not None:
            rep = ZERO
            for coeff, h in zip(coeffs, ham_cons):
                if not coeff.is_zero():
                    rep = rep + coeff * h.expr
                    matches.append(h)
            if not surf.vanishes(ld.pullback(rep) - c.expr):
                rep, matches = None, []
        entries.append(ProjectabilityEntry(c, bool(proj), proj.witness, rep, matches))
    return entries


def diagram_containment(p_chain: ConstraintChain, s_chain: ConstraintChain, *,
                        trials: int = 20, seed: int = 0) -> list[tuple[Constraint, bool]]:
    """Is every P-chain constraint weakly zero on the S-surface of the same generation?"""
    out = []
    for c in p_chain.constraints:
        surf = Surface([o.expr for o in s_chain.upto(c.generation)], trials=trials, seed=seed)
        out.append((c, surf.vanishes(c.expr)))
    return out
