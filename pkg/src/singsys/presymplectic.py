"""Constraint stabilization for presymplectic systems (M, omega, alpha).

The same tangency loop drives three algorithms: the generic one here, the
Dirac algorithm on (q, p) and the Lagrangian algorithm with the SODE ansatz
(both in :mod:`singsys.constraints`). Each supplies an ``evolve`` callback
returning, for a constraint ``c``, the multiplier-free part of its time
derivative and the coefficients of the free multipliers.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import InputError
from .expr import ZERO, RationalExpr, Var, as_expr, normalize_constraint
from .ratlinalg import RfMatrix, dot, nullspace, solve
from .surface import Surface

Evolve = Callable[[RationalExpr], "tuple[RationalExpr, list[RationalExpr]]"]

DEFAULT_MAX_GENERATIONS = 10


@dataclass
class Stabilization:
    """Raw result of the tangency loop (plain expressions, no tags)."""

    generations: list[list[RationalExpr]]
    stabilized: bool
    multipliers: list[RationalExpr | None]
    coupling: list[list[RationalExpr]]
    surface: Surface

    @property
    def constraints(self) -> list[RationalExpr]:
        return [c for g in self.generations for c in g]


def accept_new(candidates: Sequence, prior: Sequence, *, trials: int = 20, seed: int = 0):
    """Normalize candidates, dropping those weakly zero on the prior surface.

    Returns ``(index, constraint)`` pairs for the kept ones. Raises
    :class:`InconsistentDynamics` when a candidate is weakly a nonzero constant.
    """
    kept: list[tuple[int, RationalExpr]] = []
    for idx, raw in enumerate(candidates):
        c = normalize_constraint(as_expr(raw))
        if c.is_zero():
            continue
        current = list(prior) + [k for _, k in kept]
        surf = Surface(current, trials=trials, seed=seed)
        if surf.vanishes(c):
            continue
        Surface(current + [c], trials=trials, seed=seed)  # raises if inconsistent
        kept.append((idx, c))
    return kept


def _weak_entry(surf: Surface, e: RationalExpr) -> RationalExpr:
    r = surf.reduce(e)
    if r.is_zero():
        return ZERO
    if surf.residual and surf.vanishes(r):
        return ZERO
    return r


def stabilize(first: Sequence[RationalExpr], evolve: Evolve, multipliers: Sequence[Var], *,
              max_generations: int = DEFAULT_MAX_GENERATIONS, trials: int = 20,
              seed: int = 0) -> Stabilization:
    """Impose tangency until no new constraints appear.

    ``first`` must already be normalized (see :func:`accept_new`). Generation
    k+1 holds the residuals of the linear system C lam = -d built from all
    constraints of generation <= k, where d and C come from ``evolve``.
    """
    m = len(multipliers)
    gens: list[list[RationalExpr]] = [list(first)] if first else []
    while True:
        flat = [c for g in gens for c in g]
        surf = Surface(flat, trials=trials, seed=seed)
        drift, rows = [], []
        for c in flat:
            d, cs = evolve(c)
            drift.append(d)
            rows.append([_weak_entry(surf, x) for x in cs])
        C = RfMatrix(rows, m)
        res = solve(C, [-d for d in drift])
        new = [c for _, c in accept_new(res.residuals, flat, trials=trials, seed=seed)]
        if not new:
            values: list[RationalExpr | None] = [None] * m
            free = [j for j in range(m) if j not in res.pivots]
            for i, col in enumerate(res.pivots):
                val = res.weak_particular[col]
                for f in free:
                    coeff = res.reduced[i][f]
                    if not coeff.is_zero():
                        val = val - coeff * RationalExpr.var(multipliers[f])
                values[col] = _weak_entry(surf, val)
            return Stabilization(gens, True, values, rows, surf)
        if len(gens) >= max_generations:
            return Stabilization(gens, False, [None] * m, rows, surf)
        gens.append(new)


# --------------------------------------------------------------------------
# generic presymplectic systems


@dataclass(frozen=True)
class PresymplecticSystem:
    """Chart-level triple (M, omega, alpha) with omega closed and alpha closed."""

    vars: tuple
    omega: RfMatrix
    alpha: tuple

    def __post_init__(self):
        m = len(self.vars)
        if self.omega.shape != (m, m) or len(self.alpha) != m:
            raise InputError("omega and alpha must match the chart dimension")
        if not self.omega.is_antisymmetric():
            raise InputError("omega is not antisymmetric")
        x = self.vars
        w = self.omega
        for i in range(m):
            for j in range(i + 1, m):
                for k in range(j + 1, m):
                    s = w[j, k].diff(x[i]) + w[k, i].diff(x[j]) + w[i, j].diff(x[k])
                    if not s.is_zero():
                        raise InputError(f"omega is not closed (d omega)_{x[i]}{x[j]}{x[k]} = {s}")
        for i in range(m):
            for j in range(i + 1, m):
                if not (self.alpha[j].diff(x[i]) - self.alpha[i].diff(x[j])).is_zero():
                    raise InputError(f"alpha is not closed in ({x[i]}, {x[j]})")

    @classmethod
    def build(cls, variables: Sequence, omega, alpha: Sequence) -> "PresymplecticSystem":
        vs = tuple(Var(v) if isinstance(v, str) else v for v in variables)
        om = omega if isinstance(omega, RfMatrix) else RfMatrix(omega, len(vs))
        return cls(vs, om, tuple(as_expr(a) for a in alpha))


@dataclass
class PCAResult:
    generations: list[list[RationalExpr]]
    stabilized: bool
    final_constraints: list[RationalExpr]
    particular_solution: list[RationalExpr] | None
    gauge_basis: list[list[RationalExpr]]
    multipliers: list[RationalExpr | None] = field(default_factory=list)
    kernel: list[list[RationalExpr]] = field(default_factory=list)
    coupling: list[list[RationalExpr]] = field(default_factory=list)


def pca_run(sys: PresymplecticSystem, max_generations: int = DEFAULT_MAX_GENERATIONS, *,
            trials: int = 20, seed: int = 0) -> PCAResult:
    """Find the final constraint surface of ``i(X)omega = alpha``.

    Raises :class:`InconsistentDynamics` if a constraint is weakly a nonzero
    constant. If ``max_generations`` is reached the result has
    ``stabilized = False``.
    """
    x = sys.vars
    kernel = nullspace(sys.omega)
    first_raw = [dot(z, sys.alpha) for z in kernel]
    first = [c for _, c in accept_new(first_raw, [], trials=trials, seed=seed)]
    base = solve(sys.omega.T(), list(sys.alpha))
    xp = base.weak_particular
    lam = [Var(f"lam{i + 1}") for i in range(len(kernel))]

    def evolve(c: RationalExpr):
        grad = [c.diff(v) for v in x]
        return dot(grad, xp), [dot(grad, k) for k in kernel]

    st = stabilize(first, evolve, lam, max_generations=max_generations, trials=trials, seed=seed)
    particular = None
    gauge: list[list[RationalExpr]] = []
    if st.stabilized:
        particular = list(xp)
        for mu, val in enumerate(st.multipliers):
            if val is None:
                continue
            free_zero = {v: 0 for v in lam}
            val = val.substitute(free_zero)
            particular = [a + val * b for a, b in zip(particular, kernel[mu])]
        particular = [st.surface.reduce(a) for a in particular]
        C = RfMatrix(st.coupling, len(kernel)) if st.coupling else None
        combos = nullspace(C) if C is not None and C.nrows else (
            [[RationalExpr.const(1 if i == j else 0) for i in range(len(kernel))]
             for j in range(len(kernel))])
        for nvec in combos:
            g = [ZERO] * len(x)
            for coeff, k in zip(nvec, kernel):
                g = [a + coeff * b for a, b in zip(g, k)]
            gauge.append([st.surface.reduce(a) for a in g])
    return PCAResult(st.generations, st.stabilized, st.constraints, particular, gauge,
                     st.multipliers, kernel, st.coupling)
