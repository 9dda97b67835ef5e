"""Canonical transformations between constrained presymplectic systems.

A transformation is given by a coordinate map Phi on an ambient chart,
together with the constraint sets C1 and C2 and the 2-forms omega1, omega2.
The restriction of Phi to C1 plays the role of phi: C1 -> C2, so no adapted
coordinates on the constraint surfaces are ever needed.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import InputError
from .expr import ZERO, RationalExpr, Var, as_expr
from .ratlinalg import RfMatrix, dot, nullspace, numeric_rank, rank
from .surface import Surface

__all__ = ["TransformationPair", "ValenceResult", "ReducedRanks", "RankVarianceWarning",
           "valence_check", "find_valence", "check_compatible_ranks", "reduced_ranks", "kernel_invariance", "compose",
           "tangent_basis", "jacobian"]


class RankVarianceWarning(UserWarning):
    """The restricted 2-form does not have the same rank at every sample."""


def _vars(variables) -> tuple:
    return tuple(Var(v) if isinstance(v, str) else v for v in variables)


def jacobian(exprs: Sequence[RationalExpr], variables: Sequence[Var]) -> RfMatrix:
    return RfMatrix([[as_expr(e).diff(x) for x in variables] for e in exprs], len(variables))


def tangent_basis(constraints: Sequence, variables: Sequence[Var], surf: Surface | None = None):
    """Vectors spanning the tangent space of the zero set, reduced on it."""
    m = len(variables)
    if not constraints:
        return [[RationalExpr.const(1 if i == j else 0) for i in range(m)] for j in range(m)]
    surf = surf or Surface(constraints)
    G = jacobian(constraints, variables).map(surf.reduce)
    return [[surf.reduce(e) for e in vec] for vec in nullspace(G)]


def _restrict(M: RfMatrix, basis, surf: Surface) -> RfMatrix:
    """Matrix of the bilinear form M on the given tangent vectors."""
    k = len(basis)
    cols = [M @ b for b in basis]
    return RfMatrix([[surf.reduce(dot(basis[i], cols[j])) for j in range(k)] for i in range(k)], k)


@dataclass(frozen=True)
class TransformationPair:
    """Candidate canonical transformation (Phi, phi) with phi = Phi restricted to C1.

    ``phi_M[i]`` is the i-th target coordinate as a function of the source
    coordinates; source and target charts share the variable names.
    """

    variables: tuple
    phi_M: tuple
    c1: tuple
    c2: tuple
    omega1: RfMatrix
    omega2: RfMatrix
    valence: Fraction | str = "unknown"
    trials: int = field(default=20, compare=False)
    seed: int = field(default=0, compare=False)

    @classmethod
    def build(cls, variables, phi_M, c1=(), c2=None, omega1=None, omega2=None, valence="unknown",
              *, trials: int = 20, seed: int = 0) -> "TransformationPair":
        vs = _vars(variables)
        m = len(vs)
        if omega1 is None:
            if m % 2:
                raise InputError("a canonical omega needs an even-dimensional chart")
            omega1 = RfMatrix.canonical(m // 2)
        omega2 = omega1 if omega2 is None else omega2
        c1 = tuple(as_expr(c) for c in c1)
        c2 = c1 if c2 is None else tuple(as_expr(c) for c in c2)
        return cls(vs, tuple(as_expr(e) for e in phi_M), c1, c2, omega1, omega2, valence,
                   trials, seed)

    def __post_init__(self):
        m = len(self.variables)
        if len(self.phi_M) != m:
            raise InputError(f"the map has {len(self.phi_M)} components for a chart of dimension {m}")
        if self.omega1.shape != (m, m) or self.omega2.shape != (m, m):
            raise InputError("omega1 and omega2 must be square of the chart dimension")
        if rank(self.jacobian) != m:
            raise InputError("the map's Jacobian is not of full rank")
        s1 = self.surface1
        for c in self.c2:
            if not s1.vanishes(self.pull(c)):
                raise InputError(f"the map does not send C1 into C2: {c} pulled back is not weakly zero on C1")

    # ------------------------------------------------------------------
    @property
    def bindings(self) -> dict:
        return dict(zip(self.variables, self.phi_M))

    def pull(self, f) -> RationalExpr:
        """f o Phi."""
        return as_expr(f).substitute(self.bindings)

    @property
    def jacobian(self) -> RfMatrix:
        return jacobian(self.phi_M, self.variables)

    @property
    def surface1(self) -> Surface:
        return Surface(self.c1, trials=self.trials, seed=self.seed)

    @property
    def surface2(self) -> Surface:
        return Surface(self.c2, trials=self.trials, seed=self.seed)

    def pulled_omega(self) -> RfMatrix:
        """Matrix of Phi^* omega2, i.e. J^T Omega2(Phi(x)) J."""
        J = self.jacobian
        return J.T() @ self.omega2.substitute(self.bindings) @ J


@dataclass
class ValenceResult:
    holds: bool
    residual: RfMatrix       # restricted matrix of Phi^*omega2 - c omega1 on C1
    tangent: list

    def __bool__(self):
        return self.holds


def valence_check(tp: TransformationPair, c) -> ValenceResult:
    """Does Phi^*omega2 - c omega1 vanish on vectors tangent to C1, weakly on C1?"""
    c = as_expr(c)
    if not c.is_constant():
        raise InputError("the valence must be a constant")
    surf = tp.surface1
    T = tangent_basis(tp.c1, tp.variables, surf)
    diff = tp.pulled_omega() - tp.omega1.scale(c)
    R = _restrict(diff, T, surf)
    holds = all(surf.vanishes(e) for row in R.rows for e in row)
    return ValenceResult(holds, R, T)


def find_valence(tp: TransformationPair):
    """The constant c with Phi^*omega2 = c omega1 on C1, or "none" / "any".

    "any" means omega1 restricted to C1 is weakly zero and so is the pullback.
    Raises InputError when the two constrained systems differ in dimension
    or rank, since no valence can relate them.
    """
    check_compatible_ranks(tp)
    surf = tp.surface1
    T = tangent_basis(tp.c1, tp.variables, surf)
    A = _restrict(tp.pulled_omega(), T, surf)
    B = _restrict(tp.omega1, T, surf)
    pivot = None
    for i in range(B.nrows):
        for j in range(B.ncols):
            if not surf.vanishes(B[i, j]):
                pivot = (i, j)
                break
        if pivot:
            break
    if pivot is None:
        return "any" if all(surf.vanishes(e) for row in A.rows for e in row) else "none"
    ratio = surf.reduce(A[pivot] / B[pivot])
    if ratio.is_constant():
        c = ratio.constant()
    else:
        pts = surf.sample_points(1, ratio.variables())
        if not pts:
            return "none"
        c = ratio.evaluate(pts[0])
    return c if valence_check(tp, c).holds else "none"


@dataclass(frozen=True)
class ReducedRanks:
    dim_C: int
    rank_omega_C: int
    dim_ker_omega_C: int
    dim_reduced: int
    sampled_ranks: tuple = ()

    def __iter__(self):
        return iter((self.dim_C, self.rank_omega_C, self.dim_ker_omega_C, self.dim_reduced))


def reduced_ranks(constraints: Sequence, omega: RfMatrix, variables: Sequence, *, samples: int = 5,
                  trials: int = 20, seed: int = 0) -> ReducedRanks:
    """(dim C, rank omega_C, dim ker omega_C, dim C/ker omega_C) for the zero set C.

    The rank is computed symbolically on a tangent basis and cross-checked
    at exact surface samples; disagreement raises a RankVarianceWarning.
    """
    vs = _vars(variables)
    constraints = [as_expr(c) for c in constraints]
    surf = Surface(constraints, trials=trials, seed=seed)
    T = tangent_basis(constraints, vs, surf)
    dim_C = len(T)
    R = _restrict(omega, T, surf)
    r = rank(R) if dim_C else 0
    sampled = []
    if dim_C and samples:
        for pt in surf.sample_points(samples, set(vs) | set(R.variables())):
            try:
                sampled.append(numeric_rank(R.evaluate(pt)))
            except ZeroDivisionError:
                continue
        if any(s != r for s in sampled):
            warnings.warn(f"restricted rank {r} differs at samples: {sampled}", RankVarianceWarning,
                          stacklevel=2)
    return ReducedRanks(dim_C, r, dim_C - r, r, tuple(sampled))


def check_compatible_ranks(tp: TransformationPair) -> tuple[ReducedRanks, ReducedRanks]:
    r1 = reduced_ranks(tp.c1, tp.omega1, tp.variables, trials=tp.trials, seed=tp.seed)
    r2 = reduced_ranks(tp.c2, tp.omega2, tp.variables, trials=tp.trials, seed=tp.seed)
    if (r1.dim_C, r1.rank_omega_C) != (r2.dim_C, r2.rank_omega_C):
        raise InputError(f"source and target differ: dim/rank {r1.dim_C}/{r1.rank_omega_C} "
                         f"vs {r2.dim_C}/{r2.rank_omega_C}")
    return r1, r2


def kernel_invariance(tp: TransformationPair, samples: int = 10) -> list[tuple[dict, bool]]:
    """Does Phi_* carry ker omega_C1 into ker omega_C2, at exact samples of C1?

    A pushed vector w must be tangent to C2 and i(w)omega2 must lie in the
    span of the C2 constraint differentials.
    """
    vs = tp.variables
    s1 = tp.surface1
    T = tangent_basis(tp.c1, vs, s1)
    R = _restrict(tp.omega1, T, s1)
    kernel = []
    for z in nullspace(R):
        vec = [ZERO] * len(vs)
        for coeff, t in zip(z, T):
            vec = [a + coeff * b for a, b in zip(vec, t)]
        kernel.append(vec)
    J = tp.jacobian
    pushed = [J @ k for k in kernel]
    G2 = jacobian(tp.c2, vs)
    needed = set(vs) | set(J.variables()) | {x for k in kernel for e in k for x in e.variables()}
    out = []
    for pt in s1.sample_points(samples, needed):
        try:
            img = {x: e.evaluate(pt) for x, e in zip(vs, tp.phi_M)}
            g2 = G2.evaluate(img) if tp.c2 else []
            om2 = tp.omega2.evaluate(img)
            ok = True
            base = numeric_rank(g2) if g2 else 0
            for w in pushed:
                wv = [e.evaluate(pt) for e in w]
                if any(sum(g[i] * wv[i] for i in range(len(vs))) != 0 for g in g2):
                    ok = False
                    break
                form = [sum(wv[i] * om2[i][j] for i in range(len(vs))) for j in range(len(vs))]
                if numeric_rank(list(g2) + [form]) != base:
                    ok = False
                    break
        except ZeroDivisionError:
            continue
        out.append((pt, ok))
    return out


def compose(first: TransformationPair, second: TransformationPair) -> TransformationPair:
    """second o first, from (C1 of first) to (C2 of second)."""
    if first.variables != second.variables:
        raise InputError("composed transformations must share the chart")
    phi = tuple(e.substitute(first.bindings) for e in second.phi_M)
    val = "unknown"
    if not isinstance(first.valence, str) and not isinstance(second.valence, str):
        val = Fraction(first.valence) * Fraction(second.valence)
    return TransformationPair(first.variables, phi, first.c1, second.c2, first.omega1,
                              second.omega2, val, first.trials, first.seed)
