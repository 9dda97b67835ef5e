"""Weak equality: deciding whether a function vanishes on a constraint surface.

A :class:`Surface` triangularizes its defining constraints by repeatedly
solving one that is affine in some variable and substituting it everywhere.
What cannot be solved that way is kept as a residual system, which is only
handled by exact sampling: random rational values for the free coordinates,
rational roots for the rest.
"""
from __future__ import annotations

import math
import random
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InconsistentDynamics, IndeterminateError, ZeroDenominatorError
from .expr import Polynomial, RationalExpr, Var, as_expr, normalize_constraint

# which variable to eliminate first when a constraint is affine in several
_SOLVE_PREFERENCE = {"multiplier": 0, "momentum": 1, "velocity": 2, "parameter": 3, "position": 4}
_MAX_ROOT_COEFF = 10 ** 8


def _solve_order(x: Var):
    return (_SOLVE_PREFERENCE[x.kind], -x.index, x.name)


class Surface:
    """Zero set of a list of constraints, prepared for weak-vanishing queries."""

    def __init__(self, constraints: Iterable, *, trials: int = 20, seed: int = 0):
        self.constraints = tuple(as_expr(c) for c in constraints)
        self.trials = trials
        self.seed = seed
        self.solved: dict[Var, RationalExpr] = {}
        self.conditions: list[RationalExpr] = []
        self.residual: list[RationalExpr] = []
        self._triangularize()

    def _triangularize(self):
        pending = [normalize_constraint(c) for c in self.constraints]
        while True:
            nxt = []
            for c in pending:
                if c.is_zero():
                    continue
                if c.is_constant():
                    raise InconsistentDynamics(f"constraint reduces to the nonzero constant {c}")
                nxt.append(c)
            pending = nxt
            choice = self._pick(pending, constant_only=True) or self._pick(pending, constant_only=False)
            if choice is None:
                break
            idx, x, (a, b) = choice
            value = -b / a
            self.solved = {y: e.substitute({x: value}) for y, e in self.solved.items()}
            self.solved[x] = value
            if not a.is_constant():
                self.conditions.append(a)
            pending.pop(idx)
            pending = [normalize_constraint(c.substitute({x: value})) for c in pending]
        self.residual = pending

    @staticmethod
    def _pick(pending, constant_only):
        for idx, c in enumerate(pending):
            for x in sorted(c.variables(), key=_solve_order):
                aff = c.affine_in(x)
                if aff is None:
                    continue
                if constant_only and not aff[0].is_constant():
                    continue
                return idx, x, aff
        return None

    # ------------------------------------------------------------------
    @property
    def is_triangular(self) -> bool:
        return not self.residual

    def reduce(self, f) -> RationalExpr:
        """``f`` with every solved coordinate eliminated."""
        f = as_expr(f)
        if not self.solved:
            return f
        return f.substitute(self.solved)

    def vanishes(self, f) -> bool:
        """True iff ``f`` vanishes on the surface (generically).

        Raises :class:`IndeterminateError` when the residual system admits no
        rational sample points.
        """
        r = self.reduce(f)
        if r.is_zero():
            return True
        if not self.residual:
            return False
        rng = random.Random(self.seed)
        got = 0
        for point in self._points(rng, r.variables(), self.trials):
            try:
                val = r.evaluate(point)
            except ZeroDenominatorError:
                continue
            if val != 0:
                return False
            got += 1
        if got < max(1, self.trials // 4):
            raise IndeterminateError(
                f"could not sample the surface {[str(c) for c in self.residual]} to test {f}")
        return True

    def equal(self, f, g) -> bool:
        return self.vanishes(as_expr(f) - as_expr(g))

    def nonzero_constant(self, f) -> bool:
        r = self.reduce(f)
        return r.is_constant() and not r.is_zero()

    def sample_points(self, count: int, variables: Iterable[Var], seed: int | None = None) -> list[dict]:
        """Exact points of the surface, with values for ``variables``."""
        variables = set(variables)
        free = set()
        for x in variables:
            if x in self.solved:
                free |= self.solved[x].variables()
            else:
                free.add(x)
        rng = random.Random(self.seed if seed is None else seed)
        out = []
        for point in self._points(rng, free, count):
            full = dict(point)
            try:
                for x in variables:
                    if x in self.solved:
                        full[x] = self.solved[x].evaluate(point)
            except ZeroDenominatorError:
                continue
            out.append({x: full[x] for x in sorted(variables)})
            if len(out) == count:
                break
        return out

    def _points(self, rng: random.Random, extra: Iterable[Var], count: int):
        extra = set(extra)
        produced = 0
        for _ in range(40 * count):
            if produced >= count:
                return
            point = self._try_point(rng, extra)
            if point is None:
                continue
            produced += 1
            yield point

    def _try_point(self, rng, extra):
        point: dict[Var, Fraction] = {}
        for c in self.residual:
            poly = c.num.substitute({x: Polynomial.constant(v) for x, v in point.items()})
            unknown = poly.variables()
            if not unknown:
                if not poly.is_zero():
                    return None
                continue
            y = min(unknown, key=lambda x: (poly.degree_in(x), _solve_order(x)))
            for x in sorted(unknown - {y}):
                point[x] = _rand(rng)
            uni = poly.substitute({x: Polynomial.constant(point[x]) for x in unknown - {y}})
            if uni.is_zero():
                point[y] = _rand(rng)
                continue
            roots = rational_roots(uni, y)
            if not roots:
                return None
            point[y] = rng.choice(roots)
        conds_vars = set()
        reduced_conds = []
        for a in self.conditions:
            ra = self.reduce(a)
            reduced_conds.append(ra)
            conds_vars |= ra.variables()
        for x in sorted((set(extra) | conds_vars) - point.keys()):
            point[x] = _rand(rng)
        for ra in reduced_conds:
            try:
                if ra.evaluate(point) == 0:
                    return None
            except ZeroDenominatorError:
                return None
        return point


def _rand(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-7, 7), rng.choice((1, 1, 2, 3)))


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small, large = [], []
    for d in range(1, math.isqrt(n) + 1):
        if n % d == 0:
            small.append(d)
            if d != n // d:
                large.append(n // d)
    return small + large[::-1]


def rational_roots(p: Polynomial, y: Var) -> list[Fraction]:
    """Distinct rational roots of a univariate polynomial, ascending."""
    cs = p.coefficients_in(y)
    if any(not c.is_constant() for c in cs.values()):
        raise ValueError("polynomial is not univariate in the given variable")
    coeffs = {k: c.constant_value() for k, c in cs.items()}
    den = 1
    for c in coeffs.values():
        den = den * c.denominator // math.gcd(den, c.denominator)
    ints = {k: int(c * den) for k, c in coeffs.items() if c}
    roots = set()
    low = min(ints)
    if low > 0:
        roots.add(Fraction(0))
    ints = {k - low: c for k, c in ints.items()}
    deg = max(ints)
    if deg == 0:
        return sorted(roots)
    a0, an = ints[0], ints[deg]
    if abs(a0) > _MAX_ROOT_COEFF or abs(an) > _MAX_ROOT_COEFF:
        return sorted(roots)
    for num in _divisors(a0):
        for d in _divisors(an):
            for cand in (Fraction(num, d), Fraction(-num, d)):
                if cand in roots:
                    continue
                acc = Fraction(0)
                for k in range(deg, -1, -1):
                    acc = acc * cand + ints.get(k, 0)
                if acc == 0:
                    roots.add(cand)
    return sorted(roots)


def weak_vanishing(f, constraints: Sequence, *, trials: int = 20, seed: int = 0) -> bool:
    """Does ``f`` vanish on the common zero set of ``constraints``?"""
    return Surface(constraints, trials=trials, seed=seed).vanishes(f)
