"""Linear algebra over the field of rational functions.

Elimination is fraction-free (Bareiss) on denominator-cleared rows, followed
by normalization to reduced row echelon form. Rank is *generic*: any entry
that is not identically zero is treated as invertible. Points where that
assumption breaks are surfaced by :func:`sample_rank_check`.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .expr import ONE, ZERO, Polynomial, RationalExpr, Var, as_expr, lcm_approx


class RfMatrix:
    """Immutable dense matrix of :class:`RationalExpr` entries."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows: Iterable[Iterable], ncols: int | None = None):
        data = tuple(tuple(as_expr(x) for x in r) for r in rows)
        if ncols is None:
            ncols = len(data[0]) if data else 0
        if any(len(r) != ncols for r in data):
            raise ValueError("ragged matrix rows")
        self.rows = data
        self.nrows = len(data)
        self.ncols = ncols

    @classmethod
    def zeros(cls, m: int, n: int) -> "RfMatrix":
        return cls([[ZERO] * n for _ in range(m)], n)

    @classmethod
    def identity(cls, n: int) -> "RfMatrix":
        return cls([[ONE if i == j else ZERO for j in range(n)] for i in range(n)], n)

    @classmethod
    def canonical(cls, n: int) -> "RfMatrix":
        """Matrix of dq^A ^ dp_A in the ordered basis (q1..qn, p1..pn)."""
        m = [[ZERO] * (2 * n) for _ in range(2 * n)]
        for a in range(n):
            m[a][n + a] = ONE
            m[n + a][a] = -ONE
        return cls(m, 2 * n)

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def row(self, i: int) -> tuple:
        return self.rows[i]

    def col(self, j: int) -> tuple:
        return tuple(r[j] for r in self.rows)

    def T(self) -> "RfMatrix":
        return RfMatrix([self.col(j) for j in range(self.ncols)], self.nrows)

    def __matmul__(self, other):
        if isinstance(other, RfMatrix):
            if self.ncols != other.nrows:
                raise ValueError("shape mismatch")
            cols = [other.col(j) for j in range(other.ncols)]
            return RfMatrix([[_dot(r, c) for c in cols] for r in self.rows], other.ncols)
        vec = list(other)
        if len(vec) != self.ncols:
            raise ValueError("shape mismatch")
        return [_dot(r, vec) for r in self.rows]

    def __add__(self, other: "RfMatrix") -> "RfMatrix":
        return RfMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.ncols)

    def __sub__(self, other: "RfMatrix") -> "RfMatrix":
        return RfMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.ncols)

    def scale(self, c) -> "RfMatrix":
        c = as_expr(c)
        return RfMatrix([[c * a for a in r] for r in self.rows], self.ncols)

    def map(self, fn) -> "RfMatrix":
        return RfMatrix([[fn(a) for a in r] for r in self.rows], self.ncols)

    def substitute(self, bindings) -> "RfMatrix":
        return self.map(lambda e: e.substitute(bindings))

    def evaluate(self, point) -> list[list[Fraction]]:
        return [[e.evaluate(point) for e in r] for r in self.rows]

    def is_zero(self) -> bool:
        return all(e.is_zero() for r in self.rows for e in r)

    def is_antisymmetric(self) -> bool:
        return self.nrows == self.ncols and all(
            (self.rows[i][j] + self.rows[j][i]).is_zero()
            for i in range(self.nrows) for j in range(i, self.ncols))

    def is_symmetric(self) -> bool:
        return self.nrows == self.ncols and all(
            self.rows[i][j] == self.rows[j][i]
            for i in range(self.nrows) for j in range(i + 1, self.ncols))

    def variables(self) -> frozenset:
        out = frozenset()
        for r in self.rows:
            for e in r:
                out |= e.variables()
        return out

    def __eq__(self, other):
        if not isinstance(other, RfMatrix):
            return NotImplemented
        return self.shape == other.shape and all(
            a == b for r, s in zip(self.rows, other.rows) for a, b in zip(r, s))

    __hash__ = None

    def __repr__(self):
        body = "; ".join(", ".join(str(e) for e in r) for r in self.rows)
        return f"RfMatrix[{body}]"


def _dot(a: Sequence[RationalExpr], b: Sequence[RationalExpr]) -> RationalExpr:
    total = ZERO
    for x, y in zip(a, b):
        if x.is_zero() or y.is_zero():
            continue
        total = total + x * y
    return total


def dot(a: Sequence, b: Sequence) -> RationalExpr:
    return _dot([as_expr(x) for x in a], [as_expr(y) for y in b])


# --------------------------------------------------------------------------
# elimination


def _clear_row(row: Sequence[RationalExpr]) -> list[Polynomial]:
    dens = [e.den for e in row if not e.is_zero()]
    lcd = lcm_approx(dens)
    out = []
    for e in row:
        if e.is_zero():
            out.append(Polynomial())
            continue
        q = lcd.divide_exact(e.den)
        out.append(e.num * q)
    return out


def _pivot_weight(p: Polynomial):
    return (p.degree(), len(p.terms))


@dataclass
class _Echelon:
    rows: list[list[Polynomial]]
    pivots: list[int]
    last_pivot: Polynomial


def _bareiss(rows: list[list[Polynomial]], pivot_cols: int) -> _Echelon:
    """Fraction-free row echelon form; pivots only in the first ``pivot_cols`` columns."""
    a = [list(r) for r in rows]
    m = len(a)
    ncols = len(a[0]) if a else 0
    pivots: list[int] = []
    prev = Polynomial.constant(1)
    r = 0
    for c in range(pivot_cols):
        if r >= m:
            break
        cands = [i for i in range(r, m) if not a[i][c].is_zero()]
        if not cands:
            continue
        best = min(cands, key=lambda i: (_pivot_weight(a[i][c]), i))
        a[r], a[best] = a[best], a[r]
        piv = a[r][c]
        for i in range(r + 1, m):
            aic = a[i][c]
            new = []
            for j in range(ncols):
                if j < c:
                    new.append(a[i][j])
                    continue
                val = piv * a[i][j] - aic * a[r][j] if not aic.is_zero() else piv * a[i][j]
                if not prev.is_constant() or prev != 1:
                    q = val.divide_exact(prev)
                    val = q if q is not None else val
                new.append(val)
            a[i] = new
        prev = piv
        pivots.append(c)
        r += 1
    return _Echelon(a, pivots, prev)


def _rref_rows(A: RfMatrix, pivot_cols: int | None = None):
    if pivot_cols is None:
        pivot_cols = A.ncols
    cleared = [_clear_row(r) for r in A.rows]
    ech = _bareiss(cleared, pivot_cols)
    rank = len(ech.pivots)
    R = [[RationalExpr(p) for p in row] for row in ech.rows]
    # normalize pivot rows, then clear above
    for i, c in enumerate(ech.pivots):
        piv = R[i][c]
        R[i] = [ZERO if e.is_zero() else e / piv for e in R[i]]
    for i in range(rank - 1, -1, -1):
        c = ech.pivots[i]
        for k in range(i):
            f = R[k][c]
            if f.is_zero():
                continue
            R[k] = [x - f * y if not y.is_zero() else x for x, y in zip(R[k], R[i])]
    return R, ech.pivots, ech


def rref(A: RfMatrix) -> tuple[RfMatrix, list[int], int]:
    """Reduced row echelon form, pivot columns and generic rank."""
    if A.nrows == 0 or A.ncols == 0:
        return A, [], 0
    R, pivots, _ = _rref_rows(A)
    return RfMatrix(R, A.ncols), pivots, len(pivots)


def rank(A: RfMatrix) -> int:
    if A.nrows == 0 or A.ncols == 0:
        return 0
    cleared = [_clear_row(r) for r in A.rows]
    return len(_bareiss(cleared, A.ncols).pivots)


def _primitive_vector(vec: list[RationalExpr]) -> list[RationalExpr]:
    """Clear denominators and content; first nonzero entry gets a positive lead."""
    nz = [e for e in vec if not e.is_zero()]
    if not nz:
        return vec
    lcd = lcm_approx(e.den for e in nz)
    polys = [Polynomial() if e.is_zero() else e.num * lcd.divide_exact(e.den) for e in vec]
    # common monomial and integer content
    nzp = [p for p in polys if not p.is_zero()]
    common = Polynomial._raw({m: Fraction(1) for m in [_common_monomial(nzp)]})
    polys = [p if p.is_zero() else p.divide_exact(common) for p in polys]
    from math import gcd
    den, g = 1, 0
    for p in polys:
        if p.is_zero():
            continue
        d, _ = p.integer_content()
        den = den * d // gcd(den, d)
    for p in polys:
        if p.is_zero():
            continue
        for c in p.terms.values():
            g = gcd(g, (c * den).numerator)
    factor = Fraction(den, g)
    lead = next(p for p in polys if not p.is_zero())
    if lead.leading()[1] < 0:
        factor = -factor
    return [RationalExpr(p.scale(factor)) for p in polys]


def _common_monomial(polys: list[Polynomial]):
    acc = None
    for p in polys:
        mc = dict(p.monomial_content())
        if acc is None:
            acc = mc
        else:
            acc = {x: min(e, mc[x]) for x, e in acc.items() if x in mc}
        if not acc:
            return ()
    return tuple(sorted((acc or {}).items(), key=lambda t: t[0].key))


def nullspace(A: RfMatrix) -> list[list[RationalExpr]]:
    """Basis of the right kernel; entries polynomial where possible."""
    if A.ncols == 0:
        return []
    if A.nrows == 0:
        return [[ONE if i == j else ZERO for i in range(A.ncols)] for j in range(A.ncols)]
    R, pivots, _ = _rref_rows(A)
    free = [j for j in range(A.ncols) if j not in pivots]
    basis = []
    for f in free:
        vec = [ZERO] * A.ncols
        vec[f] = ONE
        for i, c in enumerate(pivots):
            vec[c] = -R[i][f]
        basis.append(_primitive_vector(vec))
    return basis


def left_nullspace(A: RfMatrix) -> list[list[RationalExpr]]:
    return nullspace(A.T())


@dataclass
class SolveResult:
    """Outcome of ``A x = b`` over the rational-function field.

    ``residuals`` are the combinations of ``b`` that must vanish for the
    system to be consistent. ``weak_particular`` solves the system wherever
    they vanish; ``particular`` is set only when they vanish identically.
    """

    particular: list[RationalExpr] | None
    weak_particular: list[RationalExpr]
    residuals: list[RationalExpr]
    kernel_basis: list[list[RationalExpr]]
    rank: int
    pivots: list[int] = field(default_factory=list)
    reduced: list[list[RationalExpr]] = field(default_factory=list)


def solve(A: RfMatrix, b: Sequence) -> SolveResult:
    b = [as_expr(x) for x in b]
    if len(b) != A.nrows:
        raise ValueError("right-hand side length does not match the row count")
    n = A.ncols
    if A.nrows == 0:
        kern = nullspace(A)
        return SolveResult([ZERO] * n, [ZERO] * n, [], kern, 0)
    aug = RfMatrix([list(r) + [bi] for r, bi in zip(A.rows, b)], n + 1)
    R, pivots, _ = _rref_rows(aug, pivot_cols=n)
    rk = len(pivots)
    residuals = [R[i][n] for i in range(rk, A.nrows) if not R[i][n].is_zero()]
    x = [ZERO] * n
    for i, c in enumerate(pivots):
        x[c] = R[i][n]
    free = [j for j in range(n) if j not in pivots]
    kern = []
    for f in free:
        vec = [ZERO] * n
        vec[f] = ONE
        for i, c in enumerate(pivots):
            vec[c] = -R[i][f]
        kern.append(_primitive_vector(vec))
    return SolveResult(
        particular=None if residuals else x,
        weak_particular=x,
        residuals=residuals,
        kernel_basis=kern,
        rank=rk,
        pivots=list(pivots),
        reduced=[row[:n] for row in R[:rk]],
    )


# --------------------------------------------------------------------------
# numeric cross-checks


def numeric_rank(M: Sequence[Sequence[Fraction]]) -> int:
    """Rank of an exact rational matrix by plain Gaussian elimination."""
    a = [list(r) for r in M]
    if not a:
        return 0
    m, n = len(a), len(a[0])
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        for i in range(r + 1, m):
            if a[i][c] != 0:
                f = a[i][c] / a[r][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        r += 1
        if r == m:
            break
    return r


def random_point(variables: Iterable[Var], rng: random.Random, span: int = 9) -> dict[Var, Fraction]:
    point = {}
    for x in sorted(variables):
        num = rng.randint(-span, span)
        den = rng.choice((1, 1, 1, 2, 3))
        point[x] = Fraction(num, den)
    return point


@dataclass
class RankReport:
    """Generic rank versus pointwise rank at random exact points."""

    generic_rank: int
    degeneracy_locus: RationalExpr
    samples: list[tuple[dict, int]]
    drops: list[tuple[dict, int]]
    skipped: int

    @property
    def constant_rank(self) -> bool:
        return not self.drops


def sample_rank_check(A: RfMatrix, trials: int = 10, rng: random.Random | None = None,
                      avoid_locus: bool = False) -> RankReport:
    """Compare generic rank with numeric rank at ``trials`` random points.

    ``degeneracy_locus`` is a nonzero maximal minor from the elimination;
    the rank can only drop where it vanishes. With ``avoid_locus`` such
    points are resampled instead of being reported as drops.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = rng or random.Random(0)
    if A.nrows == 0 or A.ncols == 0:
        return RankReport(0, ONE, [], [], 0)
    cleared = [_clear_row(r) for r in A.rows]
    ech = _bareiss(cleared, A.ncols)
    generic = len(ech.pivots)
    locus = RationalExpr(ech.last_pivot) if generic else ONE
    variables = A.variables()
    dens = [e.den for r in A.rows for e in r if not e.is_zero() and not e.den.is_constant()]
    samples, drops = [], []
    skipped = 0
    attempts = 0
    while len(samples) < trials and attempts < 50 * trials:
        attempts += 1
        pt = random_point(variables, rng)
        if any(d.evaluate(pt) == 0 for d in dens):
            skipped += 1
            continue
        if avoid_locus and locus.evaluate(pt) == 0:
            skipped += 1
            continue
        rk = numeric_rank(A.evaluate(pt))
        samples.append((pt, rk))
        if rk != generic:
            drops.append((pt, rk))
    return RankReport(generic, locus, samples, drops, skipped)
