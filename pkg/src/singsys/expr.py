"""Exact rational-function arithmetic over named variables.

Everything downstream (Lagrangians, energies, constraints, matrix entries) is a
:class:`RationalExpr`: a quotient of two sparse multivariate polynomials with
``Fraction`` coefficients. Polynomials are canonical, so structural equality is
mathematical equality. Rational expressions are *not* reduced by a full GCD;
equality is decided by cross-multiplication instead.

Variable order (used for the graded-lex monomial order and for printing)::

    q1 < ... < qn < v1 < ... < vn < p1 < ... < pn < lam1 < ... < parameters
"""
from __future__ import annotations

import math
import re
import zlib
from fractions import Fraction
from functools import total_ordering
from numbers import Rational
from typing import Iterable, Mapping, Union

from .errors import ParseError, ZeroDenominatorError

KINDS = ("position", "velocity", "momentum", "multiplier", "parameter")
_KIND_RANK = {k: i for i, k in enumerate(KINDS)}
_PREFIX_KIND = {"q": "position", "v": "velocity", "p": "momentum", "lam": "multiplier"}
_KIND_PREFIX = {v: k for k, v in _PREFIX_KIND.items()}
_INDEXED = re.compile(r"^(q|v|p|lam)([1-9][0-9]*)$")
_IDENT = re.compile(r"^[a-zA-Z][a-zA-Z0-9]*$")


@total_ordering
class Var:
    """A named coordinate. Kind and index are inferred from the name.

    ``q3`` is a position, ``v3`` a velocity, ``p3`` a momentum, ``lam3`` a
    multiplier; anything else is a parameter. Instances are interned.
    """

    __slots__ = ("name", "kind", "index", "key")
    _interned: dict[str, "Var"] = {}

    def __new__(cls, name: str) -> "Var":
        existing = cls._interned.get(name)
        if existing is not None:
            return existing
        if not _IDENT.match(name):
            raise ValueError(f"invalid variable name {name!r}")
        self = super().__new__(cls)
        m = _INDEXED.match(name)
        if m:
            self.kind, self.index = _PREFIX_KIND[m.group(1)], int(m.group(2))
        else:
            self.kind, self.index = "parameter", 0
        self.name = name
        self.key = (_KIND_RANK[self.kind], self.index, name)
        cls._interned[name] = self
        return self

    def __reduce__(self):
        return (Var, (self.name,))

    def __eq__(self, other):
        return self is other or (isinstance(other, Var) and other.name == self.name)

    def __hash__(self):
        return hash(self.name)

    def __lt__(self, other):
        return self.key < other.key

    def __repr__(self):
        return self.name

    __str__ = __repr__


def var(name: str) -> Var:
    return Var(name)


def indexed(kind: str, i: int) -> Var:
    return Var(f"{_KIND_PREFIX[kind]}{i}")


class VarTable:
    """The set of admissible variable names for one problem.

    Holds ``n`` positions and ``n`` velocities, optionally ``n`` momenta,
    multipliers ``lam1..`` and free-form parameters. Tables are immutable;
    :meth:`extend` returns a new one.
    """

    def __init__(self, n: int, *, momenta: bool = False, multipliers: int = 0,
                 parameters: Iterable[str] = ()):
        if n < 0:
            raise ValueError("dimension must be non-negative")
        self.n = n
        self.q = tuple(indexed("position", i) for i in range(1, n + 1))
        self.v = tuple(indexed("velocity", i) for i in range(1, n + 1))
        self.p = tuple(indexed("momentum", i) for i in range(1, n + 1)) if momenta else ()
        self.lam = tuple(indexed("multiplier", i) for i in range(1, multipliers + 1))
        params = tuple(Var(s) for s in parameters)
        for prm in params:
            if prm.kind != "parameter":
                raise ValueError(f"{prm.name!r} is reserved for {prm.kind} variables")
        if len(set(params)) != len(params):
            raise ValueError("duplicate parameter names")
        self.parameters = params
        self._names = {x.name: x for x in self.q + self.v + self.p + self.lam + params}

    @classmethod
    def chart(cls, names: Iterable[str]) -> "VarTable":
        """Table for a generic chart whose coordinates are plain parameters."""
        return cls(0, parameters=names)

    def extend(self, *, momenta: bool | None = None, multipliers: int | None = None,
               parameters: Iterable[str] = ()) -> "VarTable":
        return VarTable(
            self.n,
            momenta=bool(self.p) if momenta is None else momenta,
            multipliers=len(self.lam) if multipliers is None else multipliers,
            parameters=tuple(x.name for x in self.parameters) + tuple(parameters),
        )

    def __contains__(self, item) -> bool:
        name = item.name if isinstance(item, Var) else item
        return name in self._names

    def __getitem__(self, name: str) -> Var:
        return self._names[name]

    def __iter__(self):
        return iter(sorted(self._names.values()))

    def __len__(self):
        return len(self._names)

    def __repr__(self):
        return f"VarTable({', '.join(x.name for x in self)})"


# --------------------------------------------------------------------------
# polynomials

Monomial = tuple  # tuple[tuple[Var, int], ...], sorted by Var order
ONE_MONO: Monomial = ()


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for x, e in b:
        d[x] = d.get(x, 0) + e
    return tuple(sorted(d.items(), key=lambda t: t[0].key))


def _mono_div(a: Monomial, b: Monomial):
    """a / b if b divides a, else None."""
    if not b:
        return a
    d = dict(a)
    for x, e in b:
        r = d.get(x, 0) - e
        if r < 0:
            return None
        if r:
            d[x] = r
        else:
            del d[x]
    return tuple(sorted(d.items(), key=lambda t: t[0].key))


def _mono_deg(m: Monomial) -> int:
    return sum(e for _, e in m)


def _order_key(m: Monomial):
    # graded lex: total degree first, then exponents from the largest variable down
    return (_mono_deg(m), tuple((x.key, e) for x, e in reversed(m)))


def _mono_str(m: Monomial) -> str:
    parts = []
    for x, e in m:
        parts.append(x.name if e == 1 else f"{x.name}^{e}")
    return "*".join(parts)


Number = Union[int, Fraction]


class Polynomial:
    """Sparse multivariate polynomial with exact rational coefficients."""

    __slots__ = ("_terms", "_lead")

    def __init__(self, terms: Mapping[Monomial, Number] | None = None):
        clean = {}
        if terms:
            for m, c in terms.items():
                if c:
                    clean[m] = Fraction(c)
        self._terms = clean
        self._lead = None

    @classmethod
    def _raw(cls, terms: dict) -> "Polynomial":
        p = cls.__new__(cls)
        p._terms = terms
        p._lead = None
        return p

    @classmethod
    def constant(cls, c: Number) -> "Polynomial":
        return cls._raw({ONE_MONO: Fraction(c)} if c else {})

    @classmethod
    def variable(cls, x: Var | str) -> "Polynomial":
        x = Var(x) if isinstance(x, str) else x
        return cls._raw({((x, 1),): Fraction(1)})

    # -- inspection --
    @property
    def terms(self) -> Mapping[Monomial, Fraction]:
        return self._terms

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and ONE_MONO in self._terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return self._terms.get(ONE_MONO, Fraction(0))

    def variables(self) -> frozenset:
        return frozenset(x for m in self._terms for x, _ in m)

    def degree(self) -> int:
        return max((_mono_deg(m) for m in self._terms), default=-1)

    def degree_in(self, x: Var) -> int:
        best = -1 if not self._terms else 0
        for m in self._terms:
            for y, e in m:
                if y == x and e > best:
                    best = e
        return best

    def leading(self) -> tuple[Monomial, Fraction]:
        if self._lead is None:
            if not self._terms:
                raise ValueError("zero polynomial has no leading term")
            m = max(self._terms, key=_order_key)
            self._lead = (m, self._terms[m])
        return self._lead

    def sorted_terms(self):
        return sorted(self._terms.items(), key=lambda t: _order_key(t[0]), reverse=True)

    # -- arithmetic --
    def __add__(self, other: "Polynomial") -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(other)
        if not other._terms:
            return self
        if not self._terms:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Polynomial._raw(out)

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(other)
        return self + (-other)

    def scale(self, c: Number) -> "Polynomial":
        if not c:
            return Polynomial._raw({})
        if c == 1:
            return self
        return Polynomial._raw({m: v * c for m, v in self._terms.items()})

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        if not isinstance(other, Polynomial):
            return self.scale(Fraction(other))
        a, b = self._terms, other._terms
        if not a or not b:
            return Polynomial._raw({})
        if len(a) == 1 and ONE_MONO in a:
            return other.scale(a[ONE_MONO])
        if len(b) == 1 and ONE_MONO in b:
            return self.scale(b[ONE_MONO])
        out: dict = {}
        for ma, ca in a.items():
            for mb, cb in b.items():
                m = _mono_mul(ma, mb)
                s = out.get(m, 0) + ca * cb
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return Polynomial._raw(out)

    def __pow__(self, k: int) -> "Polynomial":
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = Polynomial.constant(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self.is_constant() and self.constant_value() == other
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def divide_exact(self, d: "Polynomial") -> "Polynomial | None":
        """Quotient when ``d`` divides ``self`` exactly, else None."""
        if not d._terms:
            raise ZeroDenominatorError("division by the zero polynomial")
        if not self._terms:
            return self
        if d.is_constant():
            return self.scale(1 / d.constant_value())
        if self.degree() < d.degree():
            return None
        for x in d.variables():
            if self.degree_in(x) < d.degree_in(x):
                return None
        lm_d, lc_d = d.leading()
        rem = dict(self._terms)
        quot: dict = {}
        while rem:
            lm_r = max(rem, key=_order_key)
            m = _mono_div(lm_r, lm_d)
            if m is None:
                return None
            c = rem[lm_r] / lc_d
            quot[m] = c
            for md, cd in d._terms.items():
                mm = _mono_mul(m, md)
                s = rem.get(mm, 0) - c * cd
                if s:
                    rem[mm] = s
                else:
                    rem.pop(mm, None)
        return Polynomial._raw(quot)

    # -- calculus and evaluation --
    def diff(self, x: Var) -> "Polynomial":
        out: dict = {}
        for m, c in self._terms.items():
            for i, (y, e) in enumerate(m):
                if y == x:
                    nm = m[:i] + (((y, e - 1),) if e > 1 else ()) + m[i + 1:]
                    out[nm] = out.get(nm, 0) + c * e
                    break
        return Polynomial._raw({m: c for m, c in out.items() if c})

    def coefficients_in(self, x: Var) -> dict[int, "Polynomial"]:
        """Write self = sum_k c_k * x^k; returns {k: c_k} with c_k free of x."""
        out: dict[int, dict] = {}
        for m, c in self._terms.items():
            k = 0
            rest = m
            for i, (y, e) in enumerate(m):
                if y == x:
                    k = e
                    rest = m[:i] + m[i + 1:]
                    break
            out.setdefault(k, {})[rest] = c
        return {k: Polynomial._raw(t) for k, t in out.items()}

    def split(self, xs: Iterable[Var]) -> dict[Monomial, "Polynomial"]:
        """Group by monomials in ``xs``; values are polynomials free of ``xs``."""
        xs = frozenset(xs)
        out: dict[Monomial, dict] = {}
        for m, c in self._terms.items():
            inner = tuple(t for t in m if t[0] in xs)
            outer = tuple(t for t in m if t[0] not in xs)
            out.setdefault(inner, {})[outer] = c
        return {k: Polynomial._raw(t) for k, t in out.items()}

    def evaluate(self, point: Mapping[Var, Fraction]) -> Fraction:
        total = Fraction(0)
        for m, c in self._terms.items():
            t = c
            for x, e in m:
                try:
                    t *= point[x] ** e
                except KeyError:
                    raise ValueError(f"no value bound for variable {x}") from None
            total += t
        return total

    def evaluate_mod(self, point: Mapping[Var, int], prime: int) -> int:
        total = 0
        for m, c in self._terms.items():
            t = c.numerator * pow(c.denominator, -1, prime)
            for x, e in m:
                t = t * pow(point[x], e, prime)
            total = (total + t) % prime
        return total

    def substitute(self, bindings: Mapping[Var, "Polynomial"]) -> "Polynomial":
        if not bindings or not (self.variables() & bindings.keys()):
            return self
        cache: dict = {}
        total = Polynomial._raw({})
        for m, c in self._terms.items():
            keep = []
            term = Polynomial.constant(c)
            for x, e in m:
                if x in bindings:
                    key = (x, e)
                    if key not in cache:
                        cache[key] = bindings[x] ** e
                    term = term * cache[key]
                else:
                    keep.append((x, e))
            if keep:
                term = term * Polynomial._raw({tuple(keep): Fraction(1)})
            total = total + term
        return total

    def integer_content(self) -> tuple[int, int]:
        """(lcm of coefficient denominators, gcd of scaled numerators)."""
        den = 1
        for c in self._terms.values():
            den = den * c.denominator // math.gcd(den, c.denominator)
        g = 0
        for c in self._terms.values():
            g = math.gcd(g, (c * den).numerator)
        return den, g

    def monomial_content(self) -> Monomial:
        """Largest monomial dividing every term."""
        it = iter(self._terms)
        try:
            first = dict(next(it))
        except StopIteration:
            return ONE_MONO
        for m in it:
            d = dict(m)
            for x in list(first):
                e = min(first[x], d.get(x, 0))
                if e:
                    first[x] = e
                else:
                    del first[x]
            if not first:
                break
        return tuple(sorted(first.items(), key=lambda t: t[0].key))

    def __str__(self):
        if not self._terms:
            return "0"
        out = []
        for i, (m, c) in enumerate(self.sorted_terms()):
            neg = c < 0
            a = -c if neg else c
            if not m:
                body = str(a)
            elif a == 1:
                body = _mono_str(m)
            else:
                body = f"{a}*{_mono_str(m)}"
            if i == 0:
                out.append(("-" if neg else "") + body)
            else:
                out.append((" - " if neg else " + ") + body)
        return "".join(out)

    def __repr__(self):
        return f"Polynomial({self})"


_ZERO = Polynomial._raw({})
_ONE = Polynomial.constant(1)


# --------------------------------------------------------------------------
# rational expressions

_HASH_PRIME = (1 << 61) - 1


def _hash_point(x: Var) -> int:
    return (zlib.crc32(x.name.encode()) * 2654435761 + 12345) % _HASH_PRIME


def _normalize(num: Polynomial, den: Polynomial) -> tuple[Polynomial, Polynomial]:
    if den.is_zero():
        raise ZeroDenominatorError("denominator is identically zero")
    if num.is_zero():
        return _ZERO, _ONE
    if den.is_constant():
        return num.scale(1 / den.constant_value()), _ONE
    mc = num.monomial_content()
    if mc:
        md = den.monomial_content()
        common = {}
        dd = dict(md)
        for x, e in mc:
            k = min(e, dd.get(x, 0))
            if k:
                common[x] = k
        if common:
            cm = tuple(sorted(common.items(), key=lambda t: t[0].key))
            num = Polynomial._raw({_mono_div(m, cm): c for m, c in num.terms.items()})
            den = Polynomial._raw({_mono_div(m, cm): c for m, c in den.terms.items()})
            if den.is_constant():
                return num.scale(1 / den.constant_value()), _ONE
    q = num.divide_exact(den)
    if q is not None:
        return q, _ONE
    q = den.divide_exact(num)
    if q is not None:
        num, den = _ONE, q
        if den.is_constant():
            return num.scale(1 / den.constant_value()), _ONE
    # integer-primitive pair with positive leading denominator coefficient
    dn, gn = num.integer_content()
    dd, gd = den.integer_content()
    scale_den = dn * dd // math.gcd(dn, dd)
    g = math.gcd((Fraction(gn, dn) * scale_den).numerator, (Fraction(gd, dd) * scale_den).numerator)
    factor = Fraction(scale_den, g)
    if den.leading()[1] < 0:
        factor = -factor
    return num.scale(factor), den.scale(factor)


class RationalExpr:
    """Exact quotient ``num / den`` of polynomials.

    Values are immutable and normalized on construction. ``==`` compares by
    cross-multiplication, so it is exact even when two representations of the
    same function differ.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Polynomial | Number = 0, den: Polynomial | Number = 1):
        if not isinstance(num, Polynomial):
            num = Polynomial.constant(Fraction(num))
        if not isinstance(den, Polynomial):
            den = Polynomial.constant(Fraction(den))
        self.num, self.den = _normalize(num, den)
        self._hash = None

    @classmethod
    def _raw(cls, num: Polynomial, den: Polynomial) -> "RationalExpr":
        e = cls.__new__(cls)
        e.num, e.den, e._hash = num, den, None
        return e

    @classmethod
    def var(cls, x: Var | str) -> "RationalExpr":
        return cls._raw(Polynomial.variable(x), _ONE)

    @classmethod
    def const(cls, c: Number) -> "RationalExpr":
        return cls._raw(Polynomial.constant(Fraction(c)), _ONE)

    # -- predicates --
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self.num.constant_value() / self.den.constant_value()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def variables(self) -> frozenset:
        return self.num.variables() | self.den.variables()

    def degree_in(self, x: Var) -> int:
        return self.num.degree_in(x)

    def affine_in(self, x: Var):
        """(A, B) with self == A*x + B and A, B free of x, or None."""
        if x in self.den.variables() or self.num.degree_in(x) != 1:
            return None
        cs = self.num.coefficients_in(x)
        a = RationalExpr(cs[1], self.den)
        b = RationalExpr(cs.get(0, _ZERO), self.den)
        return a, b

    # -- arithmetic --
    @staticmethod
    def _coerce(other) -> "RationalExpr | None":
        if isinstance(other, RationalExpr):
            return other
        if isinstance(other, (int, Fraction)) or isinstance(other, Rational):
            return RationalExpr.const(Fraction(other))
        if isinstance(other, Polynomial):
            return RationalExpr._raw(other, _ONE)
        if isinstance(other, Var):
            return RationalExpr.var(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.num.is_zero():
            return self
        if self.num.is_zero():
            return o
        a, b, c, d = self.num, self.den, o.num, o.den
        if b == d:
            return RationalExpr(a + c, b)
        if b.is_constant() and d.is_constant():
            return RationalExpr(a.scale(1 / b.constant_value()) + c.scale(1 / d.constant_value()))
        k = d.divide_exact(b)
        if k is not None:
            return RationalExpr(a * k + c, d)
        k = b.divide_exact(d)
        if k is not None:
            return RationalExpr(a + c * k, b)
        return RationalExpr(a * d + c * b, b * d)

    __radd__ = __add__

    def __neg__(self):
        return RationalExpr._raw(-self.num, self.den)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.num.is_zero() or o.num.is_zero():
            return ZERO
        a, b, c, d = self.num, self.den, o.num, o.den
        if b.is_constant() and d.is_constant():
            return RationalExpr._raw(
                (a * c).scale(1 / (b.constant_value() * d.constant_value())), _ONE)
        if not d.is_constant():
            k = a.divide_exact(d)
            if k is not None:
                a, d = k, _ONE
        if not b.is_constant():
            k = c.divide_exact(b)
            if k is not None:
                c, b = k, _ONE
        return RationalExpr(a * c, b * d)

    __rmul__ = __mul__

    def inverse(self) -> "RationalExpr":
        if self.num.is_zero():
            raise ZeroDenominatorError("inverse of zero")
        return RationalExpr(self.den, self.num)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("only integer powers are supported")
        if k < 0:
            return self.inverse() ** (-k)
        if self.den.is_constant():
            return RationalExpr._raw(
                self.num ** k if self.den == 1 else (self.num ** k).scale(1 / self.den.constant_value() ** k),
                _ONE)
        return RationalExpr._raw(self.num ** k, self.den ** k)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.den == o.den:
            return self.num == o.num
        return (self.num * o.den - o.num * self.den).is_zero()

    def __hash__(self):
        if self._hash is None:
            point = {x: _hash_point(x) for x in self.variables()}
            d = self.den.evaluate_mod(point, _HASH_PRIME)
            if d == 0:
                self._hash = 0
            else:
                self._hash = hash(self.num.evaluate_mod(point, _HASH_PRIME) * pow(d, -1, _HASH_PRIME)
                                  % _HASH_PRIME)
        return self._hash

    # -- calculus, substitution, evaluation --
    def diff(self, x: Var | str) -> "RationalExpr":
        x = Var(x) if isinstance(x, str) else x
        dn = self.num.diff(x)
        if self.den.is_constant():
            return RationalExpr._raw(dn, _ONE)
        dd = self.den.diff(x)
        if dd.is_zero():
            return RationalExpr(dn, self.den)
        return RationalExpr(dn * self.den - self.num * dd, self.den * self.den)

    def substitute(self, bindings: Mapping) -> "RationalExpr":
        b = {}
        for k, val in bindings.items():
            key = Var(k) if isinstance(k, str) else k
            b[key] = self._coerce(val)
        present = self.variables() & b.keys()
        if not present:
            return self
        b = {k: b[k] for k in present}
        if all(val.den == 1 for val in b.values()):
            pb = {k: val.num for k, val in b.items()}
            num = self.num.substitute(pb)
            den = self.den.substitute(pb)
            if den.is_zero():
                raise ZeroDenominatorError(f"substitution makes the denominator of {self} vanish")
            return RationalExpr(num, den)
        num, den = _subst_rational(self.num, self.den, b)
        if den.is_zero():
            raise ZeroDenominatorError(f"substitution makes the denominator of {self} vanish")
        return RationalExpr(num, den)

    def evaluate(self, point: Mapping) -> Fraction:
        pt = {(Var(k) if isinstance(k, str) else k): Fraction(v) for k, v in point.items()}
        d = self.den.evaluate(pt)
        if d == 0:
            raise ZeroDenominatorError(f"denominator of {self} vanishes at {point}")
        return self.num.evaluate(pt) / d

    def __str__(self):
        if self.den == 1:
            return str(self.num)
        if self.num.is_constant():
            return f"{self.num}/({self.den})"
        return f"({self.num})/({self.den})"

    def __repr__(self):
        return f"RationalExpr({self})"


def _subst_homogeneous(p: Polynomial, nums: Mapping[Var, Polynomial], D: Polynomial):
    """p with x -> nums[x]/D, returned as (P, d) meaning P / D^d."""
    d = 0
    for m in p.terms:
        d = max(d, sum(e for x, e in m if x in nums))
    powers: dict = {}

    def power(key, base, e):
        if (key, e) not in powers:
            powers[(key, e)] = base ** e
        return powers[(key, e)]

    total = _ZERO
    for m, c in p.terms.items():
        term = Polynomial._raw({tuple((x, e) for x, e in m if x not in nums): c})
        k = 0
        for x, e in m:
            if x in nums:
                term = term * power(x, nums[x], e)
                k += e
        if d - k:
            term = term * power(None, D, d - k)
        total = total + term
    return total, d


def _subst_rational(num: Polynomial, den: Polynomial, b: Mapping[Var, "RationalExpr"]):
    """(num/den) with rational bindings, kept over one common denominator."""
    D = lcm_approx(v.den for v in b.values())
    nums = {x: v.num * D.divide_exact(v.den) for x, v in b.items()}
    P, dp = _subst_homogeneous(num, nums, D)
    Q, dq = _subst_homogeneous(den, nums, D)
    if Q.is_zero():
        return P, Q
    if dq > dp:
        P = P * D ** (dq - dp)
    elif dp > dq:
        Q = Q * D ** (dp - dq)
    return P, Q


ZERO = RationalExpr._raw(_ZERO, _ONE)
ONE = RationalExpr._raw(_ONE, _ONE)

Scalar = Union[RationalExpr, int, Fraction]


def as_expr(x) -> RationalExpr:
    e = RationalExpr._coerce(x)
    if e is None:
        raise TypeError(f"cannot convert {x!r} to an expression")
    return e


# --------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<id>[a-zA-Z][a-zA-Z0-9]*)|(?P<op>[-+*/^()]))")


class _Parser:
    def __init__(self, text: str, table: VarTable | None):
        self.text = text
        self.table = table
        self.tokens = self._tokenize(text)
        self.i = 0

    def _where(self, offset: int) -> tuple[int, int]:
        line = self.text.count("\n", 0, offset) + 1
        col = offset - (self.text.rfind("\n", 0, offset) + 1) + 1
        return line, col

    def error(self, msg: str, offset: int | None = None):
        if offset is None:
            offset = self.tokens[self.i][2] if self.i < len(self.tokens) else len(self.text)
        line, col = self._where(offset)
        return ParseError(msg, line, col)

    def _tokenize(self, text):
        out = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m:
                start = pos
                while start < len(text) and text[start].isspace():
                    start += 1
                line, col = self._where(start)
                raise ParseError(f"unexpected character {text[start]!r}", line, col)
            kind = m.lastgroup
            out.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        return out

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, len(self.text))

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, off = self.peek()
        if val != value:
            raise self.error(f"expected {value!r}" + (f", found {val!r}" if val else ", found end of input"))
        self.i += 1

    def parse(self) -> RationalExpr:
        if not self.tokens:
            raise self.error("empty expression", 0)
        e = self.expr()
        if self.i < len(self.tokens):
            raise self.error(f"unexpected token {self.peek()[1]!r}")
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            t = self.term()
            e = e + t if op == "+" else e - t
        return e

    def term(self):
        e = self.unary()
        while self.peek()[1] in ("*", "/"):
            op, off = self.take()[1::]
            if op == "*":
                e = e * self.unary()
            else:
                rhs_off = self.peek()[2]
                rhs = self.unary()
                if rhs.is_zero():
                    raise self.error("division by zero", rhs_off)
                e = e / rhs
        return e

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return -self.unary()
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.factor()

    def factor(self):
        base = self.base()
        if self.peek()[1] == "^":
            self.take()
            off = self.peek()[2]
            k = self.exponent()
            if k < 0 and base.is_zero():
                raise self.error("division by zero", off)
            if abs(k) > 1000:
                raise self.error("exponent too large", off)
            return base ** k
        return base

    def exponent(self) -> int:
        kind, val, off = self.peek()
        sign = 1
        if val == "-":
            self.take()
            sign = -1
            kind, val, off = self.peek()
        if kind == "num":
            self.take()
            return sign * int(val)
        if val == "(":
            self.take()
            inner = self.expr()
            self.expect(")")
            if inner.is_constant() and inner.constant().denominator == 1:
                return sign * int(inner.constant())
            raise self.error("non-integer exponent", off)
        raise self.error("non-integer exponent", off)

    def base(self):
        kind, val, off = self.peek()
        if kind == "num":
            self.take()
            return RationalExpr.const(int(val))
        if kind == "id":
            self.take()
            if self.table is not None and val not in self.table:
                raise self.error(f"unknown identifier {val!r}", off)
            return RationalExpr.var(val)
        if val == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        if val is None:
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected token {val!r}")


def parse(text: str, vars: VarTable | None = None) -> RationalExpr:
    """Parse ``text`` into a canonical expression.

    With a ``vars`` table, identifiers outside the table are rejected.
    """
    try:
        return _Parser(text, vars).parse()
    except ZeroDenominatorError as exc:
        raise ParseError(f"division by zero: {exc}") from exc


def differentiate(e: RationalExpr, x: Var | str) -> RationalExpr:
    return as_expr(e).diff(x)


def substitute(e: RationalExpr, bindings: Mapping) -> RationalExpr:
    return as_expr(e).substitute(bindings)


def evaluate(e: RationalExpr, point: Mapping) -> Fraction:
    return as_expr(e).evaluate(point)


def gradient(e: RationalExpr, xs: Iterable[Var]) -> list[RationalExpr]:
    return [e.diff(x) for x in xs]


def numerator(e: RationalExpr) -> RationalExpr:
    return RationalExpr._raw(e.num, _ONE)


def normalize_constraint(e: RationalExpr) -> RationalExpr:
    """Numerator of ``e``, integer-primitive, leading coefficient positive.

    Two constraints with the same zero set away from poles normalize alike up
    to polynomial factors; this fixes the sign/scale convention for reports.
    """
    num = e.num
    if num.is_zero():
        return ZERO
    dn, g = num.integer_content()
    factor = Fraction(dn, g)
    if num.leading()[1] < 0:
        factor = -factor
    return RationalExpr._raw(num.scale(factor), _ONE)


def lcm_approx(polys: Iterable[Polynomial]) -> Polynomial:
    """A common multiple, using exact division to avoid obvious repeats."""
    acc = _ONE
    for d in polys:
        if d.is_constant():
            continue
        if acc.divide_exact(d) is not None:
            continue
        if d.divide_exact(acc) is not None:
            acc = d
            continue
        acc = acc * d
    return acc
