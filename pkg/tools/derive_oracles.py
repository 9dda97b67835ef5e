"""Re-derive the fixture values with sympy, independently of singsys.

Run once; the printed values are frozen into tests/test_fixtures.py.
"""
import sympy as sp

q1, q2, v1, v2, p1, p2, lam = sp.symbols("q1 q2 v1 v2 p1 p2 lam")
Q, V, P = [q1, q2], [v1, v2], [p1, p2]

FIXTURES = {
    "EX-A": sp.Rational(1, 2) * (v1 - v2) ** 2,
    "EX-B": sp.Rational(1, 2) * v1 ** 2 + q1 * v2,
    "EX-C": sp.Rational(1, 2) * (v1 - q2) ** 2,
    "EX-R": sp.Rational(1, 2) * (v1 ** 2 + v2 ** 2) - q1 ** 2,
}


def pb(f, g):
    return sp.expand(sum(sp.diff(f, Q[i]) * sp.diff(g, P[i]) - sp.diff(f, P[i]) * sp.diff(g, Q[i])
                         for i in range(2)))


def weakly_zero(f, cons, vars_):
    if not cons:
        return sp.simplify(f) == 0
    sol = sp.solve(cons, vars_, dict=True)
    return all(sp.simplify(f.subs(s)) == 0 for s in sol)


for name, L in FIXTURES.items():
    print("==", name)
    W = sp.hessian(L, V)
    a = [sp.expand(sp.diff(L, v).subs({v1: 0, v2: 0})) for v in V]
    E = sp.expand(sum(v * sp.diff(L, v) for v in V) - L)
    alpha = [sp.expand(sp.diff(L, Q[A]) - sum(V[B] * sp.diff(L, V[A], Q[B]) for B in range(2)))
             for A in range(2)]
    ker = W.nullspace()
    print("W", W.tolist(), "a", a, "E_L", E, "alpha", alpha, "kerW", [list(k) for k in ker])
    mom = [sp.diff(L, v) for v in V]
    prim = [sp.expand(sum(k[i] * (P[i] - a[i]) for i in range(2))) for k in ker]
    # h0: solve p = dL/dv for some velocities, substitute into E_L
    sol = sp.solve([P[i] - mom[i] for i in range(2)], V, dict=True)
    if sol:
        h0 = sp.expand(E.subs(sol[0]))
    else:
        # singular: only the pivot equation is solvable
        free = [v for v in V if any(v in sp.diff(m, vv).free_symbols or sp.diff(m, vv) != 0
                                    for m in mom for vv in [v])]
        s = sp.solve([P[0] - mom[0]], [v1], dict=True)
        h0 = sp.expand(E.subs(s[0]).subs({v2: 0}))
    print("primaries", prim, "h0", h0)

    # Dirac algorithm, by hand-rolled loop
    H = h0 + sum(sp.Symbol(f"lam{i + 1}") * c for i, c in enumerate(prim))
    lams = [sp.Symbol(f"lam{i + 1}") for i in range(len(prim))]
    gens = [prim] if prim else []
    fixed = {}
    while gens:
        allc = [c for g in gens for c in g]
        new = []
        for c in allc:
            dot_ = sp.expand(pb(c, H).subs(fixed))
            if weakly_zero(dot_, allc, [p1, p2] if True else None):
                continue
            if any(l in dot_.free_symbols for l in lams):
                l = next(l for l in lams if l in dot_.free_symbols)
                fixed[l] = sp.solve(dot_, l)[0]
                continue
            new.append(dot_)
        if not new:
            break
        gens.append(new)
    print("dirac gens", gens, "multipliers", fixed)
    finals = [c for g in gens for c in g]
    print("brackets", {(str(a_), str(b)): pb(a_, b) for a_ in finals for b in finals})

    # K on constraints
    kq, kp = V, [sp.diff(L, q) for q in Q]
    fl = dict(zip(P, mom))
    for c in finals:
        img = sp.expand(sum(kq[i] * sp.diff(c, Q[i]).subs(fl) + kp[i] * sp.diff(c, P[i]).subs(fl)
                            for i in range(2)))
        print("K", c, "->", img)


# Lagrangian side with the SODE ansatz: Gamma = v d/dq + (a_p + lam*gamma) d/dv
print("== Lagrangian S-chains")
for name, L in FIXTURES.items():
    W = sp.hessian(L, V)
    alpha = sp.Matrix([sp.expand(sp.diff(L, Q[A]) - sum(V[B] * sp.diff(L, V[A], Q[B])
                                                         for B in range(2))) for A in range(2)])
    ker = W.nullspace()
    if not ker:
        print(name, "regular: no constraints")
        continue
    g = ker[0]
    acc = sp.Matrix(sp.symbols("a1 a2"))
    sol = sp.solve(list(W * acc - alpha), list(acc), dict=True)
    acc_p = acc.subs(sol[0]).subs({s: 0 for s in acc}) if sol else None
    gens, fixed = [], None
    first = sp.expand((g.T * alpha)[0])
    gens = [[first]] if first != 0 else []
    while gens:
        allc = [c for gg in gens for c in gg]
        new = []
        for c in allc:
            dc = sp.expand(sum(V[i] * sp.diff(c, Q[i]) + (acc_p[i] + lam * g[i]) * sp.diff(c, V[i])
                               for i in range(2)))
            if fixed is not None:
                dc = sp.expand(dc.subs(lam, fixed))
            if weakly_zero(dc, allc, [v1, v2]):
                continue
            if lam in dc.free_symbols:
                fixed = sp.solve(dc, lam)[0]
                continue
            new.append(dc)
        if not new:
            break
        gens.append(new)
    print(name, "S-chain", gens, "lam", fixed)
