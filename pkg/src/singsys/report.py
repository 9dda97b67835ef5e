"""Report assembly for the command line.

A report is a plain nested ``dict`` of strings, numbers, booleans and lists,
built in a fixed order; the JSON and text renderings both come from it, so
they always carry the same content.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .canonical import (TransformationPair, check_compatible_ranks, find_valence,
                        kernel_invariance, valence_check)
from .constraints import (ConstraintChain, classify, diagram_containment, dirac_run,
                          lagrangian_run, projectability_report)
from .errors import (InconsistentDynamics, IndeterminateError, InputError, NotQuadraticError,
                     ParseError)
from .evolution import build_k, generation_shift_check, verify_k
from .expr import RationalExpr, VarTable, parse
from .legendre import NotAlmostRegularError, legendre
from .mechanics import build_system
from .presymplectic import PresymplecticSystem, pca_run
from .problem import Problem
from .ratlinalg import RfMatrix, rank

COMMANDS = ("analyze", "hamiltonian", "lagrangian", "k-check", "canonical-check", "validate")

EXIT_OK, EXIT_INPUT, EXIT_INCONSISTENT, EXIT_INDETERMINATE = 0, 2, 3, 4

CONVENTIONS = {
    "generations": "primary Hamiltonian constraints (defining M0) are generation 1; "
                   "Lagrangian constraints defining S_k or P_k are reported as generation k+1",
    "normal_form": "constraints are shown as integer-primitive numerators with positive "
                   "leading coefficient, so they agree with other conventions up to a nonzero constant",
    "two_forms": "matrices in the ordered chart basis; i(X)w has components sum_i X^i w_ij",
}


def _s(x) -> str:
    return str(x)


def _num(x):
    if isinstance(x, Fraction):
        return str(x)
    return x


def _matrix(M: RfMatrix) -> list:
    return [[_s(e) for e in row] for row in M.rows]


def _constraint(c) -> dict:
    return {"expr": _s(c.expr), "side": c.side, "generation": c.generation,
            "origin": c.origin, "class": c.klass}


def _chain(ch: ConstraintChain) -> dict:
    out = {
        "stabilized": ch.stabilized,
        "generations": [{"generation": g[0].generation, "constraints": [_constraint(c) for c in g]}
                        for g in ch.generations if g],
        "multipliers": {k: _s(v) for k, v in ch.multiplier_resolution.items()},
    }
    if ch.total_hamiltonian is not None:
        out["total_hamiltonian"] = _s(ch.total_hamiltonian)
    return out


@dataclass
class Settings:
    max_generations: int
    trials: int
    seed: int


class _Run:
    """Lazily computed pipeline stages shared by the report sections."""

    def __init__(self, prob: Problem, st: Settings, command: str):
        self.prob = prob
        self.st = st
        self.command = command
        self._cache = {}

    def _get(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def kw(self):
        return {"trials": self.st.trials, "seed": self.st.seed}

    def need_system(self):
        if not self.prob.has_system:
            raise InputError(f"{self.prob.name}: this command needs a [system] section")

    @property
    def L(self) -> RationalExpr:
        self.need_system()
        return self._get("L", self.prob.lagrangian_expr)

    @property
    def system(self):
        return self._get("system", lambda: build_system(self.L, self.prob.dim, check_rank=False))

    @property
    def ld(self):
        return self._get("ld", lambda: legendre(self.system, **self.kw))

    @property
    def ham(self) -> ConstraintChain:
        def run():
            ch = dirac_run(self.ld, max_generations=self.st.max_generations, **self.kw)
            return classify(ch, **self.kw) if ch.stabilized else ch
        return self._get("ham", run)

    @property
    def s_chain(self) -> ConstraintChain:
        return self._get("s", lambda: lagrangian_run(
            self.system, True, max_generations=self.st.max_generations, **self.kw))

    @property
    def p_chain(self) -> ConstraintChain:
        return self._get("p", lambda: lagrangian_run(
            self.system, False, max_generations=self.st.max_generations, **self.kw))

    @property
    def k(self):
        return self._get("k", lambda: build_k(self.system))

    @property
    def psys(self) -> PresymplecticSystem:
        def build():
            block = self.prob.presymplectic
            if block is None:
                raise InputError(f"{self.prob.name}: no [presymplectic] section")
            table = VarTable.chart(block["variables"])
            m = len(block["variables"])
            if len(block["omega"]) != m or any(len(r) != m for r in block["omega"]):
                raise InputError(f"omega must be {m} x {m}")
            omega = [[parse(e, table) for e in row] for row in block["omega"]]
            alpha = [parse(e, table) for e in block["alpha"]]
            return PresymplecticSystem.build(list(table), omega, alpha)
        return self._get("psys", build)

    @property
    def pca(self):
        return self._get("pca", lambda: pca_run(self.psys, self.st.max_generations, **self.kw))


# --------------------------------------------------------------------------
# sections


def _input_section(run: _Run, command: str) -> dict:
    p = run.prob
    out = {"file": p.name, "command": command}
    if p.has_system:
        out["dim"] = p.dim
        out["lagrangian"] = p.lagrangian
    if p.presymplectic is not None:
        out["presymplectic"] = {"variables": list(p.presymplectic["variables"]),
                                "omega": [list(r) for r in p.presymplectic["omega"]],
                                "alpha": list(p.presymplectic["alpha"])}
    if p.transformation is not None:
        t = p.transformation
        out["transformation"] = {"chart": t.chart, "map": list(t.map), "source": t.source,
                                 "target": t.target,
                                 "valence": None if t.valence is None else str(t.valence)}
    out["engine"] = {"max_generations": run.st.max_generations, "trials": run.st.trials,
                     "seed": run.st.seed}
    return out


def _system_section(run: _Run) -> dict:
    s = run.system
    return {
        "lagrangian": _s(s.L),
        "W": _matrix(s.W),
        "a": [_s(e) for e in s.a],
        "V": _s(s.V),
        "energy": _s(s.E_L),
        "alpha": [_s(e) for e in s.alpha],
        "rank_W": s.rank_W,
        "rank_omega_L": s.rank_omegaL,
        "rank_identity_holds": s.rank_identity_holds,
        "regular": s.is_regular,
    }


def _legendre_section(run: _Run) -> dict:
    ld = run.ld
    return {
        "momenta": [_s(e) for e in ld.momentum_exprs],
        "kernel_W": [[_s(e) for e in k] for k in ld.kernel],
        "primary_constraints": [_s(e) for e in ld.primary_constraints],
        "h0": _s(ld.h0),
    }


def _lagrangian_section(run: _Run) -> dict:
    S, P = run.s_chain, run.p_chain
    out = {"with_sode": _chain(S), "without_sode": _chain(P)}
    if S.stabilized and P.stabilized:
        out["diagram_containment"] = [
            {"constraint": _s(c.expr), "generation": c.generation, "contained": ok}
            for c, ok in diagram_containment(P, S, **run.kw)]
    return out


def _projectability_section(run: _Run) -> list:
    rows = []
    for e in projectability_report(run.s_chain, run.ld, run.ham, **run.kw):
        rows.append({
            "constraint": _s(e.constraint.expr),
            "generation": e.constraint.generation,
            "origin": e.constraint.origin,
            "fl_projectable": e.representative_projectable,
            "witness": None if e.witness is None else _s(e.witness),
            "representative": None if e.representative is None else _s(e.representative),
            "hamiltonian_matches": [f"{_s(h.expr)} (gen {h.generation})" for h in e.matches],
        })
    return rows


def _k_section(run: _Run) -> dict:
    k = run.k
    v = verify_k(k, run.system, run.ld)
    return {
        "qdot": [_s(e) for e in k.qdot],
        "pdot": [_s(e) for e in k.pdot],
        "structural": v.structural,
        "dynamical": v.dynamical,
        "sode": v.sode,
        "structural_residual": [_s(e) for e in v.structural_residual],
        "dynamical_residual": [_s(e) for e in v.dynamical_residual],
        "sode_residual": [_s(e) for e in v.sode_residual],
    }


def _shift_section(run: _Run) -> dict:
    rep = generation_shift_check(run.k, run.ld, run.ham, run.s_chain, **run.kw)
    rows = []
    for e in rep.entries:
        verdict = "vacuous" if e.zero_image else ("pass" if e.contained else "fail")
        rows.append({
            "source": _s(e.source.expr),
            "source_generation": e.source.generation,
            "source_class": e.source.klass,
            "image": _s(e.image),
            "target_generation": e.target_generation,
            "verdict": verdict,
            "matches": [_s(c.expr) for c in e.matches],
            "combination": None if e.combination is None else [_s(c) for c in e.combination],
            "reverse_contained": e.reverse_contained,
            "class_expected": e.class_expected,
            "class_observed": e.class_observed,
        })
    return {"holds": rep.holds, "entries": rows}


def _presymplectic_section(run: _Run) -> dict:
    sys_, res = run.psys, run.pca
    out = {
        "variables": [x.name for x in sys_.vars],
        "rank_omega": rank(sys_.omega),
        "stabilized": res.stabilized,
        "generations": [{"generation": i + 1, "constraints": [_s(c) for c in g]}
                        for i, g in enumerate(res.generations)],
        "multipliers": {f"lam{i + 1}": ("free" if v is None else _s(v))
                        for i, v in enumerate(res.multipliers)},
    }
    if res.stabilized:
        out["particular_solution"] = [_s(e) for e in res.particular_solution]
        out["gauge_basis"] = [[_s(e) for e in g] for g in res.gauge_basis]
    return out


def _transformation(run: _Run) -> TransformationPair:
    t = run.prob.transformation
    if t is None:
        raise InputError(f"{run.prob.name}: no [transformation] section")
    if t.chart == "hamiltonian":
        n = run.system.n
        table = VarTable(n, momenta=True)
        variables = list(table.q) + list(table.p)
        omega = RfMatrix.canonical(n)
        final = lambda: run.ham.exprs  # noqa: E731
    else:
        sys_ = run.psys
        table = VarTable.chart([x.name for x in sys_.vars])
        variables = list(sys_.vars)
        omega = sys_.omega
        final = lambda: run.pca.final_constraints  # noqa: E731

    def constraints(block):
        if block == "final":
            return list(final())
        if block == "none":
            return []
        return [parse(e, table) for e in block]

    if len(t.map) != len(variables):
        raise InputError(f"the map needs {len(variables)} components, got {len(t.map)}")
    phi = [parse(e, table) for e in t.map]
    return TransformationPair.build(variables, phi, constraints(t.source), constraints(t.target),
                                    omega, omega, "unknown" if t.valence is None else t.valence,
                                    **run.kw)


def _canonical_section(run: _Run) -> dict:
    tp = _transformation(run)
    r1, r2 = check_compatible_ranks(tp)
    val = find_valence(tp)
    out = {
        "variables": [x.name for x in tp.variables],
        "map": [_s(e) for e in tp.phi_M],
        "source_constraints": [_s(e) for e in tp.c1],
        "target_constraints": [_s(e) for e in tp.c2],
        "source_ranks": {"dim_C": r1.dim_C, "rank_omega_C": r1.rank_omega_C,
                         "dim_ker_omega_C": r1.dim_ker_omega_C, "dim_reduced": r1.dim_reduced},
        "target_ranks": {"dim_C": r2.dim_C, "rank_omega_C": r2.rank_omega_C,
                         "dim_ker_omega_C": r2.dim_ker_omega_C, "dim_reduced": r2.dim_reduced},
        "valence": _num(val),
    }
    if not isinstance(tp.valence, str):
        chk = valence_check(tp, tp.valence)
        out["candidate"] = {"valence": str(tp.valence), "holds": chk.holds,
                            "residual": _matrix(chk.residual)}
    if not isinstance(val, str) or val == "any":
        samples = kernel_invariance(tp, samples=10)
        out["kernel_invariance"] = {"samples": len(samples), "holds": all(ok for _, ok in samples)}
    return out


_STAGES = {
    "validate": ("system",),
    "hamiltonian": ("system", "legendre", "hamiltonian"),
    "lagrangian": ("system", "lagrangian"),
    "k-check": ("system", "legendre", "hamiltonian", "lagrangian", "k_operator",
                "generation_shift"),
    "canonical-check": ("canonical",),
    "analyze": ("system", "legendre", "hamiltonian", "lagrangian", "projectability",
                "k_operator", "generation_shift", "presymplectic", "canonical"),
}


def _stage(run: _Run, name: str):
    if name == "system":
        out = {}
        if run.prob.has_system:
            out = _system_section(run)
        if run.prob.presymplectic is not None:
            run.psys  # validate the presymplectic block
        return out or None
    if name == "presymplectic":
        return _presymplectic_section(run) if run.prob.presymplectic is not None else None
    if name == "canonical":
        if run.prob.transformation is None:
            if run.command == "canonical-check":
                raise InputError(f"{run.prob.name}: no [transformation] section")
            return None
        return _canonical_section(run)
    if not run.prob.has_system:
        if run.command == "analyze":
            return None
        run.need_system()
    if name == "legendre":
        return _legendre_section(run)
    if name == "hamiltonian":
        return _chain(run.ham)
    if name == "lagrangian":
        return _lagrangian_section(run)
    if name == "projectability":
        if not (run.ham.stabilized and run.s_chain.stabilized):
            return None
        return _projectability_section(run)
    if name == "k_operator":
        return _k_section(run)
    if name == "generation_shift":
        if not (run.ham.stabilized and run.s_chain.stabilized):
            return None
        return _shift_section(run)
    raise AssertionError(name)


def _unstabilized(run: _Run) -> list[str]:
    names = {"ham": "hamiltonian", "s": "lagrangian (with SODE)", "p": "lagrangian (without SODE)"}
    out = [label for key, label in names.items()
           if key in run._cache and not run._cache[key].stabilized]
    if "pca" in run._cache and not run._cache["pca"].stabilized:
        out.append("presymplectic")
    return out


def build_report(prob: Problem, command: str, settings: Settings) -> tuple[dict, int]:
    """Run ``command`` on ``prob``; returns the report and the exit code."""
    if command not in COMMANDS:
        raise ValueError(f"unknown command {command!r}")
    run = _Run(prob, settings, command)
    report: dict = {"input": _input_section(run, command), "conventions": dict(CONVENTIONS)}
    status, code, message = "ok", EXIT_OK, None
    try:
        for name in _STAGES[command]:
            section = _stage(run, name)
            if section is not None:
                report[name] = section
    except (ParseError, NotQuadraticError, NotAlmostRegularError, InputError) as exc:
        status, code, message = "input-error", EXIT_INPUT, str(exc)
    except InconsistentDynamics as exc:
        status, code, message = "inconsistent", EXIT_INCONSISTENT, str(exc)
    except IndeterminateError as exc:
        status, code, message = "indeterminate", EXIT_INDETERMINATE, str(exc)
    if code == EXIT_OK:
        pending = _unstabilized(run)
        if pending:
            status, code = "unstabilized", EXIT_INDETERMINATE
            message = ("no stabilization within max_generations = "
                       f"{settings.max_generations}: {', '.join(pending)}")
    report["outcome"] = {"status": status, "exit_code": code, "message": message}
    return report, code


# --------------------------------------------------------------------------
# rendering


def to_json(report) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


def _scalar(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    return str(v)


def _is_scalar_list(v) -> bool:
    return isinstance(v, list) and all(not isinstance(x, (dict, list)) for x in v)


def _constraint_line(c: dict) -> str:
    return f"{c['expr']}    [{c['side']}, gen {c['generation']}, {c['origin']}, {c['class']}]"


def _render(value, lines: list, indent: int):
    pad = "  " * indent
    if isinstance(value, dict):
        for k, v in value.items():
            if isinstance(v, dict) and v and "expr" in v and "side" in v:
                lines.append(f"{pad}{k}: {_constraint_line(v)}")
            elif isinstance(v, (dict, list)) and not _is_scalar_list(v):
                if not v:
                    lines.append(f"{pad}{k}: (none)")
                    continue
                lines.append(f"{pad}{k}:")
                _render(v, lines, indent + 1)
            elif isinstance(v, list):
                lines.append(f"{pad}{k}: [{', '.join(_scalar(x) for x in v)}]" if v
                             else f"{pad}{k}: (none)")
            else:
                lines.append(f"{pad}{k}: {_scalar(v)}")
    elif isinstance(value, list):
        for item in value:
            if isinstance(item, dict) and "expr" in item and "side" in item:
                lines.append(f"{pad}- {_constraint_line(item)}")
            elif isinstance(item, dict):
                sub: list = []
                _render(item, sub, indent + 1)
                if sub:
                    sub[0] = f"{pad}- {sub[0].lstrip()}"
                lines.extend(sub)
            elif isinstance(item, list):
                lines.append(f"{pad}- [{', '.join(_scalar(x) for x in item)}]")
            else:
                lines.append(f"{pad}- {_scalar(item)}")
    else:
        lines.append(f"{pad}{_scalar(value)}")


def to_text(report: dict) -> str:
    lines: list[str] = []
    for key, value in report.items():
        lines.append(f"== {key} ==")
        _render(value, lines, 0)
        lines.append("")
    return "\n".join(lines)
