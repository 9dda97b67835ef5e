"""Problem files: a small INI dialect read with :mod:`configparser`.

Grammar (every section optional except that one of [system] or
[presymplectic] must be present)::

    [system]
    dim = 2
    lagrangian = 1/2*v1^2 + q1*v2

    [engine]
    max_generations = 10
    trials = 20
    seed = 0

    [presymplectic]
    variables = x, y, z
    omega = 0, 1, 0; -1, 0, 0; 0, 0, 0     # rows separated by ';'
    alpha = 0, 0, 1

    [transformation]
    chart = hamiltonian                    # or presymplectic
    map = q1, q2, 2*p1, 2*p2               # image of each chart coordinate
    source = final                         # final | none | c1; c2; ...
    target = p2 - 2*q1; p1                 # defaults to the source
    valence = 2                            # optional candidate to check

Comments start with '#' or ';' at the beginning of a line, or with ' #'
inside a value.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import InputError
from .expr import RationalExpr, VarTable, parse

ENGINE_DEFAULTS = {"max_generations": 10, "trials": 20, "seed": 0}
_KNOWN = {
    "system": {"dim", "lagrangian"},
    "engine": set(ENGINE_DEFAULTS),
    "presymplectic": {"variables", "omega", "alpha"},
    "transformation": {"chart", "map", "source", "target", "valence"},
}


@dataclass
class TransformationBlock:
    chart: str
    map: list
    source: str | list        # "final" or a list of constraint strings
    target: str | list
    valence: Fraction | None


@dataclass
class Problem:
    name: str
    dim: int | None = None
    lagrangian: str | None = None
    engine: dict = field(default_factory=lambda: dict(ENGINE_DEFAULTS))
    presymplectic: dict | None = None
    transformation: TransformationBlock | None = None

    @property
    def has_system(self) -> bool:
        return self.lagrangian is not None

    def lagrangian_expr(self) -> RationalExpr:
        return parse(self.lagrangian, VarTable(self.dim))


def _split(text: str, sep: str) -> list[str]:
    return [t.strip() for t in text.split(sep) if t.strip()]


def _int(section, key, value) -> int:
    try:
        return int(value)
    except ValueError:
        raise InputError(f"[{section}] {key} must be an integer, got {value!r}") from None


def _constraint_list(value: str):
    v = value.strip()
    if v in ("final", "none", ""):
        return "none" if v == "" else v
    return _split(v, ";")


def loads(text: str, name: str = "<string>") -> Problem:
    cp = configparser.ConfigParser(inline_comment_prefixes=(" #",), interpolation=None)
    try:
        cp.read_string(text, source=name)
    except configparser.Error as exc:
        raise InputError(f"{name}: {exc}") from None
    for sec in cp.sections():
        if sec not in _KNOWN:
            raise InputError(f"{name}: unknown section [{sec}]")
        extra = set(cp[sec]) - _KNOWN[sec]
        if extra:
            raise InputError(f"{name}: unknown key(s) in [{sec}]: {', '.join(sorted(extra))}")

    prob = Problem(name)
    if cp.has_section("system"):
        s = cp["system"]
        if "dim" not in s or "lagrangian" not in s:
            raise InputError(f"{name}: [system] needs dim and lagrangian")
        prob.dim = _int("system", "dim", s["dim"])
        if prob.dim < 1:
            raise InputError(f"{name}: dim must be positive")
        prob.lagrangian = s["lagrangian"].strip()
    if cp.has_section("engine"):
        for key, val in cp["engine"].items():
            prob.engine[key] = _int("engine", key, val)
    if cp.has_section("presymplectic"):
        s = cp["presymplectic"]
        missing = {"variables", "omega", "alpha"} - set(s)
        if missing:
            raise InputError(f"{name}: [presymplectic] is missing {', '.join(sorted(missing))}")
        variables = _split(s["variables"], ",")
        omega = [_split(row, ",") for row in _split(s["omega"], ";")]
        alpha = _split(s["alpha"], ",")
        prob.presymplectic = {"variables": variables, "omega": omega, "alpha": alpha}
    if cp.has_section("transformation"):
        s = cp["transformation"]
        chart = s.get("chart", "hamiltonian").strip()
        if chart not in ("hamiltonian", "presymplectic"):
            raise InputError(f"{name}: [transformation] chart must be hamiltonian or presymplectic")
        if "map" not in s:
            raise InputError(f"{name}: [transformation] needs a map")
        source = _constraint_list(s.get("source", "final"))
        target = _constraint_list(s["target"]) if "target" in s else source
        valence = None
        if "valence" in s:
            try:
                valence = Fraction(s["valence"].strip())
            except ValueError:
                raise InputError(f"{name}: valence must be a rational number") from None
        prob.transformation = TransformationBlock(chart, _split(s["map"], ","), source, target, valence)
    if not prob.has_system and prob.presymplectic is None:
        raise InputError(f"{name}: needs a [system] or a [presymplectic] section")
    return prob


def load(path) -> Problem:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return loads(text, str(path))


__all__ = ["Problem", "TransformationBlock", "load", "loads", "ENGINE_DEFAULTS"]
