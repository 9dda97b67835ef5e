from fractions import Fraction

import pytest

from singsys import InputError
from singsys.problem import load, loads

from conftest import PROBLEMS


def test_fixture_files_load():
    p = load(PROBLEMS / "ex_b.ini")
    assert p.dim == 2 and p.lagrangian == "1/2*v1^2 + q1*v2"
    t = p.transformation
    assert t.chart == "hamiltonian" and t.source == "final"
    assert t.target == ["p2 - 2*q1", "p1"] and t.valence == Fraction(2)
    assert p.engine == {"max_generations": 10, "trials": 20, "seed": 0}


def test_presymplectic_block():
    p = load(PROBLEMS / "inconsistent.ini")
    assert not p.has_system
    assert p.presymplectic["variables"] == ["x", "y", "z"]
    assert p.presymplectic["omega"][1] == ["-1", "0", "0"]


def test_inline_comments_and_defaults():
    p = loads("[system]\ndim = 1   # one degree of freedom\nlagrangian = v1^2\n"
              "[transformation]\nmap = q1, 3*p1\n")
    assert p.dim == 1
    assert p.transformation.source == "final" and p.transformation.target == "final"


@pytest.mark.parametrize("text", [
    "",
    "[system]\ndim = 1\n",
    "[system]\ndim = 0\nlagrangian = v1^2\n",
    "[system]\ndim = 1\nlagrangian = v1^2\ncolour = red\n",
    "[system]\ndim = 1\nlagrangian = v1^2\n[transformation]\nchart = lagrangian\nmap = q1, p1\n",
    "[system]\ndim = 1\nlagrangian = v1^2\n[transformation]\nmap = q1, p1\nvalence = two\n",
    "[presymplectic]\nvariables = x, y\n",
])
def test_malformed(text):
    with pytest.raises(InputError):
        loads(text)
