import pytest

from singsys import InconsistentDynamics, InputError, PresymplecticSystem, RfMatrix, pca_run
from singsys.mechanics import contract
from singsys.surface import Surface

from conftest import E


def build(variables, omega, alpha):
    return PresymplecticSystem.build(variables, [[E(str(x)) for x in r] for r in omega],
                                     [E(str(a)) for a in alpha])


def test_symplectic_plane_has_no_constraints():
    sys_ = build(["x", "y"], [[0, 1], [-1, 0]], ["x", "y"])   # alpha = dH, H = (x^2 + y^2)/2
    res = pca_run(sys_)
    assert res.stabilized and res.final_constraints == [] and res.gauge_basis == []
    assert all(c.is_zero() for c in
               [a - b for a, b in zip(contract(res.particular_solution, sys_.omega), sys_.alpha)])


def test_inconsistent_kernel_direction():
    sys_ = build(["x", "y", "z"], [[0, 1, 0], [-1, 0, 0], [0, 0, 0]], [0, 0, 1])
    with pytest.raises(InconsistentDynamics):
        pca_run(sys_)


def test_canonical_with_exact_alpha_has_no_constraints():
    sys_ = PresymplecticSystem.build(["q1", "q2", "p1", "p2"], RfMatrix.canonical(2),
                                     [E("0"), E("0"), E("p1"), E("0")])
    assert pca_run(sys_).final_constraints == []


def test_validation():
    with pytest.raises(InputError, match="antisymmetric"):
        build(["x", "y"], [[0, 1], [1, 0]], [0, 0])
    with pytest.raises(InputError, match="alpha is not closed"):
        build(["x", "y"], [[0, 1], [-1, 0]], ["y", "0"])
    with pytest.raises(InputError, match="omega is not closed"):
        build(["x", "y", "z"], [[0, "z", 0], ["-z", 0, 0], [0, 0, 0]], [0, 0, 0])


def test_secondary_constraints_and_solution():
    # omega = dx^dy on (x, y, z) with alpha = dH, H = z^2/2 + x: generation 1 is z
    sys_ = build(["x", "y", "z"], [[0, 1, 0], [-1, 0, 0], [0, 0, 0]], [1, 0, "z"])
    res = pca_run(sys_)
    assert res.stabilized
    assert [[str(c) for c in g] for g in res.generations] == [["z"]]
    surf = Surface(res.final_constraints)
    residual = [a - b for a, b in zip(contract(res.particular_solution, sys_.omega), sys_.alpha)]
    assert all(surf.vanishes(r) for r in residual)
    for k in res.gauge_basis:
        assert all(surf.vanishes(c) for c in contract(k, sys_.omega))


def _three_generation_chain():
    # omega = dx^dy on (x, y, u, w), H = u*y + x^2/2: y, then x, then u
    return build(["x", "y", "u", "w"],
                 [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
                 ["x", "u", "y", 0])


def test_three_generations():
    res = pca_run(_three_generation_chain())
    assert res.stabilized
    assert [[str(c) for c in g] for g in res.generations] == [["y"], ["x"], ["u"]]
    assert len(res.gauge_basis) == 1


def test_unstabilized_when_capped():
    res = pca_run(_three_generation_chain(), max_generations=2)
    assert not res.stabilized
    assert len(res.generations) == 2
    assert res.particular_solution is None
