"""Exact symbolic constraint analysis for singular Lagrangian systems.

Velocity-quadratic Lagrangians are analysed on both sides of the Legendre
map: the Dirac constraint chain on T*Q, the Lagrangian chains on TQ with
and without the second-order condition, the evolution operator K relating
them, and canonical transformations between presymplectic systems.
"""
from .canonical import (TransformationPair, compose, find_valence, kernel_invariance,
                        reduced_ranks, valence_check)
from .constraints import (Constraint, ConstraintChain, classify, diagram_containment, dirac_run,
                          lagrangian_run, poisson_bracket, projectability_report, weak_vanishing)
from .errors import (InconsistentDynamics, IndeterminateError, InputError, NotQuadraticError,
                     ParseError, SingsysError, ZeroDenominatorError)
from .evolution import KOperator, apply_k, build_k, generation_shift_check, verify_k
from .expr import Polynomial, RationalExpr, Var, VarTable, differentiate, evaluate, parse, substitute
from .legendre import LegendreData, NotAlmostRegularError, legendre, pullback
from .mechanics import LagrangianSystem, build_system, fl_projectable
from .presymplectic import PresymplecticSystem, pca_run
from .ratlinalg import RfMatrix, nullspace, rank, rref, sample_rank_check, solve

__version__ = "0.1.0"

__all__ = [
    "Polynomial", "RationalExpr", "Var", "VarTable", "parse", "differentiate", "substitute",
    "evaluate", "RfMatrix", "rref", "rank", "nullspace", "solve", "sample_rank_check",
    "LagrangianSystem", "build_system", "fl_projectable", "LegendreData", "legendre", "pullback",
    "NotAlmostRegularError", "PresymplecticSystem", "pca_run", "Constraint", "ConstraintChain",
    "poisson_bracket", "weak_vanishing", "dirac_run", "classify", "lagrangian_run",
    "projectability_report", "diagram_containment", "KOperator", "build_k", "verify_k", "apply_k",
    "generation_shift_check", "TransformationPair", "valence_check", "find_valence",
    "reduced_ranks", "kernel_invariance", "compose", "SingsysError", "ParseError",
    "ZeroDenominatorError", "NotQuadraticError", "InputError", "InconsistentDynamics",
    "IndeterminateError",
]
