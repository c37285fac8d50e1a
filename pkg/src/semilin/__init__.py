"""semilin: exact semilinear sets, their projections, and short rational GFs."""

from .exactmath import Lattice, hnf, lattice_intersect, solve_integer
from .polyhedra import CoPolyhedron, LinIneq, floor, ineq

__all__ = [
    "CoPolyhedron",
    "Lattice",
    "LinIneq",
    "floor",
    "hnf",
    "ineq",
    "lattice_intersect",
    "solve_integer",
]
