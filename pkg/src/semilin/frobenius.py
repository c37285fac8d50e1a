"""k-feasibility sets, their generating functions, and Frobenius numbers.

A vector y is k-feasible for an integer matrix A when it has at least k
distinct representations y = A x with x a nonnegative integer vector.  The
set is Presburger-definable; its GF comes from the formula pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from .errors import NotPointedError
from .exactmath import hnf, mat, transpose
from .genfunc import ShortGF, _positive_functional
from .polyhedra import integer_points, is_bounded, recession_cone
from .presburger import And, Atom, Formula, Or, Quant, atom_le, _atom_sym, eliminate, gf_formula


@dataclass(frozen=True)
class KFeasInstance:
    matrix: tuple  # d x n integer matrix
    k: int

    def __post_init__(self):
        m = mat(self.matrix)
        object.__setattr__(self, "matrix", m)
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if not m or not m[0]:
            raise ValueError("matrix must be nonempty")

    @property
    def d(self) -> int:
        return len(self.matrix)

    @property
    def n(self) -> int:
        return len(self.matrix[0])


def sigma_formula(inst: KFeasInstance) -> Formula:
    """Formula with free y in Z^d: y = A x_j for k pairwise-distinct x_j >= 0."""
    d, n, k = inst.d, inst.n, inst.k
    yvars = [f"y{i+1}" for i in range(d)]
    xvars = [[f"x{j+1}_{t+1}" for t in range(n)] for j in range(k)]
    conjuncts = []
    for j in range(k):
        for i in range(d):
            coeffs = {xvars[j][t]: inst.matrix[i][t] for t in range(n)}
            coeffs[yvars[i]] = -1
            conjuncts.append(_atom_sym("eq", coeffs, 0))
        for t in range(n):
            conjuncts.append(atom_le({xvars[j][t]: -1}, 0))
    for j1 in range(k):
        for j2 in range(j1 + 1, k):
            options = []
            for t in range(n):
                options.append(atom_le({xvars[j1][t]: 1, xvars[j2][t]: -1}, -1))
                options.append(atom_le({xvars[j1][t]: -1, xvars[j2][t]: 1}, -1))
            conjuncts.append(Or(tuple(options)))
    body = And(tuple(conjuncts)) if len(conjuncts) > 1 else conjuncts[0]
    root = body
    for j in range(k - 1, -1, -1):
        root = Quant("E", tuple(xvars[j]), root)
    # touch the free variables in order so the free vector is y1..yd
    return Formula(root, tuple(yvars))


def sigma_pointed(inst: KFeasInstance) -> bool:
    """True iff the columns of A span a pointed cone."""
    cols = [c for c in transpose(inst.matrix) if any(c)]
    if not cols:
        return True
    return _positive_functional(sorted(set(cols))) is not None


def sigma_gf(inst: KFeasInstance) -> ShortGF:
    """Short GF of the k-feasible set."""
    if not sigma_pointed(inst):
        raise NotPointedError(
            "non-pointed instance: matrix columns do not span a pointed cone")
    return gf_formula(sigma_formula(inst))


def reduce_dimension(a_matrix):
    """Unimodular U with U·A nonzero only in the first n rows; returns
    (B, U) with B the first n rows of U·A."""
    a_matrix = mat(a_matrix)
    d = len(a_matrix)
    n = len(a_matrix[0]) if a_matrix else 0
    h, u_cols = hnf(mat(transpose(a_matrix)))
    u = mat(transpose(u_cols))
    ua = mat(transpose(h))
    b = ua[:n]
    for i in range(n, d):
        if any(ua[i]):
            raise AssertionError("reduction left a nonzero late row")
    return b, u


def frobenius_number(a) -> int:
    """Largest integer not representable as a nonnegative combination of a.

    Requires gcd(a) = 1 so the complement of the semigroup is finite; by
    convention the answer is -1 when every nonnegative integer (including 0
    upward) is representable.  The finite complement is read off the bounded
    pieces of the semilinear decomposition of the non-representable set.
    """
    a = [int(x) for x in a]
    if not a or any(x <= 0 for x in a):
        raise ValueError("generators must be positive")
    g = 0
    for x in a:
        g = gcd(g, x)
    if g != 1:
        raise ValueError("infinite complement: gcd of generators exceeds 1")
    inst = KFeasInstance(mat([a]), 1)
    semigroup = eliminate(sigma_formula(inst))
    from .semilinear import complement as _complement

    outside = _complement(semigroup)
    best = -1
    for piece in outside.pieces:
        rc = recession_cone(piece.poly)
        if not is_bounded(piece.poly):
            # the complement contains all negatives; only downward-unbounded
            # pieces are consistent with gcd 1
            from .polyhedra import feasible, ineq

            up = rc.with_rows([ineq((-1,), -1)])
            if feasible(up):
                raise AssertionError("semigroup complement is unbounded above")
            continue
        for point in integer_points(piece.poly):
            if piece.pattern.member(point):
                best = max(best, point[0])
    return best
