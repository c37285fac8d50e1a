"""Exact integer and rational linear algebra: HNF, lattices, integer solving.

All arithmetic uses Python's arbitrary-precision ints and fractions.Fraction.
Matrices are tuples of row tuples; vectors are tuples.  Everything is
immutable, so values can be shared freely between workers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import gcd


def vec(entries) -> tuple:
    return tuple(entries)


def mat(rows) -> tuple:
    return tuple(tuple(r) for r in rows)


def identity(n: int) -> tuple:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def zeros(n: int, m: int) -> tuple:
    return tuple(tuple(0 for _ in range(m)) for _ in range(n))


def mat_mul(a, b):
    if not a or not b:
        rows = len(a)
        cols = len(b[0]) if b else 0
        return zeros(rows, cols)
    bt = list(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def mat_vec(a, v):
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def transpose(a):
    return tuple(zip(*a)) if a else ()


def dot(u, v):
    return sum(x * y for x, y in zip(u, v))


def vadd(u, v):
    return tuple(x + y for x, y in zip(u, v))


def vsub(u, v):
    return tuple(x - y for x, y in zip(u, v))


def vscale(c, u):
    return tuple(c * x for x in u)


def vec_gcd(u) -> int:
    g = 0
    for x in u:
        g = gcd(g, abs(x))
    return g


def primitive(u):
    """Divide an integer vector by the gcd of its entries (zero vector unchanged)."""
    g = vec_gcd(u)
    if g <= 1:
        return tuple(u)
    return tuple(x // g for x in u)


def bitlen(x) -> int:
    """Binary length of an integer: bits of |x| plus a sign bit."""
    return abs(int(x)).bit_length() + 1


def phi_vec(u) -> int:
    return sum(bitlen(x) for x in u)


def phi_mat(a) -> int:
    return sum(phi_vec(row) for row in a)


# ---------------------------------------------------------------------------
# Rational elimination helpers (exact, Fraction-based)
# ---------------------------------------------------------------------------

def rational_rank(rows) -> int:
    """Rank of a list of rational row vectors, by exact Gaussian elimination."""
    work = [[Fraction(x) for x in row] for row in rows]
    ncols = len(work[0]) if work else 0
    rank = 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(work)) if work[i][col] != 0), None)
        if piv is None:
            continue
        work[rank], work[piv] = work[piv], work[rank]
        prow = work[rank]
        inv = prow[col]
        for i in range(len(work)):
            if i != rank and work[i][col] != 0:
                f = work[i][col] / inv
                work[i] = [a - f * b for a, b in zip(work[i], prow)]
        rank += 1
    return rank


def solve_rational(a, b):
    """Solve a·x = b exactly over Q.  Returns one solution or None if inconsistent.

    `a` is a sequence of rows, `b` the right-hand side; when the system is
    underdetermined the free variables are set to 0.
    """
    n = len(a)
    m = len(a[0]) if n else 0
    work = [[Fraction(x) for x in row] + [Fraction(b[i])] for i, row in enumerate(a)]
    pivots = []
    rank = 0
    for col in range(m):
        piv = next((i for i in range(rank, n) if work[i][col] != 0), None)
        if piv is None:
            continue
        work[rank], work[piv] = work[piv], work[rank]
        prow = work[rank]
        inv = prow[col]
        for i in range(n):
            if i != rank and work[i][col] != 0:
                f = work[i][col] / inv
                work[i] = [x - f * y for x, y in zip(work[i], prow)]
        pivots.append(col)
        rank += 1
    for i in range(rank, n):
        if work[i][m] != 0:
            return None
    sol = [Fraction(0)] * m
    for r, col in enumerate(pivots):
        sol[col] = work[r][m] / work[r][col]
    return tuple(sol)


def rational_kernel_basis(rows, dim):
    """Basis of {x in Q^dim : row·x = 0 for all rows}, as integer vectors."""
    work = [[Fraction(x) for x in row] for row in rows]
    pivots = []
    rank = 0
    for col in range(dim):
        piv = next((i for i in range(rank, len(work)) if work[i][col] != 0), None)
        if piv is None:
            continue
        work[rank], work[piv] = work[piv], work[rank]
        prow = work[rank]
        for i in range(len(work)):
            if i != rank and work[i][col] != 0:
                f = work[i][col] / prow[col]
                work[i] = [x - f * y for x, y in zip(work[i], prow)]
        pivots.append(col)
        rank += 1
    free = [c for c in range(dim) if c not in pivots]
    basis = []
    for fcol in free:
        v = [Fraction(0)] * dim
        v[fcol] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -work[r][fcol] / work[r][pc]
        basis.append(clear_denominators(v))
    return basis


def clear_denominators(v):
    """Scale a rational vector to a primitive integer vector."""
    lcm = 1
    for x in v:
        f = Fraction(x)
        lcm = lcm * f.denominator // gcd(lcm, f.denominator)
    ints = tuple(int(Fraction(x) * lcm) for x in v)
    return primitive(ints)


# ---------------------------------------------------------------------------
# Hermite normal form (column style)
# ---------------------------------------------------------------------------

def hnf(m):
    """Column Hermite normal form of an integer matrix.

    Returns (H, U) with H = m·U, U unimodular.  H is in column echelon form
    with pivot rows strictly increasing down the columns, positive pivots,
    and entries left of a pivot reduced into [0, pivot).  Zero columns are
    pushed to the end.  This form is canonical for the column span.
    """
    nrows = len(m)
    ncols = len(m[0]) if nrows else 0
    H = [list(row) for row in m]
    U = [list(row) for row in identity(ncols)]

    def col_swap(a, b):
        for i in range(nrows):
            H[i][a], H[i][b] = H[i][b], H[i][a]
        for i in range(ncols):
            U[i][a], U[i][b] = U[i][b], U[i][a]

    def col_axpy(dst, src, q):
        # column dst += q * column src
        for i in range(nrows):
            H[i][dst] += q * H[i][src]
        for i in range(ncols):
            U[i][dst] += q * U[i][src]

    def col_combine(a, b, r):
        # (col_a, col_b) <- (x·col_a + y·col_b, -t·col_a + s·col_b), det = 1
        x, y, s, t = r
        for M, size in ((H, nrows), (U, ncols)):
            for i in range(size):
                ca, cb = M[i][a], M[i][b]
                M[i][a] = x * ca + y * cb
                M[i][b] = -t * ca + s * cb

    piv = 0
    for row in range(nrows):
        if piv >= ncols:
            break
        for c in range(piv + 1, ncols):
            if H[row][c] == 0:
                continue
            if H[row][piv] == 0:
                col_swap(piv, c)
                continue
            a, b = H[row][piv], H[row][c]
            g, x, y = _xgcd(a, b)
            col_combine(piv, c, (x, y, a // g, b // g))
        if H[row][piv] == 0:
            continue
        if H[row][piv] < 0:
            for i in range(nrows):
                H[i][piv] = -H[i][piv]
            for i in range(ncols):
                U[i][piv] = -U[i][piv]
        for c in range(piv):
            q = H[row][c] // H[row][piv]
            if q:
                col_axpy(c, piv, -q)
        piv += 1
    return mat(H), mat(U)


def _xgcd(a, b):
    """Extended gcd: returns (g, x, y) with g = ax + by, g > 0."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


def integer_kernel_basis(m, ncols=None):
    """Basis (list of columns) of the integer kernel {x in Z^ncols : m·x = 0}."""
    if ncols is None:
        ncols = len(m[0]) if m else 0
    if ncols == 0:
        return []
    if not m:
        return [tuple(identity(ncols)[i]) for i in range(ncols)]
    H, U = hnf(m)
    cols = []
    for j in range(ncols):
        if all(H[i][j] == 0 for i in range(len(H))):
            cols.append(tuple(U[i][j] for i in range(ncols)))
    return cols


def solve_integer(m, v):
    """Any integer solution x of m·x = v, or None.  Uses the column HNF."""
    nrows = len(m)
    ncols = len(m[0]) if nrows else 0
    if nrows == 0:
        return tuple(0 for _ in range(ncols))
    H, U = hnf(m)
    y = [0] * ncols
    pivots = {}  # pivot row -> column
    seen = 0
    for j in range(ncols):
        prow = next((i for i in range(nrows) if H[i][j] != 0), None)
        if prow is not None:
            pivots[prow] = j
            seen += 1
    for i in range(nrows):
        s = v[i] - sum(H[i][j] * y[j] for j in range(ncols) if y[j])
        if i in pivots:
            j = pivots[i]
            if s % H[i][j] != 0:
                return None
            y[j] = s // H[i][j]
        elif s != 0:
            return None
    return mat_vec(U, y)


# ---------------------------------------------------------------------------
# Lattices
# ---------------------------------------------------------------------------

class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class Lattice:
    """Integer lattice given by a canonical column-HNF basis.

    `basis` is an ambient_dim x rank matrix whose columns generate the
    lattice; it is always the column HNF of whatever generators were fed in,
    so equal lattices compare equal.
    """

    ambient_dim: int
    basis: tuple  # rows; ambient_dim x rank

    @property
    def rank(self) -> int:
        return len(self.basis[0]) if self.basis else 0

    @staticmethod
    def from_generators(ambient_dim: int, columns) -> "Lattice":
        cols = [tuple(c) for c in columns]
        for c in cols:
            if len(c) != ambient_dim:
                raise LatticeError("generator dimension mismatch")
        if not cols:
            return Lattice(ambient_dim, tuple(() for _ in range(ambient_dim)))
        gen_rows = mat(zip(*cols))
        H, _ = hnf(gen_rows)
        keep = [j for j in range(len(cols))
                if any(H[i][j] != 0 for i in range(ambient_dim))]
        basis = tuple(tuple(H[i][j] for j in keep) for i in range(ambient_dim))
        return Lattice(ambient_dim, basis)

    @staticmethod
    def standard(ambient_dim: int) -> "Lattice":
        return Lattice(ambient_dim, identity(ambient_dim))

    def is_full_rank(self) -> bool:
        return self.rank == self.ambient_dim

    def basis_columns(self):
        return [tuple(self.basis[i][j] for i in range(self.ambient_dim))
                for j in range(self.rank)]

    def member(self, v) -> bool:
        if len(v) != self.ambient_dim:
            raise LatticeError("vector dimension mismatch")
        if self.rank == 0:
            return all(x == 0 for x in v)
        return solve_integer(self.basis, v) is not None

    def det(self) -> int:
        """|det| of the basis (full-rank lattices only): product of HNF pivots."""
        if not self.is_full_rank():
            raise LatticeError("full-rank required")
        d = 1
        for i in range(self.ambient_dim):
            d *= self.basis[i][i]
        return d

    def to_json(self) -> dict:
        return {"dim": self.ambient_dim,
                "basis": [[str(x) for x in col] for col in self.basis_columns()]}

    @staticmethod
    def from_json(obj) -> "Lattice":
        dim = int(obj["dim"])
        cols = [tuple(int(x) for x in col) for col in obj["basis"]]
        return Lattice.from_generators(dim, cols)


def lattice_member(lat: Lattice, v) -> bool:
    return lat.member(v)


def lattice_intersect(l1: Lattice, l2: Lattice) -> Lattice:
    """Intersection of two full-rank lattices in the same ambient dimension."""
    if l1.ambient_dim != l2.ambient_dim:
        raise LatticeError("ambient dimension mismatch")
    if not (l1.is_full_rank() and l2.is_full_rank()):
        raise LatticeError("full-rank required")
    n = l1.ambient_dim
    if n == 0:
        return l1
    # x in both lattices: B1 a = B2 b; integer kernel of [B1 | -B2].
    stacked = tuple(tuple(l1.basis[i]) + tuple(-x for x in l2.basis[i])
                    for i in range(n))
    kernel = integer_kernel_basis(stacked, 2 * n)
    cols = [mat_vec(l1.basis, k[:n]) for k in kernel]
    out = Lattice.from_generators(n, cols)
    if not out.is_full_rank():
        raise LatticeError("intersection lost rank")  # cannot happen for full-rank inputs
    return out


def lattice_direct_sum(l1: Lattice, l2: Lattice) -> Lattice:
    n1, n2 = l1.ambient_dim, l2.ambient_dim
    cols = [tuple(c) + tuple(0 for _ in range(n2)) for c in l1.basis_columns()]
    cols += [tuple(0 for _ in range(n1)) + tuple(c) for c in l2.basis_columns()]
    return Lattice.from_generators(n1 + n2, cols)


def lattice_project_drop_first(lat: Lattice) -> Lattice:
    """Coordinate projection of a full-rank lattice dropping the first coordinate."""
    if not lat.is_full_rank():
        raise LatticeError("full-rank required")
    n = lat.ambient_dim
    if n == 0:
        raise LatticeError("cannot project dimension 0")
    cols = [c[1:] for c in lat.basis_columns()]
    out = Lattice.from_generators(n - 1, cols)
    return out


def minimal_ray_multiple(lat: Lattice, v) -> int:
    """Least t >= 1 with t·v in the (full-rank) lattice."""
    if not lat.is_full_rank():
        raise LatticeError("full-rank required")
    if all(x == 0 for x in v):
        raise LatticeError("zero vector")
    coords = solve_rational(lat.basis, v)
    t = 1
    for c in coords:
        t = t * c.denominator // gcd(t, c.denominator)
    return t


def ell(lat: Lattice) -> int:
    """Smallest t > 0 with (t, 0, ..., 0) in the full-rank lattice."""
    if not lat.is_full_rank():
        raise LatticeError("full-rank required")
    e1 = tuple(1 if i == 0 else 0 for i in range(lat.ambient_dim))
    return minimal_ray_multiple(lat, e1)


def lattice_preimage(m, lat: Lattice) -> Lattice:
    """{w : m·w in lat} for an injective integer matrix m (ncols <= nrows)."""
    ncols = len(m[0]) if m else 0
    if lat.rank == 0:
        cols = integer_kernel_basis(m, ncols)
        return Lattice.from_generators(ncols, cols)
    stacked = tuple(tuple(m[i]) + tuple(-x for x in lat.basis[i])
                    for i in range(len(m)))
    kernel = integer_kernel_basis(stacked, ncols + lat.rank)
    cols = [k[:ncols] for k in kernel]
    return Lattice.from_generators(ncols, cols)


def lattice_image(m, lat: Lattice) -> Lattice:
    """Image lattice {m·x : x in lat}."""
    nrows = len(m)
    cols = [mat_vec(m, c) for c in lat.basis_columns()]
    return Lattice.from_generators(nrows, cols)


def mat_to_json(a) -> list:
    return [[str(x) for x in row] for row in a]


def mat_from_json(obj):
    return mat(tuple(int(x) for x in row) for row in obj)


def dumps_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ": "), indent=1)
