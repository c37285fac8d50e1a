"""Exact rational copolyhedra: systems of weak/strict integer inequalities.

Provides Fourier-Motzkin elimination with fiber bookkeeping, floor-rounding
of strict facets, recession cones, disjoint refinement of unions, exact
V-representation, half-open decomposition into (copolytope + simple cone)
cells, bounded integer enumeration and complete integer feasibility search.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

from .errors import NotPointedError, current_caps
from .exactmath import (
    clear_denominators,
    dot,
    primitive,
    rational_kernel_basis,
    rational_rank,
    solve_rational,
    vec_gcd,
)


@dataclass(frozen=True, order=True)
class LinIneq:
    """One inequality a·x <= b (weak) or a·x < b (strict), gcd-reduced."""

    a: tuple
    b: int
    strict: bool = False

    def holds(self, point) -> bool:
        lhs = sum(c * x for c, x in zip(self.a, point))
        return lhs < self.b if self.strict else lhs <= self.b

    def negated(self) -> "LinIneq":
        # not(a·x <= b) is -a·x < -b; not(a·x < b) is -a·x <= -b
        return LinIneq(tuple(-c for c in self.a), -self.b, not self.strict)

    def weakened(self) -> "LinIneq":
        return LinIneq(self.a, self.b, False) if self.strict else self

    def is_constant(self) -> bool:
        return all(c == 0 for c in self.a)

    def constant_truth(self) -> bool:
        return 0 < self.b if self.strict else 0 <= self.b


def ineq(a, b, strict=False) -> LinIneq:
    """Normalized inequality: divide a and b by their common gcd."""
    a = tuple(int(x) for x in a)
    b = int(b)
    g = gcd(vec_gcd(a), abs(b))
    if g > 1:
        a = tuple(x // g for x in a)
        b //= g
    return LinIneq(a, b, strict)


def _false_row(dim: int) -> LinIneq:
    return LinIneq(tuple(0 for _ in range(dim)), -1, False)


def _normalize_rows(dim, rows):
    """Drop trivially-true rows, collapse same-normal rows, sort, dedupe."""
    best = {}  # a -> {False: weak bound, True: strict bound}
    for r in rows:
        r = ineq(r.a, r.b, r.strict)
        if r.is_constant():
            if r.constant_truth():
                continue
            return (_false_row(dim),)
        cur = best.setdefault(r.a, {})
        if r.strict not in cur or r.b < cur[r.strict]:
            cur[r.strict] = r.b
    out = []
    for a, bounds in best.items():
        if False in bounds and True in bounds:
            if bounds[False] < bounds[True]:
                del bounds[True]
            else:
                del bounds[False]
        for strict, b in bounds.items():
            out.append(LinIneq(a, b, strict))
    return tuple(sorted(out))


@dataclass(frozen=True)
class CoPolyhedron:
    """Finite list of integer linear inequalities, weak or strict."""

    dim: int
    ineqs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "ineqs", _normalize_rows(self.dim, self.ineqs))

    @staticmethod
    def whole_space(dim: int) -> "CoPolyhedron":
        return CoPolyhedron(dim, ())

    @staticmethod
    def empty(dim: int) -> "CoPolyhedron":
        return CoPolyhedron(dim, (_false_row(dim),))

    @staticmethod
    def from_rows(dim, rows) -> "CoPolyhedron":
        return CoPolyhedron(dim, tuple(ineq(a, b, s) for a, b, s in rows))

    def is_syntactically_empty(self) -> bool:
        return any(r.is_constant() and not r.constant_truth() for r in self.ineqs)

    def contains(self, point) -> bool:
        return all(r.holds(point) for r in self.ineqs)

    def with_rows(self, extra) -> "CoPolyhedron":
        return CoPolyhedron(self.dim, self.ineqs + tuple(extra))

    def all_weak(self) -> bool:
        return not any(r.strict for r in self.ineqs)

    def to_json(self) -> dict:
        return {"dim": self.dim,
                "ineqs": [{"a": [str(c) for c in r.a], "b": str(r.b),
                           "strict": r.strict} for r in self.ineqs]}

    @staticmethod
    def from_json(obj) -> "CoPolyhedron":
        dim = int(obj["dim"])
        rows = [ineq([int(c) for c in e["a"]], int(e["b"]), bool(e.get("strict", False)))
                for e in obj["ineqs"]]
        return CoPolyhedron(dim, tuple(rows))


@dataclass(frozen=True)
class AffineFn:
    """Exact rational affine function y -> linear·y + constant."""

    linear: tuple  # Fractions
    constant: Fraction

    def __call__(self, point) -> Fraction:
        return sum((c * x for c, x in zip(self.linear, point)), self.constant)

    def linear_at(self, v) -> Fraction:
        return sum((c * x for c, x in zip(self.linear, v)), Fraction(0))


def floor(p: CoPolyhedron) -> CoPolyhedron:
    """Sharpen every strict facet a·x < b to a·x <= b-1; integer points unchanged."""
    return CoPolyhedron(
        p.dim,
        tuple(LinIneq(r.a, r.b - 1, False) if r.strict else r for r in p.ineqs))


def translate(p: CoPolyhedron, v) -> CoPolyhedron:
    return CoPolyhedron(
        p.dim,
        tuple(LinIneq(r.a, r.b + dot(r.a, v), r.strict) for r in p.ineqs))


def intersect(p1: CoPolyhedron, p2: CoPolyhedron) -> CoPolyhedron:
    if p1.dim != p2.dim:
        raise ValueError("dimension mismatch")
    return CoPolyhedron(p1.dim, p1.ineqs + p2.ineqs)


def recession_cone(p: CoPolyhedron) -> CoPolyhedron:
    return CoPolyhedron(p.dim, tuple(LinIneq(r.a, 0, False) for r in p.ineqs))


# ---------------------------------------------------------------------------
# Fourier-Motzkin machinery
# ---------------------------------------------------------------------------

def _pair_rows(lower: LinIneq, upper: LinIneq, coord: int) -> LinIneq:
    """Combine a lower and an upper bound row on `coord` into one row without it."""
    p = -lower.a[coord]
    q = upper.a[coord]
    a = tuple(q * lc + p * uc
              for i, (lc, uc) in enumerate(zip(lower.a, upper.a)) if i != coord)
    b = p * upper.b + q * lower.b
    return ineq(a, b, lower.strict or upper.strict)


def _drop_coord(row: LinIneq, coord: int) -> LinIneq:
    return ineq(tuple(c for i, c in enumerate(row.a) if i != coord), row.b, row.strict)


def _fm_step(rows, coord):
    """Rows of the projection dropping `coord` (strict-aware, exact)."""
    lower = [r for r in rows if r.a[coord] < 0]
    upper = [r for r in rows if r.a[coord] > 0]
    rest = [_drop_coord(r, coord) for r in rows if r.a[coord] == 0]
    if lower and upper:
        rest.extend(_pair_rows(lo, up, coord) for lo in lower for up in upper)
    return rest


def project_out(p: CoPolyhedron, coord: int) -> CoPolyhedron:
    """Exact real projection of p dropping coordinate `coord`."""
    return CoPolyhedron(p.dim - 1, tuple(_fm_step(p.ineqs, coord)))


@lru_cache(maxsize=200000)
def feasible(p: CoPolyhedron) -> bool:
    """Rational (equivalently real) feasibility, strict rows honored."""
    rows = list(p.ineqs)
    for _ in range(p.dim):
        if any(r.is_constant() and not r.constant_truth() for r in rows):
            return False
        rows = _fm_step([r for r in rows if not r.is_constant()], 0)
        dedup = []
        seen = set()
        for r in rows:
            if r.is_constant() and r.constant_truth():
                continue
            if r not in seen:
                seen.add(r)
                dedup.append(r)
        rows = dedup
    return all(r.constant_truth() for r in rows)


def sample_point(p: CoPolyhedron):
    """An exact rational point of p, or None if infeasible."""
    if not feasible(p):
        return None
    if p.dim == 0:
        return ()
    proj = project_out(p, 0)
    tail = sample_point(proj)
    if tail is None:
        return None
    lo = hi = None
    lo_strict = hi_strict = False
    for r in p.ineqs:
        c = r.a[0]
        if c == 0:
            continue
        rest = sum(cc * x for cc, x in zip(r.a[1:], tail))
        bound = Fraction(r.b - rest, c)
        if c > 0:
            if hi is None or bound < hi or (bound == hi and r.strict):
                hi, hi_strict = bound, r.strict
        else:
            if lo is None or bound > lo or (bound == lo and r.strict):
                lo, lo_strict = bound, r.strict
    if lo is None and hi is None:
        x = Fraction(0)
    elif lo is None:
        x = hi - 1 if hi_strict else hi
    elif hi is None:
        x = lo + 1 if lo_strict else lo
    else:
        if lo == hi:
            if lo_strict or hi_strict:
                return None
            x = lo
        elif lo > hi:
            return None
        else:
            x = (lo + hi) / 2
    return (x,) + tail


@dataclass(frozen=True)
class FMPiece:
    poly: CoPolyhedron
    alpha: AffineFn
    beta: AffineFn


@dataclass(frozen=True)
class FMResult:
    proj: CoPolyhedron
    pieces: tuple
    infinite_fibers: bool


def _bound_affine(row: LinIneq, coord: int) -> AffineFn:
    """Fiber endpoint (b - a'·y)/a_coord as an affine function of y."""
    c = row.a[coord]
    linear = tuple(Fraction(-ai, c) for i, ai in enumerate(row.a) if i != coord)
    return AffineFn(linear, Fraction(row.b, c))


def _affine_le(f: AffineFn, g: AffineFn, strict: bool) -> LinIneq:
    """Integer row expressing f(y) <= g(y) (or <, when strict)."""
    coeffs = [fc - gc for fc, gc in zip(f.linear, g.linear)]
    const = g.constant - f.constant
    lcm = 1
    for x in coeffs + [const]:
        lcm = lcm * x.denominator // gcd(lcm, x.denominator)
    return ineq([int(x * lcm) for x in coeffs], int(const * lcm), strict)


def fm_eliminate_first(q: CoPolyhedron) -> FMResult:
    """Project dropping the first coordinate, with fiber-endpoint bookkeeping.

    Returns the projection R together with copolyhedral pieces partitioning R;
    over each piece the fiber in the first coordinate is the segment
    [alpha(y), beta(y)].  When one of the bound groups is empty every fiber is
    infinite: the result carries infinite_fibers=True and no pieces.
    """
    if not q.all_weak():
        raise ValueError("fm_eliminate_first requires weak rows; call floor first")
    if q.dim < 1:
        raise ValueError("dimension must be at least 1")
    rows = q.ineqs
    lower = [r for r in rows if r.a[0] < 0]
    upper = [r for r in rows if r.a[0] > 0]
    rest = [_drop_coord(r, 0) for r in rows if r.a[0] == 0]
    if not lower or not upper:
        proj = CoPolyhedron(q.dim - 1, tuple(rest))
        return FMResult(proj, (), True)
    pair_rows = [_pair_rows(lo, up, 0) for lo in lower for up in upper]
    proj = CoPolyhedron(q.dim - 1, tuple(rest) + tuple(pair_rows))
    if not feasible(proj):
        return FMResult(proj, (), False)
    alphas = [_bound_affine(r, 0) for r in lower]
    betas = [_bound_affine(r, 0) for r in upper]
    pieces = []
    for i, alpha in enumerate(alphas):
        # region where alpha is the largest lower bound, ties to the smallest index
        arows = []
        for i2, other in enumerate(alphas):
            if i2 == i:
                continue
            arows.append(_affine_le(other, alpha, strict=i2 < i))
        for j, beta in enumerate(betas):
            brows = []
            for j2, other in enumerate(betas):
                if j2 == j:
                    continue
                brows.append(_affine_le(beta, other, strict=j2 < j))
            piece = proj.with_rows(arows + brows)
            if feasible(piece):
                pieces.append(FMPiece(piece, alpha, beta))
    return FMResult(proj, tuple(pieces), False)


def affine_dim(p: CoPolyhedron) -> int:
    """Dimension of the affine hull of the point set; -1 when infeasible."""
    if not feasible(p):
        return -1
    normals = []
    for r in p.ineqs:
        if r.strict:
            continue
        if not feasible(p.with_rows([LinIneq(r.a, r.b, True)])):
            normals.append(r.a)
    if not normals:
        return p.dim
    return p.dim - rational_rank(normals)


def implicit_equalities(p: CoPolyhedron):
    """Weak rows of p that hold with equality on all of p (p assumed feasible)."""
    out = []
    for r in p.ineqs:
        if r.strict:
            continue
        if not feasible(p.with_rows([LinIneq(r.a, r.b, True)])):
            out.append(r)
    return out


# ---------------------------------------------------------------------------
# Disjoint refinement
# ---------------------------------------------------------------------------

def _cut_of(row: LinIneq):
    """Binary split key deciding this row: halfspace pair {c·x <= d} | {c·x > d}."""
    if row.strict:
        return (tuple(-c for c in row.a), -row.b)
    return (row.a, row.b)


def _refine_cells(polys):
    """Decision-tree cells over all row cuts; each input row has constant truth
    on every cell.  Returns feasible cells as CoPolyhedron."""
    dim = polys[0].dim
    cuts = []
    seen = set()
    for p in polys:
        for r in p.ineqs:
            c = _cut_of(r)
            if c not in seen:
                seen.add(c)
                cuts.append(c)
    cells = [CoPolyhedron.whole_space(dim)]
    for a, b in cuts:
        nxt = []
        inside = LinIneq(a, b, False)
        outside = inside.negated()
        for cell in cells:
            for branch in (inside, outside):
                cand = cell.with_rows([branch])
                if feasible(cand):
                    nxt.append(cand)
        cells = nxt
        current_caps().check_budget()
    return cells


def _overlap_components(polys):
    """Group indices of pairwise-overlapping inputs into connected components."""
    n = len(polys)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if find(i) != find(j) and feasible(intersect(polys[i], polys[j])):
                parent[find(i)] = find(j)
    comps = {}
    for i in range(n):
        comps.setdefault(find(i), []).append(i)
    return list(comps.values())


def disjoint_refine_tagged(polys):
    """Disjoint cells covering the union; each cell tagged with the indices of
    the inputs containing it (it lies inside every input it meets)."""
    items = [(i, p) for i, p in enumerate(polys) if feasible(p)]
    if not items:
        return []
    out = []
    index_groups = _overlap_components([p for _, p in items])
    for group in index_groups:
        members = [items[g] for g in group]
        if len(members) == 1:
            idx, p = members[0]
            out.append((p, [idx]))
            continue
        cells = _refine_cells([p for _, p in members])
        for cell in cells:
            pt = sample_point(cell)
            owners = [idx for idx, p in members if p.contains(pt)]
            if owners:
                out.append((cell, owners))
    return out


def disjoint_refine(polys):
    """Pairwise-disjoint copolyhedra with the same union as the inputs."""
    return [cell for cell, _ in disjoint_refine_tagged(polys)]


# ---------------------------------------------------------------------------
# V-representation (exact double-description by active-set enumeration)
# ---------------------------------------------------------------------------

def _check_pointed(p: CoPolyhedron):
    normals = [r.a for r in p.ineqs]
    if rational_rank(normals) < p.dim:
        raise NotPointedError("not pointed: the polyhedron contains a line")


def vrep(q: CoPolyhedron):
    """Exact V-representation (vertices, rays) of a weak, pointed copolyhedron."""
    if not q.all_weak():
        raise ValueError("vrep requires weak rows; call floor first")
    if not feasible(q):
        return [], []
    if q.dim == 0:
        return [()], []
    _check_pointed(q)
    d = q.dim + 1
    rows = [tuple(r.a) + (-r.b,) for r in q.ineqs]
    rows.append(tuple(0 for _ in range(q.dim)) + (-1,))
    verts = {}
    rays = {}
    for subset in itertools.combinations(range(len(rows)), d - 1):
        kernel = rational_kernel_basis([rows[i] for i in subset], d)
        if len(kernel) != 1:
            continue
        v = kernel[0]
        if all(dot(r, v) <= 0 for r in rows):
            pass
        elif all(dot(r, v) >= 0 for r in rows):
            v = tuple(-x for x in v)
        else:
            continue
        t = v[-1]
        if t > 0:
            vert = tuple(Fraction(x, t) for x in v[:-1])
            verts[vert] = True
        elif t == 0:
            ray = primitive(v[:-1])
            if any(ray):
                rays[ray] = True
    return sorted(verts), sorted(rays)


def is_bounded(q: CoPolyhedron) -> bool:
    """True iff the recession cone of q is {0}."""
    return cone_is_trivial(recession_cone(q))


def cone_is_trivial(cone: CoPolyhedron) -> bool:
    """True iff a homogeneous weak system has only the zero solution.

    The cone contains a nonzero point iff it contains one with some
    coordinate at +1 or -1 (cones are scale-invariant).
    """
    for i in range(cone.dim):
        for sign in (1, -1):
            row = ineq([-sign * (1 if k == i else 0) for k in range(cone.dim)], -1)
            if feasible(cone.with_rows([row])):
                return False
    return True


# ---------------------------------------------------------------------------
# Half-open cell decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Cell:
    """Half-open direct sum: simplex base (+) simple cone.

    The base is the set of convex combinations of `verts` whose barycentric
    coordinate at vertex i is > 0 when vert_open[i] (>= 0 otherwise); a point
    of the cell adds nonnegative multiples of the rays, with the multiple at
    ray t required > 0 when ray_open[t].
    """

    dim: int
    verts: tuple          # rational points
    vert_open: tuple      # per-vertex strict flag for the opposite base facet
    rays: tuple           # primitive integer vectors, linearly independent
    ray_open: tuple       # per-ray strict flag for the opposite facet

    def _coords(self, point, rays):
        """Barycentric/ray coordinates (lambda, mu) of a point, or None."""
        rows = []
        for i in range(self.dim):
            rows.append([Fraction(v[i]) for v in self.verts]
                        + [Fraction(r[i]) for r in rays])
        rows.append([Fraction(1)] * len(self.verts) + [Fraction(0)] * len(rays))
        rhs = [Fraction(point[i]) for i in range(self.dim)] + [Fraction(1)]
        sol = solve_rational(rows, rhs)
        if sol is None:
            return None
        return sol[:len(self.verts)], sol[len(self.verts):]

    def contains(self, point) -> bool:
        got = self._coords(point, self.rays)
        if got is None:
            return False
        lam, mu = got
        for x, op in zip(lam, self.vert_open):
            if x < 0 or (op and x == 0):
                return False
        for x, op in zip(mu, self.ray_open):
            if x < 0 or (op and x == 0):
                return False
        return True

    def fundamental_contains(self, point, scaled_rays) -> bool:
        """Membership in base (+) half-open parallelepiped of the scaled rays.

        The parallelepiped coordinate along ray t lives in [0,1) when the ray
        facet is closed and in (0,1] when it is open.
        """
        got = self._coords(point, scaled_rays)
        if got is None:
            return False
        lam, mu = got
        for x, op in zip(lam, self.vert_open):
            if x < 0 or (op and x == 0):
                return False
        for x, op in zip(mu, self.ray_open):
            if op:
                if not (0 < x <= 1):
                    return False
            else:
                if not (0 <= x < 1):
                    return False
        return True

    def is_bounded(self) -> bool:
        return not self.rays


def _facet_normal(cell, drop_idx, space_basis):
    """Inner normal of the facet of simplicial cone `cell` opposite its
    drop_idx-th generator, inside the span described by space_basis."""
    others = [g for k, g in enumerate(cell) if k != drop_idx]
    # normal = combo of space_basis rows, orthogonal to all other generators
    rows = [[dot(g, bvec) for bvec in space_basis] for g in others]
    kern = rational_kernel_basis(rows, len(space_basis))
    if len(kern) != 1:
        return None
    mu = kern[0]
    normal = tuple(sum(Fraction(mu[t]) * Fraction(space_basis[t][i])
                       for t in range(len(space_basis)))
                   for i in range(len(cell[0])))
    s = dot(normal, cell[drop_idx])
    if s == 0:
        return None
    if s < 0:
        normal = tuple(-x for x in normal)
    return normal


def _span_basis(gens):
    """Row basis of span(gens) by exact elimination, returned as rational rows."""
    work = [[Fraction(x) for x in g] for g in gens]
    dim = len(gens[0])
    basis = []
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
        rank += 1
    return [tuple(row) for row in work[:rank]]


def _cone_facets(gens):
    """Facets of the pointed cone spanned by extreme generators `gens`.

    Returns a list of (inner ok) pairs (normal, tuple of generator indices on
    the facet), deduplicated.
    """
    r = rational_rank(gens)
    if r <= 1:
        return []
    space = _span_basis(gens)
    facets = {}
    for subset in itertools.combinations(range(len(gens)), r - 1):
        rows = [[dot(gens[i], bvec) for bvec in space] for i in subset]
        kern = rational_kernel_basis(rows, r)
        if len(kern) != 1:
            continue
        mu = kern[0]
        normal = tuple(sum(Fraction(mu[t]) * Fraction(space[t][i])
                           for t in range(len(space)))
                       for i in range(len(gens[0])))
        signs = [dot(normal, g) for g in gens]
        if all(s <= 0 for s in signs):
            normal = tuple(-x for x in normal)
            signs = [-s for s in signs]
        elif not all(s >= 0 for s in signs):
            continue
        on = tuple(i for i, s in enumerate(signs) if s == 0)
        if len(on) >= r - 1:
            facets[on] = normal
    return [(n, on) for on, n in sorted(facets.items())]


def _triangulate_cone(gens):
    """Pulling triangulation of a pointed cone given by its extreme generators.

    Returns a list of tuples of generators, each linearly independent, whose
    simplicial cones cover the cone with pairwise disjoint interiors.
    """
    gens = sorted(gens)
    r = rational_rank(gens)
    if len(gens) == r:
        return [tuple(gens)]
    apex = gens[0]
    out = []
    for normal, on in _cone_facets(gens):
        if dot(normal, apex) == 0:
            continue
        sub = [gens[i] for i in on]
        for simplex in _triangulate_cone(sub):
            out.append(tuple(sorted(simplex + (apex,))))
    return sorted(set(out))


def cell_decompose(r: CoPolyhedron):
    """Half-open decomposition of a weak, line-free polyhedron into cells.

    The cells are pairwise disjoint, their union is exactly r, and each is a
    direct sum of a bounded half-open simplex and a simple cone.
    """
    if not r.all_weak():
        raise ValueError("cell_decompose requires weak rows; call floor first")
    if not feasible(r):
        return []
    if r.dim == 0:
        return [Cell(0, ((),), (False,), (), ())]
    _check_pointed(r)
    verts, rays = vrep(r)
    gens = [tuple(Fraction(x) for x in v) + (Fraction(1),) for v in verts]
    gens += [tuple(Fraction(x) for x in w) + (Fraction(0),) for w in rays]
    gens = sorted(set(gens))
    simplices = _triangulate_cone(gens)
    space = _span_basis(gens)

    normals = {}
    for cell in simplices:
        for k in range(len(cell)):
            normals[(cell, k)] = _facet_normal(cell, k, space)

    # Deterministic generic reference point in the relative interior: a
    # strictly positive combination of all generators with weights K^i.  Each
    # facet functional is a nonzero polynomial in K, so only finitely many K
    # fail the genericity test.
    q = None
    K = 2
    while q is None:
        cand = tuple(sum(Fraction(K) ** i * g[j] for i, g in enumerate(gens))
                     for j in range(r.dim + 1))
        if all(n is None or dot(n, cand) != 0 for n in normals.values()):
            q = cand
        K += 1
        if K > 10000:  # pragma: no cover - finitely many bad K exist
            raise RuntimeError("could not find a generic reference point")

    cells = []
    for cell in simplices:
        opens = []
        for k in range(len(cell)):
            n = normals[(cell, k)]
            opens.append(n is not None and dot(n, q) < 0)
        cverts, cvopen, crays, cropen = [], [], [], []
        for g, op in zip(cell, opens):
            if g[-1] != 0:
                cverts.append(tuple(x / g[-1] for x in g[:-1]))
                cvopen.append(op)
            else:
                crays.append(primitive(tuple(int(x) for x in clear_denominators(g[:-1]))))
                cropen.append(op)
        cells.append(Cell(r.dim, tuple(cverts), tuple(cvopen),
                          tuple(crays), tuple(cropen)))
    return cells


# ---------------------------------------------------------------------------
# Integer enumeration and feasibility
# ---------------------------------------------------------------------------

def _suffix_systems(rows, dim):
    """systems[k] = rows over coordinates 0..k-1 after eliminating the rest."""
    systems = [None] * (dim + 1)
    systems[dim] = list(rows)
    cur = list(rows)
    for k in range(dim, 0, -1):
        cur = _fm_step(cur, k - 1)
        cur = [r for r in cur if not (r.is_constant() and r.constant_truth())]
        cur = list(dict.fromkeys(cur))
        systems[k - 1] = cur
    return systems


def _coord_interval(system, prefix, level):
    """Integer interval for coordinate `level` given fixed prefix values."""
    lo = None
    hi = None
    for row in system:
        c = row.a[level]
        rest = row.b - sum(cc * x for cc, x in zip(row.a[:level], prefix))
        if c == 0:
            if rest < 0:
                return 1, 0
            continue
        bound = Fraction(rest, c)
        if c > 0:
            v = _floor_frac(bound)
            hi = v if hi is None else min(hi, v)
        else:
            v = _ceil_frac(bound)
            lo = v if lo is None else max(lo, v)
    return lo, hi


def _floor_frac(x: Fraction) -> int:
    return x.numerator // x.denominator


def _ceil_frac(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def integer_points(p: CoPolyhedron):
    """All integer points of a bounded copolyhedron, in lexicographic order."""
    q = floor(p)
    if not feasible(q):
        return []
    if p.dim == 0:
        return [()]
    _, rays = vrep(q)
    if rays:
        raise ValueError("unbounded polyhedron")
    systems = _suffix_systems(q.ineqs, q.dim)
    out = []
    caps = current_caps()

    def descend(prefix, level):
        caps.check_budget()
        if level == q.dim:
            out.append(tuple(prefix))
            return
        lo, hi = _coord_interval(systems[level + 1], prefix, level)
        if lo is None or hi is None:
            raise ValueError("unbounded polyhedron")
        for v in range(lo, hi + 1):
            descend(prefix + [v], level + 1)

    descend([], 0)
    return out


def _hadamard_delta(rows, dim) -> int:
    """Box bound (dim+1)·H with H a Hadamard bound on |subdeterminants| of [A|b]."""
    h = 1
    for r in rows:
        norm_sq = sum(c * c for c in r.a) + r.b * r.b
        s = isqrt(norm_sq)
        if s * s < norm_sq:
            s += 1
        h *= max(1, s)
    return (dim + 1) * h


def ilp_feasible(p: CoPolyhedron):
    """An integer point of p, or None; complete search inside the Hadamard box."""
    q = floor(p)
    if not feasible(q):
        return None
    if q.dim == 0:
        return ()
    delta = _hadamard_delta(q.ineqs, q.dim)
    box_rows = []
    for i in range(q.dim):
        e = [0] * q.dim
        e[i] = 1
        box_rows.append(ineq(e, delta))
        box_rows.append(ineq([-x for x in e], delta))
    q = q.with_rows(box_rows)
    if not feasible(q):
        return None
    systems = _suffix_systems(q.ineqs, q.dim)
    caps = current_caps()

    def descend(prefix, level):
        caps.check_budget()
        if level == q.dim:
            return tuple(prefix)
        lo, hi = _coord_interval(systems[level + 1], prefix, level)
        if lo is None or hi is None:  # pragma: no cover - box rows bound everything
            return None
        for v in range(lo, hi + 1):
            got = descend(prefix + [v], level + 1)
            if got is not None:
                return got
        return None

    return descend([], 0)
