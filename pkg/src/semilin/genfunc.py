"""Short rational generating functions: finite sums of c·t^a / prod(1 - t^b).

Construction from finite point sets, periodization along cone generators,
exact box expansion of the formal series, Hadamard intersection of expanded
indicator series, and the full pipeline turning a polyhedron projection or an
explicit semilinear set into a short GF whose support is the set.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import NotPointedError, current_caps
from .exactmath import minimal_ray_multiple, rational_rank, vadd
from .polyhedra import (
    CoPolyhedron,
    cell_decompose,
    feasible,
    floor,
    ineq,
    project_out,
    sample_point,
)
from .semilinear import Pattern, SemilinearSet, project


def _glen(x: int) -> int:
    """ceil(log2|x| + 1), the per-number contribution to a GF's length."""
    n = abs(int(x))
    if n == 0:
        return 1
    if n & (n - 1) == 0:
        return n.bit_length()
    return n.bit_length() + 1


@dataclass(frozen=True)
class GFTerm:
    coeff: Fraction
    num_exp: tuple
    den_exps: tuple  # tuple of nonzero integer vectors

    def __post_init__(self):
        object.__setattr__(self, "coeff", Fraction(self.coeff))
        object.__setattr__(self, "num_exp", tuple(int(x) for x in self.num_exp))
        dens = tuple(tuple(int(x) for x in b) for b in self.den_exps)
        for b in dens:
            if not any(b):
                raise ValueError("zero denominator exponent")
        object.__setattr__(self, "den_exps", dens)

    @property
    def dim(self) -> int:
        return len(self.num_exp)


def _sort_key(t: GFTerm):
    return (t.num_exp, t.den_exps, t.coeff)


@dataclass(frozen=True)
class ShortGF:
    ambient_dim: int
    terms: tuple

    def __post_init__(self):
        terms = tuple(sorted(self.terms, key=_sort_key))
        for t in terms:
            if t.dim != self.ambient_dim:
                raise ValueError("term dimension mismatch")
        object.__setattr__(self, "terms", terms)

    @property
    def length(self) -> int:
        total = 0
        for t in self.terms:
            total += _glen(t.coeff.numerator * t.coeff.denominator)
            total += sum(_glen(x) for x in t.num_exp)
            total += sum(_glen(x) for b in t.den_exps for x in b)
        return total

    @staticmethod
    def zero(dim: int) -> "ShortGF":
        return ShortGF(dim, ())

    def is_zero(self) -> bool:
        return not self.terms

    def to_json(self) -> dict:
        return {"dim": self.ambient_dim,
                "terms": [{"coeff": [str(t.coeff.numerator), str(t.coeff.denominator)],
                           "num": [str(x) for x in t.num_exp],
                           "den": [[str(x) for x in b] for b in t.den_exps]}
                          for t in self.terms]}

    @staticmethod
    def from_json(obj) -> "ShortGF":
        terms = []
        for e in obj["terms"]:
            p, q = (int(x) for x in e["coeff"])
            terms.append(GFTerm(Fraction(p, q),
                                tuple(int(x) for x in e["num"]),
                                tuple(tuple(int(x) for x in b) for b in e["den"])))
        return ShortGF(int(obj["dim"]), tuple(terms))

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for t in self.terms:
            num = _render_monomial(t.coeff, t.num_exp)
            if t.den_exps:
                den = "".join(f"(1 - {_render_monomial(Fraction(1), b)})"
                              for b in t.den_exps)
                parts.append(f"{num} / {den}")
            else:
                parts.append(num)
        return " + ".join(parts)


def _render_monomial(coeff: Fraction, exp) -> str:
    if len(exp) == 1:
        e = exp[0]
        mono = "1" if e == 0 else ("t" if e == 1 else f"t^{e}")
    else:
        mono = "1" if not any(exp) else "t^(" + ",".join(str(x) for x in exp) + ")"
    if coeff == 1:
        return mono
    if mono == "1":
        return str(coeff)
    return f"{coeff}*{mono}"


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(int(x) for x in self.lo)
        hi = tuple(int(x) for x in self.hi)
        if len(lo) != len(hi) or any(l > h for l, h in zip(lo, hi)):
            raise ValueError("malformed box")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    def contains(self, v) -> bool:
        return all(l <= x <= h for l, x, h in zip(self.lo, v, self.hi))

    def points(self):
        return itertools.product(*(range(l, h + 1)
                                   for l, h in zip(self.lo, self.hi)))

    @staticmethod
    def cube(dim: int, radius: int) -> "Box":
        return Box(tuple(-radius for _ in range(dim)),
                   tuple(radius for _ in range(dim)))


def gf_finite(points, dim=None) -> ShortGF:
    """Sum of monomials t^p over a finite set of integer points, deduplicated."""
    pts = sorted({tuple(int(x) for x in p) for p in points})
    if dim is None:
        if not pts:
            raise ValueError("empty point set needs an explicit dimension")
        dim = len(pts[0])
    return ShortGF(dim, tuple(GFTerm(Fraction(1), p, ()) for p in pts))


def gf_finite_in_dim(dim: int, points) -> ShortGF:
    return gf_finite(points, dim)


def periodize(h: ShortGF, gens) -> ShortGF:
    """Multiply by prod 1/(1 - t^g) for cone generators g.

    For linearly independent generators the support becomes the h-support
    plus the N-span of the generators with multiplicity one (the half-open
    parallelepiped tiling); dependent generators are accepted as a formal
    product but then expansion coefficients count representations.  The
    spanned cone must be pointed.
    """
    gens = tuple(tuple(int(x) for x in g) for g in gens)
    if not gens:
        return h
    if any(not any(g) for g in gens):
        raise ValueError("zero generator")
    if _positive_functional(gens) is None:
        raise NotPointedError("generators do not span a pointed cone")
    return ShortGF(h.ambient_dim,
                   tuple(GFTerm(t.coeff, t.num_exp, t.den_exps + gens)
                         for t in h.terms))


def gf_sum(gs) -> ShortGF:
    gs = list(gs)
    if not gs:
        raise ValueError("empty sum needs a dimension; use ShortGF.zero")
    dim = gs[0].ambient_dim
    terms = []
    for g in gs:
        if g.ambient_dim != dim:
            raise ValueError("dimension mismatch")
        terms.extend(g.terms)
    return ShortGF(dim, tuple(terms))


def _positive_functional(dens):
    """Rational c with c·b >= 1 for every den vector b, or None."""
    dim = len(dens[0])
    rows = [ineq(tuple(-x for x in b), -1) for b in dens]
    return sample_point(CoPolyhedron(dim, tuple(rows)))


def expand_box(g: ShortGF, box: Box):
    """Exact coefficients of the formal power series inside the box.

    Every denominator 1/(1-t^b) is expanded as sum_k t^{kb}; termination is
    guaranteed by a rational functional strictly positive on all den vectors.
    """
    if box.dim != g.ambient_dim:
        raise ValueError("box dimension mismatch")
    dens = sorted({b for t in g.terms for b in t.den_exps})
    c = None
    if dens:
        c = _positive_functional(dens)
        if c is None:
            raise NotPointedError("non-pointed GF: no separating functional")
    out = {}
    if g.ambient_dim == 0:
        total = sum((t.coeff for t in g.terms), Fraction(0))
        return {(): total} if total else {}
    maxdot = None
    if c is not None:
        maxdot = sum((ci * (hi if ci >= 0 else lo))
                     for ci, lo, hi in zip(c, box.lo, box.hi))
    caps = current_caps()
    for t in g.terms:
        if not t.den_exps:
            if box.contains(t.num_exp):
                out[t.num_exp] = out.get(t.num_exp, Fraction(0)) + t.coeff
            continue

        def rec(idx, cur):
            caps.check_budget()
            if idx == len(t.den_exps):
                if box.contains(cur):
                    out[cur] = out.get(cur, Fraction(0)) + t.coeff
                return
            b = t.den_exps[idx]
            point = cur
            while sum(ci * x for ci, x in zip(c, point)) <= maxdot:
                rec(idx + 1, point)
                point = vadd(point, b)

        rec(0, t.num_exp)
    return {p: v for p, v in sorted(out.items()) if v != 0}


def support(g: ShortGF, box: Box):
    return sorted(expand_box(g, box))


def _indicator_support(g: ShortGF, box: Box):
    coeffs = expand_box(g, box)
    for p, v in coeffs.items():
        if v not in (0, 1):
            raise ValueError(f"not an indicator GF: coefficient {v} at {p}")
    return set(coeffs)


def hadamard_expanded(g1: ShortGF, g2: ShortGF, box: Box) -> ShortGF:
    """Monomial GF of the support intersection of two indicator GFs in a box."""
    s1 = _indicator_support(g1, box)
    s2 = _indicator_support(g2, box)
    return gf_finite_in_dim(g1.ambient_dim, sorted(s1 & s2))


def count_box(g: ShortGF, box: Box) -> int:
    """Sum of series coefficients in the box; the point count for set GFs."""
    total = sum(expand_box(g, box).values(), Fraction(0))
    if total.denominator != 1:
        raise ValueError("coefficient sum is not an integer")
    return int(total)


# ---------------------------------------------------------------------------
# Pipeline: semilinear set -> short GF
# ---------------------------------------------------------------------------

def _cell_bounded_points(cell, scaled_rays):
    """Integer points of base (+) half-open parallelepiped of the scaled rays."""
    dim = cell.dim
    if dim == 0:
        return [()]
    corners = []
    for pick in itertools.product((0, 1), repeat=len(scaled_rays)):
        offset = tuple(sum(w[i] * s for w, s in zip(scaled_rays, pick))
                       for i in range(dim))
        for v in cell.verts:
            corners.append(tuple(Fraction(v[i]) + offset[i] for i in range(dim)))
    lo = []
    hi = []
    for i in range(dim):
        vals = [c[i] for c in corners]
        lo.append(min(vals).__ceil__())
        hi.append(max(vals).__floor__())
    pts = []
    for p in itertools.product(*(range(l, h + 1) for l, h in zip(lo, hi))):
        if cell.fundamental_contains(p, scaled_rays):
            pts.append(p)
    return pts


def gf_semilinear(x: SemilinearSet) -> ShortGF:
    """Short GF whose support is the semilinear set (recession must be pointed)."""
    dim = x.dim
    decomposed = []
    all_rays = []
    for piece in x.pieces:
        cells = cell_decompose(floor(piece.poly))
        decomposed.append((piece, cells))
        for c in cells:
            all_rays.extend(c.rays)
    if all_rays and _positive_functional(sorted(set(all_rays))) is None:
        raise NotPointedError(
            "non-pointed set: no functional positive on all recession rays")
    parts = [ShortGF.zero(dim)]
    caps = current_caps()
    for piece, cells in decomposed:
        period = piece.pattern.period
        for cell in cells:
            caps.check_budget()
            scaled = [tuple(minimal_ray_multiple(period, r) * c for c in r)
                      for r in cell.rays]
            pts = [p for p in _cell_bounded_points(cell, scaled)
                   if piece.pattern.member(p)]
            h = gf_finite_in_dim(dim, pts)
            parts.append(periodize(h, scaled) if scaled else h)
    return gf_sum(parts)


def _projection_cone_pointed(q: CoPolyhedron, t_matrix) -> bool:
    """True iff T(recession cone of Q) contains no line."""
    m = q.dim
    n = len(t_matrix)
    rows = []
    for r in q.ineqs:
        rows.append(ineq(tuple(r.a) + tuple(0 for _ in range(n)), 0))
    for i in range(n):
        coeffs = tuple(-t_matrix[i][j] for j in range(m)) + tuple(
            1 if k == i else 0 for k in range(n))
        rows.append(ineq(coeffs, 0))
        rows.append(ineq(tuple(-c for c in coeffs), 0))
    cone = CoPolyhedron(m + n, tuple(rows))
    for _ in range(m):
        cone = project_out(cone, 0)
    normals = [r.a for r in cone.ineqs]
    return rational_rank(normals) == n if n else True


def project_gf(q: CoPolyhedron, t_matrix) -> ShortGF:
    """Short GF of the projection T(Q ∩ Z^m), via the semilinear decomposition."""
    t_matrix = tuple(tuple(int(x) for x in row) for row in t_matrix)
    n = len(t_matrix)
    if not feasible(q):
        return ShortGF.zero(n)
    if not _projection_cone_pointed(floor(q), t_matrix):
        raise NotPointedError("non-pointed projection: the image contains a line")
    x = SemilinearSet.from_pairs(q.dim, [(floor(q), Pattern.full(q.dim))])
    return gf_semilinear(project(x, t_matrix))
