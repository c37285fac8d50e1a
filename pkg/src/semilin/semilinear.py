"""Patterns, patterned polyhedra and semilinear sets, with exact projection,
complement and membership.

A pattern is a finite union of cosets of a full-rank integer lattice; a
semilinear set is a disjoint union of (copolyhedron, pattern) pieces.  The
single-step projection drops the first coordinate of every piece and returns
an explicit semilinear decomposition of the image; the general projection
lifts through an integer matrix and iterates the single step.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .errors import current_caps
from .exactmath import (
    Lattice,
    LatticeError,
    bitlen,
    dot,
    ell,
    integer_kernel_basis,
    lattice_direct_sum,
    lattice_intersect,
    lattice_preimage,
    lattice_project_drop_first,
    mat,
    mat_vec,
    phi_mat,
    phi_vec,
    rational_kernel_basis,
    solve_integer,
    solve_rational,
    transpose,
    vadd,
    vsub,
)
from .polyhedra import (
    AffineFn,
    CoPolyhedron,
    LinIneq,
    _affine_le,
    _refine_cells,
    affine_dim,
    disjoint_refine_tagged,
    feasible,
    floor,
    fm_eliminate_first,
    ilp_feasible,
    implicit_equalities,
    ineq,
    intersect,
    project_out,
    recession_cone,
    sample_point,
    translate,
    vrep,
)


@dataclass(frozen=True)
class Pattern:
    """Union of cosets of a full-rank period lattice.

    Coset representatives are kept reduced to the half-open fundamental
    parallelepiped of the HNF basis, pairwise distinct and sorted.
    """

    period: Lattice
    cosets: tuple

    def __post_init__(self):
        if not self.period.is_full_rank():
            raise LatticeError("full-rank required")
        reps = sorted({self.reduce(c) for c in self.cosets})
        object.__setattr__(self, "cosets", tuple(reps))

    @staticmethod
    def full(dim: int) -> "Pattern":
        return Pattern(Lattice.standard(dim), (tuple(0 for _ in range(dim)),))

    @staticmethod
    def empty(dim: int) -> "Pattern":
        return Pattern(Lattice.standard(dim), ())

    @property
    def dim(self) -> int:
        return self.period.ambient_dim

    def reduce(self, v):
        """Canonical representative of v modulo the period."""
        if len(v) != self.dim:
            raise LatticeError("vector dimension mismatch")
        if self.dim == 0:
            return ()
        coords = solve_rational(self.period.basis, v)
        shift = mat_vec(self.period.basis,
                        [c.numerator // c.denominator for c in coords])
        return vsub(tuple(v), shift)

    def member(self, v) -> bool:
        return self.reduce(v) in self.cosets

    def is_empty(self) -> bool:
        return not self.cosets

    def residues(self):
        """Canonical representatives of all of Z^dim modulo the period."""
        det = self.period.det()
        current_caps().check_cosets(det)
        b = self.period.basis
        ranges = [range(b[i][i]) for i in range(self.dim)]
        reps = sorted({self.reduce(v) for v in itertools.product(*ranges)})
        assert len(reps) == det
        return reps

    def complement(self) -> "Pattern":
        missing = [r for r in self.residues() if r not in set(self.cosets)]
        return Pattern(self.period, tuple(missing))

    def with_period(self, sub: Lattice) -> "Pattern":
        """Rewrite with a full-rank sublattice of the period as new period."""
        if sub == self.period:
            return self
        current_caps().check_cosets(sub.det())
        subpat = Pattern(sub, ())
        transversal = []
        bsub = sub.basis_columns()
        bper = self.period.basis_columns()
        cols = mat(transpose(bsub + [tuple(-x for x in c) for c in bper]))
        for r in subpat.residues():
            sol = solve_integer(cols, r)
            if sol is None:
                continue
            point = vsub(r, mat_vec(mat(transpose(bsub)), sol[:len(bsub)]))
            transversal.append(point)
        reps = {subpat.reduce(vadd(c, t)) for c in self.cosets for t in transversal}
        return Pattern(sub, tuple(sorted(reps)))

    def project_drop_first(self) -> "Pattern":
        period = lattice_project_drop_first(self.period)
        out = Pattern(period, ())
        reps = {out.reduce(c[1:]) for c in self.cosets}
        return Pattern(period, tuple(sorted(reps)))

    def permute(self, perm) -> "Pattern":
        """Apply the coordinate permutation x_i -> x_{perm[i]} position-wise:
        new coordinate i is old coordinate perm[i]."""
        cols = [tuple(c[perm[i]] for i in range(self.dim))
                for c in self.period.basis_columns()]
        period = Lattice.from_generators(self.dim, cols)
        out = Pattern(period, ())
        reps = {out.reduce(tuple(c[perm[i]] for i in range(self.dim)))
                for c in self.cosets}
        return Pattern(period, tuple(sorted(reps)))

    def to_json(self) -> dict:
        return {"period": self.period.to_json(),
                "cosets": [[str(x) for x in c] for c in self.cosets]}

    @staticmethod
    def from_json(obj) -> "Pattern":
        return Pattern(Lattice.from_json(obj["period"]),
                       tuple(tuple(int(x) for x in c) for c in obj["cosets"]))


@dataclass(frozen=True)
class PatternedPolyhedron:
    poly: CoPolyhedron
    pattern: Pattern

    def __post_init__(self):
        if self.poly.dim != self.pattern.dim:
            raise ValueError("polyhedron/pattern dimension mismatch")

    def member(self, v) -> bool:
        return self.poly.contains(v) and self.pattern.member(v)

    def to_json(self) -> dict:
        return {"poly": self.poly.to_json(), "pattern": self.pattern.to_json()}

    @staticmethod
    def from_json(obj) -> "PatternedPolyhedron":
        return PatternedPolyhedron(CoPolyhedron.from_json(obj["poly"]),
                                   Pattern.from_json(obj["pattern"]))


@dataclass(frozen=True)
class SetStats:
    psi: int
    eta: int


def _piece_key(piece: PatternedPolyhedron):
    return (piece.poly.ineqs, piece.pattern.period.basis, piece.pattern.cosets)


@dataclass(frozen=True)
class SemilinearSet:
    """Disjoint union of patterned polyhedra (disjointness checked)."""

    dim: int
    pieces: tuple

    def __post_init__(self):
        kept = [p for p in self.pieces
                if not p.pattern.is_empty() and feasible(p.poly)]
        kept.sort(key=_piece_key)
        for a, b in itertools.combinations(kept, 2):
            if feasible(intersect(a.poly, b.poly)):
                raise ValueError("pieces are not pairwise disjoint")
        object.__setattr__(self, "pieces", tuple(kept))

    @staticmethod
    def from_pairs(dim, pairs) -> "SemilinearSet":
        return SemilinearSet(dim, tuple(PatternedPolyhedron(q, p) for q, p in pairs))

    @staticmethod
    def empty(dim: int) -> "SemilinearSet":
        return SemilinearSet(dim, ())

    @staticmethod
    def whole(dim: int) -> "SemilinearSet":
        return SemilinearSet.from_pairs(
            dim, [(CoPolyhedron.whole_space(dim), Pattern.full(dim))])

    def member(self, v) -> bool:
        return any(p.member(v) for p in self.pieces)

    def permute(self, perm) -> "SemilinearSet":
        pieces = []
        for p in self.pieces:
            rows = [LinIneq(tuple(r.a[perm[i]] for i in range(self.dim)),
                            r.b, r.strict) for r in p.poly.ineqs]
            pieces.append((CoPolyhedron(self.dim, tuple(rows)),
                           p.pattern.permute(perm)))
        return SemilinearSet.from_pairs(self.dim, pieces)

    def to_json(self) -> dict:
        return {"dim": self.dim, "pieces": [p.to_json() for p in self.pieces]}

    @staticmethod
    def from_json(obj) -> "SemilinearSet":
        return SemilinearSet(int(obj["dim"]),
                             tuple(PatternedPolyhedron.from_json(p)
                                   for p in obj["pieces"]))


def member(x: SemilinearSet, v) -> bool:
    return x.member(v)


def stats(x: SemilinearSet) -> SetStats:
    psi = 0
    eta = 0
    for p in x.pieces:
        psi += sum(phi_vec(r.a) + bitlen(r.b) for r in p.poly.ineqs)
        psi += phi_mat(p.pattern.period.basis)
        eta += len(p.poly.ineqs)
    return SetStats(psi, eta)


# ---------------------------------------------------------------------------
# Coset materialization
# ---------------------------------------------------------------------------

def coset_probe(piece: CoPolyhedron, period: Lattice, oracle) -> Pattern:
    """Materialize the pattern of a projected piece by probing one witness
    integer point of (coset + period) inside the piece per coset.

    Soundness rests on membership being constant on each coset within the
    piece; cosets whose translate misses the piece are omitted.
    """
    shell = Pattern(period, ())
    reps = shell.residues()
    qf = floor(piece)
    cols = period.basis_columns()
    found = []
    caps = current_caps()
    for c in reps:
        caps.check_budget()
        rows = []
        for r in qf.ineqs:
            coeff = tuple(dot(r.a, col) for col in cols)
            rows.append(ineq(coeff, r.b - dot(r.a, c)))
        witness = ilp_feasible(CoPolyhedron(period.rank, tuple(rows)))
        if witness is None:
            continue
        point = vadd(c, mat_vec(period.basis, witness))
        if oracle(point):
            found.append(c)
    return Pattern(period, tuple(found))


# ---------------------------------------------------------------------------
# Single-step projection (drop the first coordinate)
# ---------------------------------------------------------------------------

def _span_of_cone(cone: CoPolyhedron):
    """Integer basis of the linear span of a homogeneous weak cone."""
    if not feasible(cone):
        return []
    eqs = implicit_equalities(cone)
    return rational_kernel_basis([r.a for r in eqs], cone.dim)


def _integer_scale_rows(rational_rows, dim):
    """Scale rational (coeffs, b, strict) rows to integer LinIneq rows."""
    out = []
    for coeffs, b, strict in rational_rows:
        lcm = 1
        for x in list(coeffs) + [b]:
            f = Fraction(x)
            lcm = lcm * f.denominator // gcd(lcm, f.denominator)
        out.append(ineq([int(Fraction(x) * lcm) for x in coeffs],
                        int(Fraction(b) * lcm), strict))
    return out


def _projection_extent(piece: CoPolyhedron, h_basis, w_basis):
    """Componentwise extent bound of the projection of `piece` along span(h)
    onto span(w), in w-coordinates, plus one."""
    h = len(h_basis)
    c = len(w_basis)
    rows = []
    for r in piece.ineqs:
        coeffs = [dot(r.a, hv) for hv in h_basis] + [dot(r.a, wv) for wv in w_basis]
        rows.append(ineq(coeffs, r.b))
    poly = CoPolyhedron(h + c, tuple(rows))
    for _ in range(h):
        poly = project_out(poly, 0)
    verts, rays = vrep(poly)
    if rays:
        raise RuntimeError("projection along the recession span is unbounded")
    extent = 0
    for i in range(c):
        vals = [v[i] for v in verts]
        if vals:
            spread = max(vals) - min(vals)
            extent = max(extent, spread.numerator // spread.denominator + 1)
    return extent + 1


def _full_dim_thin_piece(rj: CoPolyhedron, alpha: AffineFn, period: Lattice, oracle):
    """Period lattice for a full-dimensional thin piece: project the lattice
    through the fiber graph over the recession span, then complete to full
    rank transversally, scaled past the bounded extent of the piece."""
    d = rj.dim
    cone = recession_cone(rj)
    h_basis = _span_of_cone(cone)
    lifted = [(alpha.linear_at(h),) + tuple(h) for h in h_basis]
    ortho = rational_kernel_basis(lifted, d + 1)
    m_rows = [[dot(row, col) for col in period.basis_columns()] for row in ortho]
    kernel = integer_kernel_basis(mat(m_rows), period.rank)
    sharp_cols = [mat_vec(period.basis, k) for k in kernel]
    t_cols = [col[1:] for col in sharp_cols]
    t_lat = Lattice.from_generators(d, t_cols)
    if t_lat.rank < d:
        w_basis = rational_kernel_basis(h_basis, d)
        scale = _projection_extent(rj, h_basis, w_basis)
        t_cols = t_lat.basis_columns() + [tuple(scale * x for x in w)
                                          for w in w_basis]
        t_lat = Lattice.from_generators(d, t_cols)
    if not t_lat.is_full_rank():
        raise RuntimeError("period completion failed")
    return coset_probe(rj, t_lat, oracle)


def _left_inverse(cols):
    """Exact left inverse rows L with L·P = I for a full-column-rank integer
    matrix P given by columns."""
    k = len(cols)
    d = len(cols[0])
    rows = []
    for j in range(k):
        target = [Fraction(1 if t == j else 0) for t in range(k)]
        # solve for row l: l·P = e_j, i.e. P^T l^T = e_j
        pt = [[Fraction(cols[t][i]) for i in range(d)] for t in range(k)]
        sol = solve_rational(pt, target)
        rows.append(sol)
    return rows


def _lower_dim_thin_piece(rj: CoPolyhedron, qf: CoPolyhedron, pat: Pattern):
    """Reparametrize a lower-dimensional thin piece onto its affine hull's
    integer points and recurse; returns mapped-back (poly, pattern) pairs."""
    d = rj.dim
    eqs = implicit_equalities(rj)
    e_rows = mat(r.a for r in eqs)
    f = tuple(r.b for r in eqs)
    y0 = solve_integer(e_rows, f)
    if y0 is None:
        return []
    p_cols = integer_kernel_basis(e_rows, d)
    a = len(p_cols)
    # pull back Q (restricted over this piece) to (x1, z) coordinates
    rows = []
    for r in qf.ineqs:
        rest = r.a[1:]
        coeffs = (r.a[0],) + tuple(dot(rest, col) for col in p_cols)
        rows.append(LinIneq(coeffs, r.b - dot(rest, y0), r.strict))
    for r in rj.ineqs:
        coeffs = (0,) + tuple(dot(r.a, col) for col in p_cols)
        rows.append(LinIneq(coeffs, r.b - dot(r.a, y0), r.strict))
    q_tilde = CoPolyhedron(1 + a, tuple(rows))
    # pull back the pattern through (x1, z) -> (x1, y0 + P z)
    m_map = [[0] * (1 + a) for _ in range(1 + d)]
    m_map[0][0] = 1
    for i in range(d):
        for j in range(a):
            m_map[1 + i][1 + j] = p_cols[j][i]
    m_map = mat(m_map)
    lat_tilde = lattice_preimage(m_map, pat.period)
    if not Lattice(1 + a, lat_tilde.basis).is_full_rank():
        raise RuntimeError("pulled-back period lost rank")
    shift = (0,) + tuple(y0)
    stacked = mat(tuple(m_map[i]) + tuple(pat.period.basis[i])
                  for i in range(1 + d))
    reps = set()
    shell = Pattern(lat_tilde, ())
    for c in pat.cosets:
        sol = solve_integer(stacked, vsub(c, shift))
        if sol is None:
            continue
        reps.add(shell.reduce(sol[:1 + a]))
    pat_tilde = Pattern(lat_tilde, tuple(sorted(reps)))
    if pat_tilde.is_empty():
        return []
    sub = _project_piece(q_tilde, pat_tilde)
    # map results back: z = L(y - y0), rows E y = f pin the affine hull
    out = []
    if a:
        l_rows = _left_inverse(p_cols)
    for poly_k, pattern_k in sub:
        rows = []
        for r in poly_k.ineqs:
            coeffs = [Fraction(0)] * d
            for t in range(a):
                for i in range(d):
                    coeffs[i] += r.a[t] * l_rows[t][i]
            const = Fraction(r.b) + sum(Fraction(coeffs[i]) * y0[i] for i in range(d))
            rows.append((coeffs, const, r.strict))
        back = _integer_scale_rows(rows, d)
        for er, fv in zip(e_rows, f):
            back.append(ineq(er, fv))
            back.append(ineq([-x for x in er], -fv))
        poly_y = CoPolyhedron(d, tuple(back))
        if not feasible(poly_y):
            continue
        t_cols = [tuple(sum(p_cols[j][i] * c[j] for j in range(a)) for i in range(d))
                  for c in pattern_k.period.basis_columns()]
        w_cols = rational_kernel_basis([tuple(col) for col in p_cols], d)
        full = Lattice.from_generators(d, t_cols + w_cols)
        if not full.is_full_rank():
            raise RuntimeError("mapped-back period lost rank")
        shell = Pattern(full, ())
        reps = {shell.reduce(vadd(y0, tuple(sum(p_cols[j][i] * c[j]
                                                for j in range(a))
                                            for i in range(d))))
                for c in pattern_k.cosets}
        out.append((poly_y, Pattern(full, tuple(sorted(reps)))))
    return out


def _project_piece(q: CoPolyhedron, pat: Pattern):
    """Project one patterned polyhedron, dropping the first coordinate.
    Returns disjoint (copolyhedron, pattern) pairs covering the image."""
    qf = floor(q)
    if not feasible(qf):
        return []
    res = fm_eliminate_first(qf)
    pat_proj = pat.project_drop_first()
    if res.infinite_fibers:
        if pat_proj.is_empty() or not feasible(res.proj):
            return []
        return [(res.proj, pat_proj)]
    if not feasible(res.proj):
        return []
    out = []
    period_ell = ell(pat.period)
    shift = tuple(period_ell if i == 0 else 0 for i in range(qf.dim))
    r0 = project_out(intersect(qf, translate(qf, shift)), 0)
    if feasible(r0) and not pat_proj.is_empty():
        out.append((r0, pat_proj))

    def make_oracle(alpha, beta):
        def oracle(y):
            lo = alpha(y)
            hi = beta(y)
            x = -((-lo.numerator) // lo.denominator)  # ceil
            top = hi.numerator // hi.denominator      # floor
            while x <= top:
                if pat.member((x,) + tuple(y)):
                    return True
                x += 1
            return False
        return oracle

    for piece in res.pieces:
        alpha, beta = piece.alpha, piece.beta
        gap = AffineFn(alpha.linear, alpha.constant + period_ell)
        thin_row = _affine_le(beta, gap, strict=True)
        rj = piece.poly.with_rows([thin_row])
        if not feasible(rj):
            continue
        dim_rj = affine_dim(rj)
        if dim_rj < rj.dim:
            results = _lower_dim_thin_piece(rj, qf, pat)
        else:
            pattern_j = _full_dim_thin_piece(rj, alpha, pat.period,
                                             make_oracle(alpha, beta))
            results = [(rj, pattern_j)] if not pattern_j.is_empty() else []
        out.extend(results)
    return out


def _merge_pieces(dim, tagged_pieces) -> SemilinearSet:
    """Refine possibly-overlapping (poly, pattern) pieces into a disjoint
    semilinear set: intersect periods and union cosets on shared cells."""
    polys = [p for p, _ in tagged_pieces]
    out = []
    for cell, owners in disjoint_refine_tagged(polys):
        cell_f = floor(cell)
        if not feasible(cell_f):
            continue
        period = tagged_pieces[owners[0]][1].period
        for idx in owners[1:]:
            period = lattice_intersect(period, tagged_pieces[idx][1].period)
        reps = set()
        for idx in owners:
            reps.update(tagged_pieces[idx][1].with_period(period).cosets)
        if not reps:
            continue
        if ilp_feasible(cell_f) is None:
            continue
        out.append((cell_f, Pattern(period, tuple(sorted(reps)))))
    return SemilinearSet.from_pairs(dim, out)


def project_step(x: SemilinearSet) -> SemilinearSet:
    """Coordinate projection of a semilinear set dropping the first coordinate."""
    if x.dim < 1:
        raise ValueError("dimension must be at least 1")
    collected = []
    for piece in x.pieces:
        collected.extend(_project_piece(piece.poly, piece.pattern))
    if not collected:
        return SemilinearSet.empty(x.dim - 1)
    return _merge_pieces(x.dim - 1, collected)


def drop_first_block(x: SemilinearSet, count: int) -> SemilinearSet:
    for _ in range(count):
        x = project_step(x)
    return x


def drop_last_block(x: SemilinearSet, count: int) -> SemilinearSet:
    """Project away the last `count` coordinates."""
    if count == 0:
        return x
    n = x.dim
    perm = list(range(n - count, n)) + list(range(n - count))
    return drop_first_block(x.permute(perm), count)


def project(x: SemilinearSet, t_matrix) -> SemilinearSet:
    """Image of a semilinear set under an integer matrix map.

    Lifts every piece to the graph of the map (x, Tx), then drops the source
    coordinates one at a time with the single-step projection.
    """
    t_matrix = mat(t_matrix)
    n = len(t_matrix)
    m = x.dim
    if n and len(t_matrix[0]) != m:
        raise ValueError("matrix dimension mismatch")
    lifted_pieces = []
    for piece in x.pieces:
        rows = [LinIneq(tuple(r.a) + tuple(0 for _ in range(n)), r.b, r.strict)
                for r in piece.poly.ineqs]
        for i in range(n):
            coeffs = tuple(-t_matrix[i][j] for j in range(m)) + tuple(
                1 if k == i else 0 for k in range(n))
            rows.append(LinIneq(coeffs, 0, False))
            rows.append(LinIneq(tuple(-c for c in coeffs), 0, False))
        poly = CoPolyhedron(m + n, tuple(rows))
        period = lattice_direct_sum(piece.pattern.period, Lattice.standard(n))
        cosets = tuple(tuple(c) + tuple(0 for _ in range(n))
                       for c in piece.pattern.cosets)
        lifted_pieces.append((poly, Pattern(period, cosets)))
    lifted = SemilinearSet.from_pairs(m + n, lifted_pieces)
    return drop_first_block(lifted, m)


def complement(x: SemilinearSet) -> SemilinearSet:
    """Pointwise complement within Z^dim."""
    pieces = []
    for piece in x.pieces:
        comp = piece.pattern.complement()
        if not comp.is_empty():
            pieces.append((piece.poly, comp))
    covered = [p.poly for p in x.pieces]
    if not covered:
        return SemilinearSet.whole(x.dim)
    for cell in _refine_cells(covered):
        pt = sample_point(cell)
        if any(p.contains(pt) for p in covered):
            continue
        cell_f = floor(cell)
        if not feasible(cell_f) or ilp_feasible(cell_f) is None:
            continue
        pieces.append((cell_f, Pattern.full(x.dim)))
    return SemilinearSet.from_pairs(x.dim, pieces)
