"""Presburger formulas: a small text DSL, ASTs, disjoint-DNF conversion,
quantifier elimination to explicit semilinear sets, sentence truth, and the
partial-to-full generating-function pipeline.

Grammar of the DSL (one formula per input, '#' starts a comment):

    formula     :=  quantifier | disjunction
    quantifier  :=  ('E' | 'A') var (',' var)* ':' formula
    disjunction :=  conjunction ('|' conjunction)*
    conjunction :=  negation ('&' negation)*
    negation    :=  '!' negation | '(' formula ')' | atom
    atom        :=  linear cmp linear        cmp in  <= < >= > = !=
    linear      :=  term (('+'|'-') term)*
    term        :=  INT '*' var | INT | var | '-' term

Variables are lowercase identifiers; `E`/`A` are the reserved quantifier
markers.  Atoms are rewritten over the integers on parse: a·x < b becomes
a·x <= b-1; equalities and disequalities stay atomic until DNF time.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ParseError, current_caps
from .polyhedra import CoPolyhedron, feasible, ineq
from .semilinear import Pattern, SemilinearSet, complement, drop_last_block


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Term:
    """Integer linear expression: coefficient map plus constant."""

    coeffs: tuple  # sorted tuple of (var, coeff), no zeros
    constant: int = 0

    @staticmethod
    def build(coeffs: dict, constant: int = 0) -> "Term":
        items = tuple(sorted((v, c) for v, c in coeffs.items() if c != 0))
        return Term(items, int(constant))

    def coeff_map(self) -> dict:
        return dict(self.coeffs)


@dataclass(frozen=True)
class Atom:
    """Normalized atom: a·x (op) b with op one of 'le', 'eq', 'ne'."""

    op: str
    coeffs: tuple  # sorted (var, coeff) pairs
    bound: int
    span: tuple = field(default=(0, 0), compare=False)

    def variables(self):
        return [v for v, _ in self.coeffs]


@dataclass(frozen=True)
class Not:
    child: object


@dataclass(frozen=True)
class And:
    children: tuple


@dataclass(frozen=True)
class Or:
    children: tuple


@dataclass(frozen=True)
class Quant:
    kind: str  # 'E' or 'A'
    variables: tuple
    body: object


@dataclass(frozen=True)
class Formula:
    """A Presburger formula with its free variables in first-appearance order."""

    root: object
    free_vars: tuple

    @property
    def dim(self) -> int:
        return len(self.free_vars)

    def prefix_classes(self):
        """The (k, n-vector) tag of the prenexed form: free block first."""
        prefix, _ = prenex(self.root)
        blocks = [len(self.free_vars)] + [len(vs) for _, vs in prefix]
        return len(blocks), tuple(blocks)

    def to_json(self) -> dict:
        return {"free": list(self.free_vars), "root": _ast_json(self.root)}


def _ast_json(node):
    if isinstance(node, Atom):
        return {"atom": node.op, "coeffs": {v: str(c) for v, c in node.coeffs},
                "bound": str(node.bound)}
    if isinstance(node, Not):
        return {"not": _ast_json(node.child)}
    if isinstance(node, And):
        return {"and": [_ast_json(c) for c in node.children]}
    if isinstance(node, Or):
        return {"or": [_ast_json(c) for c in node.children]}
    if isinstance(node, Quant):
        return {"quant": node.kind, "vars": list(node.variables),
                "body": _ast_json(node.body)}
    raise TypeError(type(node))


def atom_le(coeffs: dict, bound: int, span=(0, 0)) -> Atom:
    items = tuple(sorted((v, int(c)) for v, c in coeffs.items() if c != 0))
    return Atom("le", items, int(bound), span)


def _atom_sym(op: str, coeffs: dict, bound: int, span=(0, 0)) -> Atom:
    """Canonicalize eq/ne atoms up to overall sign."""
    items = sorted((v, int(c)) for v, c in coeffs.items() if c != 0)
    bound = int(bound)
    if items and items[0][1] < 0 or (not items and bound < 0):
        items = [(v, -c) for v, c in items]
        bound = -bound
    return Atom(op, tuple(items), bound, span)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<cmp><=|>=|!=|<|>|=)
  | (?P<op>[(),:+\-*!&|])
""", re.VERBOSE)


@dataclass
class _Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str):
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        tok = m.group()
        if kind != "ws":
            tokens.append(_Token(kind, tok, line, col))
        newlines = tok.count("\n")
        if newlines:
            line += newlines
            col = len(tok) - tok.rfind("\n")
        else:
            col += len(tok)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.bound_stack = []
        self.free_order = []
        self.all_bound = set()

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self, kind=None, text=None) -> _Token:
        tok = self.tokens[self.pos]
        if (kind and tok.kind != kind) or (text and tok.text != text):
            raise ParseError(f"expected {text or kind}, found {tok.text!r}",
                             tok.line, tok.col)
        self.pos += 1
        return tok

    def error(self, message: str):
        tok = self.peek()
        raise ParseError(message, tok.line, tok.col)

    def parse(self) -> Formula:
        node = self.formula()
        tok = self.peek()
        if tok.kind != "eof":
            self.error(f"trailing input {tok.text!r}")
        return Formula(node, tuple(self.free_order))

    def formula(self):
        tok = self.peek()
        if tok.kind == "name" and tok.text in ("E", "A"):
            nxt = self.tokens[self.pos + 1]
            if nxt.kind == "name":
                return self.quantified()
        return self.disjunction()

    def quantified(self):
        kind = self.take("name").text
        variables = [self.variable_decl()]
        while self.peek().text == ",":
            self.take(text=",")
            variables.append(self.variable_decl())
        self.take(text=":")
        self.bound_stack.append(set(variables))
        body = self.formula()
        self.bound_stack.pop()
        return Quant(kind, tuple(variables), body)

    def variable_decl(self) -> str:
        tok = self.take("name")
        if tok.text in ("E", "A"):
            raise ParseError("E and A are reserved quantifier markers",
                             tok.line, tok.col)
        if any(tok.text in scope for scope in self.bound_stack):
            raise ParseError(f"variable {tok.text!r} bound twice",
                             tok.line, tok.col)
        if tok.text in self.all_bound:
            raise ParseError(f"variable {tok.text!r} reused in another scope",
                             tok.line, tok.col)
        if tok.text in self.free_order:
            raise ParseError(f"variable {tok.text!r} already used free",
                             tok.line, tok.col)
        self.all_bound.add(tok.text)
        return tok.text

    def disjunction(self):
        parts = [self.conjunction()]
        while self.peek().text == "|":
            self.take(text="|")
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self):
        parts = [self.negation()]
        while self.peek().text == "&":
            self.take(text="&")
            parts.append(self.negation())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def negation(self):
        if self.peek().text == "!":
            self.take(text="!")
            return Not(self.negation())
        if self.peek().text == "(":
            self.take(text="(")
            node = self.formula()
            self.take(text=")")
            return node
        return self.atom()

    def atom(self):
        start = self.peek()
        lhs_coeffs, lhs_const = self.linear()
        op_tok = self.peek()
        if op_tok.kind != "cmp":
            self.error(f"expected comparison, found {op_tok.text!r}")
        self.take("cmp")
        rhs_coeffs, rhs_const = self.linear()
        end = self.tokens[self.pos - 1]
        span = (start.col, end.col + len(end.text))
        coeffs = dict(lhs_coeffs)
        for v, c in rhs_coeffs.items():
            coeffs[v] = coeffs.get(v, 0) - c
        bound = rhs_const - lhs_const
        op = op_tok.text
        if op == "<=":
            return atom_le(coeffs, bound, span)
        if op == "<":
            return atom_le(coeffs, bound - 1, span)
        if op == ">=":
            return atom_le({v: -c for v, c in coeffs.items()}, -bound, span)
        if op == ">":
            return atom_le({v: -c for v, c in coeffs.items()}, -bound - 1, span)
        if op == "=":
            return _atom_sym("eq", coeffs, bound, span)
        return _atom_sym("ne", coeffs, bound, span)

    def linear(self):
        coeffs, const = self.term()
        while self.peek().text in ("+", "-"):
            sign = 1 if self.take("op").text == "+" else -1
            c2, k2 = self.term()
            for v, c in c2.items():
                coeffs[v] = coeffs.get(v, 0) + sign * c
            const += sign * k2
        return coeffs, const

    def term(self):
        tok = self.peek()
        if tok.text == "-":
            self.take(text="-")
            coeffs, const = self.term()
            return {v: -c for v, c in coeffs.items()}, -const
        if tok.kind == "int":
            self.take("int")
            value = int(tok.text)
            if self.peek().text == "*":
                self.take(text="*")
                var = self.take("name")
                if self.peek().text == "*":
                    self.error("non-linear term")
                return {self.use_variable(var): value}, 0
            return {}, value
        if tok.kind == "name":
            var = self.take("name")
            if self.peek().text == "*":
                self.error("non-linear term (variable times variable)")
            return {self.use_variable(var): 1}, 0
        self.error(f"expected a term, found {tok.text!r}")

    def use_variable(self, tok: _Token) -> str:
        name = tok.text
        if name in ("E", "A"):
            raise ParseError("E and A are reserved quantifier markers",
                             tok.line, tok.col)
        if any(name in scope for scope in self.bound_stack):
            return name
        if name in self.all_bound:
            raise ParseError(f"variable {name!r} used outside its scope",
                             tok.line, tok.col)
        if name not in self.free_order:
            self.free_order.append(name)
        return name


def parse(text: str) -> Formula:
    """Parse the DSL into a Formula; free variables keep appearance order."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Prenexing
# ---------------------------------------------------------------------------

_DUAL = {"E": "A", "A": "E"}


def prenex(node, counter=None):
    """Prenex normal form: returns (prefix [(kind, vars)...], matrix AST).

    Bound variables are renamed apart so prefixes of siblings can be
    concatenated; the matrix is quantifier-free.
    """
    if counter is None:
        counter = itertools.count()
    if isinstance(node, Atom):
        return [], node
    if isinstance(node, Not):
        prefix, matrix = prenex(node.child, counter)
        return [(_DUAL[k], vs) for k, vs in prefix], Not(matrix)
    if isinstance(node, (And, Or)):
        prefix = []
        matrices = []
        for child in node.children:
            p, m = prenex(child, counter)
            prefix.extend(p)
            matrices.append(m)
        ctor = And if isinstance(node, And) else Or
        return prefix, ctor(tuple(matrices))
    if isinstance(node, Quant):
        prefix, matrix = prenex(node.body, counter)
        fresh = {v: f"{v}~{next(counter)}" for v in node.variables}
        prefix = [(node.kind, tuple(fresh.get(v, v) for v in node.variables))] + [
            (k, vs) for k, vs in prefix]
        return prefix, _rename(matrix, fresh)
    raise TypeError(type(node))


def _rename(node, mapping):
    if isinstance(node, Atom):
        coeffs = tuple(sorted((mapping.get(v, v), c) for v, c in node.coeffs))
        return Atom(node.op, coeffs, node.bound, node.span)
    if isinstance(node, Not):
        return Not(_rename(node.child, mapping))
    if isinstance(node, And):
        return And(tuple(_rename(c, mapping) for c in node.children))
    if isinstance(node, Or):
        return Or(tuple(_rename(c, mapping) for c in node.children))
    raise TypeError(type(node))


# ---------------------------------------------------------------------------
# Disjoint DNF
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DisjointDNF:
    variables: tuple
    polys: tuple  # pairwise disjoint CoPolyhedron over `variables`


def _collect_atoms(node, acc):
    if isinstance(node, Atom):
        acc.append(node)
    elif isinstance(node, Not):
        _collect_atoms(node.child, acc)
    elif isinstance(node, (And, Or)):
        for c in node.children:
            _collect_atoms(c, acc)
    else:
        raise ValueError("quantifier inside a quantifier-free body")


def _eval_body(node, truth):
    if isinstance(node, Atom):
        return truth[_atom_key(node)]
    if isinstance(node, Not):
        return not _eval_body(node.child, truth)
    if isinstance(node, And):
        return all(_eval_body(c, truth) for c in node.children)
    if isinstance(node, Or):
        return any(_eval_body(c, truth) for c in node.children)
    raise TypeError(type(node))


def _atom_key(atom: Atom):
    return (atom.op, atom.coeffs, atom.bound)


def _atom_vector(coeffs, variables):
    cmap = dict(coeffs)
    return tuple(cmap.get(v, 0) for v in variables)


def to_disjoint_dnf(body, variables) -> DisjointDNF:
    """Decision-tree conversion of a quantifier-free body into pairwise
    disjoint polyhedra whose union of integer points is the satisfying set."""
    variables = tuple(variables)
    atoms = []
    _collect_atoms(body, atoms)

    # group atoms by oriented hyperplane; decide the split granularity
    planes = {}
    for atom in atoms:
        a = _atom_vector(atom.coeffs, variables)
        b = atom.bound
        if atom.op == "le":
            key, form = _orient(a, b)
        else:
            key, form = _orient(a, b)
            form = "exact"
        planes.setdefault(key, {"forms": set(), "atoms": []})
        planes[key]["forms"].add(form)
        planes[key]["atoms"].append((atom, a, b))

    splits = []  # (key, kind) with kind 'binary-fwd' | 'binary-bwd' | 'ternary'
    for key, info in sorted(planes.items()):
        forms = info["forms"]
        if "exact" in forms or forms >= {"fwd", "bwd"}:
            splits.append((key, "ternary"))
        elif forms == {"fwd"}:
            splits.append((key, "binary-fwd"))
        else:
            splits.append((key, "binary-bwd"))

    dim = len(variables)
    polys = []

    def descend(idx, rows, branchmap):
        current_caps().check_budget()
        if not feasible(CoPolyhedron(dim, tuple(rows))):
            return
        if idx == len(splits):
            truth = {}
            for info in planes.values():
                for atom, a, b in info["atoms"]:
                    truth[_atom_key(atom)] = _branch_decides(
                        branchmap, atom.op, a, b)
            if _eval_body(body, truth):
                polys.append(CoPolyhedron(dim, tuple(rows)))
            return
        key, kind = splits[idx]
        a, b = key
        if kind == "ternary":
            cases = [("lt", [ineq(a, b - 1)]),
                     ("eq", [ineq(a, b), ineq([-x for x in a], -b)]),
                     ("gt", [ineq([-x for x in a], -b - 1)])]
        elif kind == "binary-fwd":
            cases = [("le", [ineq(a, b)]),
                     ("gt", [ineq([-x for x in a], -b - 1)])]
        else:
            cases = [("ge", [ineq([-x for x in a], -b)]),
                     ("lt", [ineq(a, b - 1)])]
        for tag, extra in cases:
            branchmap[key] = tag
            descend(idx + 1, rows + extra, branchmap)
        del branchmap[key]

    descend(0, [], {})
    return DisjointDNF(variables, tuple(polys))


def _orient(a, b):
    """Canonical (plane key, form) for the halfspace a·x <= b."""
    nz = next((c for c in a if c != 0), 0)
    if nz < 0 or (nz == 0 and b < 0):
        return ((tuple(-c for c in a), -b), "bwd")
    return ((tuple(a), b), "fwd")


def _branch_decides(branchmap, op, a, b):
    """Truth of the atom on a decision-tree branch."""
    key, form = _orient(a, b)
    tag = branchmap[key]
    if form == "bwd":
        flip = {"lt": "gt", "gt": "lt", "le": "ge", "ge": "le", "eq": "eq"}
        tag = flip[tag]
    # tag is the relation of a·x to b on this branch (after orientation)
    if op == "le":
        return tag in ("lt", "eq", "le")
    if op == "eq":
        return tag == "eq"
    if op == "ne":
        return tag != "eq"
    raise ValueError(op)


# ---------------------------------------------------------------------------
# Quantifier elimination
# ---------------------------------------------------------------------------

def eliminate(formula: Formula) -> SemilinearSet:
    """Explicit semilinear set over the free variables.

    The body is converted to a disjoint DNF over all variables; quantifier
    blocks are then eliminated innermost-first: an existential block projects
    it away, a universal block is complement-project-complement.
    """
    prefix, matrix = prenex(formula.root)
    variables = list(formula.free_vars)
    for _, vs in prefix:
        variables.extend(vs)
    dnf = to_disjoint_dnf(matrix, variables)
    pieces = [(p, Pattern.full(len(variables))) for p in dnf.polys]
    x = SemilinearSet.from_pairs(len(variables), pieces)
    for kind, vs in reversed(prefix):
        if kind == "E":
            x = drop_last_block(x, len(vs))
        else:
            x = complement(drop_last_block(complement(x), len(vs)))
    return x


def truth(sentence: Formula) -> bool:
    """Decide a sentence (formula with no free variables)."""
    if sentence.free_vars:
        raise ValueError("sentence has free variables")
    return eliminate(sentence).member(())


# ---------------------------------------------------------------------------
# Generating functions for formulas
# ---------------------------------------------------------------------------

def _pipeline_cells(x: SemilinearSet):
    """Cell decompositions with period-scaled rays, per piece."""
    from .exactmath import minimal_ray_multiple
    from .polyhedra import cell_decompose, floor as _floor

    out = []
    for piece in x.pieces:
        cells = cell_decompose(_floor(piece.poly))
        items = []
        for cell in cells:
            scaled = [tuple(minimal_ray_multiple(piece.pattern.period, r) * c
                            for c in r) for r in cell.rays]
            items.append((cell, scaled))
        out.append((piece, items))
    return out


def bound_N(formula: Formula) -> int:
    """Box radius N: every bounded cell of the GF pipeline fits in [-N, N]^n."""
    return _bound_from_cells(_pipeline_cells(eliminate(formula)))


def _bound_from_cells(decomposed) -> int:
    import itertools as it

    best = 0
    for _, items in decomposed:
        for cell, scaled in items:
            for pick in it.product((0, 1), repeat=len(scaled)):
                offset = tuple(sum(w[i] * s for w, s in zip(scaled, pick))
                               for i in range(cell.dim))
                for v in cell.verts:
                    for i in range(cell.dim):
                        val = abs(Fraction(v[i]) + offset[i])
                        best = max(best, val.__ceil__())
    return best


def gf_formula(formula: Formula):
    """Short GF of the satisfying set, built from the eliminated decomposition
    with bounded-cell contents taken from the partial set in [-N, N]^n via the
    Hadamard product of expanded indicator series."""
    from .genfunc import (
        Box,
        ShortGF,
        gf_finite_in_dim,
        gf_sum,
        hadamard_expanded,
        periodize,
        _cell_bounded_points,
        _positive_functional,
    )

    x = eliminate(formula)
    n = x.dim
    if not x.pieces:
        return ShortGF.zero(n)
    decomposed = _pipeline_cells(x)
    all_rays = sorted({r for _, items in decomposed
                       for cell, _ in items for r in cell.rays})
    if all_rays and _positive_functional(all_rays) is None:
        from .errors import NotPointedError
        raise NotPointedError(
            "non-pointed set: no functional positive on all recession rays")
    radius = max(_bound_from_cells(decomposed), 0)
    box = Box.cube(n, radius) if n else Box((), ())
    partial = gf_finite_in_dim(n, [p for p in box.points() if x.member(p)])
    parts = [ShortGF.zero(n)]
    for piece, items in decomposed:
        for cell, scaled in items:
            cell_points = gf_finite_in_dim(n, _cell_bounded_points(cell, scaled))
            h = hadamard_expanded(cell_points, partial, box)
            parts.append(periodize(h, scaled) if scaled else h)
    return gf_sum(parts)
