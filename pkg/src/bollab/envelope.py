"""Enveloping Lie algebras of Lie triple systems and Bol algebras."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from . import linalg as la
from .linalg import Subspace, frac_str
from .structures import (
    AlgebraError,
    BolAlgebra,
    InvalidAlgebra,
    LieAlgebra,
    LieTripleSystem,
    StructureConstants2,
    StructureConstants3,
    algebra_from_json,
    algebra_to_json,
    verify_lie,
    verify_lts,
)


class InvalidLTS(AlgebraError):
    pass


class BolClosureViolated(AlgebraError):
    pass


class NotComplementary(AlgebraError):
    pass


def _sigma(n: int, b: Subspace, h: Subspace):
    """Involution acting as -1 on b and +1 on h."""
    cols = list(b.basis) + list(h.basis)
    p = la.transpose(cols)
    d = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        d[i][i] = Fraction(-1 if i < b.dim else 1)
    return la.matmul(la.matmul(p, d), la.inverse(p))


@dataclass(frozen=True)
class EnvelopePair:
    G: LieAlgebra
    B: Subspace
    h: Subspace
    label: str = ""

    def __post_init__(self):
        n = self.G.dim
        if self.B.n != n or self.h.n != n:
            raise NotComplementary("subspaces do not live in the Lie algebra")
        if self.B.dim + self.h.dim != n or (self.B & self.h).dim != 0:
            raise NotComplementary(f"B (dim {self.B.dim}) and h (dim {self.h.dim}) are not complementary in dim {n}")

    @property
    def dim(self):
        return self.G.dim

    @property
    def sigma(self):
        return _sigma(self.G.dim, self.B, self.h)

    def split(self, v):
        """Coordinates of v in the concatenated (B basis, h basis)."""
        cols = list(self.B.basis) + list(self.h.basis)
        x = la.solve(la.transpose(cols), v)
        return x[: self.B.dim], x[self.B.dim:]

    def project_B(self, v):
        b, _ = self.split(v)
        return la.lincomb(b, self.B.basis, self.G.dim)

    def bracket_span(self, x: Subspace, y: Subspace) -> Subspace:
        return Subspace(self.G.dim, [self.G.bracket(a, b) for a in x.basis for b in y.basis])

    def h_is_subalgebra(self) -> bool:
        return self.h.contains_space(self.bracket_span(self.h, self.h))

    def is_graded(self) -> bool:
        """[h,h] in h, [h,B] in B, [B,B] in h."""
        return (
            self.h.contains_space(self.bracket_span(self.h, self.h))
            and self.B.contains_space(self.bracket_span(self.h, self.B))
            and self.h.contains_space(self.bracket_span(self.B, self.B))
        )

    def closure_holds(self) -> bool:
        """[[B,B],B] in B."""
        bb = self.bracket_span(self.B, self.B)
        return self.B.contains_space(self.bracket_span(bb, self.B))

    def generated(self) -> Subspace:
        """Subalgebra generated by B."""
        s = self.B
        while True:
            nxt = s + self.bracket_span(s, s)
            if nxt == s:
                return s
            s = nxt

    def sigma_is_automorphism(self) -> bool:
        s = self.sigma
        n = self.G.dim
        e = [la.unit(n, i) for i in range(n)]
        for i, j in itertools.combinations(range(n), 2):
            lhs = la.matvec(s, self.G.bracket(e[i], e[j]))
            rhs = self.G.bracket(la.matvec(s, e[i]), la.matvec(s, e[j]))
            if lhs != rhs:
                return False
        return True

    def to_json(self):
        d = algebra_to_json(self.G)
        d["kind"] = "pair"
        d["B_basis"] = self.B.to_json()
        d["h_basis"] = self.h.to_json()
        d["sigma"] = [[frac_str(x) for x in row] for row in self.sigma]
        return d

    @classmethod
    def from_json(cls, d):
        g = algebra_from_json(d, kind="lie")
        n = g.dim
        b = Subspace(n, [la.vec(v) for v in d["B_basis"]])
        h = Subspace(n, [la.vec(v) for v in d.get("h_basis", [])])
        return cls(g, b, h, d.get("label", ""))


def make_pair(g: LieAlgebra, b_vectors, h_vectors, label: str = "") -> EnvelopePair:
    n = g.dim
    return EnvelopePair(g, Subspace(n, [la.vec(v) for v in b_vectors]), Subspace(n, [la.vec(v) for v in h_vectors]), label)


def coordinate_pair(g: LieAlgebra, nb: int, h_vectors, label: str = "") -> EnvelopePair:
    """B = span of the first nb coordinate vectors."""
    n = g.dim
    return make_pair(g, [la.unit(n, i) for i in range(nb)], h_vectors, label)


# --- derivations ------------------------------------------------------------


@dataclass(frozen=True)
class DerivationSpace:
    n: int
    operators: tuple  # h(e_i, e_j), i < j, lexicographic
    basis: tuple  # row-reduced basis, each an n x n matrix

    @property
    def rank(self):
        return len(self.basis)

    def coordinates(self, m):
        flat = tuple(x for row in m for x in row)
        rows = [tuple(x for row in b for x in row) for b in self.basis]
        c = la.solve(la.transpose(rows), flat) if rows else (() if la.is_zero(flat) else None)
        if c is None:
            raise InvalidLTS("operator is not in the span of inner derivations")
        return c

    def is_closed(self) -> bool:
        for a in self.basis:
            for b in self.basis:
                try:
                    self.coordinates(la.commutator(a, b))
                except InvalidLTS:
                    return False
        return True


def derivation_space(m: LieTripleSystem) -> DerivationSpace:
    n = m.dim
    e = [la.unit(n, i) for i in range(n)]
    ops = tuple(m.triple.operator(e[i], e[j]) for i, j in itertools.combinations(range(n), 2))
    flat = [tuple(x for row in op for x in row) for op in ops]
    rows, _ = la.rref(flat)
    basis = tuple(tuple(tuple(r[i * n:(i + 1) * n]) for i in range(n)) for r in rows)
    return DerivationSpace(n, ops, basis)


def standard_embedding(m: LieTripleSystem, check: bool = True) -> EnvelopePair:
    """G = M + H with H spanned by the inner derivations h(X, Y) = (X, Y, -).

    Brackets: [A, B] = AB - BA, [A, X] = AX, [X, Y] = h(X, Y).
    With ``check=False`` an invalid tensor is embedded anyway (the result then
    fails the Jacobi identity) so callers can report on it.
    """
    if check and not verify_lts(m):
        raise InvalidLTS(f"{m.label or 'tensor'} is not a Lie triple system")
    n = m.dim
    ds = derivation_space(m)
    k = ds.rank
    dim = n + k
    e = [la.unit(n, i) for i in range(n)]

    def h_coords(mat):
        if k == 0:
            return ()
        try:
            return ds.coordinates(mat)
        except InvalidLTS:
            if check:
                raise
            # least-effort fallback: keep the component inside the span
            flat = tuple(x for row in mat for x in row)
            rows = [tuple(x for row in b for x in row) for b in ds.basis]
            sol = la.solve(la.matmul(rows, la.transpose(rows)), la.matvec(rows, flat))
            return sol

    entries = []
    for i, j in itertools.combinations(range(n), 2):
        c = h_coords(m.triple.operator(e[i], e[j]))
        entries.extend((n + a, i, j, v) for a, v in enumerate(c) if v)
    for a in range(k):
        for j in range(n):
            v = la.matvec(ds.basis[a], e[j])
            entries.extend((l, n + a, j, x) for l, x in enumerate(v) if x)
    for a, b in itertools.combinations(range(k), 2):
        c = h_coords(la.commutator(ds.basis[a], ds.basis[b]))
        entries.extend((n + l, n + a, n + b, v) for l, v in enumerate(c) if v)
    g = LieAlgebra(dim, StructureConstants2(dim, entries), f"env({m.label})" if m.label else "")
    return coordinate_pair(g, n, [la.unit(dim, n + a) for a in range(k)], g.label)


# --- canonical envelope -----------------------------------------------------


def _annihilator(s: Subspace):
    """Rows whose common kernel is s."""
    return la.nullspace(s.basis, s.n) if s.dim else [la.unit(s.n, i) for i in range(s.n)]


def max_ideal_in(g: LieAlgebra, s: Subspace) -> Subspace:
    """Largest ideal of g contained in s."""
    n = g.dim
    e = [la.unit(n, i) for i in range(n)]
    cur = s
    while cur.dim:
        q = _annihilator(cur)
        rows = []
        for j in range(n):
            images = [g.bracket(e[j], v) for v in cur.basis]
            for qrow in q:
                rows.append(tuple(la.dot(qrow, img) for img in images))
        coeffs = la.nullspace(rows, cur.dim)
        nxt = Subspace(n, [la.lincomb(c, cur.basis, n) for c in coeffs])
        if nxt == cur:
            break
        cur = nxt
    return cur


def quotient_pair(p: EnvelopePair, ideal: Subspace) -> EnvelopePair:
    if ideal.dim == 0:
        return p
    if not p.h.contains_space(ideal):
        raise AlgebraError("ideal must lie inside h")
    n = p.G.dim
    # complement of the ideal inside h
    hq = []
    acc = ideal
    for v in p.h.basis:
        if v not in acc:
            hq.append(v)
            acc = acc + Subspace(n, [v])
    keep = list(p.B.basis) + hq
    cols = keep + list(ideal.basis)
    pmat = la.transpose(cols)
    pinv = la.inverse(pmat)
    m = len(keep)
    entries = []
    for i, j in itertools.combinations(range(m), 2):
        c = la.matvec(pinv, p.G.bracket(keep[i], keep[j]))[:m]
        entries.extend((k, i, j, v) for k, v in enumerate(c) if v)
    g = LieAlgebra(m, StructureConstants2(m, entries), p.G.label)
    nb = p.B.dim
    return coordinate_pair(g, nb, [la.unit(m, nb + a) for a in range(len(hq))], p.label)


def canonical_envelope(p: EnvelopePair) -> EnvelopePair:
    """Quotient by the largest ideal of G contained in h."""
    return quotient_pair(p, max_ideal_in(p.G, p.h))


# --- Bol algebra of a pair --------------------------------------------------


def bol_from_pair(p: EnvelopePair, label: str = "") -> BolAlgebra:
    """xi.eta = [xi, eta] projected to B along h, (xi, eta, zeta) = [[xi, eta], zeta]."""
    if not p.closure_holds():
        raise BolClosureViolated("[[B,B],B] is not contained in B")
    n = p.B.dim
    b = p.B.basis
    cols = la.transpose(list(b) + list(p.h.basis))
    dot, tri = [], []
    for i, j in itertools.combinations(range(n), 2):
        x = la.solve(cols, p.G.bracket(b[i], b[j]))
        dot.extend((k, i, j, v) for k, v in enumerate(x[:n]) if v)
    for i, j, k in itertools.product(range(n), repeat=3):
        if i == j:
            continue
        v = p.G.bracket(p.G.bracket(b[i], b[j]), b[k])
        x = p.B.coordinates(v)
        tri.extend((l, i, j, k, c) for l, c in enumerate(x) if c)
    return BolAlgebra(n, StructureConstants2(n, dot), StructureConstants3(n, tri), label or p.label)


# --- radicals ---------------------------------------------------------------


def killing_form(g: LieAlgebra):
    n = g.dim
    ads = [g.ad(la.unit(n, i)) for i in range(n)]
    return tuple(tuple(sum((la.matmul(ads[i], ads[j])[k][k] for k in range(n)), Fraction(0)) for j in range(n)) for i in range(n))


def radical_lie(g: LieAlgebra, check: bool = True) -> Subspace:
    """Solvable radical: the Killing-orthogonal complement of [g, g]."""
    if check and not verify_lie(g):
        raise InvalidAlgebra("radical requires a Lie algebra")
    n = g.dim
    k = killing_form(g)
    d = g.derived()
    rows = [la.matvec(k, v) for v in d.basis]  # K symmetric: rows give kappa(v, -)
    r = Subspace(n, la.nullspace(rows, n)) if rows else Subspace.full(n)
    if not g.is_solvable(r):
        raise AlgebraError("computed radical is not solvable")
    return r


def lts_radical(m: LieTripleSystem) -> Subspace:
    """M intersected with the radical of its standard envelope, in M's coordinates."""
    p = standard_embedding(m)
    r = radical_lie(p.G)
    inter = r & p.B
    n = m.dim
    return Subspace(n, [p.B.coordinates(v) for v in inter.basis])
