"""Exact tensor core: structure constants, algebras, and identity verifiers.

Conventions
-----------
* ``StructureConstants2`` stores ``c[k][i][j]`` so that ``e_i * e_j = sum_k c[k][i][j] e_k``.
* ``StructureConstants3`` stores ``t[l][i][j][k]`` for ``(e_i, e_j, e_k) = sum_l t[l][i][j][k] e_l``.
* A basis change ``P`` has the new basis vectors as its columns (old coordinates).
"""

from __future__ import annotations

import itertools
import math
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from . import linalg as la
from .linalg import Subspace, frac, frac_str


class AlgebraError(ValueError):
    pass


class InvalidAlgebra(AlgebraError):
    pass


class NotAnIdeal(AlgebraError):
    pass


class DimensionMismatch(AlgebraError):
    pass


class StructureConstants2:
    """Antisymmetric bilinear structure constants."""

    __slots__ = ("dim", "c", "_nz")

    def __init__(self, dim: int, entries: Iterable = ()):
        c = [[[Fraction(0)] * dim for _ in range(dim)] for _ in range(dim)]
        seen = {}
        for k, i, j, v in entries:
            k, i, j, v = int(k), int(i), int(j), frac(v)
            if not all(0 <= x < dim for x in (k, i, j)):
                raise DimensionMismatch(f"index out of range in ({k},{i},{j}) for dim {dim}")
            if i == j and v != 0:
                raise AlgebraError(f"bilinear entry e{i + 1}*e{i + 1} must vanish, got {v}")
            for key, val in (((k, i, j), v), ((k, j, i), -v)):
                if key in seen and seen[key] != val:
                    raise AlgebraError(f"inconsistent antisymmetric entries at {key}")
                seen[key] = val
        for (k, i, j), v in seen.items():
            c[k][i][j] = v
        self.dim = dim
        self.c = tuple(tuple(tuple(r) for r in m) for m in c)
        self._nz = tuple(
            (k, i, j, self.c[k][i][j])
            for k in range(dim)
            for i in range(dim)
            for j in range(dim)
            if self.c[k][i][j] != 0
        )

    @classmethod
    def zero(cls, dim: int) -> "StructureConstants2":
        return cls(dim)

    @classmethod
    def from_table(cls, dim: int, table: dict) -> "StructureConstants2":
        """``table`` maps (i, j) (0-based) to a product vector."""
        entries = []
        for (i, j), v in table.items():
            for k, x in enumerate(v):
                if x:
                    entries.append((k, i, j, x))
        return cls(dim, entries)

    def __call__(self, x: Sequence, y: Sequence) -> tuple:
        out = [Fraction(0)] * self.dim
        for k, i, j, v in self._nz:
            if x[i] and y[j]:
                out[k] += v * x[i] * y[j]
        return tuple(out)

    def basis_product(self, i: int, j: int) -> tuple:
        return tuple(self.c[k][i][j] for k in range(self.dim))

    def nonzero(self):
        return self._nz

    def is_zero(self) -> bool:
        return not self._nz

    def transform(self, p: Sequence[Sequence]) -> "StructureConstants2":
        """Structure constants in the basis given by the columns of p."""
        n = self.dim
        p = la.mat(p)
        pinv = la.inverse(p)
        support = [[(i, p[a][i]) for i in range(n) if p[a][i]] for a in range(n)]
        acc = {}
        for m, a, b, v in self._nz:
            for i, pa in support[a]:
                for j, pb in support[b]:
                    if i < j:
                        acc[(m, i, j)] = acc.get((m, i, j), 0) + v * pa * pb
        prod = {}
        for (m, i, j), v in acc.items():
            if v:
                for k in range(n):
                    if pinv[k][m]:
                        prod[(k, i, j)] = prod.get((k, i, j), 0) + pinv[k][m] * v
        return StructureConstants2(n, [(k, i, j, v) for (k, i, j), v in prod.items() if v])

    def __eq__(self, other):
        return isinstance(other, StructureConstants2) and self.dim == other.dim and self.c == other.c

    def __hash__(self):
        return hash(self.c)

    def to_entries(self) -> list:
        return [[k, i, j, frac_str(v)] for k, i, j, v in self._nz if i < j]

    def to_float(self):
        import numpy as np

        a = np.zeros((self.dim,) * 3)
        for k, i, j, v in self._nz:
            a[k, i, j] = float(v)
        return a

    def __repr__(self):
        return f"StructureConstants2(dim={self.dim}, {self.to_entries()})"


class StructureConstants3:
    """Trilinear structure constants with no built-in symmetry."""

    __slots__ = ("dim", "t", "_nz")

    def __init__(self, dim: int, entries: Iterable = ()):
        t = {}
        for l, i, j, k, v in entries:
            l, i, j, k, v = int(l), int(i), int(j), int(k), frac(v)
            if not all(0 <= x < dim for x in (l, i, j, k)):
                raise DimensionMismatch(f"index out of range in ({l},{i},{j},{k}) for dim {dim}")
            if v:
                t[(l, i, j, k)] = t.get((l, i, j, k), Fraction(0)) + v
        self.dim = dim
        self._nz = tuple(sorted((key + (v,)) for key, v in t.items() if v != 0))
        dense = [[[[Fraction(0)] * dim for _ in range(dim)] for _ in range(dim)] for _ in range(dim)]
        for l, i, j, k, v in self._nz:
            dense[l][i][j][k] = v
        self.t = tuple(tuple(tuple(tuple(r) for r in m) for m in s) for s in dense)

    @classmethod
    def zero(cls, dim: int) -> "StructureConstants3":
        return cls(dim)

    @classmethod
    def from_table(cls, dim: int, table: dict, antisymmetric: bool = True) -> "StructureConstants3":
        """``table`` maps (i, j, k) to a vector; antisymmetric completion in (i, j) by default."""
        entries = []
        done = {}
        for (i, j, k), v in table.items():
            v = la.vec(v)
            prev = done.get((i, j, k))
            if prev is not None and prev != v:
                raise AlgebraError(f"conflicting triple entries at {(i, j, k)}")
            done[(i, j, k)] = v
            if antisymmetric:
                neg = la.scale(-1, v)
                prev = done.get((j, i, k))
                if prev is not None and prev != neg and (j, i, k) in table:
                    raise AlgebraError(f"triple entries at {(i, j, k)} and {(j, i, k)} are not antisymmetric")
                done[(j, i, k)] = neg
        for (i, j, k), v in done.items():
            if i == j and antisymmetric:
                continue
            entries.extend((l, i, j, k, x) for l, x in enumerate(v) if x)
        return cls(dim, entries)

    @classmethod
    def from_operators(cls, a, b, c) -> "StructureConstants3":
        """3-dim tensor from operator matrices A=(e1,e2,-), B=(e2,e3,-), C=(e3,e1,-).

        Column j of each matrix is the image of e_j.
        """
        table = {}
        for (x, y), m in (((0, 1), a), ((1, 2), b), ((2, 0), c)):
            m = la.mat(m)
            for col in range(3):
                table[(x, y, col)] = tuple(m[r][col] for r in range(3))
        return cls.from_table(3, table)

    def __call__(self, x: Sequence, y: Sequence, z: Sequence) -> tuple:
        out = [Fraction(0)] * self.dim
        for l, i, j, k, v in self._nz:
            if x[i] and y[j] and z[k]:
                out[l] += v * x[i] * y[j] * z[k]
        return tuple(out)

    def basis_product(self, i: int, j: int, k: int) -> tuple:
        return tuple(self.t[l][i][j][k] for l in range(self.dim))

    def operator(self, x: Sequence, y: Sequence) -> la.Matrix:
        """Matrix of z -> (x, y, z)."""
        n = self.dim
        cols = [self(x, y, la.unit(n, k)) for k in range(n)]
        return la.transpose(cols)

    def nonzero(self):
        return self._nz

    def is_zero(self) -> bool:
        return not self._nz

    def transform(self, p: Sequence[Sequence]) -> "StructureConstants3":
        n = self.dim
        p = la.mat(p)
        pinv = la.inverse(p)
        # sparse pass over the nonzero constants: rows of p hit by each old index
        support = [[(i, p[a][i]) for i in range(n) if p[a][i]] for a in range(n)]
        acc = {}
        for m, a, b, c, v in self._nz:
            for i, pa in support[a]:
                for j, pb in support[b]:
                    vab = v * pa * pb
                    for k, pc in support[c]:
                        key = (m, i, j, k)
                        acc[key] = acc.get(key, 0) + vab * pc
        entries = []
        for (m, i, j, k), v in acc.items():
            if v:
                for l in range(n):
                    if pinv[l][m]:
                        entries.append((l, i, j, k, pinv[l][m] * v))
        return StructureConstants3(n, entries)

    def __eq__(self, other):
        return isinstance(other, StructureConstants3) and self.dim == other.dim and self._nz == other._nz

    def __hash__(self):
        return hash(self._nz)

    def to_entries(self) -> list:
        return [[l, i, j, k, frac_str(v)] for l, i, j, k, v in self._nz]

    def to_float(self):
        import numpy as np

        a = np.zeros((self.dim,) * 4)
        for l, i, j, k, v in self._nz:
            a[l, i, j, k] = float(v)
        return a

    def __repr__(self):
        return f"StructureConstants3(dim={self.dim}, {self.to_entries()})"


@dataclass(frozen=True)
class LieAlgebra:
    dim: int
    bracket: StructureConstants2
    label: str = ""

    def __post_init__(self):
        if self.bracket.dim != self.dim:
            raise DimensionMismatch("bracket dimension does not match algebra dimension")

    def br(self, x, y):
        return self.bracket(x, y)

    def ad(self, x) -> la.Matrix:
        n = self.dim
        return la.transpose([self.bracket(x, la.unit(n, j)) for j in range(n)])

    def derived(self, s: Subspace | None = None) -> Subspace:
        """[S, S] (the derived algebra when S is omitted)."""
        s = Subspace.full(self.dim) if s is None else s
        return Subspace(self.dim, [self.bracket(a, b) for a in s.basis for b in s.basis])

    def is_solvable(self, s: Subspace | None = None) -> bool:
        s = Subspace.full(self.dim) if s is None else s
        while s.dim:
            nxt = self.derived(s)
            if nxt == s:
                return False
            s = nxt
        return True

    def transform(self, p) -> "LieAlgebra":
        return LieAlgebra(self.dim, self.bracket.transform(p), self.label)


@dataclass(frozen=True)
class LieTripleSystem:
    dim: int
    triple: StructureConstants3
    label: str = ""

    def __post_init__(self):
        if self.triple.dim != self.dim:
            raise DimensionMismatch("triple dimension does not match system dimension")

    def tr(self, x, y, z):
        return self.triple(x, y, z)

    def transform(self, p) -> "LieTripleSystem":
        return LieTripleSystem(self.dim, self.triple.transform(p), self.label)

    def operators(self):
        """Operator matrices A=(e1,e2,-), B=(e2,e3,-), C=(e3,e1,-) of a 3-dim system."""
        if self.dim != 3:
            raise DimensionMismatch("operator matrices are defined for dimension 3")
        e = [la.unit(3, i) for i in range(3)]
        return (self.triple.operator(e[0], e[1]), self.triple.operator(e[1], e[2]), self.triple.operator(e[2], e[0]))


@dataclass(frozen=True)
class BolAlgebra:
    dim: int
    dot: StructureConstants2
    triple: StructureConstants3
    label: str = ""

    def __post_init__(self):
        if self.dot.dim != self.dim or self.triple.dim != self.dim:
            raise DimensionMismatch("operation dimensions do not match algebra dimension")

    def mul(self, x, y):
        return self.dot(x, y)

    def tr(self, x, y, z):
        return self.triple(x, y, z)

    def bracket3(self, x, y, z):
        """The derived ternary operation <x,y,z> = (xy.z - (x,y,z)) / 2."""
        return la.scale(Fraction(1, 2), la.sub(self.dot(self.dot(x, y), z), self.triple(x, y, z)))

    def transform(self, p) -> "BolAlgebra":
        return BolAlgebra(self.dim, self.dot.transform(p), self.triple.transform(p), self.label)

    def as_lts(self) -> LieTripleSystem:
        return LieTripleSystem(self.dim, self.triple, self.label)

    @classmethod
    def from_lts(cls, m: LieTripleSystem) -> "BolAlgebra":
        return cls(m.dim, StructureConstants2.zero(m.dim), m.triple, m.label)


@dataclass
class Violation:
    identity: str
    indices: tuple
    residual: tuple

    def to_json(self):
        return {"identity": self.identity, "indices": list(self.indices), "residual": [frac_str(x) for x in self.residual]}


@dataclass
class ValidityReport:
    valid: bool
    checked: int
    violations: list = field(default_factory=list)

    def __bool__(self):
        return self.valid

    def identities_failed(self) -> set:
        return {v.identity for v in self.violations}

    def to_json(self):
        return {"valid": self.valid, "checked": self.checked, "violations": [v.to_json() for v in self.violations]}


def _report(checks) -> ValidityReport:
    violations = []
    count = 0
    for name, idx, residual in checks:
        count += 1
        if not la.is_zero(residual):
            violations.append(Violation(name, tuple(i + 1 for i in idx), tuple(residual)))
    return ValidityReport(not violations, count, violations)


def _basis(n):
    return [la.unit(n, i) for i in range(n)]


def verify_lie(alg: LieAlgebra) -> ValidityReport:
    """Jacobi identity on every basis triple i < j < k (antisymmetry is structural)."""
    n = alg.dim
    e = _basis(n)
    br = alg.bracket

    def checks():
        for i, j, k in itertools.combinations(range(n), 3):
            r = la.add(la.add(br(e[i], br(e[j], e[k])), br(e[j], br(e[k], e[i]))), br(e[k], br(e[i], e[j])))
            yield "jacobi", (i, j, k), r

    return _report(checks())


def _triple_checks(t: StructureConstants3, n: int, label_prefix: str = ""):
    e = _basis(n)
    for i, j in itertools.product(range(n), repeat=2):
        yield label_prefix + "alternating", (i, i, j), t(e[i], e[i], e[j])
    for i, j, k in itertools.product(range(n), repeat=3):
        r = la.add(la.add(t(e[i], e[j], e[k]), t(e[j], e[k], e[i])), t(e[k], e[i], e[j]))
        yield label_prefix + "cyclic", (i, j, k), r
    # inner derivation law: D = (x,y,-) acts as a derivation of the triple
    ops = {(x, y): t.operator(e[x], e[y]) for x in range(n) for y in range(n)}
    images = {(u, v, w): t(e[u], e[v], e[w]) for u, v, w in itertools.product(range(n), repeat=3)}
    for x, y in itertools.product(range(n), repeat=2):
        if x >= y:
            continue
        d = ops[(x, y)]
        dcols = la.transpose(d)
        for u, v, w in itertools.product(range(n), repeat=3):
            lhs = la.matvec(d, images[(u, v, w)])
            rhs = la.add(
                la.add(t(dcols[u], e[v], e[w]), t(e[u], dcols[v], e[w])),
                t(e[u], e[v], dcols[w]),
            )
            yield label_prefix + "derivation", (x, y, u, v, w), la.sub(lhs, rhs)


def verify_lts(m: LieTripleSystem) -> ValidityReport:
    """(x,x,y)=0, cyclic sum zero, and the inner-derivation law on all basis tuples."""
    fast = _int_checks(None, m.triple, m.dim)
    return fast if fast is not None else _report(_triple_checks(m.triple, m.dim))


def verify_bol(b: BolAlgebra) -> ValidityReport:
    """Identities (x,x,y)=0, cyclic, derivation, and the mixed dot/triple identity.

    The mixed identity is read as
    (x,y,z).w - (x,y,w).z + (z,w,x.y) - (x,y,z.w) + (x.y).(z.w) = 0.
    """
    fast = _int_checks(b.dot, b.triple, b.dim)
    return fast if fast is not None else verify_bol_reference(b)


def verify_bol_reference(b: BolAlgebra) -> ValidityReport:
    """Same identities as ``verify_bol``, evaluated one basis tuple at a time."""
    n = b.dim
    e = _basis(n)
    d, t = b.dot, b.triple

    def checks():
        yield from _triple_checks(t, n)
        for x, y, z, w in itertools.product(range(n), repeat=4):
            if x >= y:
                continue
            xy = d(e[x], e[y])
            r = la.sub(d(t(e[x], e[y], e[z]), e[w]), d(t(e[x], e[y], e[w]), e[z]))
            r = la.add(r, t(e[z], e[w], xy))
            r = la.sub(r, t(e[x], e[y], d(e[z], e[w])))
            r = la.add(r, d(xy, d(e[z], e[w])))
            yield "mixed", (x, y, z, w), r

    return _report(checks())


def verify_lts_reference(m: LieTripleSystem) -> ValidityReport:
    return _report(_triple_checks(m.triple, m.dim))


_INT_LIMIT = 2**40


def _int_checks(dot, tri, n):
    """Vectorised identity checks in int64 after clearing denominators.

    The dot is scaled by D and the triple by D^2, D the common denominator,
    which keeps every identity homogeneous. Returns None when the scaled
    constants are too large for int64 to stay exact.
    """
    import numpy as np

    vals = [v for *_, v in tri.nonzero()] + ([v for *_, v in dot.nonzero()] if dot is not None else [])
    den = 1
    for v in vals:
        den = math.lcm(den, v.denominator)
    c = np.zeros((n, n, n), dtype=np.int64)
    t = np.zeros((n,) * 4, dtype=np.int64)
    big = 0
    if dot is not None:
        for k, i, j, v in dot.nonzero():
            x = v.numerator * (den // v.denominator)
            big = max(big, abs(x))
            c[k, i, j] = x if abs(x) < _INT_LIMIT else 0
    for l, i, j, k, v in tri.nonzero():
        x = v.numerator * (den * den // v.denominator)
        big = max(big, abs(x))
        t[l, i, j, k] = x if abs(x) < _INT_LIMIT else 0
    if big and n * n * big**3 >= 2**62:
        return None
    if big and n * big * big >= 2**62:
        return None
    out = []
    count = 0

    def collect(name, res, scale, keep=None):
        # res has the output index first; remaining axes are the basis tuple
        nonlocal count
        idx_shape = res.shape[1:]
        for idx in itertools.product(*(range(s) for s in idx_shape)):
            if keep is not None and not keep(idx):
                continue
            count += 1
            vec = res[(slice(None),) + idx]
            if vec.any():
                out.append(Violation(name, tuple(i + 1 for i in idx), tuple(Fraction(int(x), scale) for x in vec)))

    d2 = den * den
    collect("alternating", np.stack([t[:, i, i, :] for i in range(n)], 1), d2)
    collect("cyclic", t + t.transpose(0, 2, 3, 1) + t.transpose(0, 3, 1, 2), d2)
    lhs = np.einsum("lxym,muvw->lxyuvw", t, t)
    rhs = np.einsum("axyu,lavw->lxyuvw", t, t) + np.einsum("axyv,luaw->lxyuvw", t, t) + np.einsum("axyw,luva->lxyuvw", t, t)
    collect("derivation", lhs - rhs, d2 * d2, lambda idx: idx[0] < idx[1])
    if dot is not None:
        r = (np.einsum("axyz,kaw->kxyzw", t, c) - np.einsum("axyw,kaz->kxyzw", t, c) + np.einsum("axy,kzwa->kxyzw", c, t)
             - np.einsum("azw,kxya->kxyzw", c, t) + np.einsum("axy,bzw,kab->kxyzw", c, c, c))
        collect("mixed", r, d2 * den, lambda idx: idx[0] < idx[1])
    return ValidityReport(not out, count, out)


def _as_subspace(m_dim: int, s) -> Subspace:
    if isinstance(s, Subspace):
        if s.n != m_dim:
            raise DimensionMismatch(f"subspace lives in dimension {s.n}, system has dimension {m_dim}")
        return s
    return Subspace(m_dim, s)


def triple_span(t: StructureConstants3, a: Subspace, b: Subspace, c: Subspace) -> Subspace:
    return Subspace(t.dim, [t(x, y, z) for x in a.basis for y in b.basis for z in c.basis])


def is_ideal_lts(m: LieTripleSystem, s) -> bool:
    """True iff (S, M, M) is contained in S."""
    s = _as_subspace(m.dim, s)
    full = Subspace.full(m.dim)
    return s.contains_space(triple_span(m.triple, s, full, full))


def derived_series_lts(m: LieTripleSystem, s=None) -> list[Subspace]:
    """S, (M,S,S), (M,S',S'), ... until it stabilises or reaches zero."""
    s = Subspace.full(m.dim) if s is None else _as_subspace(m.dim, s)
    if not is_ideal_lts(m, s):
        raise NotAnIdeal(f"{s} is not an ideal: (S,M,M) is not contained in S")
    full = Subspace.full(m.dim)
    series = [s]
    while series[-1].dim:
        nxt = triple_span(m.triple, full, series[-1], series[-1])
        if nxt == series[-1]:
            break
        if not is_ideal_lts(m, nxt):
            raise NotAnIdeal(f"derived term {nxt} is not an ideal")
        series.append(nxt)
    return series


def is_solvable_lts(m: LieTripleSystem, s=None) -> bool:
    return derived_series_lts(m, s)[-1].dim == 0


@dataclass(frozen=True)
class InvariantVector:
    derived_dim: int
    triple_dim: int
    center_dim: int
    adjoint: tuple  # (operator span rank, generic multiplicity pattern, generic minimal-poly degree)
    trace_form: tuple  # inertia of (x, y) -> tr(z -> (z, x, y)) symmetrised

    def to_json(self):
        return {
            "derived_dim": self.derived_dim,
            "triple_dim": self.triple_dim,
            "center_dim": self.center_dim,
            "adjoint": [self.adjoint[0], list(self.adjoint[1]), self.adjoint[2]],
            "trace_form": list(self.trace_form),
        }

    def differing_fields(self, other: "InvariantVector") -> list[str]:
        return [f for f in ("derived_dim", "triple_dim", "center_dim", "adjoint", "trace_form") if getattr(self, f) != getattr(other, f)]


def _restrict(op, v: Subspace):
    """Matrix of op restricted to the invariant subspace v, in v's basis."""
    return la.transpose([v.coordinates(la.matvec(op, b)) for b in v.basis])


def _multiplicity_pattern(cp) -> tuple:
    """Sorted root multiplicities of a polynomial over C (coefficients highest first)."""
    p = la.poly_trim(list(cp))
    pattern = []
    while len(p) > 1:
        g = la.poly_gcd(p, la.poly_derivative(p))
        distinct = (len(p) - 1) - (len(g) - 1)
        pattern.append(distinct)
        p = g
    # pattern[k] = number of roots with multiplicity > k
    mult = []
    for k in range(len(pattern)):
        nxt = pattern[k + 1] if k + 1 < len(pattern) else 0
        mult.extend([k + 1] * (pattern[k] - nxt))
    return tuple(sorted(mult))


def invariants(b: BolAlgebra, check: bool = True, seed: int = 20240611) -> InvariantVector:
    """Basis-independent invariants; equal vectors are necessary for isomorphism."""
    if check and not verify_bol(b):
        raise InvalidAlgebra("invariants require a valid Bol algebra")
    n = b.dim
    e = _basis(n)
    full = Subspace.full(n)
    derived = Subspace(n, [b.dot(e[i], e[j]) for i in range(n) for j in range(n)])
    tspan = triple_span(b.triple, full, full, full)
    # center: z with z.M = 0 and (z, M, M) = 0
    rows = []
    for i in range(n):
        for k in range(n):
            rows.append(tuple(b.dot(e[z], e[i])[k] for z in range(n)))
        for j in range(n):
            for k in range(n):
                rows.append(tuple(b.triple(e[z], e[i], e[j])[k] for z in range(n)))
    center_dim = len(la.nullspace(rows, n))

    # adjoint family L_x : v -> x.v restricted to the derived subspace
    if derived.dim:
        ops = [_restrict(la.transpose([b.dot(e[x], bb) for bb in e]), derived) for x in range(n)]
        span_rank = la.rank([tuple(v for row in op for v in row) for op in ops])
        rng = random.Random(seed)
        best_pattern, best_deg = None, -1
        for _ in range(3):
            coeffs = [Fraction(rng.randint(-10**6, 10**6)) for _ in range(n)]
            op = ops[0]
            op = la.zero_matrix(derived.dim)
            for c, o in zip(coeffs, ops):
                op = la.matadd(op, la.matscale(c, o))
            pat = _multiplicity_pattern(la.charpoly(op))
            deg = la.minimal_poly_degree(op)
            if deg > best_deg or (deg == best_deg and len(pat) > len(best_pattern)):
                best_pattern, best_deg = pat, deg
        adjoint = (span_rank, best_pattern, best_deg)
    else:
        adjoint = (0, (), 0)

    # trace form of the triple: K(x, y) = tr(z -> (z, x, y)), symmetrised
    kmat = [[Fraction(0)] * n for _ in range(n)]
    for x in range(n):
        for y in range(n):
            kmat[x][y] = sum((b.triple(e[z], e[x], e[y])[z] for z in range(n)), Fraction(0))
    sym = [[(kmat[i][j] + kmat[j][i]) / 2 for j in range(n)] for i in range(n)]
    return InvariantVector(derived.dim, tspan.dim, center_dim, adjoint, la.inertia(sym))


# --- JSON -----------------------------------------------------------------


def sc2_from_json(dim: int, entries) -> StructureConstants2:
    return StructureConstants2(dim, [(k, i, j, v) for k, i, j, v in entries])


def sc3_from_json(dim: int, entries) -> StructureConstants3:
    return StructureConstants3(dim, [(l, i, j, k, v) for l, i, j, k, v in entries])


def algebra_to_json(obj) -> dict:
    if isinstance(obj, LieAlgebra):
        return {"kind": "lie", "dim": obj.dim, "label": obj.label, "bilinear": obj.bracket.to_entries(), "trilinear": []}
    if isinstance(obj, LieTripleSystem):
        return {"kind": "lts", "dim": obj.dim, "label": obj.label, "bilinear": [], "trilinear": obj.triple.to_entries()}
    if isinstance(obj, BolAlgebra):
        return {"kind": "bol", "dim": obj.dim, "label": obj.label, "bilinear": obj.dot.to_entries(), "trilinear": obj.triple.to_entries()}
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def algebra_from_json(data: dict, kind: str | None = None):
    """Build a LieAlgebra, LieTripleSystem or BolAlgebra from the shared schema.

    Without an explicit "kind", a tensor with only bilinear data is a Lie algebra,
    only trilinear data a Lie triple system, and both a Bol algebra.
    """
    if "dim" not in data:
        raise AlgebraError("missing 'dim'")
    dim = int(data["dim"])
    bil = data.get("bilinear", []) or []
    tri = data.get("trilinear", []) or []
    label = data.get("label", "")
    kind = kind or data.get("kind")
    if kind is None:
        kind = "bol" if (bil and tri) else ("lts" if tri else "lie")
    for row in bil:
        if len(row) != 4:
            raise AlgebraError(f"bilinear entry {row!r} must be [k, i, j, value]")
    for row in tri:
        if len(row) != 5:
            raise AlgebraError(f"trilinear entry {row!r} must be [l, i, j, k, value]")
    if kind == "lie":
        return LieAlgebra(dim, sc2_from_json(dim, bil), label)
    if kind == "lts":
        return LieTripleSystem(dim, sc3_from_json(dim, tri), label)
    if kind == "bol":
        return BolAlgebra(dim, sc2_from_json(dim, bil), sc3_from_json(dim, tri), label)
    raise AlgebraError(f"unknown kind {kind!r}")


def dumps(obj) -> str:
    return json.dumps(algebra_to_json(obj), sort_keys=True)


# --- construction helpers ---------------------------------------------------


def lie_from_brackets(dim: int, brackets: dict, label: str = "") -> LieAlgebra:
    """``brackets`` maps 1-based (i, j) to {k: coeff} (1-based), e.g. {(2, 3): {4: 1}}."""
    entries = []
    for (i, j), out in brackets.items():
        for k, v in out.items():
            entries.append((k - 1, i - 1, j - 1, v))
    return LieAlgebra(dim, StructureConstants2(dim, entries), label)


def sc2_from_products(dim: int, products: dict) -> StructureConstants2:
    """Same 1-based dictionary format as ``lie_from_brackets``."""
    entries = []
    for (i, j), out in products.items():
        for k, v in out.items():
            entries.append((k - 1, i - 1, j - 1, v))
    return StructureConstants2(dim, entries)


def sc3_from_products(dim: int, products: dict) -> StructureConstants3:
    """1-based {(i, j, k): {l: coeff}}; antisymmetric completion in (i, j)."""
    table = {}
    for (i, j, k), out in products.items():
        v = [Fraction(0)] * dim
        for l, c in out.items():
            v[l - 1] += frac(c)
        table[(i - 1, j - 1, k - 1)] = tuple(v)
    return StructureConstants3.from_table(dim, table)


def lts_from_lie(alg: LieAlgebra, label: str = "") -> LieTripleSystem:
    """(x, y, z) = [[x, y], z] on the whole algebra."""
    n = alg.dim
    e = _basis(n)
    entries = []
    for i, j, k in itertools.product(range(n), repeat=3):
        v = alg.bracket(alg.bracket(e[i], e[j]), e[k])
        entries.extend((l, i, j, k, x) for l, x in enumerate(v) if x)
    return LieTripleSystem(n, StructureConstants3(n, entries), label or alg.label)


def random_invertible(n: int, rng: random.Random, lo: int = -3, hi: int = 3) -> la.Matrix:
    while True:
        p = tuple(tuple(Fraction(rng.randint(lo, hi)) for _ in range(n)) for _ in range(n))
        if la.det(p) != 0:
            return p
