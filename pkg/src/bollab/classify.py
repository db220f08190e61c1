"""Isomorphism types of small Lie triple systems and Bol algebras."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import linalg as la
from .envelope import EnvelopePair, InvalidLTS, derivation_space
from .linalg import Subspace, frac_str
from .structures import (
    AlgebraError,
    BolAlgebra,
    DimensionMismatch,
    LieTripleSystem,
    StructureConstants2,
    StructureConstants3,
    invariants,
    is_solvable_lts,
    verify_bol,
    verify_lts,
)


class NotSolvable(AlgebraError):
    pass


class NotDim3(DimensionMismatch):
    pass


class Unclassifiable(AlgebraError):
    pass


class NotBetaForm(AlgebraError):
    pass


class MalformedWitness(AlgebraError):
    pass


# --- canonical 3-dim tensors -------------------------------------------------


def _ops(a=None, b=None, c=None):
    z = la.zero_matrix(3)
    return StructureConstants3.from_operators(la.mat(a) if a else z, la.mat(b) if b else z, la.mat(c) if c else z)


def canonical_lts3(tag: str) -> LieTripleSystem:
    """Canonical tensor for a type tag such as "I", "III-", "V+".

    Sign convention: the "-" variant is the one whose trace form is positive,
    e.g. III- has (e1,e2,e2) = e1, III+ has (e1,e2,e2) = -e1.
    """
    base, sign = (tag[:-1], tag[-1]) if tag[-1] in "+-" else (tag, "")
    s = 1 if sign == "-" else -1
    r0 = lambda *v: [list(v), [0, 0, 0], [0, 0, 0]]
    if base == "I":
        t = StructureConstants3.zero(3)
    elif base == "II":
        t = _ops(b=r0(0, 0, 1))
    elif base == "III":
        t = _ops(a=r0(0, s, 0))
    elif base == "IV":
        t = _ops(a=r0(0, s, 1), c=r0(0, -1, -s))
    elif base == "V":
        t = _ops(b=[[0, 1, 0], [0, 0, s], [0, 0, 0]])
    elif base == "VI":
        t = _ops(b=r0(0, 0, 1), c=[[0, 0, 0], [0, 0, 1], [0, 0, 0]])
    elif base == "VII":
        t = _ops(b=r0(1, 0, 0), c=r0(0, -1, 0))
    else:
        raise KeyError(tag)
    return LieTripleSystem(3, t, f"LTS/{tag}")


LTS3_TAGS = ("I", "II", "III-", "III+", "IV-", "IV+", "V-", "V+", "VI", "VII")


@dataclass(frozen=True)
class LTS3Type:
    base: str
    sign: str = ""
    P: tuple = ()
    exact: bool = True

    @property
    def tag(self):
        return self.base + self.sign

    def __str__(self):
        return f"Type {self.tag}"

    def to_json(self):
        conv = frac_str if self.exact else float
        return {"type": self.tag, "P": [[conv(x) for x in row] for row in self.P], "exact": self.exact}


def _sqrt(q: Fraction):
    """Exact square root when q is a rational square, else a float."""
    q = Fraction(q)
    n, d = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if n * n == q.numerator and d * d == q.denominator:
        return Fraction(n, d)
    return math.sqrt(q)


def _tensor_array(t: StructureConstants3) -> np.ndarray:
    n = t.dim
    a = np.zeros((n, n, n, n))
    for l, i, j, k, v in t.nonzero():
        a[l, i, j, k] = float(v)
    return a


def _transform_array(a: np.ndarray, p) -> np.ndarray:
    p = np.array([[float(x) for x in row] for row in p])
    q = np.linalg.inv(p)
    return np.einsum("ml,lijk,ia,jb,kc->mabc", q, a, p, p, p)


def _omega_D(m: LieTripleSystem):
    """Write t = omega (x) D when the inner derivations span a line."""
    ds = derivation_space(m)
    if ds.rank != 1:
        return None
    d = ds.basis[0]
    n = m.dim
    w = [[Fraction(0)] * n for _ in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        c = ds.coordinates(m.triple.operator(la.unit(n, i), la.unit(n, j)))[0]
        w[i][j], w[j][i] = c, -c
    return la.mat(w), d


def _bil(w, x, y):
    return la.dot(x, la.matvec(w, y))


def _pick(n, pred):
    for i in range(n):
        v = la.unit(n, i)
        if pred(v):
            return v
    # generic combinations as a fallback
    for cs in itertools.product(range(-2, 3), repeat=n):
        v = la.vec(cs)
        if not la.is_zero(v) and pred(v):
            return v
    return None


def _normalize(m: LieTripleSystem):
    """Return (base, sign, columns of P) or raise Unclassifiable."""
    n = 3
    mp = Subspace(n, [m.triple.basis_product(i, j, k) for i in range(n) for j in range(n) for k in range(n)])
    rank_h = derivation_space(m).rank
    if mp.dim == 0:
        return "I", "", [la.unit(n, i) for i in range(n)]
    if mp.dim == 1 and rank_h == 1:
        w, d = _omega_D(m)
        f3 = _pick(n, lambda v: not la.is_zero(la.matvec(d, v)))
        dv = la.matvec(d, f3)
        q = _bil(w, dv, f3)
        if q == 0:
            # (f2, f3, f3) = f1 with f1 = D f3
            f1 = dv
            kern = Subspace(n, la.nullspace(d, n))
            f2 = next(v for v in kern.basis if not Subspace(n, [f1]).contains(v))
            s = _bil(w, f2, f3)
            if s == 0:
                raise Unclassifiable("degenerate skew form")
            return "II", "", [f1, la.scale(1 / s, f2), f3]
        # III: f2 with D f2 != 0, f1 = D f2, f3 in ker omega
        lam = 1 / _sqrt(abs(q))
        f2 = la.scale(lam, f3) if isinstance(lam, Fraction) else tuple(lam * float(x) for x in f3)
        f1 = la.matvec(d, f2) if isinstance(lam, Fraction) else tuple(float(x) for x in np.array(la.to_float(d)) @ np.array(f2))
        kw = la.nullspace(w, n)
        if len(kw) != 1:
            raise Unclassifiable("skew form of unexpected rank")
        return "III", "-" if q > 0 else "+", [f1, f2, kw[0]]
    if mp.dim == 2 and rank_h == 1:
        w, d = _omega_D(m)
        u = _pick(n, lambda v: not la.is_zero(la.matvec(d, la.matvec(d, v))))
        if u is None:
            raise Unclassifiable("derivation is not of nilpotency index 3")
        r = _bil(w, la.matvec(d, u), u)
        if r == 0:
            raise Unclassifiable("degenerate skew form")
        lam = 1 / _sqrt(abs(r))
        if isinstance(lam, Fraction):
            f3 = la.scale(lam, u)
            f2 = la.matvec(d, f3)
            f1 = la.scale(_bil(w, f2, f3), la.matvec(d, f2))
        else:
            dd = np.array(la.to_float(d))
            wf = np.array(la.to_float(w))
            f3 = lam * np.array([float(x) for x in u])
            f2 = dd @ f3
            f1 = (f2 @ wf @ f3) * (dd @ f2)
            f1, f2, f3 = tuple(f1), tuple(f2), tuple(f3)
        return "V", "-" if r > 0 else "+", [f1, f2, f3]
    if mp.dim == 2 and rank_h == 2:
        e = [la.unit(n, i) for i in range(n)]
        # kernel of z -> all (ei, ej, z)
        rows = []
        for i, j in itertools.combinations(range(n), 2):
            rows.extend(m.triple.operator(e[i], e[j]))
        kern = Subspace(n, la.nullspace(rows, n))
        if kern != mp:
            raise Unclassifiable("annihilated directions differ from the derived subsystem")
        f3 = next(v for v in e if v not in mp)
        wm = lambda x: m.triple(x, f3, f3)
        f1 = mp.basis[0]
        wf1 = wm(f1)
        w2 = wm(wf1)
        # on mp, W^2 = -kappa Id is required
        kappa = None
        for i in range(n):
            if f1[i]:
                kappa = -w2[i] / f1[i]
                break
        if kappa is None or kappa <= 0 or la.sub(w2, la.scale(-kappa, f1)) != la.zeros(n):
            raise Unclassifiable("rotation part is not elliptic")
        # W is quadratic in f3, so f3 scales by kappa^(-1/4)
        lam2 = 1 / _sqrt(kappa)
        lam = _sqrt(lam2) if isinstance(lam2, Fraction) else math.sqrt(lam2)
        if isinstance(lam, Fraction):
            f3 = la.scale(lam, f3)
            f2 = la.scale(-1, m.triple(f1, f3, f3))
        else:
            f3 = tuple(lam * float(x) for x in f3)
            f2 = tuple(-lam * lam * float(x) for x in wf1)
            f1 = tuple(float(x) for x in f1)
        return "VI", "", [f1, f2, f3]
    raise Unclassifiable(f"no canonical form with dim M'={mp.dim}, dim H={rank_h}")


def classify_lts3(m: LieTripleSystem) -> LTS3Type:
    """Type tag of a solvable 3-dim Lie triple system with a normalising basis change.

    P (columns = new basis) carries m to the canonical tensor of the type.
    """
    if m.dim != 3:
        raise NotDim3(f"expected dimension 3, got {m.dim}")
    if not verify_lts(m):
        raise InvalidLTS("input is not a Lie triple system")
    if not is_solvable_lts(m):
        raise NotSolvable("input is not solvable")
    base, sign, cols = _normalize(m)
    exact = all(isinstance(x, Fraction) for v in cols for x in v)
    p = la.transpose(cols) if exact else tuple(tuple(float(v[i]) for v in cols) for i in range(3))
    canon = canonical_lts3(base + sign).triple
    if exact:
        if la.det(p) == 0 or m.triple.transform(p) != canon:
            raise Unclassifiable("normalisation did not reach the canonical tensor")
    else:
        got = _transform_array(_tensor_array(m.triple), p)
        if not np.allclose(got, _tensor_array(canon), atol=1e-10):
            raise Unclassifiable("normalisation did not reach the canonical tensor")
    return LTS3Type(base, sign, p, exact)


# --- 2-dim systems ------------------------------------------------------------

LTS2_CASES = {
    (2, 0, 0): "spherical",
    (0, 2, 0): "lobachevski",
    (1, 1, 0): "noncompact",
    (1, 0, 1): "solvable_a",
    (0, 1, 1): "solvable_b",
    (0, 0, 2): "abelian",
}


@dataclass(frozen=True)
class LTS2Form:
    case: str
    beta: tuple  # normalised diagonal matrix
    raw_beta: tuple

    def to_json(self):
        return {"case": self.case, "beta": [[frac_str(x) for x in r] for r in self.beta], "raw_beta": [[frac_str(x) for x in r] for r in self.raw_beta]}


def beta_triple(beta, reading: str = "isocline") -> StructureConstants3:
    """(x,y,z) = b(x,z)y - b(y,z)x; reading="printed" uses b(x,y)y - b(y,z)x."""
    beta = la.mat(beta)
    n = len(beta)
    ent = []
    for i, j, k in itertools.product(range(n), repeat=3):
        bxz = beta[i][j] if reading == "printed" else beta[i][k]
        v = la.sub(la.scale(bxz, la.unit(n, j)), la.scale(beta[j][k], la.unit(n, i)))
        ent.extend((l, i, j, k, c) for l, c in enumerate(v) if c)
    return StructureConstants3(n, ent)


def normalize_lts2(m: LieTripleSystem, reading: str = "isocline") -> LTS2Form:
    if m.dim != 2:
        raise DimensionMismatch("expected dimension 2")
    # unknowns b11, b12, b22; linear in beta
    basis = [((1, 0), (0, 0)), ((0, 1), (1, 0)), ((0, 0), (0, 1))]
    cols = []
    for b in basis:
        t = beta_triple(b, reading)
        cols.append([t.basis_product(i, j, k)[l] for l, i, j, k in itertools.product(range(2), repeat=4)])
    target = [m.triple.basis_product(i, j, k)[l] for l, i, j, k in itertools.product(range(2), repeat=4)]
    sol = la.solve(la.transpose(cols), target)
    if sol is None:
        raise NotBetaForm("no symmetric form reproduces the tensor")
    raw = la.mat([[sol[0], sol[1]], [sol[1], sol[2]]])
    npos, nneg, nzero = la.inertia(raw)
    diag = [1] * npos + [-1] * nneg + [0] * nzero
    beta = la.mat([[diag[i] if i == j else 0 for j in range(2)] for i in range(2)])
    return LTS2Form(LTS2_CASES[(npos, nneg, nzero)], beta, raw)


# --- isocline algebras ------------------------------------------------------


def isocline_bol(alpha, beta, label: str = "") -> BolAlgebra:
    """x.y = a(x)y - a(y)x and <x,y,z> = b(x,z)y - b(y,z)x."""
    alpha = la.vec(alpha)
    beta = la.mat(beta)
    n = len(alpha)
    e = [la.unit(n, i) for i in range(n)]
    dot = []
    for i, j in itertools.combinations(range(n), 2):
        v = la.sub(la.scale(alpha[i], e[j]), la.scale(alpha[j], e[i]))
        dot.extend((k, i, j, c) for k, c in enumerate(v) if c)
    d = StructureConstants2(n, dot)
    tri = []
    for i, j, k in itertools.product(range(n), repeat=3):
        br = la.sub(la.scale(beta[i][k], e[j]), la.scale(beta[j][k], e[i]))
        # (x,y,z) = -2<x,y,z> + xy.z
        v = la.add(la.scale(-2, br), d(d(e[i], e[j]), e[k]))
        tri.extend((l, i, j, k, c) for l, c in enumerate(v) if c)
    return BolAlgebra(n, d, StructureConstants3(n, tri), label)


def _random_rational(rng: random.Random, lo=-5, hi=5):
    den = rng.randint(1, 4)
    return Fraction(rng.randint(lo * den, hi * den), den)


def plane_axiom_check(b: BolAlgebra, trials: int = 100, seed: int = 0) -> bool:
    """Every sampled 2-dim subspace is closed under both operations."""
    if b.dim < 2:
        raise DimensionMismatch("plane axiom needs dimension >= 2")
    rng = random.Random(seed)
    n = b.dim
    done = 0
    while done < trials:
        u = la.vec(_random_rational(rng) for _ in range(n))
        v = la.vec(_random_rational(rng) for _ in range(n))
        plane = Subspace(n, [u, v])
        if plane.dim != 2:
            continue
        done += 1
        x, y = plane.basis
        if b.mul(x, y) not in plane:
            return False
        for p, q, r in itertools.product((x, y), repeat=3):
            if b.tr(p, q, r) not in plane:
                return False
    return True


# --- isomorphism verdicts ---------------------------------------------------


@dataclass(frozen=True)
class Distinguished:
    invariant: str

    def to_json(self):
        return {"verdict": "distinguished", "invariant": self.invariant}


@dataclass(frozen=True)
class Witness:
    P: tuple

    def to_json(self):
        return {"verdict": "witness", "P": [[frac_str(x) for x in row] for row in self.P]}


@dataclass(frozen=True)
class Inconclusive:
    tried: int = 0

    def to_json(self):
        return {"verdict": "inconclusive", "tried": self.tried}


def _transports(b1: BolAlgebra, b2: BolAlgebra, p) -> bool:
    if la.det(p) == 0:
        return False
    return b1.dot.transform(p) == b2.dot and b1.triple.transform(p) == b2.triple


def _perm_diag(n):
    vals = [Fraction(v) for v in (1, -1, 2, -2, Fraction(1, 2), Fraction(-1, 2))]
    for perm in itertools.permutations(range(n)):
        for ds in itertools.product(vals, repeat=n):
            yield la.mat([[ds[j] if perm[j] == i else 0 for j in range(n)] for i in range(n)])


def _poly_interp(xs, ys):
    """Coefficients (highest first) of the interpolating polynomial."""
    n = len(xs)
    coeffs = [Fraction(0)] * n
    for i in range(n):
        num = [Fraction(1)]
        den = Fraction(1)
        for j in range(n):
            if j == i:
                continue
            num = [a - xs[j] * b for a, b in zip(num + [Fraction(0)], [Fraction(0)] + num)]
            den *= xs[i] - xs[j]
        for k, c in enumerate(num):
            coeffs[k] += ys[i] * c / den
    return coeffs


def _rational_roots(p):
    import sympy

    p = la.poly_trim(list(p))
    if len(p) <= 1:
        return []
    x = sympy.Symbol("x")
    poly = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in p], x)
    return [Fraction(int(r.p), int(r.q)) for r in poly.ground_roots() if r.is_rational]


def _shear_witnesses(b1, b2, n):
    """Signed diagonal composed with one shear e_j += c e_i, c solved exactly."""
    xs = [Fraction(k) for k in range(6)]
    for signs in itertools.product((1, -1), repeat=n):
        for i, j in itertools.permutations(range(n), 2):

            def pm(c):
                m = [[Fraction(signs[r]) if r == s else Fraction(0) for s in range(n)] for r in range(n)]
                m[i][j] = c
                return la.mat(m)

            # residual components are polynomials of degree <= 4 in c
            samples = []
            for c in xs:
                p = pm(c)
                r2 = b1.dot.transform(p)
                r3 = b1.triple.transform(p)
                samples.append(_flat(r2, n, 2, b2) + _flat(r3, n, 3, b2))
            g = None
            for comp in range(len(samples[0])):
                poly = _poly_interp(xs, [s[comp] for s in samples])
                if all(c == 0 for c in poly):
                    continue
                g = poly if g is None else la.poly_gcd(g, poly)
            cands = [Fraction(0)] if g is None else _rational_roots(g)
            for c in cands:
                p = pm(c)
                yield p


def _flat(t, n, order, ref):
    if order == 2:
        return [t.basis_product(i, j)[k] - ref.dot.basis_product(i, j)[k] for i, j in itertools.combinations(range(n), 2) for k in range(n)]
    return [t.basis_product(i, j, k)[l] - ref.triple.basis_product(i, j, k)[l] for i, j, k in itertools.product(range(n), repeat=3) for l in range(n)]


def isomorphic_bol(b1: BolAlgebra, b2: BolAlgebra):
    """Distinguished by an invariant, Witness(P) with P: b1 -> b2, or Inconclusive.

    Any returned witness has been checked exactly.
    """
    if b1.dim != b2.dim:
        raise DimensionMismatch("dimensions differ")
    diff = invariants(b1, check=False).differing_fields(invariants(b2, check=False))
    if diff:
        return Distinguished(diff[0])
    n = b1.dim
    tried = 0
    for p in _perm_diag(n):
        tried += 1
        if _transports(b1, b2, p):
            return Witness(p)
    for p in _shear_witnesses(b1, b2, n):
        tried += 1
        if _transports(b1, b2, p):
            return Witness(p)
    return Inconclusive(tried)


# --- isotopy witnesses ------------------------------------------------------


@dataclass(frozen=True)
class IsotopyWitness:
    phi: tuple  # Lie algebra map G1 -> G2 (columns = images of basis vectors)
    xi: tuple  # vector of G2 lying in B2
    ad: tuple | None = None  # optional supplied matrix for Ad(xi)

    def to_json(self):
        d = {"phi": [[frac_str(x) for x in r] for r in self.phi], "xi": [frac_str(x) for x in self.xi]}
        if self.ad is not None:
            d["ad"] = [[frac_str(x) if isinstance(x, Fraction) else x for x in r] for r in self.ad]
        return d


def exp_ad(g, xi):
    """exp(ad xi): exact when ad xi is nilpotent, otherwise a float matrix."""
    a = g.ad(xi)
    n = g.dim
    term = la.identity(n)
    total = la.identity(n)
    for k in range(1, n + 1):
        term = la.matscale(Fraction(1, k), la.matmul(term, a))
        if all(la.is_zero(r) for r in term):
            return total
        total = la.matadd(total, term)
    from scipy.linalg import expm

    return tuple(map(tuple, expm(np.array(la.to_float(a)))))


def _same_span_float(u, v, tol=1e-10):
    u = np.array(u, dtype=float)
    v = np.array(v, dtype=float)
    if u.shape != v.shape:
        return False
    r = np.linalg.matrix_rank(u, tol)
    return r == np.linalg.matrix_rank(np.vstack([u, v]), tol) == np.linalg.matrix_rank(v, tol)


def isotopy_witness_check(p1: EnvelopePair, p2: EnvelopePair, w: IsotopyWitness) -> bool:
    n = p1.G.dim
    try:
        phi = la.mat(w.phi)
        xi = la.vec(w.xi)
    except (TypeError, ValueError) as exc:
        raise MalformedWitness(str(exc)) from exc
    if p2.G.dim != n or len(phi) != n or any(len(r) != n for r in phi) or len(xi) != n:
        raise MalformedWitness("witness shapes do not match the pairs")
    if xi not in p2.B:
        raise MalformedWitness("xi must lie in B of the second pair")
    if la.det(phi) == 0:
        return False
    e = [la.unit(n, i) for i in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        if la.matvec(phi, p1.G.bracket(e[i], e[j])) != p2.G.bracket(la.matvec(phi, e[i]), la.matvec(phi, e[j])):
            return False
    if p1.B.image(phi) != p2.B:
        return False
    ad = w.ad if w.ad is not None else exp_ad(p2.G, xi)
    lhs = [la.matvec(phi, v) for v in p1.h.basis]
    if all(isinstance(x, Fraction) for r in ad for x in r):
        return Subspace(n, lhs) == p2.h.image(la.mat(ad))
    adf = np.array(ad, dtype=float)
    rhs = [adf @ np.array(v, dtype=float) for v in p2.h.basis]
    return _same_span_float([[float(x) for x in v] for v in lhs], rhs)


# --- envelopes up to isomorphism ----------------------------------------------


def envelope_isomorphism(p1: EnvelopePair, p2: EnvelopePair):
    """Lie algebra isomorphism G1 -> G2 carrying B1 onto B2, or None.

    Both B's carry the triple [[x,y],z]; each is brought to canonical form
    and the composite basis change is extended through brackets, since both
    G's are assumed to be generated by B. The result is checked exactly.
    """
    n = p1.G.dim
    if p2.G.dim != n or p1.B.dim != 3 or p2.B.dim != 3:
        return None
    m1 = LieTripleSystem(3, _pair_triple(p1))
    m2 = LieTripleSystem(3, _pair_triple(p2))
    try:
        t1, t2 = classify_lts3(m1), classify_lts3(m2)
    except AlgebraError:
        return None
    if (t1.base, t1.sign) != (t2.base, t2.sign) or not (t1.exact and t2.exact):
        return None
    # B-coordinates: f = P2 P1^-1
    f = la.matmul(t2.P, la.inverse(t1.P))
    b1, b2 = p1.B.basis, p2.B.basis
    img = lambda x: la.lincomb(la.matvec(f, x), b2, n)
    src, dst = [], []
    e3 = [la.unit(3, i) for i in range(3)]
    for x in e3:
        src.append(la.lincomb(x, b1, n))
        dst.append(img(x))
    for x, y in itertools.combinations(e3, 2):
        src.append(p1.G.bracket(la.lincomb(x, b1, n), la.lincomb(y, b1, n)))
        dst.append(p2.G.bracket(img(x), img(y)))
    pick = []
    for k, v in enumerate(src):
        if la.rank([src[i] for i in pick] + [v]) > len(pick):
            pick.append(k)
    if len(pick) != n:
        return None
    s = la.transpose([src[k] for k in pick])
    d = la.transpose([dst[k] for k in pick])
    phi = la.matmul(d, la.inverse(s))
    if la.det(phi) == 0:
        return None
    e = [la.unit(n, i) for i in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        if la.matvec(phi, p1.G.bracket(e[i], e[j])) != p2.G.bracket(la.matvec(phi, e[i]), la.matvec(phi, e[j])):
            return None
    if p1.B.image(phi) != p2.B:
        return None
    return phi


def _pair_triple(p: EnvelopePair) -> StructureConstants3:
    b = p.B.basis
    ent = []
    for i, j, k in itertools.product(range(3), repeat=3):
        v = p.G.bracket(p.G.bracket(b[i], b[j]), b[k])
        ent.extend((l, i, j, k, c) for l, c in enumerate(p.B.coordinates(v)) if c)
    return StructureConstants3(3, ent)
