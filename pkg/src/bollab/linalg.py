"""Exact linear algebra over the rationals.

Vectors are tuples of Fraction, matrices are tuples of row tuples.  Everything
here is small (dimension <= 6) so plain Gaussian elimination is plenty.
"""

from fractions import Fraction
from typing import Iterable, Sequence

Vector = tuple
Matrix = tuple


def frac(x) -> Fraction:
    """Coerce int, Fraction, or a "p/q" string to Fraction.

    Floats are rejected unless they are integral; silently rounding a float
    would defeat the point of exact arithmetic.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        if x.is_integer():
            return Fraction(int(x))
        raise TypeError(f"refusing inexact float {x!r}; pass a Fraction or 'p/q'")
    raise TypeError(f"cannot interpret {x!r} as a rational")


def frac_str(x: Fraction) -> str:
    x = frac(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def vec(xs: Iterable) -> Vector:
    return tuple(frac(x) for x in xs)


def mat(rows: Iterable[Iterable]) -> Matrix:
    return tuple(vec(r) for r in rows)


def zeros(n: int) -> Vector:
    return (Fraction(0),) * n


def unit(n: int, i: int) -> Vector:
    return tuple(Fraction(1) if k == i else Fraction(0) for k in range(n))


def identity(n: int) -> Matrix:
    return tuple(unit(n, i) for i in range(n))


def zero_matrix(r: int, c: int | None = None) -> Matrix:
    c = r if c is None else c
    return tuple(zeros(c) for _ in range(r))


def is_zero(v) -> bool:
    return all(x == 0 for x in v)


def add(u: Sequence, v: Sequence) -> Vector:
    return tuple(a + b for a, b in zip(u, v))


def sub(u: Sequence, v: Sequence) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def scale(c, v: Sequence) -> Vector:
    return tuple(c * a for a in v)


def dot(u: Sequence, v: Sequence):
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def lincomb(coeffs: Sequence, vectors: Sequence[Sequence], n: int) -> Vector:
    out = [Fraction(0)] * n
    for c, v in zip(coeffs, vectors):
        if c:
            for k in range(n):
                out[k] += c * v[k]
    return tuple(out)


def transpose(m: Sequence[Sequence]) -> Matrix:
    if not m:
        return ()
    return tuple(tuple(row[j] for row in m) for j in range(len(m[0])))


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    bt = transpose(b)
    return tuple(tuple(dot(row, col) for col in bt) for row in a)


def matvec(a: Sequence[Sequence], v: Sequence) -> Vector:
    return tuple(dot(row, v) for row in a)


def matadd(a, b) -> Matrix:
    return tuple(add(r, s) for r, s in zip(a, b))


def matsub(a, b) -> Matrix:
    return tuple(sub(r, s) for r, s in zip(a, b))


def matscale(c, a) -> Matrix:
    return tuple(scale(c, r) for r in a)


def commutator(a, b) -> Matrix:
    return matsub(matmul(a, b), matmul(b, a))


def rref(rows: Sequence[Sequence]) -> tuple[Matrix, tuple[int, ...]]:
    """Reduced row echelon form and pivot columns. Zero rows are dropped."""
    m = [list(map(frac, r)) for r in rows]
    if not m:
        return (), ()
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        pv = m[r][c]
        if pv != 1:
            m[r] = [x / pv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return tuple(tuple(row) for row in m[:r]), tuple(pivots)


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[0])


def nullspace(a: Sequence[Sequence], ncols: int | None = None) -> list[Vector]:
    """Basis of {x : a x = 0}."""
    if ncols is None:
        ncols = len(a[0]) if a else 0
    if not a:
        return [unit(ncols, i) for i in range(ncols)]
    r, piv = rref(a)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, pc in zip(r, piv):
            x[pc] = -row[f]
        basis.append(tuple(x))
    return basis


def solve(a: Sequence[Sequence], b: Sequence) -> Vector | None:
    """One solution of a x = b, or None when inconsistent."""
    ncols = len(a[0])
    aug = [tuple(row) + (bi,) for row, bi in zip(a, b)]
    r, piv = rref(aug)
    if ncols in piv:
        return None
    x = [Fraction(0)] * ncols
    for row, pc in zip(r, piv):
        x[pc] = row[ncols]
    return tuple(x)


def inverse(a: Sequence[Sequence]) -> Matrix:
    n = len(a)
    aug = [tuple(row) + unit(n, i) for i, row in enumerate(a)]
    r, piv = rref(aug)
    if tuple(piv[:n]) != tuple(range(n)) or len(r) < n:
        raise ZeroDivisionError("matrix is singular")
    return tuple(tuple(row[n:]) for row in r)


def det(a: Sequence[Sequence]) -> Fraction:
    m = [list(map(frac, r)) for r in a]
    n = len(m)
    d = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            d = -d
        d *= m[c][c]
        for i in range(c + 1, n):
            if m[i][c]:
                f = m[i][c] / m[c][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return d


def charpoly(a: Sequence[Sequence]) -> tuple[Fraction, ...]:
    """Coefficients (c_0=1, c_1, ..., c_n) of det(t I - a) = sum c_k t^(n-k).

    Faddeev-LeVerrier; exact over Q.
    """
    n = len(a)
    coeffs = [Fraction(1)]
    m = zero_matrix(n)
    ident = identity(n)
    for k in range(1, n + 1):
        m = matadd(matmul(a, m), matscale(coeffs[-1], ident))
        am = matmul(a, m)
        tr = sum((am[i][i] for i in range(n)), Fraction(0))
        coeffs.append(-tr / k)
    return tuple(coeffs)


def poly_trim(p: list) -> list:
    p = list(p)
    while p and p[0] == 0:
        p.pop(0)
    return p


def poly_rem(a: list, b: list) -> list:
    """Remainder of a / b; coefficient lists, highest degree first."""
    a = poly_trim(a)
    b = poly_trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    while len(a) >= len(b) and a:
        f = a[0] / b[0]
        for i in range(len(b)):
            a[i] -= f * b[i]
        a = poly_trim(a[1:] if a[0] == 0 else a)
    return a


def poly_gcd(a: list, b: list) -> list:
    a, b = poly_trim(a), poly_trim(b)
    while b:
        a, b = b, poly_rem(a, b)
    if not a:
        return []
    return [x / a[0] for x in a]


def poly_derivative(p: list) -> list:
    p = poly_trim(p)
    n = len(p) - 1
    return [c * (n - i) for i, c in enumerate(p[:-1])]


def minimal_poly_degree(a: Sequence[Sequence]) -> int:
    """Degree of the minimal polynomial, via the rank of the Krylov-type sequence of powers."""
    n = len(a)
    if n == 0:
        return 0
    powers = [identity(n)]
    for _ in range(n):
        flat = [tuple(x for row in p for x in row) for p in powers]
        nxt = matmul(powers[-1], a)
        if rank(flat + [tuple(x for row in nxt for x in row)]) == len(flat):
            return len(flat)
        powers.append(nxt)
    return n


def squarefree_degree(p: Sequence) -> int:
    """Number of distinct complex roots of p (coefficients highest first)."""
    p = poly_trim(list(p))
    if len(p) <= 1:
        return 0
    g = poly_gcd(p, poly_derivative(p))
    return (len(p) - 1) - (len(g) - 1)


def inertia(sym: Sequence[Sequence]) -> tuple[int, int, int]:
    """(n_plus, n_minus, n_zero) of a symmetric rational matrix, by congruence diagonalisation."""
    m = [list(map(frac, r)) for r in sym]
    n = len(m)
    diag = []
    active = list(range(n))
    while active:
        piv = next((i for i in active if m[i][i] != 0), None)
        if piv is None:
            # all diagonal entries zero: find off-diagonal, replace e_i by e_i + e_j
            pair = next(((i, j) for i in active for j in active if i != j and m[i][j] != 0), None)
            if pair is None:
                diag.extend([Fraction(0)] * len(active))
                break
            i, j = pair
            for k in range(n):
                m[i][k] += m[j][k]
            for k in range(n):
                m[k][i] += m[k][j]
            piv = i
        d = m[piv][piv]
        for i in active:
            if i != piv and m[i][piv] != 0:
                f = m[i][piv] / d
                for k in range(n):
                    m[i][k] -= f * m[piv][k]
                for k in range(n):
                    m[k][i] -= f * m[k][piv]
        diag.append(d)
        active.remove(piv)
    return (sum(1 for d in diag if d > 0), sum(1 for d in diag if d < 0), sum(1 for d in diag if d == 0))


def to_float(m):
    import numpy as np

    return np.array([[float(x) for x in row] for row in m]) if m and isinstance(m[0], tuple) else np.array([float(x) for x in m])


class Subspace:
    """A subspace of Q^n, stored as its reduced row echelon basis."""

    __slots__ = ("n", "basis", "pivots")

    def __init__(self, n: int, vectors: Iterable[Sequence] = ()):
        vs = [vec(v) for v in vectors]
        for v in vs:
            if len(v) != n:
                raise ValueError(f"vector of length {len(v)} in ambient dimension {n}")
        self.n = n
        self.basis, self.pivots = rref(vs) if vs else ((), ())

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n)

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, identity(n))

    @property
    def dim(self) -> int:
        return len(self.basis)

    rank = dim

    def __len__(self):
        return self.dim

    def __eq__(self, other):
        return isinstance(other, Subspace) and self.n == other.n and self.basis == other.basis

    def __hash__(self):
        return hash((self.n, self.basis))

    def __repr__(self):
        rows = ", ".join("(" + ", ".join(frac_str(x) for x in b) + ")" for b in self.basis)
        return f"Subspace(n={self.n}, [{rows}])"

    def contains(self, v: Sequence) -> bool:
        v = vec(v)
        if is_zero(v):
            return True
        return rank(self.basis + (v,)) == self.dim

    __contains__ = contains

    def contains_space(self, other: "Subspace") -> bool:
        return all(self.contains(b) for b in other.basis)

    def __le__(self, other: "Subspace") -> bool:
        return other.contains_space(self)

    def __add__(self, other: "Subspace") -> "Subspace":
        return Subspace(self.n, self.basis + other.basis)

    def intersect(self, other: "Subspace") -> "Subspace":
        if not self.basis or not other.basis:
            return Subspace(self.n)
        # solve sum a_i u_i = sum b_j w_j
        cols = list(self.basis) + [scale(-1, w) for w in other.basis]
        ns = nullspace(transpose(cols), len(cols))
        vs = [lincomb(x[: self.dim], self.basis, self.n) for x in ns]
        return Subspace(self.n, vs)

    __and__ = intersect

    def coordinates(self, v: Sequence) -> Vector:
        """Coordinates of v in this basis; raises if v is not in the span."""
        v = vec(v)
        coords = tuple(v[p] for p in self.pivots)
        if lincomb(coords, self.basis, self.n) != v:
            raise ValueError("vector not in subspace")
        return coords

    def complement_basis(self) -> list[Vector]:
        """Standard unit vectors completing this basis."""
        free = [c for c in range(self.n) if c not in self.pivots]
        return [unit(self.n, c) for c in free]

    def image(self, m: Sequence[Sequence]) -> "Subspace":
        """Image under the linear map with matrix m (acting on column vectors)."""
        rows = len(m)
        return Subspace(rows, [matvec(m, b) for b in self.basis])

    def to_json(self) -> list[list[str]]:
        return [[frac_str(x) for x in b] for b in self.basis]
