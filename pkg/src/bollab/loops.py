"""Local analytic Bol loops: composition laws, identity checks, tangent algebras.

Every composition accepts batched float arrays of shape (..., n).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import linalg as la
from .envelope import EnvelopePair
from .structures import (
    AlgebraError,
    BolAlgebra,
    LieAlgebra,
    StructureConstants2,
    StructureConstants3,
    verify_bol,
)


class NoConvergence(ArithmeticError):
    pass


class NoRoot(ArithmeticError):
    pass


class UnsupportedOrder(ValueError):
    pass


class NotRightAlternative(AlgebraError):
    pass


class NotInCatalog(KeyError):
    pass


NEWTON_TOL = 1e-13
NEWTON_MAXITER = 50
FD_STEP = 1e-7


# --- brackets and BCH -------------------------------------------------------


def structure_array(g: LieAlgebra) -> np.ndarray:
    """C[k, i, j] with [e_i, e_j] = sum_k C[k, i, j] e_k."""
    n = g.dim
    c = np.zeros((n, n, n))
    for k, i, j, v in g.bracket.nonzero():
        c[k, i, j] = float(v)
    return c


def _br(c, x, y):
    return np.einsum("kij,...i,...j->...k", c, x, y)


def bch(xi, eta, g, order: int = 4):
    """Truncated Baker-Campbell-Hausdorff product.

    Exact over the rationals when both inputs are rational tuples and g is a
    LieAlgebra; otherwise batched float arithmetic.
    """
    if order not in (1, 2, 3, 4):
        raise UnsupportedOrder(f"order {order} not in 1..4")
    if isinstance(g, LieAlgebra) and not isinstance(xi, np.ndarray) and not isinstance(eta, np.ndarray):
        try:
            x, y = la.vec(xi), la.vec(eta)
        except (TypeError, ValueError):
            x = None
        if x is not None and all(isinstance(v, Fraction) for v in x + y):
            b = g.bracket
            out = la.add(x, y)
            if order >= 2:
                xy = b(x, y)
                out = la.add(out, la.scale(Fraction(1, 2), xy))
            if order >= 3:
                t = la.add(b(x, xy), b(y, b(y, x)))
                out = la.add(out, la.scale(Fraction(1, 12), t))
            if order >= 4:
                out = la.sub(out, la.scale(Fraction(1, 24), b(y, b(x, xy))))
            return out
    c = structure_array(g) if isinstance(g, LieAlgebra) else g
    x = np.asarray(xi, dtype=float)
    y = np.asarray(eta, dtype=float)
    out = x + y
    if order >= 2:
        xy = _br(c, x, y)
        out = out + 0.5 * xy
    if order >= 3:
        out = out + (_br(c, x, xy) + _br(c, y, _br(c, y, x))) / 12.0
    if order >= 4:
        out = out - _br(c, y, _br(c, x, xy)) / 24.0
    return out


# --- batched Newton ---------------------------------------------------------


def newton(f: Callable, z0, tol: float = NEWTON_TOL, maxiter: int = NEWTON_MAXITER, step: float = FD_STEP, polish: int = 2):
    """Solve f(z) = 0 for a batch of starting points z0 of shape (N, m).

    Finite-difference Jacobian, refreshed only when the residual stops
    shrinking fast; after the residual drops below tol a couple of extra
    iterations push to machine precision. Returns (z, converged mask).
    """
    z = np.array(z0, dtype=float, copy=True)
    n, m = z.shape
    done = np.zeros(n, dtype=bool)
    extra = np.zeros(n, dtype=int)
    eye = np.eye(m)
    jac = None
    prev = np.full(n, np.inf)
    for _ in range(maxiter):
        r = f(z)
        ok = np.all(np.isfinite(r), axis=1) & np.all(np.isfinite(z), axis=1)
        res = np.where(ok, np.max(np.abs(r), axis=1, initial=0.0), np.inf)
        small = res <= tol
        extra = np.where(small, extra + 1, 0)
        done = small & (extra > polish)
        active = ~done & ok
        if not active.any():
            break
        slow = active & ~small & (res > 1e-3 * prev)
        if jac is None or slow.any():
            jac = np.empty((n, m, m))
            for j in range(m):
                h = step * np.maximum(1.0, np.abs(z[:, j]))
                zp = z.copy()
                zp[:, j] += h
                zm = z.copy()
                zm[:, j] -= h
                jac[:, :, j] = (f(zp) - f(zm)) / (2 * h)[:, None]
            jac[~np.all(np.isfinite(jac), axis=(1, 2))] = eye
        prev = res
        rr = np.where(active[:, None], r, 0.0)
        try:
            dz = np.linalg.solve(jac, rr[..., None])[..., 0]
        except np.linalg.LinAlgError:
            dz = np.stack([np.linalg.lstsq(jac[i], rr[i], rcond=None)[0] for i in range(n)])
        z = z - dz
    r = f(z)
    res = np.max(np.abs(r), axis=1, initial=0.0)
    conv = np.isfinite(res) & (res <= tol)
    return z, conv


def _batch(x, n):
    a = np.asarray(x, dtype=float)
    single = a.ndim == 1
    return np.atleast_2d(a).reshape(-1, n), single


def _unbatch(a, single):
    return a[0] if single else a


def solve_implicit_parameter(relation: Callable, inputs=(), bracket=(-1.0, 1.0), tol: float = NEWTON_TOL):
    """Scalar root of relation(p, *inputs) by Newton with a bisection fallback."""
    f = lambda p: float(relation(p, *inputs))
    lo, hi = bracket
    p = 0.0
    for _ in range(NEWTON_MAXITER):
        fp = f(p)
        if abs(fp) <= tol:
            # one polishing step
            d = (f(p + FD_STEP) - f(p - FD_STEP)) / (2 * FD_STEP)
            if d:
                q = p - fp / d
                if lo <= q <= hi and abs(f(q)) <= abs(fp):
                    p = q
            return p
        d = (f(p + FD_STEP) - f(p - FD_STEP)) / (2 * FD_STEP)
        if not d or not np.isfinite(d):
            break
        q = p - fp / d
        if not (lo <= q <= hi) or not np.isfinite(q):
            break
        p = q
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise NoRoot(f"relation does not change sign on [{lo}, {hi}]")
    a, b = lo, hi
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm = f(mid)
        if abs(fm) <= tol or b - a < 1e-16:
            return mid
        if np.sign(fm) == np.sign(flo):
            a, flo = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)


# --- loops ------------------------------------------------------------------


@dataclass
class AnalyticLoop:
    dim: int
    compose_fn: Callable
    radius: float = 0.1
    source: str = "UserSupplied"
    name: str = ""
    meta: dict = field(default_factory=dict)

    def compose(self, x, y):
        xb, s1 = _batch(x, self.dim)
        yb, s2 = _batch(y, self.dim)
        if xb.shape[0] != yb.shape[0]:
            xb, yb = np.broadcast_arrays(xb, yb)
        return _unbatch(np.asarray(self.compose_fn(xb, yb), dtype=float), s1 and s2)

    __call__ = compose


def left_divide(loop: AnalyticLoop, a, b, strict: bool = True):
    """x with a * x = b."""
    ab, s = _batch(a, loop.dim)
    bb, _ = _batch(b, loop.dim)
    ab, bb = np.broadcast_arrays(ab, bb)
    z, conv = newton(lambda x: loop.compose_fn(ab, x) - bb, bb - ab)
    if strict and not conv.all():
        raise NoConvergence("left division did not converge")
    return (_unbatch(z, s), conv) if not strict else _unbatch(z, s)


def inverse(loop: AnalyticLoop, a, strict: bool = True):
    """x with a * x = 0."""
    return left_divide(loop, a, np.zeros_like(np.asarray(a, dtype=float)), strict)


def right_divide_newton(loop: AnalyticLoop, b, a, strict: bool = True):
    """x with x * a = b."""
    bb, s = _batch(b, loop.dim)
    ab, _ = _batch(a, loop.dim)
    ab, bb = np.broadcast_arrays(ab, bb)
    z, conv = newton(lambda x: loop.compose_fn(x, ab) - bb, bb - ab)
    if strict and not conv.all():
        raise NoConvergence("right division did not converge")
    return (_unbatch(z, s), conv) if not strict else _unbatch(z, s)


def right_divide(loop: AnalyticLoop, b, a, check: bool = True, tol: float = 1e-9):
    """b / a, the x with x * a = b, via x = a^-1 * ((a * b) * a^-1).

    Bol loops have the left inverse property, so the closed formula avoids a
    Newton solve; with ``check`` it is compared to the Newton solution.
    """
    ai = inverse(loop, a)
    x = loop.compose(ai, loop.compose(loop.compose(a, b), ai))
    if check:
        y = right_divide_newton(loop, b, a)
        if np.max(np.abs(np.asarray(x) - np.asarray(y))) > tol:
            raise NoConvergence("division formula disagrees with the Newton solve")
    return x


# --- residual checks --------------------------------------------------------


@dataclass(frozen=True)
class ResidualReport:
    max_residual: float
    samples: int
    skipped: int
    tol: float
    passed: bool

    def to_json(self):
        return {"max_residual": float(self.max_residual), "samples": self.samples, "skipped": self.skipped, "tol": self.tol, "pass": bool(self.passed)}


def sample_ball(rng: np.random.Generator, count: int, n: int, radius: float) -> np.ndarray:
    d = rng.standard_normal((count, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = radius * rng.random(count) ** (1.0 / n)
    return d * r[:, None]


def _report(res, ok, tol):
    res = np.where(ok, res, np.nan)
    good = res[ok]
    mx = float(np.max(good)) if good.size else float("inf")
    return ResidualReport(mx, int(ok.sum()), int((~ok).sum()), tol, bool(good.size and mx <= tol))


def _safe(loop, x, y):
    with np.errstate(all="ignore"):
        return loop.compose_fn(x, y)


def check_left_bol(loop: AnalyticLoop, samples: int = 1000, radius: float = 0.1, tol: float = 1e-9, seed: int = 42) -> ResidualReport:
    """max |a(b(ac)) - (a(ba))c| over points sampled in the ball."""
    rng = np.random.default_rng(seed)
    n = loop.dim
    a, b, c = (sample_ball(rng, samples, n, radius) for _ in range(3))
    lhs = _safe(loop, a, _safe(loop, b, _safe(loop, a, c)))
    rhs = _safe(loop, _safe(loop, a, _safe(loop, b, a)), c)
    res = np.linalg.norm(lhs - rhs, axis=1)
    return _report(res, np.isfinite(res), tol)


def check_unit(loop: AnalyticLoop, samples: int = 1000, radius: float = 0.1, tol: float = 1e-12, seed: int = 42) -> ResidualReport:
    rng = np.random.default_rng(seed)
    x = sample_ball(rng, samples, loop.dim, radius)
    z = np.zeros_like(x)
    res = np.maximum(np.linalg.norm(_safe(loop, z, x) - x, axis=1), np.linalg.norm(_safe(loop, x, z) - x, axis=1))
    return _report(res, np.isfinite(res), tol)


def powers(loop: AnalyticLoop, a, max_m: int):
    """{m: a^m} for |m| <= max_m with a^m = a^(m-1) * a and a^-m = (a^-1)^m."""
    a = np.asarray(a, dtype=float)
    out = {0: np.zeros_like(a), 1: a}
    ai, conv = inverse(loop, a, strict=False)
    for m in range(2, max_m + 1):
        out[m] = _safe(loop, out[m - 1], a)
    out[-1] = ai
    for m in range(2, max_m + 1):
        out[-m] = _safe(loop, out[-(m - 1)], ai)
    return out, conv


def check_power_assoc(loop: AnalyticLoop, samples: int = 100, max_m: int = 3, radius: float | None = None, tol: float = 1e-9, seed: int = 42) -> ResidualReport:
    """max |a^m * a^r - a^(m+r)| for |m|, |r| <= max_m."""
    rng = np.random.default_rng(seed)
    r = radius if radius is not None else loop.radius / (2 * max_m)
    a = sample_ball(rng, samples, loop.dim, r)
    pw, conv = powers(loop, a, 2 * max_m)
    res = np.zeros(samples)
    for m in range(-max_m, max_m + 1):
        for k in range(-max_m, max_m + 1):
            d = np.linalg.norm(_safe(loop, pw[m], pw[k]) - pw[m + k], axis=1)
            res = np.maximum(res, d)
    return _report(res, conv & np.isfinite(res), tol)


def check_mono_alternative(loop: AnalyticLoop, samples: int = 100, max_m: int = 3, radius: float | None = None, tol: float = 1e-9, seed: int = 42) -> ResidualReport:
    """max |a^m * (a^r * b) - a^(m+r) * b|."""
    rng = np.random.default_rng(seed)
    r = radius if radius is not None else loop.radius / (2 * max_m)
    a = sample_ball(rng, samples, loop.dim, r)
    b = sample_ball(rng, samples, loop.dim, r)
    pw, conv = powers(loop, a, 2 * max_m)
    res = np.zeros(samples)
    for m in range(-max_m, max_m + 1):
        for k in range(-max_m, max_m + 1):
            d = np.linalg.norm(_safe(loop, pw[m], _safe(loop, pw[k], b)) - _safe(loop, pw[m + k], b), axis=1)
            res = np.maximum(res, d)
    return _report(res, conv & np.isfinite(res), tol)


def check_divisions(loop: AnalyticLoop, samples: int = 100, radius: float = 0.1, tol: float = 1e-9, seed: int = 42) -> ResidualReport:
    """a * (a \\ b) = b and (a * b) / b = a, the latter through the closed formula."""
    rng = np.random.default_rng(seed)
    a = sample_ball(rng, samples, loop.dim, radius)
    b = sample_ball(rng, samples, loop.dim, radius)
    x, c1 = left_divide(loop, a, b, strict=False)
    r1 = np.linalg.norm(_safe(loop, a, x) - b, axis=1)
    ab = _safe(loop, a, b)
    bi, c2 = inverse(loop, b, strict=False)
    y = _safe(loop, bi, _safe(loop, _safe(loop, b, ab), bi))
    r2 = np.linalg.norm(y - a, axis=1)
    z, c3 = right_divide_newton(loop, ab, b, strict=False)
    r3 = np.linalg.norm(z - a, axis=1)
    res = np.maximum(np.maximum(r1, r2), r3)
    return _report(res, c1 & c2 & c3 & np.isfinite(res), tol)


# --- tangent algebra --------------------------------------------------------


@dataclass
class TaylorJet:
    tau: np.ndarray  # tau[i, j, k]: coefficient of x^j y^k
    mu: np.ndarray  # d^3 / dx^j dx^k dy^l
    nu: np.ndarray  # d^3 / dx^j dy^k dy^l

    @property
    def alpha(self):
        return self.tau - np.swapaxes(self.tau, 1, 2)


@dataclass
class FloatBol:
    """Float-valued Bol algebra tensors: dot[k, i, j] and triple[l, i, j, k]."""

    dot: np.ndarray
    triple: np.ndarray

    @property
    def dim(self):
        return self.dot.shape[0]

    @classmethod
    def from_bol(cls, b: BolAlgebra):
        n = b.dim
        d = np.zeros((n, n, n))
        for k, i, j, v in b.dot.nonzero():
            d[k, i, j] = float(v)
        t = np.zeros((n, n, n, n))
        for l, i, j, k, v in b.triple.nonzero():
            t[l, i, j, k] = float(v)
        return cls(d, t)

    def distance(self, other: "FloatBol") -> float:
        return float(max(np.max(np.abs(self.dot - other.dot)), np.max(np.abs(self.triple - other.triple))))

    def to_json(self):
        return {"dot": np.round(self.dot, 12).tolist(), "triple": np.round(self.triple, 12).tolist()}


def _jet(loop: AnalyticLoop, h: float) -> TaylorJet:
    n = loop.dim
    e = np.eye(n)
    signs = (1.0, -1.0)
    s2 = list(itertools.product(signs, repeat=2))
    s3 = list(itertools.product(signs, repeat=3))
    w2 = np.array([a * b for a, b in s2])
    w3 = np.array([a * b * c for a, b, c in s3])
    jk = list(itertools.product(range(n), repeat=2))
    jkl = list(itertools.product(range(n), repeat=3))
    # one batched call per tensor; stencil points are the fastest axis
    xs = np.array([a * h * e[j] for j, k in jk for a, b in s2])
    ys = np.array([b * h * e[k] for j, k in jk for a, b in s2])
    out = loop.compose_fn(xs, ys).reshape(len(jk), len(s2), n)
    tau = np.einsum("p,qpl->lq", w2, out).reshape(n, n, n) / (4 * h * h)
    xs = np.array([(a * e[j] + b * e[k]) * h for j, k, l in jkl for a, b, c in s3])
    ys = np.array([c * h * e[l] for j, k, l in jkl for a, b, c in s3])
    out = loop.compose_fn(xs, ys).reshape(len(jkl), len(s3), n)
    mu = np.einsum("p,qpl->lq", w3, out).reshape(n, n, n, n) / (8 * h**3)
    xs = np.array([a * h * e[j] for j, k, l in jkl for a, b, c in s3])
    ys = np.array([(b * e[k] + c * e[l]) * h for j, k, l in jkl for a, b, c in s3])
    out = loop.compose_fn(xs, ys).reshape(len(jkl), len(s3), n)
    nu = np.einsum("p,qpl->lq", w3, out).reshape(n, n, n, n) / (8 * h**3)
    return TaylorJet(tau, mu, nu)


def _ldiv_batch(loop, a, b):
    z, conv = newton(lambda x: loop.compose_fn(a, x) - b, b - a)
    if not conv.all():
        raise NoConvergence("division failed while extracting tangent tensors")
    return z


def tangent_tensors(loop: AnalyticLoop, step: float = 1e-3):
    """Jet at the unit and the tangent Bol algebra.

    The commutator curve (b*a)\\(a*b) gives t^2 x.y and the associator curve
    [a*(b*c)]\\[(a*b)*c] gives t^3 <x,y,z>; then (x,y,z) = -2<x,y,z> + xy.z.
    Symmetric differences cancel the next order, and one Richardson step on
    (step, step/2) removes the one after.
    """
    n = loop.dim
    e = np.eye(n)
    pairs = list(itertools.product(range(n), repeat=2))
    triples = list(itertools.product(range(n), repeat=3))

    ts = np.array([step, -step, step / 2, -step / 2])

    def comm():
        a = np.array([t * e[i] for t in ts for i, j in pairs])
        b = np.array([t * e[j] for t in ts for i, j in pairs])
        z = _ldiv_batch(loop, loop.compose_fn(b, a), loop.compose_fn(a, b))
        return z.reshape(len(ts), len(pairs), n) / ts[:, None, None] ** 2

    def assoc():
        a = np.array([t * e[i] for t in ts for i, j, k in triples])
        b = np.array([t * e[j] for t in ts for i, j, k in triples])
        c = np.array([t * e[k] for t in ts for i, j, k in triples])
        left = loop.compose_fn(a, loop.compose_fn(b, c))
        right = loop.compose_fn(loop.compose_fn(a, b), c)
        z = _ldiv_batch(loop, left, right)
        return z.reshape(len(ts), len(triples), n) / ts[:, None, None] ** 3

    def rich(fn):
        v = fn()
        s1 = 0.5 * (v[0] + v[1])
        s2 = 0.5 * (v[2] + v[3])
        return (4 * s2 - s1) / 3

    cm = rich(comm)
    asc = rich(assoc)
    dot = np.zeros((n, n, n))
    for (i, j), v in zip(pairs, cm):
        dot[:, i, j] = v
    dot = 0.5 * (dot - np.swapaxes(dot, 1, 2))
    br = np.zeros((n, n, n, n))
    for (i, j, k), v in zip(triples, asc):
        br[:, i, j, k] = v
    # (x,y,z) = -2<x,y,z> + (x.y).z
    xyz = np.einsum("lmk,mij->lijk", dot, dot)
    triple = -2 * br + xyz
    return _jet(loop, step), FloatBol(dot, triple)


# --- principal isotopes -----------------------------------------------------


def principal_isotope(loop: AnalyticLoop, f) -> AnalyticLoop:
    """x _|_ y = (x/f) * (f\\y), moved so that its unit f*f sits at the origin."""
    f = np.asarray(f, dtype=float)
    n = loop.dim
    if not np.any(f):
        return loop
    unit = loop.compose(f, f)

    def comp(x, y):
        xs = x + unit
        ys = y + unit
        fb = np.broadcast_to(f, xs.shape)
        u, c1 = newton(lambda z: loop.compose_fn(z, fb) - xs, xs - fb)
        v, c2 = newton(lambda z: loop.compose_fn(fb, z) - ys, ys - fb)
        out = loop.compose_fn(u, v) - unit
        out[~(c1 & c2)] = np.nan
        return out

    return AnalyticLoop(n, comp, loop.radius, "Isotope", f"{loop.name}~isotope", {"f": f.tolist()})


# --- loops from envelope pairs ----------------------------------------------


class _Split:
    """Coordinates with respect to G = B + h."""

    def __init__(self, pair: EnvelopePair):
        bcols = [list(map(float, v)) for v in pair.B.basis]
        hcols = [list(map(float, v)) for v in pair.h.basis]
        self.nb = len(bcols)
        self.nh = len(hcols)
        self.Bm = np.array(bcols).reshape(self.nb, -1)
        self.Hm = np.array(hcols).reshape(self.nh, -1) if hcols else np.zeros((0, pair.G.dim))
        full = np.vstack([self.Bm, self.Hm])
        self.S = np.linalg.inv(full.T)  # G-vector -> (b, q)

    def coords(self, g):
        c = g @ self.S.T
        return c[..., : self.nb], c[..., self.nb:]

    def embed_b(self, b):
        return b @ self.Bm

    def embed_h(self, q):
        return q @ self.Hm


def _factor_first_kind(delta, split: _Split, g):
    """Solve delta(g, -q) in exp(B): returns B-coordinates; delta in first-kind coordinates."""
    if split.nh == 0:
        return split.coords(g)[0], np.ones(len(g), dtype=bool)
    q0 = split.coords(g)[1]
    grp = getattr(delta, "__self__", None)
    if isinstance(grp, MatrixGroup):
        # exp(g) is fixed across Newton steps
        m = grp.exp(g)
        step = lambda q: split.coords(grp.log(m @ grp.exp(-split.embed_h(q))))
    else:
        step = lambda q: split.coords(delta(g, -split.embed_h(q)))
    q, conv = newton(lambda q: step(q)[1], q0)
    return step(q)[0], conv


def factor_element(pair: EnvelopePair, g, delta=None, order: int = 4, first_kind: bool = True, h_param=None, section=None):
    """Split g = b (delta) h with b in exp(B) and h in exp(h).

    Default delta is the truncated BCH product of pair.G. With
    ``first_kind=False`` a full Newton solve over (b, q) is used, where
    ``section`` maps B-coordinates and ``h_param`` maps subgroup parameters into
    the coordinates of delta. Returns (b, q) or raises NoConvergence.
    """
    split = _Split(pair)
    c = structure_array(pair.G)
    delta = delta or (lambda x, y: bch(x, y, c, order))
    gb, single = _batch(g, pair.G.dim)
    if first_kind:
        b, conv = _factor_first_kind(delta, split, gb)
        if not conv.all():
            raise NoConvergence("factorisation did not converge")
        q = split.coords(delta(-split.embed_b(b), gb))[1]
        return _unbatch(b, single), _unbatch(q, single)
    section = section or split.embed_b
    h_param = h_param or split.embed_h
    nb, nh = split.nb, split.nh
    z0 = np.hstack(split.coords(gb))
    z, conv = newton(lambda z: delta(section(z[:, :nb]), h_param(z[:, nb:])) - gb, z0)
    if not conv.all():
        raise NoConvergence("factorisation did not converge")
    return _unbatch(z[:, :nb], single), _unbatch(z[:, nb:], single)


def pair_loop(pair: EnvelopePair, delta=None, order: int = 4, name: str = "", source: str = "BCHGenerated", radius: float = 0.1) -> AnalyticLoop:
    """a * b = Pi_B(exp a . exp b) in exponential coordinates of B."""
    split = _Split(pair)
    c = structure_array(pair.G)
    delta = delta or (lambda x, y: bch(x, y, c, order))

    def comp(a, b):
        g = delta(split.embed_b(a), split.embed_b(b))
        out, conv = _factor_first_kind(delta, split, g)
        out = np.array(out)
        out[~conv] = np.nan
        return out

    return AnalyticLoop(split.nb, comp, radius, source, name or pair.label, {"order": order})


def section_loop(dim_g: int, nb: int, delta, section, h_param, nh: int, name: str = "", radius: float = 0.1) -> AnalyticLoop:
    """Loop from a group law in arbitrary coordinates, a section of B and a parametrised subgroup."""

    def comp(a, b):
        g = delta(section(a), section(b))
        z0 = np.hstack([a + b, np.zeros((len(a), nh))])
        z, conv = newton(lambda z: delta(section(z[:, :nb]), h_param(z[:, nb:])) - g, z0)
        out = z[:, :nb].copy()
        out[~conv] = np.nan
        return out

    return AnalyticLoop(nb, comp, radius, "ClosedForm", name)


def loop_compose(pair: EnvelopePair, a, b, method: str = "Generic", closed: AnalyticLoop | None = None, order: int = 4):
    if method == "Generic":
        return pair_loop(pair, order=order).compose(a, b)
    if method == "ClosedForm":
        if closed is None:
            raise NotInCatalog("no closed form supplied for this pair")
        return closed.compose(a, b)
    raise ValueError(f"unknown method {method!r}")


# --- matrix groups ----------------------------------------------------------


def _expm(x):
    """Batched matrix exponential by scaling and squaring."""
    nrm = np.max(np.abs(x).sum(-1), axis=-1)
    s = int(max(0, np.ceil(np.log2(max(float(np.max(nrm, initial=0.0)), 1e-300) / 0.25)))) if np.max(nrm, initial=0.0) > 0.25 else 0
    y = x / (2.0**s)
    eye = np.broadcast_to(np.eye(x.shape[-1]), x.shape)
    out = eye.copy()
    term = eye.copy()
    for k in range(1, 20):
        term = term @ y / k
        out = out + term
        if not np.any(np.abs(term) > 1e-18):
            break
    for _ in range(s):
        out = out @ out
    return out


def _logm(a):
    """Batched logarithm near the identity: square roots, then the atanh series."""
    eye = np.broadcast_to(np.eye(a.shape[-1]), a.shape)
    k = 0
    y = a
    z = (y - eye) @ np.linalg.inv(y + eye)
    # the atanh series needs |z| well below 1
    while k < 30 and np.max(np.abs(z).sum(-1), initial=0.0) > 0.5:
        # Denman-Beavers square root
        p, q = y, eye.copy()
        for _ in range(40):
            pn = 0.5 * (p + np.linalg.inv(q))
            q = 0.5 * (q + np.linalg.inv(p))
            done = np.max(np.abs(pn - p)) < 1e-16
            p = pn
            if done:
                break
        y = p
        k += 1
        z = (y - eye) @ np.linalg.inv(y + eye)
    z2 = z @ z
    out = z.copy()
    term = z.copy()
    for m in range(3, 64, 2):
        term = term @ z2
        out = out + term / m
        if not np.any(np.abs(term) > 1e-18):
            break
    return 2.0**(k + 1) * out


class MatrixGroup:
    """Simply connected group of a Lie algebra through a faithful matrix representation.

    Coordinates are exponential coordinates of the first kind.
    """

    def __init__(self, g: LieAlgebra, rep):
        self.g = g
        n = g.dim
        rep = [la.mat(r) for r in rep]
        if len(rep) != n:
            raise AlgebraError("one matrix per basis vector is required")
        for i, j in itertools.combinations(range(n), 2):
            lhs = la.commutator(rep[i], rep[j])
            br = g.bracket.basis_product(i, j)
            rhs = la.zero_matrix(len(rep[0]))
            for k, c in enumerate(br):
                if c:
                    rhs = la.matadd(rhs, la.matscale(c, rep[k]))
            if lhs != rhs:
                raise AlgebraError("matrices do not represent the bracket")
        flat = [tuple(x for row in r for x in row) for r in rep]
        if la.rank(flat) != n:
            raise AlgebraError("representation is not faithful")
        self.rep = np.array([la.to_float(r) for r in rep])
        self.flat = self.rep.reshape(n, -1)
        self.pinv = np.linalg.pinv(self.flat)

    def matrix(self, x):
        return np.einsum("...i,ijk->...jk", x, self.rep)

    def exp(self, x):
        return _expm(self.matrix(x))

    def log(self, m):
        lg = _logm(m)
        return lg.reshape(*lg.shape[:-2], -1) @ self.pinv

    def delta(self, x, y):
        return self.log(self.exp(x) @ self.exp(y))


def faithful_rep(g: LieAlgebra):
    """A faithful matrix representation built from ad.

    When the centre avoids [g, g], one-dimensional characters separate it.
    Otherwise g is extended by a diagonal derivation D that is injective on
    the centre, and ad of the extension is used.
    """
    n = g.dim
    ads = [g.ad(la.unit(n, i)) for i in range(n)]
    flat = [tuple(x for row in a for x in row) for a in ads]
    center = la.Subspace(n, la.nullspace(la.transpose(flat), n))
    if center.dim == 0:
        return ads
    derived = g.derived()
    if (center & derived).dim:
        return _derivation_rep(g, ads, center)
    ann = la.nullspace(derived.basis, n) if derived.dim else [la.unit(n, i) for i in range(n)]
    chosen = []
    for f in ann:
        trial = chosen + [f]
        m = [[la.dot(ff, z) for z in center.basis] for ff in trial]
        if la.rank(m) == len(trial):
            chosen = trial
        if len(chosen) == center.dim:
            break
    size = n + len(chosen)
    out = []
    for i in range(n):
        m = [[Fraction(0)] * size for _ in range(size)]
        for r in range(n):
            for c in range(n):
                m[r][c] = ads[i][r][c]
        for t, f in enumerate(chosen):
            m[n + t][n + t] = f[i]
        out.append(la.mat(m))
    return out


def _derivation_rep(g: LieAlgebra, ads, center):
    n = g.dim
    # diagonal derivations: w_k = w_i + w_j whenever [e_i, e_j] has an e_k part
    rows = []
    for k, i, j, v in g.bracket.nonzero():
        if i < j:
            r = [Fraction(0)] * n
            r[k] += 1
            r[i] -= 1
            r[j] -= 1
            rows.append(tuple(r))
    space = la.nullspace(rows, n) if rows else [la.unit(n, i) for i in range(n)]
    for coeffs in itertools.product(range(1, 4), repeat=len(space)):
        w = la.lincomb(coeffs, space, n) if space else (Fraction(0),) * n
        dz = [tuple(w[r] * z[r] for r in range(n)) for z in center.basis]
        if la.rank(dz) == center.dim:
            break
    else:
        raise AlgebraError("no diagonal derivation separates the centre; supply a representation")
    out = []
    for i in range(n):
        m = [[Fraction(0)] * (n + 1) for _ in range(n + 1)]
        for r in range(n):
            for c in range(n):
                m[r][c] = ads[i][r][c]
        m[i][n] = -w[i]  # [e_i, D] = -D e_i
        out.append(la.mat(m))
    return out


# --- right-alternative algebras ---------------------------------------------


class RightAltAlgebra:
    """Product {e_i, e_j} = sum_k m[k][i][j] e_k, not necessarily antisymmetric."""

    def __init__(self, dim: int, products: dict, label: str = ""):
        self.dim = dim
        self.label = label
        self.m = [[[Fraction(0)] * dim for _ in range(dim)] for _ in range(dim)]
        for (i, j), img in products.items():
            for k, c in img.items():
                self.m[k - 1][i - 1][j - 1] = la.frac(c)

    def mul(self, x, y):
        n = self.dim
        return tuple(sum((self.m[k][i][j] * x[i] * y[j] for i in range(n) for j in range(n) if x[i] and y[j]), Fraction(0)) for k in range(n))

    def is_right_alternative(self) -> bool:
        """{y,{x,x}} = {{y,x},x}; quadratic in x, so e_i and e_i + e_j suffice."""
        n = self.dim
        e = [la.unit(n, i) for i in range(n)]
        xs = e + [la.add(e[i], e[j]) for i, j in itertools.combinations(range(n), 2)]
        for x in xs:
            for y in e:
                if self.mul(y, self.mul(x, x)) != self.mul(self.mul(y, x), x):
                    return False
        return True

    def array(self):
        return np.array([[[float(v) for v in row] for row in plane] for plane in self.m])

    def loop(self, radius: float = 0.1) -> AnalyticLoop:
        """x * y = x + y + {y, x}."""
        m = self.array()
        comp = lambda x, y: x + y + np.einsum("kij,...i,...j->...k", m, y, x)
        return AnalyticLoop(self.dim, comp, radius, "ClosedForm", f"{self.label} loop")


def bol_from_right_alt(r: RightAltAlgebra) -> BolAlgebra:
    """x.y = {x,y} - {y,x}, <x,y,z> = {{x,y},z} - {x,{y,z}}, (x,y,z) = z.(x.y) + 2<z,x,y>."""
    if not r.is_right_alternative():
        raise NotRightAlternative(f"{r.label or 'algebra'} is not right-alternative")
    n = r.dim
    e = [la.unit(n, i) for i in range(n)]
    mul = r.mul
    dot = lambda x, y: la.sub(mul(x, y), mul(y, x))
    br = lambda x, y, z: la.sub(mul(mul(x, y), z), mul(x, mul(y, z)))
    d = []
    for i, j in itertools.combinations(range(n), 2):
        d.extend((k, i, j, c) for k, c in enumerate(dot(e[i], e[j])) if c)
    t = []
    for i, j, k in itertools.product(range(n), repeat=3):
        v = la.add(dot(e[k], dot(e[i], e[j])), la.scale(2, br(e[k], e[i], e[j])))
        t.extend((l, i, j, k, c) for l, c in enumerate(v) if c)
    return BolAlgebra(n, StructureConstants2(n, d), StructureConstants3(n, t), r.label)
