"""Every classified object as data: tensors, enveloping pairs, loop laws.

The embedded definitions are authoritative. ``export_fixtures`` writes one JSON
file per entry and ``fixture_divergence`` reports any file that no longer
matches the embedded data.
"""

from __future__ import annotations

import functools
import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from . import linalg as la
from .classify import LTS2_CASES, LTS3_TAGS, beta_triple, canonical_lts3, isocline_bol
from .envelope import EnvelopePair, bol_from_pair, coordinate_pair, standard_embedding
from .linalg import frac, frac_str
from .loops import (
    AnalyticLoop,
    MatrixGroup,
    RightAltAlgebra,
    bol_from_right_alt,
    faithful_rep,
    pair_loop,
    section_loop,
)
from .structures import (
    BolAlgebra,
    LieAlgebra,
    LieTripleSystem,
    StructureConstants2,
    algebra_to_json,
    lie_from_brackets,
    lts_from_lie,
    sc2_from_products,
    sc3_from_products,
    verify_bol,
    verify_lie,
    verify_lts,
)

KINDS = ("LTS3", "LTS2", "BolAlgebra", "EnvelopePair", "LoopLaw", "RightAlt")
FIXTURE_ENV = "BOLLAB_FIXTURES"


class UnknownId(KeyError):
    pass


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    kind: str
    payload: Any
    parameters: dict = field(default_factory=dict)
    constraints: tuple = ()
    provenance: dict = field(default_factory=dict)
    cross_refs: tuple = ()
    tags: tuple = ()
    pair: EnvelopePair | None = None
    meta: dict = field(default_factory=dict)

    @property
    def expect_valid(self) -> bool:
        return self.meta.get("expect_valid", True)

    def verify(self):
        """Run the verifier for this kind; returns a truthy report or bool."""
        p = self.payload
        if self.kind in ("LTS3", "LTS2"):
            return verify_lts(p)
        if self.kind == "BolAlgebra":
            return verify_bol(p)
        if self.kind == "EnvelopePair":
            return verify_lie(p.G) and p.is_graded() and p.closure_holds()
        if self.kind == "RightAlt":
            return p.is_right_alternative()
        if self.kind == "LoopLaw":
            return True
        raise ValueError(self.kind)

    def constraints_hold(self) -> bool:
        return all(_constraint_ok(c, self.parameters) for c in self.constraints)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "parameters": {k: frac_str(v) for k, v in self.parameters.items()},
            "constraints": list(self.constraints),
            "provenance": dict(self.provenance),
            "cross_refs": [list(c) for c in self.cross_refs],
            "tags": list(self.tags),
            "payload": _payload_json(self),
            "pair": self.pair.to_json() if self.pair is not None else None,
        }


def _payload_json(e: CatalogEntry):
    p = e.payload
    if e.kind in ("LTS3", "LTS2", "BolAlgebra"):
        return algebra_to_json(p)
    if e.kind == "EnvelopePair":
        return p.to_json()
    if e.kind == "RightAlt":
        rows = []
        n = p.dim
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    if p.m[k][i][j]:
                        rows.append([k, i, j, frac_str(p.m[k][i][j])])
        return {"kind": "right_alt", "dim": n, "label": p.label, "products": rows}
    if e.kind == "LoopLaw":
        return {"kind": "loop", "dim": p.dim, "radius": p.radius, "source": p.source, "method": e.meta.get("method"), "bol_id": e.meta.get("bol_id"), "has_printed": "printed" in e.meta}
    raise ValueError(e.kind)


def _constraint_ok(c: str, params: dict) -> bool:
    """Constraints are 'name op value' with op in >=, >, !=, <=, <."""
    name, op, value = c.split()
    x, v = params[name], frac(value)
    return {">=": x >= v, ">": x > v, "!=": x != v, "<=": x <= v, "<": x < v}[op]


def _fmt_params(params: dict) -> str:
    if not params:
        return ""
    return "[" + ",".join(f"{k}={frac_str(v)}" for k, v in params.items()) + "]"


# --- Lie algebras used as envelopes ----------------------------------------

F = Fraction


def _sgn(sign: str) -> int:
    return 1 if sign == "-" else -1


def g_type1(case: str) -> LieAlgebra:
    table = {
        "III.1": (3, {}),
        "III.2": (3, {(2, 3): {1: 1}}),
        "III.3": (4, {(1, 3): {4: 1}}),
        "III.4": (4, {(1, 3): {4: 1}, (2, 3): {4: 1}}),
        "III.5": (5, {(1, 3): {4: 1}, (2, 3): {5: 1}}),
        "III.6": (5, {(1, 3): {4: 1}, (2, 3): {5: 1}}),
    }
    d, br = table[case]
    return lie_from_brackets(d, br, f"G({case})")


def g_type2() -> LieAlgebra:
    return lie_from_brackets(4, {(2, 3): {4: 1}, (3, 4): {1: -1}}, "G(II)")


def g_type2_5() -> LieAlgebra:
    return lie_from_brackets(5, {(2, 3): {4: 1}, (4, 3): {1: 1}, (1, 3): {5: 1}}, "G(II,5)")


def g_type3(sign: str) -> LieAlgebra:
    s = _sgn(sign)
    return lie_from_brackets(4, {(1, 2): {4: 1}, (2, 4): {1: -s}}, f"G(III{sign})")


def g_type4(sign: str) -> LieAlgebra:
    s = _sgn(sign)
    return lie_from_brackets(4, {(1, 2): {4: 1}, (2, 4): {1: -s}, (1, 3): {4: s}, (3, 4): {1: -1}}, f"G(IV{sign})")


def g_type5(sign: str) -> LieAlgebra:
    s = _sgn(sign)
    return lie_from_brackets(4, {(2, 3): {4: 1}, (2, 4): {1: -1}, (3, 4): {2: -s}}, f"G(V{sign})")


def g_type6() -> LieAlgebra:
    return lie_from_brackets(5, {(2, 3): {4: 1}, (3, 4): {1: -1}, (1, 3): {5: -1}, (3, 5): {2: -1}}, "G(VI)")


def g_type7_tabulated() -> LieAlgebra:
    """Relations exactly as tabulated for Type VII; they violate Jacobi."""
    return lie_from_brackets(5, {(2, 3): {4: 1}, (1, 3): {5: 1}, (1, 4): {1: -1}, (2, 5): {1: -1}, (4, 5): {5: 1}}, "G(VII) tabulated")


# Envelope relations as tabulated next to the seven LTS types; used to check
# standard_embedding output up to an explicit isomorphism.
TABULATED_ENVELOPES = {
    "II": [(4, {(2, 3): {4: 1}, (3, 4): {1: -1}})],
    "III": [(4, {(1, 2): {4: 1}, (2, 4): {1: 1}}), (4, {(1, 2): {4: 1}, (2, 4): {1: -1}})],
    # the two signs read as opposite; equal signs violate Jacobi
    "IV": [(4, {(1, 2): {4: 1}, (2, 4): {1: 1}, (1, 3): {4: -1}, (3, 4): {1: -1}}), (4, {(1, 2): {4: 1}, (2, 4): {1: -1}, (1, 3): {4: 1}, (3, 4): {1: -1}})],
    "V": [(4, {(2, 3): {4: 1}, (2, 4): {1: -1}, (3, 4): {2: -1}}), (4, {(2, 3): {4: 1}, (2, 4): {1: -1}, (3, 4): {2: 1}})],
    "VI": [(5, {(1, 2): {4: 1}, (1, 3): {5: -1}, (3, 4): {1: -1}, (3, 5): {2: -1}})],
    "VII": [(5, {(2, 3): {4: 1}, (1, 3): {5: 1}, (1, 4): {1: -1}, (2, 5): {1: -1}, (4, 5): {5: 1}})],
}


def tabulated_envelopes(base: str) -> list[LieAlgebra]:
    return [lie_from_brackets(d, br, f"G({base}) tabulated") for d, br in TABULATED_ENVELOPES[base]]


# --- tabulated closed-form loop laws ---------------------------------------


def _law(fn, name):
    def comp(a, b):
        t, u, v = a[..., 0], a[..., 1], a[..., 2]
        tp, up, vp = b[..., 0], b[..., 1], b[..., 2]
        return np.stack(fn(t, u, v, tp, up, vp), -1)

    return AnalyticLoop(3, comp, 0.1, "ClosedForm", name, {"tabulated": True})


def _p_iii1(t, u, v, tp, up, vp):
    return t + tp, u + up, v + vp


def _p_iii3(t, u, v, tp, up, vp):
    return t + tp + (t * vp - v * tp) / (2 - (v + vp)), u + up, v + vp


def _p_iii4(t, u, v, tp, up, vp):
    num = 2 * t + 2 * tp + t * v + t * vp + tp * vp + tp * v + u * vp - v * up
    return num / (2 + v + vp), u + up, v + vp


def _p_iii5(t, u, v, tp, up, vp):
    w = 2 + v + vp
    return (2 * t + 2 * tp + t * v + 2 * t * vp + tp * vp) / w, (2 * u + 2 * up + u * v + 2 * u * vp + up * vp) / w, v + vp


def _p_iii6(t, u, v, tp, up, vp):
    w = 2 + v + vp
    d = t * vp - v * tp
    return t + tp + d / w, u + up + d / w + (u * vp - v * up) / w - (v + vp) * d / w**2, v + vp


def _p_ii2(t, u, v, tp, up, vp):
    L = (24 * t + 24 * tp - 24 * t * u - 24 * tp * u - 24 * t * up - 24 * tp * up + 12 * t * u * up + 12 * tp * u * up
         + 6 * t * u**2 + 6 * tp * u**2 + 6 * t * up**2 + 6 * tp * up**2 - 2 * u * v * up - 2 * u * up * vp
         + 6 * u * v * vp - 6 * v * up * vp - 6 * u * up * vp * v + 2 * u**2 * v * up + 2 * u**2 * up * vp - 4 * u**2 * v * vp
         + 2 * u * vp**2 - 4 * v**2 * up + 2 * u * v**2 * up + 2 * u * v * up**2 - 6 * u * up * vp**2
         + 6 * u * vp**2 + 2 * u * up**2 * vp + 4 * v * up**2 * vp - 3 * u**2 * vp**2
         + 5 * v**2 * up**2 - u**2 * v * up**2 + u**2 * up * vp**2
         - u**2 * up**2 * vp + u * up**2 * vp**2 - v**2 * up**3 + 5 * u**2 * v * up * vp / 2 - u * v**2 * up**2
         + 3 * u * v * vp * up**2 / 2 - u**3 * v * up / 2 - up * vp * u**3 / 2 - u * v * up**3 / 2
         - u * up**3 / 2 - v * vp * up**3 / 2 + v * vp * u**3 / 2)
    return L / (6 * (2 - (u + up)) ** 2), u + up, v + vp + (u * vp - v * up) / (2 - u - up)


def _p_ii3(t, u, v, tp, up, vp):
    b2 = (v**2 * up - u * v * vp + u * v**2 - v * up * vp - up * v**3 + u * vp * v**2
          + 3 * u * v * vp - 3 * up * v**2 - 3 * v * up * vp + u * v * vp - up * vp * v**2)
    return t + tp + b2 / (6 * (2 - v - vp)), u + up + (up * v - vp * u) / (2 - v - vp), v + vp


def _p_ii4(t, u, v, tp, up, vp):
    first = t + tp + (u * vp - v * up) / 2 + (v**2 * up - u * v * vp) / 12 + (u * vp**2 - v * up * vp) / 12
    return first, u + up, v + vp


def _p_ii5(beta):
    b = float(beta)

    def fn(t, u, v, tp, up, vp):
        w = 2 + b * (v + vp)
        d = u * vp - v * up
        # "(v+v)" kept as tabulated
        x = (t + tp - (u * v * vp - v * up) / 12 - (v * up * vp - u * vp**2) / 12 + (t * vp - v * tp) / 2
             - d * (v + vp) / 2 + ((v + v) / 2 + b * (v + vp) ** 2 / 12) * d / w)
        return x, u + up + b * d / w, v + vp

    return fn


# --- Type VII row 6 loop from the tabulated group law ------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _vii_delta(x, y):
    e = np.exp(x[..., 3] - x[..., 1] * x[..., 2] / 2)
    return np.stack([
        x[..., 0] + (1 + x[..., 1] * x[..., 2]) * y[..., 0] * e,
        x[..., 1] + y[..., 1],
        x[..., 2] + y[..., 2],
        x[..., 3] + y[..., 3] + (x[..., 1] * y[..., 2] + y[..., 1] * x[..., 2]) / 2,
        x[..., 4] - x[..., 2] * y[..., 0] * e + y[..., 4] * e,
    ], -1)


def _vii_section(b):
    t, u, v = b[..., 0], b[..., 1], b[..., 2]
    uv = u * v
    a = 0.5 * (_GL_NODES + 1.0)
    integral = 0.5 * np.sum(_GL_WEIGHTS * np.exp(-np.multiply.outer(uv, a**2) / 2), -1)
    small = np.abs(u) < 1e-4
    safe_u = np.where(small, 1.0, u)
    # (exp(-uv/2) - 1)/u, with its series near u = 0
    ratio = np.where(small, -v / 2 + u * v**2 / 8, np.expm1(-uv / 2) / safe_u)
    x1 = t * (2 * integral - np.exp(-uv / 2))
    x4 = t * ratio
    return np.stack([x1, u, v, x4, np.zeros_like(t)], -1)


def vii6_loop(omega) -> AnalyticLoop:
    w = float(omega)
    hv = np.array([[w, 0, 0, 1, 0], [1, 0, 0, 0, 1]], dtype=float)
    loop = section_loop(5, 3, _vii_delta, _vii_section, lambda q: q @ hv, 2, f"VII.6[omega={frac_str(frac(omega))}]")
    loop.meta["assumptions"] = "fifth section coordinate 0; subgroup parametrised linearly"
    return loop


# --- construction ----------------------------------------------------------


def _vecs(rows):
    return [tuple(frac(x) for x in r) for r in rows]


class _Builder:
    def __init__(self):
        self.entries: dict[str, CatalogEntry] = {}

    def add(self, e: CatalogEntry):
        if e.id in self.entries:
            raise ValueError(f"duplicate id {e.id}")
        self.entries[e.id] = e
        return e

    def bol_from_pair(self, id_, g, h_rows, params=None, constraints=(), tags=(), prov=None, cross=(), label=None):
        nb = 3
        pair = coordinate_pair(g, nb, _vecs(h_rows), label or id_)
        b = bol_from_pair(pair, id_)
        return self.add(CatalogEntry(id_, "BolAlgebra", b, dict(params or {}), tuple(constraints), prov or {}, tuple(cross), tuple(tags), pair))


def _loop_for_pair(pair: EnvelopePair, name: str) -> AnalyticLoop:
    if not pair.h.dim and not pair.G.bracket.nonzero():
        return AnalyticLoop(pair.G.dim, lambda a, b: a + b, 0.1, "ClosedForm", name)
    mg = MatrixGroup(pair.G, faithful_rep(pair.G))
    loop = pair_loop(pair, delta=mg.delta, source="ClosedForm", name=name)
    loop.meta["group"] = "matrix"
    return loop


def _build() -> dict[str, CatalogEntry]:
    bd = _Builder()
    add = bd.add

    # LTS: the canonical tensors
    for tag in LTS3_TAGS:
        m = canonical_lts3(tag)
        meta = {"expect_valid": tag != "VII"}
        add(CatalogEntry(f"LTS/{tag}", "LTS3", m, provenance={"origin": "tabulated", "family": "3-dim solvable LTS types"}, tags=("canonical", tag.rstrip("+-")), meta=meta))

    # LTS from the nine three-dimensional Lie algebras
    bianchi = {
        "I": ({}, {}),
        "II": ({(2, 3): {1: 1}}, {}),
        "III": ({(1, 3): {1: 1}}, {}),
        "IV": ({(1, 3): {1: 1}, (2, 3): {1: 1, 2: 1}}, {}),
        "V": ({(1, 3): {1: 1}, (2, 3): {2: 1}}, {}),
        "VI": ({(1, 3): {1: 1}, (2, 3): {2: F(2)}}, {"lambda": F(2)}),
        "VII": ({(1, 3): {2: 1}, (2, 3): {1: -1, 2: 1}}, {"mu": F(1)}),
        "VIII": ({(1, 2): {1: 1}, (1, 3): {2: 2}, (2, 3): {3: 1}}, {}),
        "IX": ({(1, 2): {3: 1}, (1, 3): {2: -1}, (2, 3): {1: 1}}, {}),
    }
    for name, (br, params) in bianchi.items():
        g = lie_from_brackets(3, br, f"Bianchi {name}")
        m = lts_from_lie(g, f"LTS/Bianchi.{name}")
        add(CatalogEntry(f"LTS/Bianchi.{name}", "LTS3", m, params, provenance={"origin": "derived", "family": "LTS of a 3-dim Lie algebra"}, tags=("Bianchi",), meta={"lie": g}))

    # two-dimensional LTS
    for inertia, case in LTS2_CASES.items():
        p, n_, z = inertia
        d = [1] * p + [-1] * n_ + [0] * z
        beta = [[d[0], 0], [0, d[1]]]
        m = LieTripleSystem(2, beta_triple(beta), f"LTS2/{case}")
        add(CatalogEntry(f"LTS2/{case}", "LTS2", m, provenance={"origin": "tabulated", "family": "2-dim LTS"}, tags=("LTS2",), meta={"beta": beta}))

    # envelopes of the canonical LTS
    for tag in LTS3_TAGS:
        if tag == "VII":
            continue
        pair = standard_embedding(canonical_lts3(tag))
        add(CatalogEntry(f"ENV/{tag}", "EnvelopePair", pair, provenance={"origin": "derived", "family": "standard embedding"}, tags=("envelope", tag.rstrip("+-"))))

    prov_t = lambda fam: {"origin": "tabulated", "family": fam}

    # Bol algebras with zero triple
    h1 = {"III.1": [], "III.2": [], "III.3": [(-1, 0, 0, 1)], "III.4": [(-1, 0, 0, 1)],
          "III.5": [(-1, 0, 0, 1, 0), (0, -1, 0, 0, 1)], "III.6": [(-1, -1, 0, 1, 0), (0, -1, 0, 0, 1)]}
    cross1 = {"III.3": (("not_isomorphic", "BOL/III.4", "invariants"),),
              "III.5": (("not_isomorphic", "BOL/III.6", "isomorphic_bol"), ("not_isotopic", "BOL/III.6", "isotopy_search"))}
    for case, h in h1.items():
        bd.bol_from_pair(f"BOL/{case}", g_type1(case), h, tags=("I",), prov=prov_t("zero triple"), cross=cross1.get(case, ()))

    # Type II, four-dimensional envelope
    g2 = g_type2()
    cases2 = {"II.1": (0, 0, 0, 1), "II.2": (0, 0, -1, 1), "II.3": (0, 1, 0, 1), "II.4": (-1, 0, 0, 1)}
    for case, h in cases2.items():
        cross = (("isotopic", "BOL/II.4", "isotopy_witness_check"),) if case == "II.1" else ()
        bd.bol_from_pair(f"BOL/{case}", g2, [h], tags=("II",), prov=prov_t("Type II, 4-dim envelope"), cross=cross)

    # Type II, five-dimensional envelope: h = <e4 + a e1 + b e2, e5 + ab e1 + bb e2>
    g25 = g_type2_5()

    def h5(a, b, ab, bb):
        return [(a, b, 0, 1, 0), (ab, bb, 0, 0, 1)]

    for nu in (F(0), F(-1), F(-3, 2)):
        bd.bol_from_pair(f"BOL/II5.1{_fmt_params({'nu': nu})}", g25, h5(nu, -1, 1, 0), {"nu": nu}, ("nu <= 0",), ("II",), prov_t("Type II, 5-dim envelope"))
    for b in (F(0), F(-1, 2), F(-3, 2)):
        bd.bol_from_pair(f"BOL/II5.2{_fmt_params({'b': b})}", g25, h5(0, b, 1, 0), {"b": b}, ("b <= 0", "b != -1"), ("II",), prov_t("Type II, 5-dim envelope"))
    for mu, th in ((F(0), F(0)), (F(-1), F(1)), (F(-3, 2), F(1, 2))):
        bd.bol_from_pair(f"BOL/II5.3{_fmt_params({'mu': mu, 'theta': th})}", g25, h5(mu, 0, th, 1), {"mu": mu, "theta": th}, ("mu <= 0", "theta >= 0"), ("II",), prov_t("Type II, 5-dim envelope"))
    beta_ex = F(1, 2)
    bd.bol_from_pair(f"BOL/II5.ex{_fmt_params({'beta': beta_ex})}", g25, [(0, -beta_ex, 0, 1, 0), (-1, 0, 0, 0, 1)], {"beta": beta_ex}, ("beta != -1",), ("II",), prov_t("Type II, 5-dim example"))

    # Types III and IV, four-dimensional envelopes
    for sign, word in (("-", "minus"), ("+", "plus")):
        g3 = g_type3(sign)
        tag = f"III{sign}"
        bd.bol_from_pair(f"BOL/III{word}.1", g3, [(0, 1, 0, 1)], tags=(tag,), prov=prov_t(f"Type {tag}"))
        for x in (F(0), F(1), F(3, 2)):
            bd.bol_from_pair(f"BOL/III{word}.2[x={frac_str(x)}]", g3, [(x, 0, 0, 1)], {"x": x}, ("x >= 0",), (tag,), prov_t(f"Type {tag}"))
            bd.bol_from_pair(f"BOL/III{word}.3[x={frac_str(x)}]", g3, [(x, 0, 1, 1)], {"x": x}, ("x >= 0",), (tag,), prov_t(f"Type {tag}"))
        g4 = g_type4(sign)
        tag = f"IV{sign}"
        for x, p in ((F(0), F(0)), (F(1), F(1)), (F(3, 2), F(-1, 2))):
            ps = {"x": x, "p": p}
            bd.bol_from_pair(f"BOL/IV{word}.1{_fmt_params(ps)}", g4, [(-x, -p, -1, 1)], ps, ("x >= 0",), (tag,), prov_t(f"Type {tag}"))
            bd.bol_from_pair(f"BOL/IV{word}.2{_fmt_params(ps)}", g4, [(-x, -p, 0, 1)], ps, ("x >= 0",), (tag,), prov_t(f"Type {tag}"))
        g5 = g_type5(sign)
        tag = f"V{sign}"
        bd.bol_from_pair(f"BOL/V{word}.1", g5, [(0, 0, 1, 1)], tags=(tag,), prov=prov_t(f"Type {tag}"))
        for y in (F(0), F(1), F(3, 2)):
            bd.bol_from_pair(f"BOL/V{word}.2[y={frac_str(y)}]", g5, [(0, y, 0, 1)], {"y": y}, ("y >= 0",), (tag,), prov_t(f"Type {tag}"))
        bd.bol_from_pair(f"BOL/V{word}.3", g5, [(1, 1, 0, 1)], tags=(tag,), prov=prov_t(f"Type {tag}, isotopy representative"))

    # Type VI, five-dimensional envelope
    g6 = g_type6()
    for l1, l2, d in ((F(1), F(1), F(0)), (F(1), F(2), F(1)), (F(-1), F(3, 2), F(1, 2))):
        ps = {"lambda1": l1, "lambda2": l2, "delta": d}
        bd.bol_from_pair(f"BOL/VI.1{_fmt_params(ps)}", g6, [(l1, 0, 0, 1, 0), (-l2, -d, 0, 0, 1)], ps, ("lambda1 != 0", "lambda2 != 0"), ("VI",), prov_t("Type VI"))
    for a, b, mu, nu in ((F(0), F(1), F(0), F(1)), (F(1), F(1), F(1), F(1)), (F(1, 2), F(3, 2), F(2), F(1, 2))):
        ps = {"alpha": a, "beta": b, "mu": mu, "nu": nu}
        h = [(a + b * mu, b * nu, 0, 1, 0), (b * (1 + mu * mu) / nu, -(a - mu), 0, 0, 1)]
        bd.bol_from_pair(f"BOL/VI.2{_fmt_params(ps)}", g6, h, ps, ("alpha >= 0", "beta > 0", "mu >= 0", "nu > 0"), ("VI",), prov_t("Type VI"))

    # Type VII rows as tabulated; the triple is not a Lie triple system
    rows = {
        1: ({}, {}),
        2: ({}, {(2, 3): {1: -1}}),
        3: ({}, {(2, 3): {3: -1}}),
        4: ({}, {(2, 3): {1: -1}}),
        5: ({}, {(2, 3): {1: 1, 3: -1}}),
    }
    tri7 = {(2, 3, 1): {1: 1}, (3, 1, 2): {1: 1}}
    fam = prov_t("Type VII")
    for r in (1, 2, 3, 4, 5):
        dot = rows[r][1]
        b = BolAlgebra(3, sc2_from_products(3, dot), sc3_from_products(3, tri7), f"BOL/VII.{r}")
        add(CatalogEntry(f"BOL/VII.{r}", "BolAlgebra", b, provenance=fam, tags=("VII",), meta={"expect_valid": False}))
    param_rows = {
        6: (("omega",), ((F(1, 2),), (F(1),), (F(3, 2),)), ("omega > 0",), lambda w: {(2, 3): {1: -w}, (1, 3): {1: -1}}),
        7: (("s", "lambda"), ((F(0), F(1)), (F(1), F(1)), (F(3, 2), F(1, 2))), ("s >= 0", "lambda > 0"), lambda s, l: {(2, 3): {1: -s}, (1, 3): {1: -l, 2: -1, 3: -1}}),
        8: (("s", "lambda"), ((F(1, 2), F(1)), (F(1), F(1)), (F(3, 2), F(1, 2))), ("s > 0", "lambda > 0"), lambda s, l: {(2, 3): {1: -s}, (1, 3): {1: -l, 2: -1}}),
        9: (("gamma", "t"), ((F(1), F(1)), (F(1, 2), F(2)), (F(3, 2), F(1, 2))), ("gamma > 0", "t > 0"), lambda g, t: {(2, 3): {1: -g, 3: -1}, (1, 3): {1: -t, 3: -1}}),
        10: (("eta", "tau", "kappa"), ((F(0), F(0), F(0)), (F(1), F(1), F(2)), (F(1, 2), F(3, 2), F(1, 2))), ("eta >= 0", "tau >= 0", "kappa >= 0", "kappa != 1"),
             lambda e, t, k: {(2, 3): {1: -e, 3: -k}, (1, 3): {1: -t, 3: -1}}),
    }
    for r, (names, values, cons, dot_fn) in param_rows.items():
        for vals in values:
            ps = dict(zip(names, vals))
            id_ = f"BOL/VII.{r}{_fmt_params(ps)}"
            b = BolAlgebra(3, sc2_from_products(3, dot_fn(*vals)), sc3_from_products(3, tri7), id_)
            pair = None
            if r == 6:
                pair = coordinate_pair(g_type7_tabulated(), 3, _vecs([(vals[0], 0, 0, 1, 0), (1, 0, 0, 0, 1)]), id_)
            add(CatalogEntry(id_, "BolAlgebra", b, ps, cons, fam, (), ("VII",), pair, {"expect_valid": False}))

    # right-alternative algebras
    ra_tables = {
        "A": ({(2, 3): {2: 1}, (3, 2): {1: 1}, (3, 3): {3: 1}}, {}),
        "B": ({(1, 3): {1: 1}, (3, 1): {1: 1}, (3, 2): {1: 1, 2: 1}, (3, 3): {3: 1}}, {}),
        "C": ({(1, 3): {1: 1}, (2, 3): {2: 1}, (3, 1): {1: 1, 2: 1}, (3, 3): {3: 1}}, {}),
        "E": (lambda beta: {(2, 2): {1: 1}, (2, 3): {2: 1}, (3, 2): {1: beta}, (3, 3): {3: 1}}, {"beta": F(1)}),
        "H": (lambda gamma: {(1, 3): {1: 1}, (2, 2): {1: 1}, (2, 3): {1: gamma}, (3, 3): {3: 1}, (3, 1): {1: 1}, (3, 2): {2: 1}}, {"gamma": F(1)}),
    }
    ra_cross = {"A": (("isomorphic", "BOL/RA.B", "transport:diag(-1,1,1)"),), "E": (("isomorphic", "BOL/RA.H", "transport:[[-1,2beta,0],[0,1,0],[0,0,1]]"),)}
    for name, (table, params) in ra_tables.items():
        prod = table(*params.values()) if callable(table) else table
        r = RightAltAlgebra(3, prod, f"RA.{name}")
        suffix = _fmt_params(params)
        add(CatalogEntry(f"RA/{name}{suffix}", "RightAlt", r, params, provenance=prov_t("right-alternative algebras"), tags=("RightAlt",)))
        b = bol_from_right_alt(r)
        bid = f"BOL/RA.{name}" if not params else f"BOL/RA.{name}{suffix}"
        add(CatalogEntry(bid, "BolAlgebra", b, params, provenance={"origin": "derived", "family": "right-alternative algebras"}, cross_refs=ra_cross.get(name, ()), tags=("RightAlt",), meta={"right_alt": r}))

    # isocline seeds: alpha = 0 and beta of each nonzero rank/signature class
    seeds = {"rank1": (1, 0, 0), "rank2_def": (1, 1, 0), "rank2_ind": (1, -1, 0), "rank3_def": (1, 1, 1), "rank3_ind": (1, 1, -1)}
    for name, d in seeds.items():
        beta = [[d[i] if i == j else 0 for j in range(3)] for i in range(3)]
        b = isocline_bol((0, 0, 0), beta, f"ISO/{name}")
        add(CatalogEntry(f"ISO/{name}", "BolAlgebra", b, provenance={"origin": "derived", "family": "isocline"}, tags=("isocline",), meta={"beta": beta}))

    # loop laws
    tabulated = {
        "III.1": _p_iii1, "III.3": _p_iii3, "III.4": _p_iii4, "III.5": _p_iii5, "III.6": _p_iii6,
        "II.2": _p_ii2, "II.3": _p_ii3, "II.4": _p_ii4,
    }
    loop_sources = [
        ("III.1", "BOL/III.1"), ("III.2", "BOL/III.2"), ("III.3", "BOL/III.3"), ("III.4", "BOL/III.4"), ("III.5", "BOL/III.5"), ("III.6", "BOL/III.6"),
        ("II.1", "BOL/II.1"), ("II.2", "BOL/II.2"), ("II.3", "BOL/II.3"), ("II.4", "BOL/II.4"),
        ("II5.1", "BOL/II5.1[nu=-1]"), ("II5.2", "BOL/II5.2[b=-1/2]"), ("II5.3", "BOL/II5.3[mu=-1,theta=1]"), ("II5.ex", "BOL/II5.ex[beta=1/2]"),
        ("III-.1", "BOL/IIIminus.1"), ("III-.2", "BOL/IIIminus.2[x=1]"), ("III-.3", "BOL/IIIminus.3[x=1]"),
        ("III+.1", "BOL/IIIplus.1"), ("III+.2", "BOL/IIIplus.2[x=1]"), ("III+.3", "BOL/IIIplus.3[x=1]"),
        ("IV-.1", "BOL/IVminus.1[x=1,p=1]"), ("IV-.2", "BOL/IVminus.2[x=1,p=1]"), ("IV+.1", "BOL/IVplus.1[x=1,p=1]"), ("IV+.2", "BOL/IVplus.2[x=1,p=1]"),
        ("V-.1", "BOL/Vminus.1"), ("V-.2", "BOL/Vminus.2[y=1]"), ("V-.3", "BOL/Vminus.3"), ("V+.1", "BOL/Vplus.1"), ("V+.2", "BOL/Vplus.2[y=1]"),
        ("VI.1", "BOL/VI.1[lambda1=1,lambda2=2,delta=1]"), ("VI.2", "BOL/VI.2[alpha=1,beta=1,mu=1,nu=1]"),
    ]
    entries = bd.entries
    for name, bid in loop_sources:
        src = entries[bid]
        loop = _loop_for_pair(src.pair, name)
        meta = {"bol_id": bid, "method": "MatrixGroup" if loop.meta.get("group") else "Additive"}
        if name in tabulated:
            meta["printed"] = _law(tabulated[name], f"{name} tabulated")
        if name == "II5.ex":
            meta["printed"] = _law(_p_ii5(beta_ex), "II5.ex tabulated")
        if name == "III.2":
            # the unipotent matrix group itself, in exponential coordinates
            meta["printed"] = _heisenberg_matrix_loop()
        tag = src.tags[0] if src.tags else ""
        add(CatalogEntry(f"LOOP/{name}", "LoopLaw", loop, dict(src.parameters), provenance=src.provenance, tags=("loop", tag), pair=src.pair, meta=meta))
    w = F(1)
    add(CatalogEntry("LOOP/VII.6", "LoopLaw", vii6_loop(w), {"omega": w}, provenance=prov_t("Type VII group law"), tags=("loop", "VII"),
                     pair=entries["BOL/VII.6[omega=1]"].pair, meta={"bol_id": "BOL/VII.6[omega=1]", "method": "TabulatedGroupLaw", "expect_bol": False}))
    for name in ("A", "B", "C", "E[beta=1]", "H[gamma=1]"):
        r = entries[f"RA/{name}"].payload
        add(CatalogEntry(f"LOOP/RA.{name}", "LoopLaw", r.loop(), dict(entries[f"RA/{name}"].parameters), provenance=prov_t("right-alternative loop"), tags=("loop", "RightAlt"),
                         meta={"bol_id": f"BOL/RA.{name}", "method": "RightAlt"}))
    return entries


def _heisenberg_matrix_loop() -> AnalyticLoop:
    """Upper unitriangular 3x3 matrices with e1 -> E13, e2 -> E12, e3 -> E23."""
    g = g_type1("III.2")
    z = [[0] * 3 for _ in range(3)]

    def unit(r, c):
        m = [row[:] for row in z]
        m[r][c] = 1
        return m

    mg = MatrixGroup(g, [unit(0, 2), unit(0, 1), unit(1, 2)])
    return AnalyticLoop(3, mg.delta, 0.1, "ClosedForm", "III.2 unipotent", {"tabulated": True})


@functools.lru_cache(maxsize=1)
def _catalog() -> dict[str, CatalogEntry]:
    return _build()


def catalog_list(kind: str | None = None, tag: str | None = None) -> list[str]:
    """Ids in insertion order, optionally filtered by kind and/or tag."""
    out = []
    for id_, e in _catalog().items():
        if kind is not None and e.kind != kind:
            continue
        if tag is not None and tag not in e.tags:
            continue
        out.append(id_)
    return out


class CatalogCorrupt(RuntimeError):
    pass


_reports: dict[str, Any] = {}


def catalog_get(id_: str, verify: bool = True) -> CatalogEntry:
    """Look up an entry; with ``verify`` its structure identities are re-checked.

    Entries tabulated as invalid (``expect_valid`` False) are returned with
    their failing report available through ``verification_report``.
    """
    try:
        e = _catalog()[id_]
    except KeyError:
        raise UnknownId(id_) from None
    if verify and id_ not in _reports:
        rep = e.verify()
        _reports[id_] = rep
        if e.expect_valid and not rep:
            raise CatalogCorrupt(f"{id_} no longer satisfies its identities")
    return e


def verification_report(id_: str):
    catalog_get(id_)
    return _reports[id_]


def catalog_entries() -> list[CatalogEntry]:
    return list(_catalog().values())


# --- fixtures ---------------------------------------------------------------


def fixture_dir() -> Path:
    env = os.environ.get(FIXTURE_ENV)
    return Path(env) if env else Path(__file__).parent / "fixtures"


# plain tensor files for CLI examples, not catalog entries
EXTRA_FIXTURES = {
    "LTS_zero3.json": {"kind": "lts", "dim": 3, "label": "zero", "bilinear": [], "trilinear": []},
}


def fixture_name(id_: str) -> str:
    return id_.replace("/", "_") + ".json"


def _dump(d) -> str:
    return json.dumps(d, indent=1, sort_keys=True) + "\n"


def export_fixtures(directory: Path | str | None = None) -> list[Path]:
    d = Path(directory) if directory else fixture_dir()
    d.mkdir(parents=True, exist_ok=True)
    written = []
    for e in catalog_entries():
        p = d / fixture_name(e.id)
        p.write_text(_dump(e.to_json()))
        written.append(p)
    for name, body in EXTRA_FIXTURES.items():
        p = d / name
        p.write_text(_dump(body))
        written.append(p)
    return written


def fixture_divergence(directory: Path | str | None = None) -> list[str]:
    """Ids whose fixture file is missing or differs from the embedded entry."""
    d = Path(directory) if directory else fixture_dir()
    bad = []
    for e in catalog_entries():
        p = d / fixture_name(e.id)
        if not p.exists() or json.loads(p.read_text()) != json.loads(_dump(e.to_json())):
            bad.append(e.id)
    for name, body in EXTRA_FIXTURES.items():
        p = d / name
        if not p.exists() or json.loads(p.read_text()) != body:
            bad.append(name)
    return bad
