"""Command line front end.

Exit codes: 0 success, 1 a check failed, 2 bad usage or unreadable input.
On any failure stdout carries only a JSON error object; human text goes to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import catalog as cat
from .classify import (
    Distinguished,
    IsotopyWitness,
    NotDim3,
    Witness,
    classify_lts3,
    isomorphic_bol,
    isotopy_witness_check,
    normalize_lts2,
)
from .envelope import EnvelopePair, canonical_envelope, standard_embedding
from .linalg import frac, frac_str
from .loops import FloatBol, NoConvergence, RightAltAlgebra, check_left_bol, tangent_tensors
from .structures import (
    AlgebraError,
    BolAlgebra,
    LieAlgebra,
    LieTripleSystem,
    algebra_from_json,
    lts_from_lie,
    verify_bol,
    verify_lie,
    verify_lts,
)

VERBS = ("verify", "classify", "envelope", "loop-check", "tangent", "isotopy", "catalog", "report")


class CliError(Exception):
    """Usage or input problem (exit 2)."""

    def __init__(self, kind, message, **extra):
        super().__init__(message)
        self.kind = kind
        self.extra = extra


class CheckFailed(Exception):
    """A verification ran and failed (exit 1)."""

    def __init__(self, kind, message, result=None, text=""):
        super().__init__(message)
        self.kind = kind
        self.result = result
        self.text = text


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message)


# --- option ranges ----------------------------------------------------------


def _ranged(kind, lo=None, hi=None, lo_open=False):
    def conv(s):
        try:
            v = kind(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected {kind.__name__}, got {s!r}") from None
        if lo is not None and (v < lo or (lo_open and v == lo)):
            raise argparse.ArgumentTypeError(f"{s} out of range")
        if hi is not None and v > hi:
            raise argparse.ArgumentTypeError(f"{s} out of range")
        return v

    return conv


SAMPLES = _ranged(int, 1, 10**6)
RADIUS = _ranged(float, 0.0, 1.0, lo_open=True)
TOL = _ranged(float, 0.0, 1.0, lo_open=True)
SEED = _ranged(int, 0, 2**32 - 1)
STEP = _ranged(float, 0.0, 0.1, lo_open=True)


# --- targets ----------------------------------------------------------------


class Target:
    def __init__(self, obj, kind, name, entry=None):
        self.obj = obj
        self.kind = kind  # lie | lts | bol | pair | right_alt | loop
        self.name = name
        self.entry = entry


_KIND_OF_ENTRY = {"LTS3": "lts", "LTS2": "lts", "BolAlgebra": "bol", "EnvelopePair": "pair", "LoopLaw": "loop", "RightAlt": "right_alt"}


def _kind_of(obj):
    for t, k in ((LieAlgebra, "lie"), (LieTripleSystem, "lts"), (BolAlgebra, "bol"), (EnvelopePair, "pair"), (RightAltAlgebra, "right_alt")):
        if isinstance(obj, t):
            return k
    return "loop"


def _from_entry(e):
    return Target(e.payload, _KIND_OF_ENTRY[e.kind], e.id, e)


def _read_json(path: Path):
    try:
        text = path.read_text()
    except OSError as exc:
        raise CliError("io", f"cannot read {path}: {exc.strerror or exc}", path=str(path)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError("malformed_json", f"{path}: {exc.msg} at line {exc.lineno} column {exc.colno}", path=str(path), line=exc.lineno, column=exc.colno) from None


def _payload_from_json(d, name):
    kind = d.get("kind")
    if kind == "pair":
        return EnvelopePair.from_json(d)
    if kind == "right_alt":
        prods = {}
        for k, i, j, v in d.get("products", []):
            prods.setdefault((int(i) + 1, int(j) + 1), {})[int(k) + 1] = frac(v)
        return RightAltAlgebra(int(d["dim"]), prods, d.get("label", ""))
    if kind == "loop":
        raise CliError("unsupported", f"{name}: loop laws are code, use the catalog id instead")
    return algebra_from_json(d)


def load_target(arg: str) -> Target:
    """A catalog id, or a JSON file (plain tensor schema or an exported entry)."""
    path = Path(arg)
    if not path.exists() and arg.endswith(".json"):
        alt = cat.fixture_dir() / path.name
        if alt.exists():
            path = alt
    if path.is_file():
        d = _read_json(path)
        if not isinstance(d, dict):
            raise CliError("malformed_input", f"{path}: top level must be an object", path=str(path))
        try:
            if "payload" in d:
                if d.get("kind") == "LoopLaw":
                    return _from_entry(_get_entry(d.get("id", "")))
                obj = _payload_from_json(d["payload"], str(path))
            else:
                obj = _payload_from_json(d, str(path))
        except CliError:
            raise
        except (AlgebraError, KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise CliError("malformed_input", f"{path}: {exc}", path=str(path)) from None
        return Target(obj, _kind_of(obj), d.get("id") or path.name)
    if arg.endswith(".json"):
        raise CliError("io", f"no such file: {arg}", path=arg)
    return _from_entry(_get_entry(arg))


def _get_entry(id_):
    try:
        return cat.catalog_get(id_, verify=False)
    except cat.UnknownId:
        raise CliError("unknown_id", f"unknown catalog id {id_!r}", id=id_) from None


# --- verbs ------------------------------------------------------------------


def _report_text(name, rep):
    if rep.valid:
        return f"{name}: valid ({rep.checked} identity checks)"
    lines = [f"{name}: INVALID, {len(rep.violations)} of {rep.checked} checks fail"]
    for v in rep.violations[:5]:
        lines.append(f"  {v.identity} at {tuple(v.indices)}: {[frac_str(x) for x in v.residual]}")
    if len(rep.violations) > 5:
        lines.append(f"  ... {len(rep.violations) - 5} more")
    return "\n".join(lines)


def cmd_verify(a):
    t = load_target(a.target)
    if t.kind == "loop":
        r = check_left_bol(t.obj, a.samples, a.radius, a.tol, a.seed)
        return _loop_outcome(t, r)
    if t.kind == "right_alt":
        ok = t.obj.is_right_alternative()
        data = {"target": t.name, "kind": t.kind, "valid": ok}
        text = f"{t.name}: {'right-alternative' if ok else 'NOT right-alternative'}"
        return _outcome(ok, data, text, "verification_failed")
    if t.kind == "pair":
        rep = verify_lie(t.obj.G)
        graded = t.obj.is_graded()
        closed = t.obj.closure_holds()
        ok = bool(rep) and graded and closed
        data = {"target": t.name, "kind": t.kind, "valid": ok, "lie": rep.to_json(), "graded": graded, "closure": closed}
        text = _report_text(t.name + " (Lie algebra)", rep) + f"\n  graded: {graded}, B closed: {closed}"
        return _outcome(ok, data, text, "verification_failed")
    rep = {"lie": verify_lie, "lts": verify_lts, "bol": verify_bol}[t.kind](t.obj)
    data = {"target": t.name, "kind": t.kind, **rep.to_json()}
    return _outcome(rep.valid, data, _report_text(t.name, rep), "verification_failed")


def cmd_classify(a):
    t = load_target(a.target)
    if t.kind == "lie":
        m, via = lts_from_lie(t.obj), "[[x,y],z]"
    elif t.kind == "bol":
        m, via = t.obj.as_lts(), "triple"
    elif t.kind == "lts":
        m, via = t.obj, None
    else:
        raise CliError("unsupported", f"cannot classify a {t.kind}")
    try:
        if m.dim == 2:
            f = normalize_lts2(m)
            data = {"target": t.name, "dim": 2, **f.to_json()}
            return _outcome(True, data, f"{t.name}: two-dimensional case {f.case}")
        r = classify_lts3(m)
    except NotDim3 as exc:
        raise CliError("unsupported", str(exc)) from None
    except AlgebraError as exc:
        raise CheckFailed("classification_failed", f"{t.name}: {exc}") from None
    data = {"target": t.name, "dim": 3, **r.to_json()}
    if via:
        data["via"] = via
    return _outcome(True, data, str(r))


def _pair_text(p: EnvelopePair):
    g = p.G
    lines = [f"G: dim {g.dim}, B: dim {p.B.dim}, h: dim {p.h.dim}"]
    for k, i, j, v in g.bracket.nonzero():
        if i < j:
            lines.append(f"  [e{i + 1},e{j + 1}] += {frac_str(v)} e{k + 1}")
    lines.append("  B = " + "; ".join(str([frac_str(x) for x in b]) for b in p.B.basis))
    lines.append("  h = " + ("; ".join(str([frac_str(x) for x in b]) for b in p.h.basis) or "0"))
    return "\n".join(lines)


def cmd_envelope(a):
    t = load_target(a.target)
    if t.kind == "pair":
        p = t.obj
    elif t.entry is not None and t.entry.pair is not None:
        p = t.entry.pair
    elif t.kind == "lts":
        try:
            p = standard_embedding(t.obj)
        except AlgebraError as exc:
            raise CheckFailed("envelope_failed", f"{t.name}: {exc}") from None
    else:
        raise CliError("unsupported", f"no envelope construction for a {t.kind}")
    if a.canonical:
        p = canonical_envelope(p)
    return _outcome(True, {"target": t.name, **p.to_json()}, _pair_text(p))


def _loop_of(t: Target):
    if t.kind == "loop":
        return t.obj
    if t.entry is not None and t.entry.pair is not None:
        return cat._loop_for_pair(t.entry.pair, t.name)
    raise CliError("unsupported", f"{t.name} has no loop law")


def _loop_outcome(t, r):
    data = {"target": t.name, **r.to_json()}
    text = f"{t.name}: max residual {r.max_residual:.3e} over {r.samples} samples ({r.skipped} skipped), tol {r.tol:g}: {'pass' if r.passed else 'FAIL'}"
    return _outcome(r.passed, data, text, "loop_check_failed")


def cmd_loop_check(a):
    t = load_target(a.target)
    try:
        r = check_left_bol(_loop_of(t), a.samples, a.radius, a.tol, a.seed)
    except NoConvergence as exc:
        raise CheckFailed("no_convergence", f"{t.name}: {exc}") from None
    return _loop_outcome(t, r)


def cmd_tangent(a):
    t = load_target(a.target)
    _, got = tangent_tensors(_loop_of(t), a.step)
    data = {"target": t.name, "step": a.step, **got.to_json()}
    text = [f"{t.name}: tangent Bol algebra (step {a.step:g})"]
    ref = None
    if t.entry is not None:
        ref = t.entry.meta.get("bol_id") or (t.entry.id if t.kind == "bol" else None)
    if ref:
        d = got.distance(FloatBol.from_bol(cat.catalog_get(ref, verify=False).payload))
        data.update({"reference": ref, "distance": d, "tol": a.tol, "pass": d <= a.tol})
        text.append(f"  distance to {ref}: {d:.3e} (tol {a.tol:g}): {'pass' if d <= a.tol else 'FAIL'}")
        return _outcome(d <= a.tol, data, "\n".join(text), "tangent_mismatch")
    return _outcome(True, data, "\n".join(text))


def _parse_witness(arg: str):
    p = Path(arg)
    d = _read_json(p) if p.is_file() else _inline_json(arg)
    try:
        phi = tuple(tuple(frac(x) for x in row) for row in d["phi"])
        xi = tuple(frac(x) for x in d["xi"])
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise CliError("malformed_input", f"witness needs 'phi' (matrix) and 'xi' (vector): {exc}") from None
    return IsotopyWitness(phi, xi)


def _inline_json(s):
    try:
        return json.loads(s)
    except json.JSONDecodeError as exc:
        raise CliError("malformed_json", f"witness: {exc.msg} at line {exc.lineno} column {exc.colno}", line=exc.lineno, column=exc.colno) from None


def cmd_isotopy(a):
    t1, t2 = load_target(a.first), load_target(a.second)
    if a.witness:
        p1 = t1.obj if t1.kind == "pair" else (t1.entry.pair if t1.entry else None)
        p2 = t2.obj if t2.kind == "pair" else (t2.entry.pair if t2.entry else None)
        if p1 is None or p2 is None:
            raise CliError("unsupported", "witness checks need enveloping pairs on both sides")
        w = _parse_witness(a.witness)
        try:
            ok = isotopy_witness_check(p1, p2, w)
        except AlgebraError as exc:
            raise CliError("malformed_input", f"witness: {exc}") from None
        data = {"first": t1.name, "second": t2.name, "witness": w.to_json(), "accepted": ok}
        return _outcome(ok, data, f"{t1.name} ~ {t2.name}: witness {'accepted' if ok else 'REJECTED'}", "witness_rejected")
    if t1.kind != "bol" or t2.kind != "bol":
        raise CliError("unsupported", "without --witness both arguments must be Bol algebras")
    v = isomorphic_bol(t1.obj, t2.obj)
    data = {"first": t1.name, "second": t2.name, **v.to_json()}
    if isinstance(v, Witness):
        text = f"{t1.name} = {t2.name}: isomorphic, P = {[[frac_str(x) for x in r] for r in v.P]}"
    elif isinstance(v, Distinguished):
        text = f"{t1.name} != {t2.name}: not isomorphic (invariant {v.invariant}); pass --witness to test an isotopy"
    else:
        text = f"{t1.name} ? {t2.name}: inconclusive after {v.tried} candidates"
    return _outcome(isinstance(v, Witness), data, text, "not_isomorphic")


def cmd_catalog(a):
    if a.export:
        files = cat.export_fixtures(a.export)
        return _outcome(True, {"exported": len(files), "directory": str(Path(a.export))}, f"wrote {len(files)} fixtures to {a.export}")
    if a.check_fixtures is not None:
        d = a.check_fixtures or None
        bad = cat.fixture_divergence(d)
        data = {"directory": str(d or cat.fixture_dir()), "diverging": bad}
        text = "fixtures match the embedded catalog" if not bad else "diverging fixtures:\n" + "\n".join("  " + b for b in bad)
        return _outcome(not bad, data, text, "fixtures_diverge")
    if a.id:
        e = _get_entry(a.id)
        d = e.to_json()
        text = [f"{e.id} ({e.kind})"]
        if e.parameters:
            text.append("  parameters: " + ", ".join(f"{k}={frac_str(v)}" for k, v in e.parameters.items()))
        if e.cross_refs:
            text.extend(f"  {c[0]} {c[1]} ({c[2]})" for c in e.cross_refs)
        if e.tags:
            text.append("  tags: " + ", ".join(e.tags))
        return _outcome(True, d, "\n".join(text))
    if a.kind and a.kind not in cat.KINDS:
        raise CliError("usage", f"unknown kind {a.kind!r}; expected one of {', '.join(cat.KINDS)}")
    ids = cat.catalog_list(a.kind, a.tag)
    return _outcome(True, {"ids": ids}, "\n".join(ids))


def cmd_report(a):
    from .report import run_report

    return report_outcome(run_report(samples=a.samples, radius=a.radius, tol=a.tol, seed=a.seed))


def report_outcome(rep):
    text = "\n".join(_criterion_line(c) for c in rep["criteria"])
    return _outcome(not rep["failed"], rep, text, "criteria_failed")


def _criterion_line(c):
    return f"criterion {c['criterion']:2d} {'PASS' if c['pass'] else 'FAIL'}  {c['name']}"


# --- plumbing ---------------------------------------------------------------


class Outcome:
    def __init__(self, ok, data, text, fail_kind="failed"):
        self.ok, self.data, self.text, self.fail_kind = ok, data, text, fail_kind


def _outcome(ok, data, text, fail_kind="failed"):
    return Outcome(ok, data, text, fail_kind)


def _dumps(d):
    return json.dumps(d, sort_keys=True, indent=1)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default=argparse.SUPPRESS, help="default: text on a terminal, json otherwise")

    def sampling(p):
        p.add_argument("--samples", type=SAMPLES, default=1000)
        p.add_argument("--radius", type=RADIUS, default=0.1)
        p.add_argument("--tol", type=TOL, default=1e-9)
        p.add_argument("--seed", type=SEED, default=42)

    top = _Parser(prog="bollab", description="Bol algebras, Lie triple systems and local Bol loops", parents=[common])
    sub = top.add_subparsers(dest="verb", parser_class=_Parser, metavar="VERB")
    sub.required = True

    p = sub.add_parser("verify", parents=[common], help="check the defining identities")
    p.add_argument("target", help="catalog id or JSON file")
    sampling(p)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("classify", parents=[common], help="type of a 2- or 3-dim Lie triple system")
    p.add_argument("target")
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("envelope", parents=[common], help="enveloping pair")
    p.add_argument("target")
    p.add_argument("--canonical", action="store_true", help="quotient by the largest ideal inside h")
    p.set_defaults(fn=cmd_envelope)

    p = sub.add_parser("loop-check", parents=[common], help="sample the left Bol identity")
    p.add_argument("target")
    sampling(p)
    p.set_defaults(fn=cmd_loop_check)

    p = sub.add_parser("tangent", parents=[common], help="tangent Bol algebra of a loop")
    p.add_argument("target")
    p.add_argument("--step", type=STEP, default=1e-3)
    p.add_argument("--tol", type=TOL, default=1e-4)
    p.set_defaults(fn=cmd_tangent)

    p = sub.add_parser("isotopy", parents=[common], help="isomorphism search or isotopy witness check")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--witness", help='JSON file or inline {"phi": [[...]], "xi": [...]}')
    p.set_defaults(fn=cmd_isotopy)

    p = sub.add_parser("catalog", parents=[common], help="list, show or export catalog entries")
    p.add_argument("id", nargs="?")
    p.add_argument("--kind")
    p.add_argument("--tag")
    p.add_argument("--export", metavar="DIR")
    p.add_argument("--check-fixtures", nargs="?", const="", metavar="DIR")
    p.set_defaults(fn=cmd_catalog)

    p = sub.add_parser("report", parents=[common], help="run the acceptance criteria")
    sampling(p)
    p.set_defaults(fn=cmd_report)
    return top


def _error_json(code, kind, message, **extra):
    return _dumps({"error": {"code": code, "type": kind, "message": message, **extra}}) + "\n"


def _fail(code, kind, message, out, err, **extra):
    out.write(_error_json(code, kind, message, **extra))
    err.write(f"bollab: {message}\n")
    return code


def render(verb, res, fmt):
    """(exit code, stdout, stderr) for a finished command."""
    if res.ok:
        return 0, (_dumps(res.data) if fmt == "json" else res.text) + "\n", ""
    msg = f"{verb} failed"
    return 1, _error_json(1, res.fail_kind, msg, result=res.data), f"{res.text}\nbollab: {msg}\n"


def main(argv=None, stdout=None, stderr=None) -> int:
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    try:
        a = build_parser().parse_args(argv)
    except CliError as exc:
        return _fail(2, exc.kind, str(exc), out, err, **exc.extra)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    fmt = getattr(a, "format", None) or ("text" if out.isatty() else "json")
    try:
        res = a.fn(a)
    except CliError as exc:
        return _fail(2, exc.kind, str(exc), out, err, **exc.extra)
    except CheckFailed as exc:
        return _fail(1, exc.kind, str(exc), out, err)
    code, o, e = render(a.verb, res, fmt)
    out.write(o)
    err.write(e)
    return code


if __name__ == "__main__":
    sys.exit(main())
