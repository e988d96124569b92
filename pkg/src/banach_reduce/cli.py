"""Command-line surface.

Every invocation is normalized into a v1 job manifest (schema-validated),
then executed; ``run <manifest.json>`` executes a stored manifest
directly. Exit codes: 0 = decision/witness OK, 2 = obstruction found
(report written), 1 = error (machine-readable JSON on stderr).
"""

import argparse
import json
import os
import sys

import numpy as np

try:
    import jsonschema
except ImportError:          # pragma: no cover - mirror always has it
    jsonschema = None

from . import certify, expr, svg
from . import reduce as _reduce
from .algebra import (CIRCLE, GRID, PRODUCT, AlgebraInstance, TupleOverA,
                      default_tol)
from .errors import BanachReduceError, ManifestError
from .raster import RasterDomain
from .topology import (b1_falsify, complement_components, default_band_eps,
                       hole_condition, hole_windings, sublevel_zero_set)

MANIFEST_SCHEMA = {
    "type": "object",
    "properties": {
        "schema": {"const": "banach-reduce/manifest-v1"},
        "command": {"enum": ["holes", "check", "reduce", "principal",
                             "extend-row", "exp-reduce", "certify", "demo"]},
        "domain": {"type": ["string", "null"]},
        "field": {"enum": ["R", "C"]},
        "resolution": {"type": "number", "exclusiveMinimum": 0},
        "eps": {"type": ["number", "null"]},
        "tol": {"type": ["number", "null"]},
        "f": {"type": ["string", "array", "null"]},
        "g": {"type": ["string", "null"]},
        "target": {"type": ["string", "null"]},
        "out_dir": {"type": "string"},
        "format": {"enum": ["json", "svg"]},
    },
    "required": ["schema", "command"],
    "additionalProperties": False,
}


def validate_manifest(doc):
    if jsonschema is not None:
        try:
            jsonschema.validate(doc, MANIFEST_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ManifestError(str(exc.message))
    elif doc.get("schema") != "banach-reduce/manifest-v1":
        raise ManifestError("unknown manifest schema")
    return doc


# ------------------------------------------------------------ domain spec

def build_instance(spec, field, h):
    """Instance from a domain spec string.

    annulus[:rin:rout], disk[:r], interval:a:b[,a:b...], circle[:N],
    product:m, or a path to a mask-v1 JSON file.
    """
    if spec is None:
        spec = "annulus"
    if os.path.exists(spec):
        return AlgebraInstance(GRID, field, RasterDomain.load(spec))
    parts = spec.split(":")
    name = parts[0]
    if name == "annulus":
        rin = float(parts[1]) if len(parts) > 1 else 1.0
        rout = float(parts[2]) if len(parts) > 2 else 2.0
        return AlgebraInstance(GRID, field, RasterDomain.annulus(rin, rout, h))
    if name == "disk":
        r = float(parts[1]) if len(parts) > 1 else 2.0
        return AlgebraInstance(GRID, field, RasterDomain.disk(r, h))
    if name == "interval":
        ivs = []
        for p in ":".join(parts[1:]).split(","):
            a, b = p.split(":")
            ivs.append((float(a), float(b)))
        return AlgebraInstance(GRID, field, RasterDomain.interval_union(ivs, h))
    if name == "circle":
        N = int(parts[1]) if len(parts) > 1 else 1024
        return AlgebraInstance(CIRCLE, field, N)
    if name == "product":
        return AlgebraInstance(PRODUCT, field, int(parts[1]))
    raise ManifestError(f"unknown domain spec {spec!r}")


def _element(src, owner):
    return expr.evaluate(src, owner)


def _write(out_dir, name, doc):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    if isinstance(doc, str):
        with open(path, "w") as fh:
            fh.write(doc)
    else:
        certify.save(path, doc)
    return path


# ------------------------------------------------------------- commands

def cmd_holes(m):
    inst = build_instance(m.get("domain"), m.get("field", "C"),
                          m.get("resolution", 1 / 128))
    g = _element(m["g"], inst)
    eps = m.get("eps") or default_band_eps(g)
    Z = sublevel_zero_set(g, eps)
    report = complement_components(Z)
    doc = {
        "band_eps": eps,
        "band_cells": int(Z.npoints),
        "n_components": report.n_components,
        "holes": [{"id": h.id, "cells": int(h.cells.shape[0])} for h in report.holes],
    }
    out = m.get("out_dir", ".")
    paths = [_write(out, "holes.json", doc)]
    if m.get("format") == "svg" and inst.domain.d == 2:
        band = np.zeros(inst.domain.shape, dtype=bool)
        band[tuple(Z.mask_cells().T)] = True
        paths.append(_write(out, "holes.svg",
                            svg.render_domain(inst.domain, band=band, report=report)))
    print(json.dumps(doc))
    return 0, paths


def cmd_check(m):
    inst = build_instance(m.get("domain"), m.get("field", "C"),
                          m.get("resolution", 1 / 128))
    g = _element(m["g"], inst)
    eps = m.get("eps") or default_band_eps(g)
    Z = sublevel_zero_set(g, eps)
    hc = hole_condition(Z, inst.domain)
    counter = b1_falsify(g, eps)
    doc = hc.to_json()
    doc["b1_counterexample"] = None if counter is None else {
        "component": counter["component"],
        "cells": int(counter["cells"].shape[0])}
    _write(m.get("out_dir", "."), "check.json", doc)
    print(json.dumps(doc))
    return (0 if hc.holds else 2), []


def cmd_reduce(m):
    inst = build_instance(m.get("domain"), m.get("field", "C"),
                          m.get("resolution", 1 / 128))
    fsrc = m["f"]
    if isinstance(fsrc, str):
        fsrc = [fsrc]
    f = TupleOverA([_element(s, inst) for s in fsrc])
    g = _element(m["g"], inst)
    tol = m.get("tol") or default_tol(max([c.sup_norm for c in f] + [g.sup_norm]))
    res = _reduce.reduce_tuple(f, g, tol=tol, eps=m.get("eps"))
    out = m.get("out_dir", ".")
    if isinstance(res, _reduce.Irreducible):
        doc = certify.obstruction_certificate("irreducible", inst, res.report, tol)
        _write(out, "reduce.obstruction.json", doc)
        print(json.dumps({"result": "irreducible", "report": res.report}))
        return 2, []
    doc = certify.make_certificate(res, tol)
    path = _write(out, "reduce.cert.json", doc)
    print(json.dumps({"result": "witness", "min_modulus": res.achieved_min,
                      "certificate": path}))
    return 0, [path]


def cmd_principal(m):
    inst = build_instance(m.get("domain"), m.get("field", "C"),
                          m.get("resolution", 1 / 128))
    fsrc = m["f"]
    if isinstance(fsrc, str):
        fsrc = [fsrc]
    f = TupleOverA([_element(s, inst) for s in fsrc])
    g = _element(m["g"], inst)
    tol = m.get("tol") or default_tol(max([c.sup_norm for c in f] + [g.sup_norm]))
    res = _reduce.reduce_to_principal(f, g, tol=tol, eps=m.get("eps"))
    out = m.get("out_dir", ".")
    if isinstance(res, _reduce.NotPrincipal):
        doc = certify.obstruction_certificate("not-principal", inst, res.report, tol)
        _write(out, "principal.obstruction.json", doc)
        print(json.dumps({"result": "not-principal", "report": res.report}))
        return 2, []
    vtol = max(1e-6, 100 * tol)
    doc = certify.make_certificate(res, vtol)
    path = _write(out, "principal.cert.json", doc)
    print(json.dumps({"result": "witness", "residual": res.verify(vtol)["residual"],
                      "certificate": path}))
    return 0, [path]


def cmd_extend_row(m):
    inst = build_instance(m.get("domain"), m.get("field", "C"),
                          m.get("resolution", 1 / 128))
    fsrc = m["f"]
    if isinstance(fsrc, str):
        fsrc = [fsrc]
    coords = [_element(s, inst) for s in fsrc] + [_element(m["g"], inst)]
    u = TupleOverA(coords)
    tol = m.get("tol") or default_tol(max(c.sup_norm for c in u))
    red = _reduce.reduce_tuple(TupleOverA(coords[:-1]), coords[-1], tol=tol,
                               eps=m.get("eps"))
    if isinstance(red, _reduce.Irreducible):
        print(json.dumps({"result": "irreducible", "report": red.report}))
        return 2, []
    ext = _reduce.extend_row(u, red, tol=tol)
    doc = certify.make_certificate(ext, max(1e-8, 10 * tol))
    path = _write(m.get("out_dir", "."), "extend-row.cert.json", doc)
    print(json.dumps({"result": "witness", "certificate": path,
                      "residuals": doc["residuals"]}))
    return 0, [path]


def cmd_exp_reduce(m):
    inst = build_instance(m.get("domain"), m.get("field", "C"),
                          m.get("resolution", 1 / 128))
    a = _element(m["f"] if isinstance(m["f"], str) else m["f"][0], inst)
    g = _element(m["g"], inst)
    tol = m.get("tol") or default_tol(max(a.sup_norm, g.sup_norm))
    wit = _reduce.exp_reduce_pair_bsr1(a, g, tol=tol)
    doc = certify.make_certificate(wit, max(1e-9, 10 * tol))
    path = _write(m.get("out_dir", "."), "exp-reduce.cert.json", doc)
    print(json.dumps({"result": "witness", "certificate": path}))
    return 0, [path]


def cmd_certify(m):
    doc = certify.load(m["target"])
    rep = certify.verify(doc)
    print(json.dumps(rep))
    return (0 if rep["passed"] else 2), []


def cmd_demo(m):
    which = m.get("target") or "annulus"
    out = m.get("out_dir", ".")
    h = m.get("resolution", 1 / 128)
    if which == "annulus":
        base = dict(m, domain="annulus:1:2", g="abs(z) - 1.5",
                    field="C", resolution=h, out_dir=out)
        cmd_check(base)
        code1, _ = cmd_reduce(dict(base, f="z"))
        code2, _ = cmd_principal(dict(base, f="z"))
        code3, _ = cmd_principal(dict(base, f="exp(abs(z))"))
        ok = code1 == 0 and code2 == 2 and code3 == 0
        return (0 if ok else 1), []
    if which == "disk":
        base = dict(m, domain="disk:2", g="abs(z) - 1", field="C",
                    resolution=h, out_dir=out)
        code0, _ = cmd_check(base)
        code1, _ = cmd_reduce(dict(base, f="z"))
        ok = code0 == 2 and code1 == 2
        return (0 if ok else 1), []
    if which == "circle":
        base = dict(m, domain="circle:1024", g="sin(theta)", field="C",
                    out_dir=out)
        code1, _ = cmd_reduce(dict(base, f="z + 2"))
        code2, _ = cmd_principal(dict(base, f="z + 2"))
        ok = code1 == 0 and code2 == 0
        return (0 if ok else 1), []
    raise ManifestError(f"unknown demo {which!r}")


_COMMANDS = {
    "holes": cmd_holes,
    "check": cmd_check,
    "reduce": cmd_reduce,
    "principal": cmd_principal,
    "extend-row": cmd_extend_row,
    "exp-reduce": cmd_exp_reduce,
    "certify": cmd_certify,
    "demo": cmd_demo,
}


def run(manifest):
    """Execute a validated manifest; returns the exit code."""
    validate_manifest(manifest)
    code, _ = _COMMANDS[manifest["command"]](manifest)
    return code


# --------------------------------------------------------------- argparse

def _parser():
    p = argparse.ArgumentParser(
        prog="banach-reduce",
        description="reducibility decisions and witnesses over concrete Banach algebras")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, needs_f=False, needs_g=False):
        sp.add_argument("--domain", default=None,
                        help="annulus[:rin:rout], disk[:r], interval:a:b, "
                             "circle[:N], product:m, or mask JSON path")
        sp.add_argument("--field", choices=["R", "C"], default="C")
        sp.add_argument("--resolution", type=float, default=1 / 128,
                        help="grid cell size h")
        sp.add_argument("--eps", type=float, default=None,
                        help="zero-band half width (default: Lipschitz-scaled)")
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--out-dir", default=".")
        sp.add_argument("--format", choices=["json", "svg"], default="json")
        if needs_f:
            sp.add_argument("-f", action="append", required=True,
                            help="tuple coordinate expression (repeatable)")
        if needs_g:
            sp.add_argument("-g", required=True, help="denominator expression")

    common(sub.add_parser("holes"), needs_g=True)
    common(sub.add_parser("check"), needs_g=True)
    common(sub.add_parser("reduce"), needs_f=True, needs_g=True)
    common(sub.add_parser("principal"), needs_f=True, needs_g=True)
    common(sub.add_parser("extend-row"), needs_f=True, needs_g=True)
    common(sub.add_parser("exp-reduce"), needs_f=True, needs_g=True)
    sp = sub.add_parser("certify")
    sp.add_argument("target", help="certificate JSON file")
    sp = sub.add_parser("demo")
    common(sp)
    sp.add_argument("target", choices=["annulus", "disk", "circle"])
    sp = sub.add_parser("run")
    sp.add_argument("target", help="manifest JSON file")
    return p


def _manifest_from_args(args):
    m = {"schema": "banach-reduce/manifest-v1", "command": args.command}
    for key in ("domain", "field", "resolution", "eps", "tol", "out_dir", "format"):
        if hasattr(args, key):
            m[key] = getattr(args, key)
    if hasattr(args, "f"):
        m["f"] = args.f if len(args.f) > 1 else args.f[0]
    if hasattr(args, "g"):
        m["g"] = args.g
    if hasattr(args, "target"):
        m["target"] = args.target
    return m


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            with open(args.target) as fh:
                manifest = json.load(fh)
            return run(manifest)
        return run(_manifest_from_args(args))
    except BanachReduceError as exc:
        sys.stderr.write(json.dumps(
            {"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 1
    except (OSError, ValueError, KeyError) as exc:
        sys.stderr.write(json.dumps(
            {"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
