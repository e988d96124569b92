"""Certificate serialization and the universal verifier.

A certificate is a self-contained JSON document: claim type, instance
descriptor (with the raster mask embedded for grid instances), the
witness payload, the declared tolerance, and the residuals achieved at
emission time. ``verify`` re-checks the claim from the document alone.
Field order is fixed so identical inputs give byte-identical files.
"""

import json

import numpy as np

from .algebra import (CIRCLE, GRID, PRODUCT, AlgebraElement, AlgebraInstance,
                      TupleOverA)
from .errors import InvalidWitness
from .matrices import ExpProduct
from .raster import RasterDomain
from . import reduce as _reduce

FORMAT = "banach-reduce/certificate-v1"


def _instance_doc(owner):
    doc = {"descriptor": owner.describe()}
    if owner.kind == GRID:
        doc["domain"] = owner.domain.to_json()
    return doc


def _owner_from_doc(doc):
    desc = doc["descriptor"]
    if desc["kind"] == GRID:
        dom = RasterDomain.from_json(doc["domain"])
        return AlgebraInstance(GRID, desc["field"], dom)
    if desc["kind"] == PRODUCT:
        return AlgebraInstance(PRODUCT, desc["field"], desc["m"])
    return AlgebraInstance(CIRCLE, desc["field"], desc["N"])


def _tuple_values(t):
    return [_elem_values(c) for c in t]


def _elem_values(e):
    if e.owner.field == "C":
        return [[float(v.real), float(v.imag)] for v in e.values]
    return [float(v) for v in e.values]


def _elem_from(vals, owner):
    if owner.field == "C":
        arr = np.array([complex(re, im) for re, im in vals])
    else:
        arr = np.array(vals, dtype=float)
    return owner.element(arr)


def _tuple_from(vals, owner):
    return TupleOverA([_elem_from(v, owner) for v in vals])


def make_certificate(witness, tol):
    """Serialize any witness object into a certificate document."""
    tol = float(tol)
    if isinstance(witness, _reduce.ReductionWitness):
        owner = witness.g.owner
        rep = witness.verify(tol)
        return {
            "format": FORMAT,
            "claim": "reduction",
            "instance": _instance_doc(owner),
            "tolerance": tol,
            "witness": {
                "f": _tuple_values(witness.f),
                "g": _elem_values(witness.g),
                "a": _tuple_values(witness.a),
                "achieved_min": float(witness.achieved_min),
                "extension_trace": witness.extension_trace,
            },
            "residuals": {"min_modulus": rep["min_modulus"]},
            "obstruction": None,
        }
    if isinstance(witness, _reduce.PrincipalWitness):
        owner = witness.g.owner
        rep = witness.verify(tol)
        payload = {
            "f": _tuple_values(witness.f),
            "g": _elem_values(witness.g),
            "a": _tuple_values(witness.a),
        }
        if witness.h is not None:
            payload["h"] = _elem_values(witness.h)
        if witness.E is not None:
            payload["exp_product"] = witness.E.to_json()
        return {
            "format": FORMAT,
            "claim": "principal",
            "instance": _instance_doc(owner),
            "tolerance": tol,
            "witness": payload,
            "residuals": {"residual": rep["residual"]},
            "obstruction": None,
        }
    if isinstance(witness, _reduce.RowExtension):
        owner = witness.u.owner
        rep = witness.verify(tol)
        return {
            "format": FORMAT,
            "claim": "row-extension",
            "instance": _instance_doc(owner),
            "tolerance": tol,
            "witness": {
                "u": _tuple_values(witness.u),
                "exp_product": witness.W.to_json(),
            },
            "residuals": {k: rep[k] for k in
                          ("row_residual", "det_residual", "inverse_row_residual")},
            "obstruction": None,
        }
    if isinstance(witness, _reduce.ExpReducibilityWitness):
        owner = witness.g.owner
        rep = witness.verify(tol)
        return {
            "format": FORMAT,
            "claim": "exp-reducibility",
            "instance": _instance_doc(owner),
            "tolerance": tol,
            "witness": {
                "a": _tuple_values(witness.a),
                "g": _elem_values(witness.g),
                "x": _tuple_values(witness.x),
                "b": _tuple_values(witness.b),
            },
            "residuals": {"residual": rep["residual"]},
            "obstruction": None,
        }
    raise InvalidWitness(f"cannot certify object of type {type(witness).__name__}")


def obstruction_certificate(kind, owner, report, tol):
    """Document recording a negative decision (Irreducible / NotPrincipal)."""
    return {
        "format": FORMAT,
        "claim": kind,
        "instance": _instance_doc(owner),
        "tolerance": float(tol),
        "witness": None,
        "residuals": None,
        "obstruction": report,
    }


def witness_from_certificate(doc):
    """Rebuild the live witness object from a certificate document."""
    owner = _owner_from_doc(doc["instance"])
    claim = doc["claim"]
    w = doc["witness"]
    if claim == "reduction":
        return _reduce.ReductionWitness(
            _tuple_from(w["f"], owner), _elem_from(w["g"], owner),
            _tuple_from(w["a"], owner), w["achieved_min"],
            w.get("extension_trace") or {})
    if claim == "principal":
        h = _elem_from(w["h"], owner) if "h" in w else None
        E = ExpProduct.from_json(w["exp_product"], owner) if "exp_product" in w else None
        return _reduce.PrincipalWitness(
            _tuple_from(w["f"], owner), _elem_from(w["g"], owner),
            _tuple_from(w["a"], owner), h=h, E=E)
    if claim == "row-extension":
        return _reduce.RowExtension(
            _tuple_from(w["u"], owner),
            ExpProduct.from_json(w["exp_product"], owner))
    if claim == "exp-reducibility":
        return _reduce.ExpReducibilityWitness(
            _tuple_from(w["a"], owner), _elem_from(w["g"], owner),
            _tuple_from(w["x"], owner), _tuple_from(w["b"], owner))
    raise InvalidWitness(f"unknown claim {claim!r}")


def verify(doc):
    """Re-verify a certificate from its serialized form alone."""
    if doc.get("format") != FORMAT:
        raise InvalidWitness("not a certificate document")
    if doc.get("witness") is None:
        # obstruction records are statements, not re-checkable claims
        return {"claim": doc["claim"], "passed": True,
                "obstruction": doc.get("obstruction")}
    witness = witness_from_certificate(doc)
    rep = witness.verify(doc["tolerance"])
    return {"claim": doc["claim"], "passed": bool(rep["passed"]), "report": rep}


def dumps(doc):
    return json.dumps(doc, indent=None, separators=(",", ":"))


def save(path, doc):
    with open(path, "w") as fh:
        fh.write(dumps(doc))
    return path


def load(path):
    with open(path) as fh:
        return json.load(fh)
