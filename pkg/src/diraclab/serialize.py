"""Versioned JSON schemas for bundles, Dirac fibers, coisotropic data, and
equivalence data (gfb-v1, df-v1, cd-v1, med-v1).

Scalars serialize as exact "p/q" strings, matrices as row-major nested
arrays; dump -> load round trips preserve every scalar bit-exactly.
Coisotropic dumps reference their bundle dumps by content hash, and loaders
verify those hashes.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction

from .coisotropic import CoisotropicDatum
from .courant import CourantFiber, DiracFiber, ThreeFormFiber, TwoFormFiber
from .groupoid import (
    ArrowFiber,
    ComposablePairFiber,
    GroupoidFiberBundle,
    MorphismFiber,
    ObjectFiber,
    pair_tangent,
)
from .linalg import LinMap, Subspace, canonicalize, frac


class SchemaError(ValueError):
    pass


def scalar_to_json(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def scalar_from_json(s: str) -> Fraction:
    return frac(s)


def matrix_to_json(m: LinMap) -> dict:
    return {"rows": m.rows, "cols": m.cols,
            "entries": [[scalar_to_json(x) for x in r] for r in m.entries]}


def matrix_from_json(d: dict) -> LinMap:
    return LinMap(d["rows"], d["cols"],
                  tuple(tuple(frac(x) for x in r) for r in d["entries"]))


def three_form_to_json(phi: ThreeFormFiber) -> dict:
    return {"dim": phi.dim,
            "coeffs": [[i, j, k, scalar_to_json(c)] for (i, j, k), c in phi.coeffs]}


def three_form_from_json(d: dict) -> ThreeFormFiber:
    return ThreeFormFiber.from_dict(
        d["dim"], {(i, j, k): frac(c) for i, j, k, c in d["coeffs"]})


def dirac_to_json(l: DiracFiber) -> dict:
    return {"n": l.n, "basis": [[scalar_to_json(x) for x in row]
                                for row in l.space.basis]}


def dirac_from_json(d: dict) -> DiracFiber:
    n = d["n"]
    space = canonicalize([[frac(x) for x in row] for row in d["basis"]], 2 * n) \
        if d["basis"] else Subspace(2 * n, ())
    return DiracFiber(CourantFiber(n), space)


def dirac_family_to_json(fibers) -> dict:
    return {"schema": "df-v1", "fibers": [dirac_to_json(l) for l in fibers]}


def dirac_family_from_json(d: dict) -> list[DiracFiber]:
    if d.get("schema") != "df-v1":
        raise SchemaError("expected df-v1")
    return [dirac_from_json(x) for x in d["fibers"]]


def bundle_to_json(b: GroupoidFiberBundle) -> dict:
    return {
        "schema": "gfb-v1",
        "name": b.name,
        "objects": [{"dim": o.dim, "adim": o.adim,
                     "rho": matrix_to_json(o.rho),
                     "sigma": matrix_to_json(o.sigma),
                     "phi": three_form_to_json(o.phi)} for o in b.objects],
        "arrows": [{"src": a.src, "tgt": a.tgt, "dim": a.dim,
                    "s_star": matrix_to_json(a.s_star),
                    "t_star": matrix_to_json(a.t_star),
                    "omega": matrix_to_json(a.omega.matrix) if a.omega else None,
                    "left": matrix_to_json(a.left),
                    "right": matrix_to_json(a.right),
                    "unit": a.unit,
                    "u_star": matrix_to_json(a.u_star) if a.u_star else None}
                   for a in b.arrows],
        "pairs": [{"g": p.g, "h": p.h, "gh": p.gh,
                   "m_star": matrix_to_json(p.m_star)} for p in b.pairs],
    }


def bundle_from_json(d: dict) -> GroupoidFiberBundle:
    if d.get("schema") != "gfb-v1":
        raise SchemaError("expected gfb-v1")
    objects = tuple(ObjectFiber(o["dim"], o["adim"], matrix_from_json(o["rho"]),
                                matrix_from_json(o["sigma"]),
                                three_form_from_json(o["phi"]))
                    for o in d["objects"])
    arrows = tuple(ArrowFiber(
        a["src"], a["tgt"], a["dim"], matrix_from_json(a["s_star"]),
        matrix_from_json(a["t_star"]),
        TwoFormFiber(matrix_from_json(a["omega"])) if a["omega"] else None,
        matrix_from_json(a["left"]), matrix_from_json(a["right"]),
        unit=a["unit"],
        u_star=matrix_from_json(a["u_star"]) if a["u_star"] else None)
        for a in d["arrows"])
    pairs = []
    for p in d["pairs"]:
        tang = pair_tangent(arrows[p["g"]], arrows[p["h"]])
        pairs.append(ComposablePairFiber(p["g"], p["h"], p["gh"], tang,
                                         matrix_from_json(p["m_star"])))
    return GroupoidFiberBundle(objects, arrows, tuple(pairs), name=d["name"])


def content_hash(doc: dict) -> str:
    return hashlib.sha256(
        json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def morphism_to_json(m: MorphismFiber) -> dict:
    return {"obj_map": list(m.obj_map),
            "c0": [matrix_to_json(x) for x in m.c0],
            "cA": [matrix_to_json(x) for x in m.cA],
            "arrow_map": list(m.arrow_map),
            "c1": [matrix_to_json(x) for x in m.c1]}


def morphism_from_json(d: dict, dom: GroupoidFiberBundle,
                       cod: GroupoidFiberBundle) -> MorphismFiber:
    return MorphismFiber(dom, cod, tuple(d["obj_map"]),
                         tuple(matrix_from_json(x) for x in d["c0"]),
                         tuple(matrix_from_json(x) for x in d["cA"]),
                         tuple(d["arrow_map"]),
                         tuple(matrix_from_json(x) for x in d["c1"]))


def datum_to_json(datum: CoisotropicDatum) -> dict:
    c_doc = bundle_to_json(datum.c_bundle)
    g_doc = bundle_to_json(datum.g_bundle)
    return {
        "schema": "cd-v1",
        "name": datum.name,
        "c_bundle": c_doc,
        "g_bundle": g_doc,
        "c_bundle_hash": content_hash(c_doc),
        "g_bundle_hash": content_hash(g_doc),
        "morphism": morphism_to_json(datum.morphism),
        "dirac": dirac_family_to_json(datum.dirac),
    }


def datum_from_json(d: dict) -> CoisotropicDatum:
    if d.get("schema") != "cd-v1":
        raise SchemaError("expected cd-v1")
    if content_hash(d["c_bundle"]) != d["c_bundle_hash"]:
        raise SchemaError("c_bundle content hash mismatch")
    if content_hash(d["g_bundle"]) != d["g_bundle_hash"]:
        raise SchemaError("g_bundle content hash mismatch")
    dom = bundle_from_json(d["c_bundle"])
    cod = bundle_from_json(d["g_bundle"])
    morph = morphism_from_json(d["morphism"], dom, cod)
    dirac = tuple(dirac_family_from_json(d["dirac"]))
    return CoisotropicDatum(morph, dirac, name=d["name"])


def two_form_to_json(f: TwoFormFiber) -> dict:
    return matrix_to_json(f.matrix)


def equivalence_to_json(m) -> dict:
    """med-v1: the six bundle dumps plus morphism/transformation blocks."""
    bundles = {
        "K": bundle_to_json(m.psi1.dom),
        "C1": bundle_to_json(m.psi1.cod),
        "C2": bundle_to_json(m.psi2.cod),
        "L": bundle_to_json(m.g.cod),
        "G1": bundle_to_json(m.phi1.cod),
        "G2": bundle_to_json(m.phi2.cod),
    }
    return {
        "schema": "med-v1",
        "bundles": bundles,
        "bundle_hashes": {k: content_hash(v) for k, v in bundles.items()},
        "morphisms": {
            "psi1": morphism_to_json(m.psi1), "psi2": morphism_to_json(m.psi2),
            "g": morphism_to_json(m.g),
            "phi1": morphism_to_json(m.phi1), "phi2": morphism_to_json(m.phi2),
            "c1": morphism_to_json(m.c1), "c2": morphism_to_json(m.c2),
        },
        "theta1": {str(x): {"arrow": t.arrow,
                            "theta_star": matrix_to_json(t.theta_star)}
                   for x, t in sorted(m.theta1.items())},
        "theta2": {str(x): {"arrow": t.arrow,
                            "theta_star": matrix_to_json(t.theta_star)}
                   for x, t in sorted(m.theta2.items())},
        "gamma": [two_form_to_json(g) for g in m.gamma],
        "dgamma": [three_form_to_json(g) for g in m.dgamma],
        "delta": [two_form_to_json(g) for g in m.delta],
        "strict": m.strict,
    }


def equivalence_from_json(d: dict):
    from .morita import MoritaEquivalenceDatum, NatTransFiber
    if d.get("schema") != "med-v1":
        raise SchemaError("expected med-v1")
    for key, doc in d["bundles"].items():
        if content_hash(doc) != d["bundle_hashes"][key]:
            raise SchemaError(f"bundle {key} content hash mismatch")
    b = {k: bundle_from_json(v) for k, v in d["bundles"].items()}
    ms = d["morphisms"]
    psi1 = morphism_from_json(ms["psi1"], b["K"], b["C1"])
    psi2 = morphism_from_json(ms["psi2"], b["K"], b["C2"])
    gmor = morphism_from_json(ms["g"], b["K"], b["L"])
    phi1 = morphism_from_json(ms["phi1"], b["L"], b["G1"])
    phi2 = morphism_from_json(ms["phi2"], b["L"], b["G2"])
    c1 = morphism_from_json(ms["c1"], b["C1"], b["G1"])
    c2 = morphism_from_json(ms["c2"], b["C2"], b["G2"])
    theta1 = {int(x): NatTransFiber(int(x), t["arrow"],
                                    matrix_from_json(t["theta_star"]))
              for x, t in d["theta1"].items()}
    theta2 = {int(x): NatTransFiber(int(x), t["arrow"],
                                    matrix_from_json(t["theta_star"]))
              for x, t in d["theta2"].items()}
    gamma = tuple(TwoFormFiber(matrix_from_json(x)) for x in d["gamma"])
    dgamma = tuple(three_form_from_json(x) for x in d["dgamma"])
    delta = tuple(TwoFormFiber(matrix_from_json(x)) for x in d["delta"])
    return MoritaEquivalenceDatum(psi1, psi2, gmor, phi1, phi2, c1, c2,
                                  theta1, theta2, gamma, dgamma, delta,
                                  strict=d["strict"])


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=1)


def poly_to_json(p) -> list:
    return [{"exps": list(m), "coef": scalar_to_json(c)} for m, c in p.terms]


def poly_from_json(arity: int, doc: list):
    from .dorfman import Poly
    return Poly.from_dict(arity, {tuple(t["exps"]): frac(t["coef"]) for t in doc})
