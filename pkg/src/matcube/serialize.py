"""JSON round-tripping for instances and certificates.

Matrices serialize as nested lists, polynomials as explicit
``{exponent, coefficient}`` term lists, so a certificate file is fully
self-describing and can be re-verified by an independent run (or an
independent implementation).
"""

from __future__ import annotations

import json

import numpy as np

from .cube import (
    BenTalCertificate,
    FullCertificate,
    MatrixCubeInstance,
    QuadraticCertificate,
    SimplexCertificate,
)
from .mpoly import GramForm, MatrixPoly

__all__ = [
    "instance_to_dict",
    "instance_from_dict",
    "certificate_to_dict",
    "certificate_from_dict",
    "dump_certificate",
    "load_certificate",
]


def _mat(a) -> list:
    return np.asarray(a, dtype=float).tolist()


def _poly_to_dict(p: MatrixPoly) -> dict:
    return {
        "n": p.n,
        "m": p.m,
        "terms": [{"exp": list(a), "coeff": _mat(c)} for a, c in sorted(p.terms.items())],
    }


def _poly_from_dict(d: dict) -> MatrixPoly:
    return MatrixPoly(
        int(d["n"]), int(d["m"]),
        {tuple(t["exp"]): np.asarray(t["coeff"], dtype=float) for t in d["terms"]},
    )


def _gram_to_dict(g: GramForm) -> dict:
    return {"n": g.n, "m": g.m, "basis": [list(b) for b in g.basis],
            "gram": _mat(g.gram)}


def _gram_from_dict(d: dict) -> GramForm:
    return GramForm(int(d["n"]), int(d["m"]),
                    tuple(tuple(b) for b in d["basis"]),
                    np.asarray(d["gram"], dtype=float))


def instance_to_dict(inst: MatrixCubeInstance) -> dict:
    return {
        "kind": "cube",
        "n": inst.n,
        "m": inst.m,
        "radius": inst.radius,
        "H": [_mat(h) for h in inst.H],
    }


def instance_from_dict(d: dict) -> MatrixCubeInstance:
    if d.get("kind", "cube") != "cube":
        raise ValueError(f"expected a cube instance, got kind {d.get('kind')!r}")
    H = tuple(np.asarray(h, dtype=float) for h in d["H"])
    n = int(d.get("n", H[0].shape[0]))
    m = int(d.get("m", len(H) - 1))
    return MatrixCubeInstance(n, m, H, float(d.get("radius", 1.0)))


def certificate_to_dict(cert) -> dict:
    if isinstance(cert, BenTalCertificate):
        return {"variant": "bental", "X": [_mat(x) for x in cert.X]}
    if isinstance(cert, QuadraticCertificate):
        return {"variant": "quadratic", "m": cert.m,
                "X": [_mat(x) for x in cert.X], "L": _mat(cert.L),
                "S0": _poly_to_dict(cert.S0)}
    if isinstance(cert, FullCertificate):
        return {"variant": "full", "S0": _gram_to_dict(cert.S0),
                "S": [_poly_to_dict(s) for s in cert.S], "path": cert.path}
    if isinstance(cert, SimplexCertificate):
        return {"variant": "simplex", "S": [_mat(s) for s in cert.S]}
    raise TypeError(f"unknown certificate type {type(cert)!r}")


def certificate_from_dict(d: dict):
    variant = d.get("variant")
    if variant == "bental":
        return BenTalCertificate(tuple(np.asarray(x, dtype=float) for x in d["X"]))
    if variant == "quadratic":
        return QuadraticCertificate(
            int(d["m"]),
            tuple(np.asarray(x, dtype=float) for x in d["X"]),
            np.asarray(d["L"], dtype=float),
            _poly_from_dict(d["S0"]))
    if variant == "full":
        return FullCertificate(_gram_from_dict(d["S0"]),
                               tuple(_poly_from_dict(s) for s in d["S"]),
                               str(d.get("path", "unknown")))
    if variant == "simplex":
        return SimplexCertificate(tuple(np.asarray(s, dtype=float) for s in d["S"]))
    raise ValueError(f"unknown certificate variant {variant!r}")


def dump_certificate(cert, path: str):
    with open(path, "w") as fh:
        json.dump(certificate_to_dict(cert), fh, indent=1)


def load_certificate(path: str):
    with open(path) as fh:
        return certificate_from_dict(json.load(fh))
