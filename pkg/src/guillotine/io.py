"""JSON model documents.

One document carries a face weight and, optionally, a boundary
representation, morphisms, eigenvalues and default shapes::

    {
      "s1": 2, "s2": 2,
      "weight": [...],                       # index ((x*s1 + y)*s2 + w)*s2 + z
      "rope": {"dims": {"S": d, ...},
               "A_S": [[...] x s1], "A_N": ..., "A_W": [[...] x s2], "A_E": ...,
               "U_WS": [...], "U_SE": [...], "U_EN": [...], "U_NW": [...]},
      "morphisms": {"halfstrip": {"S": [...], ...},
                    "corner": {"SW": {"K": [[...] x s1]}, ...}},
      "eigen": {"lambda": 4.0, "sigma": {"S": 1.0, ...}, "kappa": 1.0},
      "offsets": [n1, n2, m1, m2], "sizes": [[p, q], ...]
    }

Matrices are row-major and may be nested lists or flat lists.  Floats are
written with ``repr`` precision, so writing and reading a document
reproduces every array bit for bit.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .eigen import CornerMorphism, EigenStructure, HalfStripMorphism
from .errors import ModelFormatError
from .lattice import FaceWeight
from .rope import RopeRep
from .tensor import StateSpaces

__all__ = [
    "ModelFile",
    "model_from_dict",
    "model_to_dict",
    "read_model",
    "write_model",
    "model_from_eigenstructure",
]

_SIDES = ("S", "N", "W", "E")
_CORNER_KEYS = ("WS", "SE", "EN", "NW")
_CORNERS = ("SW", "SE", "NE", "NW")


@dataclass
class ModelFile:
    """Parsed model document."""

    spaces: StateSpaces
    weight: FaceWeight
    rep: RopeRep | None = None
    halfstrip: dict = field(default_factory=dict)
    corner: dict = field(default_factory=dict)
    eigen: dict | None = None
    offsets: tuple | None = None
    sizes: list | None = None

    def eigenstructure(self) -> EigenStructure:
        """Assemble the eigen-structure; needs the ``rope`` and ``eigen`` sections."""
        if self.rep is None:
            raise ModelFormatError("model has no 'rope' section")
        if self.eigen is None:
            raise ModelFormatError("model has no 'eigen' section")
        e = self.eigen
        kappa = e.get("kappa")
        if kappa is None:
            from .lattice import partition_tensor
            from .rope import eval_tensor
            from .tensor import pair_boundary

            s = e["sigma"]
            z11 = pair_boundary(eval_tensor(self.rep, 1, 1), partition_tensor(self.weight, 1, 1))
            kappa = z11 / (e["lambda"] * s["S"] * s["N"] * s["W"] * s["E"])
        return EigenStructure(
            lam=e["lambda"],
            sigma=dict(e["sigma"]),
            kappa=kappa,
            rep=self.rep,
            halfstrip=dict(self.halfstrip),
            corner=dict(self.corner),
            corner_sigma=dict(e.get("corner_sigma", {})),
        )


def _matrix(value, shape, where) -> np.ndarray:
    try:
        arr = np.array(value, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"{where}: not a numeric array ({exc})") from None
    size = int(np.prod(shape))
    if arr.size != size:
        raise ModelFormatError(
            f"{where}: expected {size} entries for shape {tuple(shape)}, got {arr.size}"
        )
    if not np.all(np.isfinite(arr)):
        raise ModelFormatError(f"{where}: entries must be finite")
    return arr.reshape(shape)


def _family(value, n, d, where) -> np.ndarray:
    if not isinstance(value, list) or len(value) != n:
        raise ModelFormatError(f"{where}: expected a list of {n} matrices")
    return np.stack([_matrix(v, (d, d), f"{where}[{i}]") for i, v in enumerate(value)])


def _require(doc, key, where):
    if key not in doc:
        raise ModelFormatError(f"{where}: missing required key '{key}'")
    return doc[key]


def _positive_int(v, where) -> int:
    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
        raise ModelFormatError(f"{where}: expected a positive integer, got {v!r}")
    return v


def model_from_dict(doc: dict) -> ModelFile:
    """Validate and convert a parsed JSON document."""
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    s1 = _positive_int(_require(doc, "s1", "model"), "s1")
    s2 = _positive_int(_require(doc, "s2", "model"), "s2")
    sp = StateSpaces(s1, s2)
    raw = _require(doc, "weight", "model")
    n = s1 * s1 * s2 * s2
    arr = np.array(raw, dtype=np.float64) if isinstance(raw, list) else None
    if arr is None or arr.size != n:
        got = "not a list" if arr is None else f"{arr.size} entries"
        raise ModelFormatError(
            f"weight: expected {n} entries (s1^2 * s2^2 with s1={s1}, s2={s2}), got {got}"
        )
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ModelFormatError("weight: entries must be finite and nonnegative")
    try:
        weight = FaceWeight.from_array(arr.reshape(s1, s1, s2, s2))
    except ValueError as exc:
        raise ModelFormatError(f"weight: {exc}") from None
    model = ModelFile(sp, weight)

    if "rope" in doc:
        r = doc["rope"]
        dims = _require(r, "dims", "rope")
        d = {a: _positive_int(_require(dims, a, "rope.dims"), f"rope.dims.{a}") for a in _SIDES}
        fam = {
            a: _family(_require(r, "A_" + a, "rope"), s1 if a in "SN" else s2, d[a], f"rope.A_{a}")
            for a in _SIDES
        }
        corner_shape = {"WS": ("W", "S"), "SE": ("S", "E"), "EN": ("E", "N"), "NW": ("N", "W")}
        corners = {
            k: _matrix(_require(r, "U_" + k, "rope"), (d[a], d[b]), f"rope.U_{k}")
            for k, (a, b) in corner_shape.items()
        }
        model.rep = RopeRep(
            sp, fam["S"], fam["N"], fam["W"], fam["E"],
            corners["WS"], corners["SE"], corners["EN"], corners["NW"],
        )

    if "morphisms" in doc:
        m = doc["morphisms"]
        if model.rep is None:
            raise ModelFormatError("morphisms: section requires a 'rope' section")
        d = model.rep.dims
        for a, val in m.get("halfstrip", {}).items():
            if a not in _SIDES:
                raise ModelFormatError(f"morphisms.halfstrip: unknown side '{a}'")
            st = s2 if a in "SN" else s1
            mat = _matrix(val, (d[a] ** 2, (st * d[a]) ** 2), f"morphisms.halfstrip.{a}")
            model.halfstrip[a] = HalfStripMorphism(a, mat)
        corner_dims = {"SW": ("W", "S"), "SE": ("S", "E"), "NE": ("E", "N"), "NW": ("N", "W")}
        for c, val in m.get("corner", {}).items():
            if c not in _CORNERS:
                raise ModelFormatError(f"morphisms.corner: unknown corner '{c}'")
            a, b = corner_dims[c]
            nn = d[a] * d[b]
            K = _family(_require(val, "K", f"morphisms.corner.{c}"), s1, nn, f"morphisms.corner.{c}.K")
            model.corner[c] = CornerMorphism(c, K)

    if "eigen" in doc:
        e = doc["eigen"]
        lam = _require(e, "lambda", "eigen")
        sigma = _require(e, "sigma", "eigen")
        for a in _SIDES:
            _require(sigma, a, "eigen.sigma")
        model.eigen = {
            "lambda": float(lam),
            "sigma": {a: float(sigma[a]) for a in _SIDES},
        }
        if "kappa" in e:
            model.eigen["kappa"] = float(e["kappa"])
        if "corner_sigma" in e:
            model.eigen["corner_sigma"] = {k: float(v) for k, v in e["corner_sigma"].items()}

    if "offsets" in doc:
        off = doc["offsets"]
        if not (isinstance(off, list) and len(off) == 4 and all(isinstance(o, int) and o >= 0 for o in off)):
            raise ModelFormatError("offsets: expected four nonnegative integers")
        model.offsets = tuple(off)
    if "sizes" in doc:
        sizes = doc["sizes"]
        try:
            model.sizes = [(int(p), int(q)) for p, q in sizes]
        except (TypeError, ValueError):
            raise ModelFormatError("sizes: expected a list of [p, q] pairs") from None
    return model


def _nested(arr: np.ndarray) -> list:
    return np.asarray(arr, dtype=np.float64).tolist()


def model_to_dict(model: ModelFile) -> dict:
    """Inverse of :func:`model_from_dict`; matrices are written nested."""
    doc = {
        "s1": model.spaces.s1,
        "s2": model.spaces.s2,
        "weight": _nested(model.weight.array.reshape(-1)),
    }
    if model.rep is not None:
        r = model.rep
        doc["rope"] = {
            "dims": dict(r.dims),
            **{"A_" + a: _nested(r.side(a)) for a in _SIDES},
            **{"U_" + k: _nested(r.corner(k)) for k in _CORNER_KEYS},
        }
    if model.halfstrip or model.corner:
        doc["morphisms"] = {
            "halfstrip": {a: _nested(phi.matrix) for a, phi in model.halfstrip.items()},
            "corner": {c: {"K": _nested(K.K)} for c, K in model.corner.items()},
        }
    if model.eigen is not None:
        doc["eigen"] = json.loads(json.dumps(model.eigen))
    if model.offsets is not None:
        doc["offsets"] = list(model.offsets)
    if model.sizes is not None:
        doc["sizes"] = [list(s) for s in model.sizes]
    return doc


def read_model(path: str | Path) -> ModelFile:
    """Read a model document, reporting JSON syntax errors with line and column."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        return model_from_dict(doc)
    except ModelFormatError as exc:
        raise ModelFormatError(f"{path}: {exc}") from None


def write_model(model: ModelFile, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1) + "\n", encoding="utf-8")


def model_from_eigenstructure(es: EigenStructure, w: FaceWeight) -> ModelFile:
    """Bundle a face weight and eigen-structure into a document."""
    return ModelFile(
        spaces=w.spaces,
        weight=w,
        rep=es.rep,
        halfstrip=dict(es.halfstrip),
        corner=dict(es.corner),
        eigen={
            "lambda": float(es.lam),
            "sigma": {a: float(v) for a, v in es.sigma.items()},
            "kappa": float(es.kappa),
            "corner_sigma": {c: float(v) for c, v in es.corner_sigma.items()},
        },
    )
