"""Build package objects from parsed JSON documents."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError
from .forms import FormClass
from .hyperhermitian import HyperHermitian, QMatrix
from .polytope import Polytope, box, product, simplex, zonotope
from .psh import BallIndicator, Bump, GridSpec, MaxAffine, Model, Mollified, Polynomial, TestDensity, norm_squared

__all__ = ["read_json", "load_matrix", "load_hyperhermitian", "load_polytope", "load_model", "load_density", "load_grid"]


def read_json(path) -> object:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from exc


def _get(doc, key):
    if not isinstance(doc, dict):
        raise ParseError(f"expected an object with key {key!r}")
    if key not in doc:
        raise ParseError(f"missing field {key!r}")
    return doc[key]


def _array(value, what: str) -> np.ndarray:
    try:
        return np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{what} must be numeric: {exc}") from exc


def load_matrix(doc) -> QMatrix:
    return QMatrix.from_json(doc)


def load_hyperhermitian(doc) -> HyperHermitian:
    return HyperHermitian.from_json(doc)


def load_polytope(doc) -> Polytope:
    """Explicit vertices or one of the generators box, simplex, zonotope, product."""
    if not isinstance(doc, dict):
        raise ParseError("polytope must be an object")
    ambient = doc.get("ambient")
    gen = doc.get("generator")
    if gen is None:
        return Polytope(_array(_get(doc, "vertices"), "vertices"), ambient)
    if gen == "box":
        return box(_array(_get(doc, "lo"), "lo"), _array(_get(doc, "hi"), "hi"), ambient)
    if gen == "simplex":
        return simplex(_array(_get(doc, "vertices"), "vertices"), ambient)
    if gen == "zonotope":
        center = doc.get("center")
        return zonotope(_array(_get(doc, "generators"), "generators"), None if center is None else _array(center, "center"), ambient)
    if gen == "product":
        return product(*[load_polytope(f) for f in _get(doc, "factors")], ambient=ambient)
    raise ParseError(f"unknown polytope generator {gen!r}")


def load_model(doc) -> Model:
    kind = _get(doc, "type")
    if kind == "polynomial":
        return Polynomial(np.asarray(_get(doc, "exponents"), dtype=int), _array(_get(doc, "coefs"), "coefs"))
    if kind == "quadratic":
        b = doc.get("b")
        return Polynomial.quadratic(_array(_get(doc, "B"), "B"), None if b is None else _array(b, "b"), float(doc.get("c", 0.0)))
    if kind == "norm_squared":
        return norm_squared(int(_get(doc, "n")))
    if kind == "max_affine":
        off = doc.get("offsets")
        return MaxAffine(_array(_get(doc, "slopes"), "slopes"), None if off is None else _array(off, "offsets"))
    if kind == "support":
        verts = _get(doc, "polytope")["vertices"] if "polytope" in doc else _get(doc, "vertices")
        return MaxAffine.support(_array(verts, "vertices"))
    if kind == "mollified":
        base = load_model(_get(doc, "base"))
        if not isinstance(base, MaxAffine):
            raise ValidationError("mollified models need a max-affine base")
        return Mollified(base, float(_get(doc, "eps")))
    raise ParseError(f"unknown model type {kind!r}")


def load_profile(doc):
    kind = _get(doc, "type")
    cls = {"bump": Bump, "ball": BallIndicator}.get(kind)
    if cls is None:
        raise ParseError(f"unknown profile type {kind!r}")
    return cls(_array(_get(doc, "center"), "center"), float(_get(doc, "radius")))


def load_density(doc, n: int) -> TestDensity:
    """``{"profile": ..., "form": FormClass}``; the form defaults to the scalar 1."""
    profile = load_profile(_get(doc, "profile"))
    form = doc.get("form")
    return TestDensity(profile, FormClass.from_json(form) if form is not None else FormClass.unit(n))


def load_grid(doc, profile=None, spacing: float | None = None) -> GridSpec:
    """A grid document, or a padded lattice around ``profile`` when only a spacing is known."""
    if doc is None:
        if profile is None or spacing is None:
            raise ParseError("need a grid document or a spacing")
        return GridSpec.around(profile, spacing)
    grid = GridSpec.from_json(doc)
    if spacing is not None and grid.rule == "grid":
        grid = GridSpec(grid.box, spacing)
    return grid
