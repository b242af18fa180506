"""Quaternionic linear algebra and pseudovolumes of polytopes, joined by plurisubharmonic operators.

The most used entry points are re-exported here.
"""
from .errors import CheckFailed, HypervolError, ParseError, ValidationError
from .forms import FormClass, certify_positivity, gram_rank, pair
from .hyperhermitian import HyperHermitian, QMatrix, mixed_discriminant, moore_det, moore_det_schur, moore_det_spectral
from .polytope import Polytope, box, exterior_angle, segment, simplex, zonotope
from .psh import Bump, GridSpec, MaxAffine, Mollified, Polynomial, TestDensity, current_pair, hessian, ma_density
from .quaternion import Quaternion
from .valuations import kazarnovskii, ma_support_measure, pseudovolume_q, valuation_additivity_check

__version__ = "0.1.0"

__all__ = [
    "CheckFailed",
    "HypervolError",
    "ParseError",
    "ValidationError",
    "FormClass",
    "certify_positivity",
    "gram_rank",
    "pair",
    "HyperHermitian",
    "QMatrix",
    "mixed_discriminant",
    "moore_det",
    "moore_det_schur",
    "moore_det_spectral",
    "Polytope",
    "box",
    "exterior_angle",
    "segment",
    "simplex",
    "zonotope",
    "Bump",
    "GridSpec",
    "MaxAffine",
    "Mollified",
    "Polynomial",
    "TestDensity",
    "current_pair",
    "hessian",
    "ma_density",
    "Quaternion",
    "kazarnovskii",
    "ma_support_measure",
    "pseudovolume_q",
    "valuation_additivity_check",
]
