"""Function models on quaternionic space and the operators built from them.

Points of H^n are real vectors of length d = 4n ordered
``(t_1, x_1, y_1, z_1, t_2, ...)``.  Every model evaluates vectorized
on arrays of shape ``(N, d)``, with exact derivatives up to the real d x d
``hessian``.

The quaternionic Hessian of a real function is

    D2f[p, q] = sum_{l, m} e_l * H[(p, l), (q, m)] * conj(e_m),

the matrix of mixed derivatives ``d/d(conj q_p) d/dq_q f`` built from the Dirac
operators.  With this convention ``D2 |q|^2 = 8 Id`` and for n = 1 the single
entry is the Laplacian.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import ndtri
from scipy.stats import qmc

from .errors import NotDifferentiable, SupportEscapesGrid, ValidationError
from .forms import FormClass
from .hyperhermitian import mixed_discriminant, moore_det, qmatmul, qstar, realize
from .quaternion import CONJ_MULT, MULT

__all__ = [
    "Polynomial",
    "MaxAffine",
    "Mollified",
    "SmoothMax",
    "SmoothMin",
    "LinearCombination",
    "Pullback",
    "SmoothMaxKernel",
    "Bump",
    "BallIndicator",
    "Modulated",
    "TestDensity",
    "GridSpec",
    "quaternionic_hessian",
    "hessian",
    "ma_density",
    "dirac_dbar",
    "dirac_d",
    "dirac_d_field",
    "dirac_dbar_field",
    "current_pair",
    "integrate_monomials",
    "blocki_symbolic_check",
    "blocki_numeric_check",
    "norm_squared",
    "default_kernel",
]

_CHUNK = 8192


def _points(x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    return (x[None, :] if single else x), single


# ---------------------------------------------------------------------------
# models


class Model:
    """Base class: subclasses implement the three batched evaluations."""

    dim: int

    def value(self, x) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, x) -> np.ndarray:
        raise NotImplementedError

    def hessian(self, x) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x):
        x, single = _points(x)
        v = self.value(x)
        return float(v[0]) if single else v

    def __add__(self, other: "Model") -> "LinearCombination":
        return LinearCombination([self, other], [1.0, 1.0])

    def __mul__(self, scalar: float) -> "LinearCombination":
        return LinearCombination([self], [float(scalar)])

    __rmul__ = __mul__

    def __sub__(self, other: "Model") -> "LinearCombination":
        return LinearCombination([self, other], [1.0, -1.0])

    @property
    def n(self) -> int:
        return self.dim // 4


class Polynomial(Model):
    """``sum_t c_t prod_a x_a^{e_ta}`` with exact derivatives.

    Polynomials of degree at most two are also stored as ``x'Bx/2 + b.x + c``
    for fast evaluation.
    """

    def __init__(self, exponents, coefs):
        e = np.asarray(exponents, dtype=int)
        c = np.asarray(coefs, dtype=float)
        if e.ndim != 2 or e.shape[0] != c.shape[0]:
            raise ValidationError("exponents must be (terms, d) with one coefficient per term")
        if np.any(e < 0):
            raise ValidationError("negative exponent")
        self.exponents, self.coefs = e, c
        self.dim = e.shape[1]
        self._quad = self._as_quadratic()
        self._derivs: dict = {}

    @classmethod
    def quadratic(cls, b_mat, b_vec=None, const: float = 0.0) -> "Polynomial":
        """``x' B x / 2 + b.x + const``; B is symmetrized."""
        b_mat = np.asarray(b_mat, dtype=float)
        d = b_mat.shape[0]
        b_mat = 0.5 * (b_mat + b_mat.T)
        b_vec = np.zeros(d) if b_vec is None else np.asarray(b_vec, dtype=float)
        exps, coefs = [np.zeros(d, int)], [float(const)]
        eye = np.eye(d, dtype=int)
        for a in range(d):
            if b_vec[a]:
                exps.append(eye[a])
                coefs.append(b_vec[a])
            for c in range(a, d):
                w = b_mat[a, c] * (0.5 if a == c else 1.0)
                if w:
                    exps.append(eye[a] + eye[c])
                    coefs.append(w)
        return cls(np.array(exps), np.array(coefs))

    @classmethod
    def linear(cls, b_vec, const: float = 0.0) -> "Polynomial":
        b_vec = np.asarray(b_vec, dtype=float)
        return cls.quadratic(np.zeros((b_vec.size, b_vec.size)), b_vec, const)

    @classmethod
    def coordinate(cls, d: int, axis: int) -> "Polynomial":
        return cls([np.eye(d, dtype=int)[axis]], [1.0])

    def degree(self) -> int:
        return int(self.exponents.sum(axis=1).max(initial=0))

    def _as_quadratic(self):
        if self.degree() > 2:
            return None
        d = self.dim
        bm, bv, c0 = np.zeros((d, d)), np.zeros(d), 0.0
        for e, c in zip(self.exponents, self.coefs):
            nz = np.flatnonzero(e)
            tot = e.sum()
            if tot == 0:
                c0 += c
            elif tot == 1:
                bv[nz[0]] += c
            elif len(nz) == 1:
                bm[nz[0], nz[0]] += 2 * c
            else:
                bm[nz[0], nz[1]] += c
                bm[nz[1], nz[0]] += c
        return bm, bv, c0

    def derivative(self, axis: int) -> "Polynomial":
        if axis not in self._derivs:
            e = self.exponents.copy()
            c = self.coefs * e[:, axis]
            keep = c != 0
            e = e[keep]
            e[:, axis] -= 1
            if not keep.any():
                e, c = np.zeros((1, self.dim), int), np.zeros(1)
            else:
                c = c[keep]
            self._derivs[axis] = Polynomial(e, c)
        return self._derivs[axis]

    def value(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self._quad is not None:
            bm, bv, c0 = self._quad
            return 0.5 * np.einsum("ni,ij,nj->n", x, bm, x) + x @ bv + c0
        return np.prod(x[:, None, :] ** self.exponents[None], axis=2) @ self.coefs

    def gradient(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self._quad is not None:
            bm, bv, _ = self._quad
            return x @ bm + bv
        return np.stack([self.derivative(a).value(x) for a in range(self.dim)], axis=1)

    def hessian(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        d = self.dim
        if self._quad is not None:
            return np.broadcast_to(self._quad[0], (x.shape[0], d, d)).copy()
        out = np.empty((x.shape[0], d, d))
        for a in range(d):
            da = self.derivative(a)
            for b in range(a, d):
                out[:, a, b] = out[:, b, a] = da.derivative(b).value(x)
        return out

    def __add__(self, other):
        if isinstance(other, Polynomial):
            return Polynomial(np.concatenate([self.exponents, other.exponents]), np.concatenate([self.coefs, other.coefs]))
        return super().__add__(other)

    def __mul__(self, scalar):
        return Polynomial(self.exponents, self.coefs * float(scalar))

    __rmul__ = __mul__


def norm_squared(n: int) -> Polynomial:
    """``sum_i |q_i|^2`` on H^n."""
    return Polynomial.quadratic(2.0 * np.eye(4 * n))


class MaxAffine(Model):
    """``max_i (a_i . x + b_i)``; derivatives refuse to pick a subgradient at kinks."""

    def __init__(self, slopes, offsets=None, kink_tol: float = 1e-12):
        self.slopes = np.atleast_2d(np.asarray(slopes, dtype=float))
        m, self.dim = self.slopes.shape
        self.offsets = np.zeros(m) if offsets is None else np.asarray(offsets, dtype=float)
        self.kink_tol = kink_tol

    @classmethod
    def support(cls, vertices) -> "MaxAffine":
        """Support function ``h_K(u) = max_v <u, v>`` of the hull of ``vertices``."""
        return cls(np.asarray(vertices, dtype=float))

    def _affine(self, x):
        return np.atleast_2d(np.asarray(x, dtype=float)) @ self.slopes.T + self.offsets

    def value(self, x):
        return self._affine(x).max(axis=1)

    def _active(self, x):
        vals = self._affine(x)
        if vals.shape[1] > 1:
            top2 = np.partition(vals, -2, axis=1)[:, -2:]
            scale = np.maximum(1.0, np.abs(top2[:, 1]))
            if np.any(top2[:, 1] - top2[:, 0] <= self.kink_tol * scale):
                raise NotDifferentiable("point lies on a kink of the max-affine model")
        return np.argmax(vals, axis=1)

    def gradient(self, x):
        return self.slopes[self._active(x)]

    def hessian(self, x):
        idx = self._active(x)
        return np.zeros((idx.size, self.dim, self.dim))


class Mollified(Model):
    """Log-sum-exp smoothing ``eps * log sum_i exp((a_i . x + b_i) / eps)`` of a max-affine base.

    The smoothing overshoots the base by at most ``eps * log(#pieces)``.
    """

    def __init__(self, base: MaxAffine, eps: float):
        if eps <= 0:
            raise ValidationError("smoothing parameter must be positive")
        self.base, self.eps = base, float(eps)
        self.dim = base.dim

    def _weights(self, x):
        z = self.base._affine(x) / self.eps
        zmax = z.max(axis=1, keepdims=True)
        w = np.exp(z - zmax)
        s = w.sum(axis=1, keepdims=True)
        return z, zmax, w / s, s

    def value(self, x):
        z, zmax, _, s = self._weights(x)
        return self.eps * (zmax[:, 0] + np.log(s[:, 0]))

    def gradient(self, x):
        _, _, p, _ = self._weights(x)
        return p @ self.base.slopes

    def hessian(self, x):
        _, _, p, _ = self._weights(x)
        a = self.base.slopes
        mean = p @ a
        second = np.einsum("nm,mi,mj->nij", p, a, a)
        return (second - mean[:, :, None] * mean[:, None, :]) / self.eps


class LinearCombination(Model):
    def __init__(self, models: Sequence[Model], weights: Sequence[float]):
        self.models, self.weights = list(models), [float(w) for w in weights]
        self.dim = self.models[0].dim

    def value(self, x):
        return sum(w * m.value(x) for m, w in zip(self.models, self.weights))

    def gradient(self, x):
        return sum(w * m.gradient(x) for m, w in zip(self.models, self.weights))

    def hessian(self, x):
        return sum(w * m.hessian(x) for m, w in zip(self.models, self.weights))


class Pullback(Model):
    """``f(A q)`` for a quaternionic matrix A acting on column vectors from the left."""

    def __init__(self, model: Model, a):
        self.model = model
        self.matrix = np.asarray(getattr(a, "data", a), dtype=float)
        self.real = realize(self.matrix)
        self.dim = self.real.shape[1]

    def value(self, x):
        return self.model.value(np.atleast_2d(x) @ self.real.T)

    def gradient(self, x):
        return self.model.gradient(np.atleast_2d(x) @ self.real.T) @ self.real

    def hessian(self, x):
        h = self.model.hessian(np.atleast_2d(x) @ self.real.T)
        return np.einsum("ai,nab,bj->nij", self.real, h, self.real)


# ---------------------------------------------------------------------------
# smooth maximum


def _bump(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


class SmoothMaxKernel:
    """A convex C-infinity function chi with chi = 0 on (-inf, -1] and chi(x) = x on [1, inf).

    ``chi''`` is a normalized bump supported on [-1, 1]; ``chi'`` is its
    integral, tabulated once and interpolated by a monotone cubic, so
    ``0 <= chi' <= 1`` holds at every evaluation point.  ``chi`` itself is the
    exact antiderivative of that interpolant.  ``gamma`` satisfies
    ``gamma' = (chi')^2`` with ``gamma(-1) = 0``.
    """

    def __init__(self, table_size: int = 4001):
        xs = np.linspace(-1.0, 1.0, table_size)
        fine = np.linspace(-1.0, 1.0, 16 * (table_size - 1) + 1)
        dens = _bump(fine)
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(fine))])
        self._norm = cum[-1]
        cum = cum / cum[-1]
        d1 = cum[::16]
        d1 = 0.5 * (d1 + 1.0 - d1[::-1])  # exact symmetry chi'(x) + chi'(-x) = 1
        self._d1 = PchipInterpolator(xs, d1)
        self._d0 = self._d1.antiderivative()
        self._shift = 1.0 - float(self._d0(1.0))
        self._g = PchipInterpolator(xs, d1**2).antiderivative()
        self._g1 = float(self._g(1.0))

    def chi(self, x):
        x = np.asarray(x, dtype=float)
        mid = np.clip(x, -1.0, 1.0)
        v = self._d0(mid) + self._shift * (mid + 1.0) / 2.0
        return np.where(x >= 1.0, x, np.where(x <= -1.0, 0.0, v))

    def d1(self, x):
        x = np.asarray(x, dtype=float)
        v = np.clip(self._d1(np.clip(x, -1.0, 1.0)), 0.0, 1.0)
        return np.where(x >= 1.0, 1.0, np.where(x <= -1.0, 0.0, v))

    def d2(self, x):
        return _bump(x) / self._norm

    def gamma(self, x):
        x = np.asarray(x, dtype=float)
        v = self._g(np.clip(x, -1.0, 1.0))
        return np.where(x >= 1.0, self._g1 + (x - 1.0), np.where(x <= -1.0, 0.0, v))


_DEFAULT_KERNEL: SmoothMaxKernel | None = None


def default_kernel() -> SmoothMaxKernel:
    global _DEFAULT_KERNEL
    if _DEFAULT_KERNEL is None:
        _DEFAULT_KERNEL = SmoothMaxKernel()
    return _DEFAULT_KERNEL


class SmoothMax(Model):
    """``psi_j = v + chi(j (u - v)) / j``, a convex smoothing of ``max(u, v)`` from above."""

    def __init__(self, u: Model, v: Model, j: float, kernel: SmoothMaxKernel | None = None):
        self.u, self.v, self.j = u, v, float(j)
        self.kernel = kernel or default_kernel()
        self.dim = u.dim

    def value(self, x):
        a = self.u.value(x) - self.v.value(x)
        return self.v.value(x) + self.kernel.chi(self.j * a) / self.j

    def gradient(self, x):
        a = self.u.value(x) - self.v.value(x)
        gu, gv = self.u.gradient(x), self.v.gradient(x)
        return gv + self.kernel.d1(self.j * a)[:, None] * (gu - gv)

    def hessian(self, x):
        a = self.u.value(x) - self.v.value(x)
        ga = self.u.gradient(x) - self.v.gradient(x)
        hu, hv = self.u.hessian(x), self.v.hessian(x)
        s1 = self.kernel.d1(self.j * a)[:, None, None]
        s2 = (self.j * self.kernel.d2(self.j * a))[:, None, None]
        return hv + s1 * (hu - hv) + s2 * ga[:, :, None] * ga[:, None, :]


def SmoothMin(u: Model, v: Model, j: float, kernel: SmoothMaxKernel | None = None) -> Model:
    """``u + v - psi_j``, the matching smoothing of ``min(u, v)``."""
    return LinearCombination([u, v, SmoothMax(u, v, j, kernel)], [1.0, 1.0, -1.0])


# ---------------------------------------------------------------------------
# Hessian, Dirac operators, Monge-Ampere density


def quaternionic_hessian(h_real) -> np.ndarray:
    """Map real Hessians ``(..., 4n, 4n)`` to quaternionic ones ``(..., n, n, 4)``."""
    h = np.asarray(h_real, dtype=float)
    n = h.shape[-1] // 4
    h = h.reshape(h.shape[:-2] + (n, 4, n, 4))
    return np.einsum("...plqm,lmc->...pqc", h, CONJ_MULT)


def hessian(model: Model, x) -> np.ndarray:
    """Quaternionic Hessian of ``model`` at one point ``(d,)`` or a batch ``(N, d)``."""
    x, single = _points(x)
    out = quaternionic_hessian(model.hessian(x))
    return out[0] if single else out


def ma_density(model: Model, x):
    """Moore determinant of the quaternionic Hessian."""
    x, single = _points(x)
    out = np.atleast_1d(moore_det(quaternionic_hessian(model.hessian(x))))
    return float(out[0]) if single else out


def _components(f):
    return list(f) if isinstance(f, (list, tuple)) else [f]


def dirac_dbar(f, x, i: int = 0) -> np.ndarray:
    """``sum_l e_l * df/dx_(i,l)`` for a real model or a list of 4 component models."""
    comps = _components(f)
    x = np.asarray(x, dtype=float)[None]
    grads = np.stack([c.gradient(x)[0, 4 * i : 4 * i + 4] for c in comps])  # (a, l)
    if len(comps) == 1:
        return grads[0]
    return np.einsum("al,lac->c", grads, MULT)


def dirac_d(f, x, i: int = 0) -> np.ndarray:
    """``sum_l df/dx_(i,l) * conj(e_l)``."""
    comps = _components(f)
    x = np.asarray(x, dtype=float)[None]
    grads = np.stack([c.gradient(x)[0, 4 * i : 4 * i + 4] for c in comps])
    if len(comps) == 1:
        return grads[0] * np.array([1.0, -1.0, -1.0, -1.0])
    return np.einsum("al,alc->c", grads, CONJ_MULT)


def _polys(f) -> list[Polynomial]:
    comps = _components(f)
    if not all(isinstance(c, Polynomial) for c in comps):
        raise ValidationError("symbolic Dirac fields need polynomial components")
    if len(comps) == 1:
        d = comps[0].dim
        zero = Polynomial(np.zeros((1, d), int), [0.0])
        comps = comps + [zero, zero, zero]
    return comps


def _combine(comps, i, table, left):
    out = []
    for c in range(4):
        acc = None
        for l in range(4):
            for a in range(4):
                w = table[l, a, c] if left else table[a, l, c]
                if w:
                    term = comps[a].derivative(4 * i + l) * float(w)
                    acc = term if acc is None else acc + term
        out.append(acc)
    return out


def dirac_d_field(f, i: int = 0) -> list[Polynomial]:
    """Components of ``df/dq_i`` as exact polynomials."""
    return _combine(_polys(f), i, CONJ_MULT, left=False)


def dirac_dbar_field(f, i: int = 0) -> list[Polynomial]:
    return _combine(_polys(f), i, MULT, left=True)


# ---------------------------------------------------------------------------
# test densities and quadrature


class Bump:
    """Smooth bump ``exp(1 - 1 / (1 - r^2 / R^2))`` with peak value 1."""

    def __init__(self, center, radius: float):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)

    def __call__(self, x):
        r2 = np.sum((np.atleast_2d(x) - self.center) ** 2, axis=1) / self.radius**2
        out = np.zeros(r2.shape)
        inside = r2 < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
        return out

    def support_box(self) -> np.ndarray:
        return np.stack([self.center - self.radius, self.center + self.radius], axis=1)

    def to_json(self) -> dict:
        return {"type": "bump", "center": self.center.tolist(), "radius": self.radius}


class BallIndicator(Bump):
    """Indicator of a closed ball (not continuous; used for mass computations)."""

    def __call__(self, x):
        r2 = np.sum((np.atleast_2d(x) - self.center) ** 2, axis=1)
        return (r2 <= self.radius**2).astype(float)

    def to_json(self) -> dict:
        return {"type": "ball", "center": self.center.tolist(), "radius": self.radius}


class Modulated:
    """``profile(x) * cos(freq * <direction, x>)``: same support and sup-norm bound, faster oscillation."""

    def __init__(self, profile, freq: float, direction):
        self.profile, self.freq = profile, float(freq)
        self.direction = np.asarray(direction, dtype=float)

    def __call__(self, x):
        x = np.atleast_2d(x)
        return self.profile(x) * np.cos(self.freq * (x @ self.direction))

    def support_box(self):
        return self.profile.support_box()


@dataclass
class TestDensity:
    """A scalar profile times a constant form of degree ``n - k``."""

    __test__ = False  # not a pytest class

    profile: Callable
    form: FormClass

    @classmethod
    def scalar(cls, profile, n: int) -> "TestDensity":
        return cls(profile, FormClass.unit(n))


@dataclass
class GridSpec:
    """Quadrature rule on an axis-aligned box.

    ``rule="grid"`` is the midpoint rule on a lattice of spacing ``spacing``
    (a scalar or one value per axis).  ``rule="sobol"`` uses ``points``
    scrambled Sobol points (seeded) in the box; ``rule="sobol_ball"`` maps
    them into the ball inscribed in the box, which keeps 8-dimensional
    integrals of compactly supported densities affordable.
    """

    box: np.ndarray
    spacing: float | None = None
    rule: str = "grid"
    points: int = 0
    seed: int = 0

    def __post_init__(self):
        self.box = np.asarray(self.box, dtype=float)
        if self.box.ndim != 2 or self.box.shape[1] != 2 or np.any(self.box[:, 1] <= self.box[:, 0]):
            raise ValidationError("box must be a list of [lo, hi] pairs with lo < hi")
        if self.rule not in ("grid", "sobol", "sobol_ball"):
            raise ValidationError(f"unknown quadrature rule {self.rule!r}")
        if self.rule == "grid":
            sp = np.asarray(self.spacing if self.spacing is not None else 0.0, dtype=float)
            if np.any(sp <= 0) or sp.ndim > 1 or (sp.ndim == 1 and sp.size != self.box.shape[0]):
                raise ValidationError("grid rule needs a positive spacing (scalar or one per axis)")
            self.spacing = float(sp) if sp.ndim == 0 else sp
        elif self.points <= 0:
            raise ValidationError("sobol rules need a positive point count")
        if self.rule == "sobol_ball":
            widths = self.box[:, 1] - self.box[:, 0]
            if np.ptp(widths) > 1e-12 * widths.max():
                raise ValidationError("sobol_ball needs a cube")

    @classmethod
    def around(cls, profile, spacing: float, pad_cells: int = 2) -> "GridSpec":
        box = profile.support_box().copy()
        box[:, 0] -= pad_cells * spacing
        box[:, 1] += pad_cells * spacing
        return cls(box, spacing)

    @classmethod
    def from_json(cls, doc) -> "GridSpec":
        try:
            return cls(
                np.asarray(doc["box"], dtype=float),
                doc.get("spacing"),
                doc.get("rule", "grid"),
                int(doc.get("points", 0)),
                int(doc.get("seed", 0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"bad grid document: {exc}") from exc

    def to_json(self) -> dict:
        sp = self.spacing.tolist() if isinstance(self.spacing, np.ndarray) else self.spacing
        out = {"box": self.box.tolist(), "spacing": sp}
        if self.rule != "grid":
            out.update(rule=self.rule, points=self.points, seed=self.seed)
        return out

    @property
    def dim(self) -> int:
        return self.box.shape[0]

    def counts(self) -> np.ndarray:
        widths = self.box[:, 1] - self.box[:, 0]
        return np.maximum(1, np.round(widths / self.spacing).astype(int))

    def weight(self) -> float:
        widths = self.box[:, 1] - self.box[:, 0]
        if self.rule == "sobol":
            return float(np.prod(widths)) / self.points
        if self.rule == "sobol_ball":
            d = self.dim
            vol = math.pi ** (d / 2) / math.gamma(d / 2 + 1) * (widths[0] / 2) ** d
            return vol / self.points
        return float(np.prod(widths / self.counts()))

    def size(self) -> int:
        return int(np.prod(self.counts())) if self.rule == "grid" else self.points

    def chunks(self, chunk: int = _CHUNK):
        """Yield ``(points, on_boundary)`` blocks in a fixed order."""
        lo, hi = self.box[:, 0], self.box[:, 1]
        if self.rule != "grid":
            m = int(math.ceil(math.log2(self.points)))
            ball = self.rule == "sobol_ball"
            sampler = qmc.Sobol(self.dim + ball, scramble=True, seed=self.seed)
            u = sampler.random_base2(m)[: self.points]
            if ball:
                # Gaussian direction from d coordinates, radius from the last one
                g = ndtri(np.clip(u[:, :-1], 1e-12, 1 - 1e-12))
                g /= np.linalg.norm(g, axis=1, keepdims=True)
                r = u[:, -1:] ** (1.0 / self.dim)
                u = 0.5 + 0.5 * r * g
            for s in range(0, self.points, chunk):
                yield lo + u[s : s + chunk] * (hi - lo), None
            return
        counts = self.counts()
        step = (hi - lo) / counts
        total = int(np.prod(counts))
        for s in range(0, total, chunk):
            idx = np.stack(np.unravel_index(np.arange(s, min(total, s + chunk)), counts), axis=1)
            border = np.any((idx == 0) | (idx == counts - 1), axis=1)
            yield lo + (idx + 0.5) * step, border


def _check_support(profile, grid: GridSpec):
    if hasattr(profile, "support_box"):
        sb = profile.support_box()
        if np.any(sb[:, 0] < grid.box[:, 0]) or np.any(sb[:, 1] > grid.box[:, 1]):
            raise SupportEscapesGrid("test density support is not contained in the quadrature box")


def integrate_monomials(models: Sequence[Model], monomials, density: TestDensity, grid: GridSpec) -> np.ndarray:
    """Integrate ``pair(D2 f_{i_1} ... D2 f_{i_k}, density)`` for several index tuples at once.

    ``monomials`` is a list of tuples of indices into ``models``, all of the
    same length k.  Each model's Hessian is computed once per block of points.
    """
    monomials = [tuple(m) for m in monomials]
    k = len(monomials[0]) if monomials else 0
    if any(len(m) != k for m in monomials):
        raise ValidationError("all monomials must have the same degree")
    form = density.form
    n = form.n
    if form.k != n - k:
        raise ValidationError(f"test form has degree {form.k}, expected {n - k}")
    if grid.dim != 4 * n:
        raise ValidationError(f"grid dimension {grid.dim} does not match 4n = {4 * n}")
    _check_support(density.profile, grid)
    used = sorted({i for m in monomials for i in m})
    totals = np.zeros(len(monomials))
    t = len(form)
    for pts, border in grid.chunks():
        w = density.profile(pts)
        if border is not None and np.any(w[border] != 0.0):
            raise SupportEscapesGrid("test density is nonzero on boundary cells")
        keep = w != 0.0
        if not keep.any():
            continue
        pts, w = pts[keep], w[keep]
        hs = {i: quaternionic_hessian(models[i].hessian(pts)) for i in used}
        npts = pts.shape[0]
        for r, mono in enumerate(monomials):
            if k == 0:
                vals = np.full(npts, form.scalar())
            else:
                var = np.stack([hs[i] for i in mono], axis=1)  # (N, k, n, n, 4)
                full = np.concatenate(
                    [
                        np.broadcast_to(var[:, None], (npts, t, k, n, n, 4)),
                        np.broadcast_to(form.factors[None], (npts, t, n - k, n, n, 4)),
                    ],
                    axis=2,
                ).reshape(npts * t, n, n, n, 4)
                vals = np.asarray(mixed_discriminant(full)).reshape(npts, t) @ form.coefs
            totals[r] += float(np.dot(w, vals))
    return totals * grid.weight()


def current_pair(fs: Sequence[Model], density: TestDensity, grid: GridSpec) -> float:
    """Quadrature of ``pair(D2 f_1 ... D2 f_k, density)`` over the grid."""
    models, index = [], {}
    mono = []
    for f in fs:
        if id(f) not in index:
            index[id(f)] = len(models)
            models.append(f)
        mono.append(index[id(f)])
    return float(integrate_monomials(models, [tuple(mono)], density, grid)[0])


# ---------------------------------------------------------------------------
# Blocki identity


class _ZPoly:
    """Element ``A + B z`` of Z[x, y][z] / (z^2 - s z + m) with integer coefficients.

    ``A`` and ``B`` are dicts mapping exponent pairs ``(i, j)`` of ``x^i y^j`` to ints.
    """

    __slots__ = ("a", "b", "s", "m")

    def __init__(self, a, b, s, m):
        self.a, self.b, self.s, self.m = _clean(a), _clean(b), s, m

    def __add__(self, o):
        return _ZPoly(_padd(self.a, o.a), _padd(self.b, o.b), self.s, self.m)

    def __sub__(self, o):
        return self + o.scale(-1)

    def scale(self, c: int):
        return _ZPoly({k: c * v for k, v in self.a.items()}, {k: c * v for k, v in self.b.items()}, self.s, self.m)

    def __mul__(self, o):
        bd = _pmul(self.b, o.b)
        a = _padd(_pmul(self.a, o.a), {k: -v for k, v in _pmul(bd, self.m).items()})
        b = _padd(_padd(_pmul(self.a, o.b), _pmul(self.b, o.a)), _pmul(bd, self.s))
        return _ZPoly(a, b, self.s, self.m)

    def __pow__(self, p: int):
        out = _ZPoly({(0, 0): 1}, {}, self.s, self.m)
        for _ in range(p):
            out = out * self
        return out

    def is_zero(self) -> bool:
        return not self.a and not self.b


def _clean(p):
    return {k: v for k, v in p.items() if v != 0}


def _padd(p, q):
    out = dict(p)
    for k, v in q.items():
        out[k] = out.get(k, 0) + v
    return _clean(out)


def _pmul(p, q):
    out: dict = {}
    for (i1, j1), v1 in p.items():
        for (i2, j2), v2 in q.items():
            key = (i1 + i2, j1 + j2)
            out[key] = out.get(key, 0) + v1 * v2
    return _clean(out)


_X, _Y = {(1, 0): 1}, {(0, 1): 1}
_STANDARD_S = {(1, 0): 1, (0, 1): 1}
_STANDARD_M = {(1, 1): 1}


def blocki_symbolic_check(p: int, n: int | None = None, relation: str = "standard") -> bool:
    """Exact check of the max-identity and the min/max valuation identity for exponent p.

    Works in ``Z[x, y, z] / (z^2 - z (x + y) + x y)``, where z stands for the
    Hessian of ``max(u, v)``.  ``relation="wrong"`` drops the ``xy`` term as a
    negative control.
    """
    n = p if n is None else n
    if not 2 <= p <= n:
        raise ValidationError(f"need 2 <= p <= n, got p={p}, n={n}")
    if relation == "standard":
        s, m = _STANDARD_S, _STANDARD_M
    elif relation == "wrong":
        s, m = _STANDARD_S, {}
    else:
        raise ValidationError(f"unknown relation {relation!r}")
    x, y, z = _ZPoly(_X, {}, s, m), _ZPoly(_Y, {}, s, m), _ZPoly({}, {(0, 0): 1}, s, m)
    zero = _ZPoly({}, {}, s, m)
    inner = zero
    for k in range(p):
        inner = inner + (x**k) * (y ** (p - 1 - k))
    tail = zero
    for k in range(1, p):
        tail = tail + (x**k) * (y ** (p - k))
    blocki = (z**p) - (z * inner - tail)
    valuation = (x**p) + (y**p) - (z**p) - ((x + y - z) ** p)
    return blocki.is_zero() and valuation.is_zero()


def blocki_terms(p: int):
    """Coefficient/monomial lists over the models (u, v, psi) = (0, 1, 2).

    Returns ``(lhs, rhs, min_max, sum_uv)`` where each is a list of
    ``(coef, index_tuple)``.  ``min_max`` uses a fourth model (3) for the
    smoothed minimum.
    """
    lhs = [(1.0, (2,) * p)]
    rhs = [(1.0, (2,) + (0,) * k + (1,) * (p - 1 - k)) for k in range(p)]
    rhs += [(-1.0, (0,) * k + (1,) * (p - k)) for k in range(1, p)]
    min_max = [(1.0, (3,) * p), (1.0, (2,) * p)]
    sum_uv = [(1.0, (0,) * p), (1.0, (1,) * p)]
    return lhs, rhs, min_max, sum_uv


def blocki_numeric_check(
    u: Model,
    v: Model,
    p: int,
    density: TestDensity,
    j_sweep: Sequence[float],
    grid: GridSpec,
    kernel: SmoothMaxKernel | None = None,
) -> list[dict]:
    """Both sides of the max-identity with ``max`` replaced by ``psi_j``, for each j.

    Each entry also carries ``val_lhs``/``val_rhs``/``val_gap`` for the
    valuation identity ``(D2 u)^p + (D2 v)^p = (D2 min)^p + (D2 max)^p``.
    """
    lhs_t, rhs_t, mm_t, uv_t = blocki_terms(p)
    monos = sorted({m for part in (lhs_t, rhs_t, mm_t, uv_t) for _, m in part})
    pos = {m: r for r, m in enumerate(monos)}
    report = []
    for j in j_sweep:
        psi = SmoothMax(u, v, j, kernel)
        mn = LinearCombination([u, v, psi], [1.0, 1.0, -1.0])
        vals = integrate_monomials([u, v, psi, mn], monos, density, grid)

        def total(part):
            return float(sum(c * vals[pos[m]] for c, m in part))

        lhs, rhs = total(lhs_t), total(rhs_t)
        vl, vr = total(uv_t), total(mm_t)
        report.append(
            {"j": float(j), "lhs": lhs, "rhs": rhs, "gap": abs(lhs - rhs), "val_lhs": vl, "val_rhs": vr, "val_gap": abs(vl - vr)}
        )
    return report
