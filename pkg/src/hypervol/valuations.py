"""Pseudovolumes of polytopes and the cone-supported measures behind them.

Both pseudovolumes are face sums ``sum_F f(span F) vol_n(F) gamma(F)`` over the
n-dimensional faces.  ``f`` is the quaternionic distortion for polytopes in
H^n = R^4n and ``|cos(L, iL^perp)|`` for polytopes in C^n = R^2n.

Angle sampling uses one Gaussian stream in the ambient space per report
(common random numbers).  Each sample direction is projected onto the span
of every normal cone, so per-sample totals can be compared across polytopes
that share a seed.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import NotOrthonormal, ValidationError
from .hyperhermitian import moore_det, qmatmul, qstar, random_symplectic, realize
from .polytope import (
    NormalCone,
    Polytope,
    angle_sampler,
    intersection,
    require_convex_union,
    unit_ball_volume,
)
from .quaternion import qconj, qnorm2, right4

__all__ = [
    "distortion_quaternionic",
    "distortion_quaternionic_moore",
    "distortion_complex",
    "zonotope_volume",
    "statement_density",
    "ValuationReport",
    "pseudovolume_q",
    "kazarnovskii",
    "ConePieces",
    "ma_support_measure",
    "valuation_additivity_check",
    "spsp_matrix",
    "random_spsp",
]

ORTHONORMAL_TOL = 1e-9
DEFAULT_ANGLE_SAMPLES = 200_000


def _check_orthonormal(basis: np.ndarray):
    g = basis @ basis.T
    err = float(np.max(np.abs(g - np.eye(basis.shape[0])), initial=0.0))
    if err > ORTHONORMAL_TOL:
        raise NotOrthonormal(f"basis deviates from orthonormal by {err:.2e}")


def _as_rows(basis, width: int) -> np.ndarray:
    b = np.atleast_2d(np.asarray(basis, dtype=float))
    if b.shape[1] != width and b.shape[0] == width:
        b = b.T
    return b


def distortion_quaternionic(basis) -> float:
    """``sqrt |det|`` of the real 4n x 4n matrix with columns ``xi_p, xi_p i, xi_p j, xi_p k``.

    ``basis`` holds n orthonormal vectors of R^4n as rows.
    """
    b = np.atleast_2d(np.asarray(basis, dtype=float))
    n = b.shape[0]
    if b.shape[1] != 4 * n:
        raise ValidationError(f"need n rows of length 4n, got shape {b.shape}")
    _check_orthonormal(b)
    a = _columns_matrix(b)
    return math.sqrt(abs(float(np.linalg.det(realize(a)))))


def _columns_matrix(b: np.ndarray) -> np.ndarray:
    """Quaternionic n x n matrix whose p-th column is the row ``b[p]``."""
    n = b.shape[0]
    return np.transpose(b.reshape(n, n, 4), (1, 0, 2))


def distortion_quaternionic_moore(basis) -> float:
    """The same coefficient as ``|det(A A*)|`` for the matrix A with columns xi_p."""
    b = np.atleast_2d(np.asarray(basis, dtype=float))
    _check_orthonormal(b)
    a = _columns_matrix(b)
    aa = qmatmul(a, qstar(a))
    return abs(float(moore_det(0.5 * (aa + qstar(aa)))))


def _times_i(v: np.ndarray) -> np.ndarray:
    """Multiplication by i on C^n = R^2n with coordinates (a_1, b_1, a_2, b_2, ...)."""
    w = v.reshape(v.shape[:-1] + (-1, 2))
    return np.stack([-w[..., 1], w[..., 0]], axis=-1).reshape(v.shape)


def distortion_complex(basis) -> float:
    """``|det|`` of inner products between a basis of L and an orthonormal basis of i L^perp."""
    b = np.atleast_2d(np.asarray(basis, dtype=float))
    n = b.shape[0]
    if b.shape[1] != 2 * n:
        raise ValidationError(f"need n rows of length 2n, got shape {b.shape}")
    _check_orthonormal(b)
    from scipy.linalg import null_space

    perp = null_space(b).T  # (n, 2n)
    c = _times_i(perp)
    return abs(float(np.linalg.det(b @ c.T)))


def zonotope_volume(generators) -> float:
    """Volume of ``sum_i [0, g_i]`` in R^m as ``sum over m-subsets |det|``."""
    g = np.atleast_2d(np.asarray(generators, dtype=float))
    k, m = g.shape
    if k < m:
        return 0.0
    total = 0.0
    combos = list(itertools.combinations(range(k), m))
    for s in range(0, len(combos), 20000):
        idx = np.array(combos[s : s + 20000])
        total += float(np.sum(np.abs(np.linalg.det(g[idx]))))
    return total


def statement_density(cone: NormalCone) -> float:
    """``sqrt(vol_4n(Q_C + Q_C i + Q_C j + Q_C k))`` for the unit cube Q_C of span(C)."""
    span = cone.span.T  # (3n, 4n) orthonormal rows
    gens = np.concatenate([span @ right4(e).T for e in np.eye(4)])
    return math.sqrt(zonotope_volume(gens))


# ---------------------------------------------------------------------------
# face sums


@dataclass
class ValuationReport:
    """Result of a face-sum valuation.

    ``contributions`` lists ``f``, ``volume``, ``gamma`` and its standard error per
    face.  ``totals`` (not serialized) holds the per-sample values whose mean
    is ``value``, for paired comparisons across polytopes with the same seed.
    """

    value: float
    stderr: float
    contributions: list
    seed: int
    samples: int
    kind: str
    totals: np.ndarray | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "value": self.value,
            "stderr": self.stderr,
            "seed": self.seed,
            "samples": self.samples,
            "faces": self.contributions,
        }


def _face_sum(p: Polytope, distortion: Callable, kind: str, samples: int, seed, exact_angles: bool) -> ValuationReport:
    n = p.n
    faces = p.faces(n)
    contrib, exact_total = [], 0.0
    mc = []  # (weight, ambient constraints, contribution index)
    for f in faces:
        cone = p.normal_cone(f)
        fval = distortion(f.basis.T)
        coef = fval * f.volume
        factor, rest = cone.exact_factor() if exact_angles else (1.0, list(range(cone.constraints.shape[0])))
        entry = {"vertices": list(f.indices), "f": fval, "volume": f.volume}
        if not rest:
            entry.update(gamma=factor, gamma_stderr=0.0, exact=True)
            exact_total += coef * factor
        else:
            entry.update(exact=False)
            mc.append((coef * factor, cone.constraints[rest] @ cone.span.T, len(contrib), factor))
        contrib.append(entry)
    totals = None
    value, stderr = exact_total, 0.0
    if mc:
        s1 = np.zeros(len(mc))
        totals = np.empty(samples)
        pos = 0
        for z in angle_sampler(p.d, samples, seed):
            y = np.full(z.shape[0], exact_total)
            for r, (w, amb, _, _) in enumerate(mc):
                hit = np.all(z @ amb.T <= 0.0, axis=1)
                s1[r] += hit.sum()
                y += w * hit
            totals[pos : pos + z.shape[0]] = y
            pos += z.shape[0]
        for r, (w, _, ci, factor) in enumerate(mc):
            q = s1[r] / samples
            contrib[ci].update(gamma=factor * q, gamma_stderr=factor * math.sqrt(q * (1 - q) / samples))
        value = float(totals.mean())
        stderr = float(totals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return ValuationReport(value, stderr, contrib, int(seed), int(samples), kind, totals)


def pseudovolume_q(p: Polytope, samples: int = DEFAULT_ANGLE_SAMPLES, seed=0, exact_angles: bool = True) -> ValuationReport:
    """Quaternionic pseudovolume of a polytope in H^n."""
    if p.ambient[0] != "quaternionic":
        raise ValidationError("pseudovolume needs a quaternionic ambient space")
    return _face_sum(p, distortion_quaternionic, "pseudovolume", samples, seed, exact_angles)


def kazarnovskii(p: Polytope, samples: int = DEFAULT_ANGLE_SAMPLES, seed=0, exact_angles: bool = True) -> ValuationReport:
    """Kazarnovskii pseudovolume of a polytope in C^n."""
    if p.ambient[0] != "complex":
        raise ValidationError("Kazarnovskii pseudovolume needs a complex ambient space")
    return _face_sum(p, distortion_complex, "kazarnovskii", samples, seed, exact_angles)


# ---------------------------------------------------------------------------
# cone-supported measures


@dataclass
class ConePieces:
    """Measure ``sum_F c_F * Lebesgue(F_dual)``, each piece living on its cone's span."""

    pieces: list  # list of (NormalCone, density)
    variant: str

    def pair(self, profile, spacing: float | None = None, radius: float | None = None) -> float:
        """``sum_F c_F integral over the cone of profile``, by a midpoint grid on each span.

        ``profile`` must expose ``center`` and ``radius`` (as :class:`Bump` does)
        so the grid can be confined to its support.
        """
        total = 0.0
        for cone, dens in self.pieces:
            total += dens * cone_integral(cone, profile, spacing)
        return total

    def mass_in_ball(self, radius: float = 1.0) -> float:
        """Exact mass of the unit ball: ``sum c_F gamma(F) kappa_m r^m``."""
        from .polytope import exterior_angle

        total = 0.0
        for cone, dens in self.pieces:
            g, _ = exterior_angle(cone, samples=DEFAULT_ANGLE_SAMPLES)
            total += dens * g * unit_ball_volume(cone.dim) * radius**cone.dim
        return total

    def region_mass(self, indicator: Callable, spacing: float, radius: float = 1.0) -> float:
        """Mass of ``{indicator}`` intersected with the ball of given radius."""
        total = 0.0
        for cone, dens in self.pieces:
            total += dens * _grid_cone(cone, np.zeros(cone.span.shape[0]), radius, spacing, lambda x: indicator(x) * (np.sum(x * x, axis=1) <= radius**2))
        return total

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "pieces": [{"face": list(c.face.indices), "cone_dim": c.dim, "density": d} for c, d in self.pieces],
        }


def _grid_cone(cone: NormalCone, center, radius: float, spacing: float, fn) -> float:
    """Midpoint rule for ``fn`` over the cone, on the span cube of half-width ``radius`` around ``center``."""
    c_s = cone.span.T @ center
    m = cone.dim
    counts = max(1, int(round(2 * radius / spacing)))
    h = 2 * radius / counts
    axis = c_s[:, None] - radius + (np.arange(counts) + 0.5)[None, :] * h  # (m, counts)
    rest = np.stack(np.meshgrid(*axis[1:], indexing="ij"), axis=-1).reshape(-1, m - 1) if m > 1 else np.zeros((1, 0))
    total = 0.0
    for x0 in axis[0]:
        # one slab per leading coordinate keeps memory bounded
        s = np.hstack([np.full((rest.shape[0], 1), x0), rest])
        if cone.constraints.shape[0]:
            s = s[np.all(s @ cone.constraints.T <= 0.0, axis=1)]
        if s.shape[0]:
            total += float(np.sum(fn(s @ cone.span.T)))
    return total * h**m


def cone_integral(cone: NormalCone, profile, spacing: float | None = None) -> float:
    """Integral of ``profile`` over the cone with respect to Lebesgue measure on its span."""
    radius = float(profile.radius)
    spacing = spacing or radius / 40
    return _grid_cone(cone, np.asarray(profile.center, dtype=float), radius, spacing, profile)


def ma_support_measure(p: Polytope, variant: str = "proof") -> ConePieces:
    """Cone pieces over the n-faces of a polytope in H^n.

    ``variant="proof"`` weights F_dual by ``f(span F) vol_n(F)``;
    ``variant="statement"`` by the square root of the zonotope volume built
    from span(F_dual).
    """
    if p.ambient[0] != "quaternionic":
        raise ValidationError("support measure needs a quaternionic ambient space")
    if variant not in ("proof", "statement"):
        raise ValidationError(f"unknown density variant {variant!r}")
    pieces = []
    for f in p.faces(p.n):
        cone = p.normal_cone(f)
        if variant == "proof":
            dens = distortion_quaternionic(f.basis.T) * f.volume
        else:
            dens = statement_density(cone)
        pieces.append((cone, dens))
    return ConePieces(pieces, variant)


# ---------------------------------------------------------------------------
# additivity and group actions


def valuation_additivity_check(
    k1: Polytope,
    k2: Polytope,
    val: Callable[[Polytope], ValuationReport],
    union: Polytope | None = None,
    check_samples: int = 2000,
    seed=0,
) -> dict:
    """``|val(K1 cup K2) + val(K1 cap K2) - val(K1) - val(K2)|`` with its standard errors.

    ``union`` defaults to the convex hull of both vertex sets, which must
    equal the union (checked by sampling).  ``stderr`` combines the four
    reports' errors as if independent; ``paired_stderr`` uses per-sample
    totals when all reports share one angle stream.
    """
    require_convex_union(k1, k2, check_samples, seed)
    if union is None:
        union = Polytope(np.vstack([k1.vertices, k2.vertices]), k1.ambient)
    inter = intersection(k1, k2)
    reps = [val(union), val(inter) if inter is not None else None, val(k1), val(k2)]
    signs = [1.0, 1.0, -1.0, -1.0]
    vals = [0.0 if r is None else r.value for r in reps]
    gap = abs(sum(s * v for s, v in zip(signs, vals)))
    stderr = math.sqrt(sum((0.0 if r is None else r.stderr) ** 2 for r in reps))
    paired = None
    sizes = {r.samples for r in reps if r is not None}
    if len(sizes) == 1:
        n_s = sizes.pop()
        diff = np.zeros(n_s)
        for s, r in zip(signs, reps):
            if r is None:
                continue
            diff += s * (r.totals if r.totals is not None else r.value)
        paired = float(diff.std(ddof=1) / math.sqrt(n_s)) if n_s > 1 else 0.0
    return {"gap": gap, "stderr": stderr, "paired_stderr": paired, "values": vals}


def spsp_matrix(u, s) -> np.ndarray:
    """Real 4n x 4n matrix of ``q -> U q conj(s)`` for U in Sp(n) and a unit quaternion s."""
    u = np.asarray(u, dtype=float)
    n = u.shape[0]
    right = np.kron(np.eye(n), right4(qconj(np.asarray(s, dtype=float))))
    return realize(u) @ right


def random_spsp(n: int, rng) -> np.ndarray:
    s = rng.standard_normal(4)
    s /= math.sqrt(float(qnorm2(s)))
    return spsp_matrix(random_symplectic(n, rng), s)
