"""Convex polytopes in V-representation, with their face lattices and normal cones.

The generic face lattice comes from recursive convex hulls.  Each face is
computed in coordinates on its own affine hull, and facets are recovered by
grouping hull equations by the vertex sets they touch.  The structured
constructors build their lattices in closed form instead, which lifts the
vertex cap of the generic path.

Normal cones are stored as ``{u in span : a_j . u <= 0}`` where ``span`` is
the orthogonal complement of the face direction and ``a_j`` are irredundant
constraint vectors expressed in an orthonormal basis of ``span``.

The exterior angle is the fraction of the unit sphere of ``span`` lying in
the cone, i.e. ``vol(C cap B) / kappa_m``.  It is exact when the constraint
normals split into mutually orthogonal groups of size at most two.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import linprog, nnls
from scipy.linalg import null_space
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError

from .errors import DegenerateCone, EmptyPolytope, NotAFace, TooManyVertices, UnionNotConvex, ValidationError

__all__ = [
    "Polytope",
    "Face",
    "NormalCone",
    "box",
    "simplex",
    "segment",
    "product",
    "zonotope",
    "exterior_angle",
    "angle_sampler",
    "affine_hull",
    "intersection",
    "from_hrep",
    "split_by_hyperplane",
    "hausdorff_distance",
    "point_distance",
    "union_is_convex",
    "unit_ball_volume",
]

GENERIC_VERTEX_CAP = 64
_REL_TOL = 1e-9


def unit_ball_volume(m: int) -> float:
    """``kappa_m``, the volume of the unit ball in R^m."""
    return math.pi ** (m / 2) / math.gamma(m / 2 + 1)


def affine_hull(points, tol: float | None = None):
    """``(origin, basis)`` with ``basis`` a (d, k) orthonormal matrix spanning the directions."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    origin = pts[0]
    diffs = pts - origin
    scale = max(1.0, float(np.max(np.abs(pts), initial=0.0)))
    tol = _REL_TOL * scale if tol is None else tol
    if pts.shape[0] == 1:
        return origin, np.zeros((pts.shape[1], 0))
    _, s, vt = np.linalg.svd(diffs, full_matrices=False)
    k = int(np.sum(s > tol * max(1.0, math.sqrt(pts.shape[0]))))
    return origin, vt[:k].T


def _orth_complement(basis: np.ndarray, d: int) -> np.ndarray:
    if basis.shape[1] == 0:
        return np.eye(d)
    return null_space(basis.T)


@dataclass(frozen=True)
class Face:
    """A face given by indices into the parent's vertex array."""

    indices: tuple
    dim: int
    basis: np.ndarray = field(repr=False, compare=False)
    volume: float = field(compare=False)
    origin: np.ndarray = field(repr=False, compare=False)

    def to_json(self) -> dict:
        return {"vertices": list(self.indices), "dim": self.dim, "volume": self.volume}


@dataclass
class NormalCone:
    """``{u = span @ s : constraints @ s <= 0}`` for an orthonormal (d, m) ``span``."""

    face: Face
    span: np.ndarray
    constraints: np.ndarray

    @property
    def dim(self) -> int:
        return self.span.shape[1]

    @property
    def ambient_constraints(self) -> np.ndarray:
        return self.constraints @ self.span.T

    def contains(self, u, tol: float = 1e-9) -> np.ndarray:
        u = np.atleast_2d(np.asarray(u, dtype=float))
        s = u @ self.span
        resid = u - s @ self.span.T
        scale = np.maximum(1.0, np.linalg.norm(u, axis=1))
        ok = np.linalg.norm(resid, axis=1) <= tol * scale
        if self.constraints.shape[0]:
            ok &= np.all(s @ self.constraints.T <= tol * scale[:, None], axis=1)
        return ok

    def contains_relint(self, u, tol: float = 1e-9) -> np.ndarray:
        u = np.atleast_2d(np.asarray(u, dtype=float))
        s = u @ self.span
        scale = np.maximum(1.0, np.linalg.norm(u, axis=1))
        ok = np.linalg.norm(u - s @ self.span.T, axis=1) <= tol * scale
        if self.constraints.shape[0]:
            ok &= np.all(s @ self.constraints.T < -tol * scale[:, None], axis=1)
        return ok

    @cached_property
    def groups(self) -> list[list[int]]:
        """Connected components of the constraints under non-orthogonality."""
        a = self.constraints
        r = a.shape[0]
        if r == 0:
            return []
        unit = a / np.linalg.norm(a, axis=1, keepdims=True)
        adj = np.abs(unit @ unit.T) > 1e-10
        seen, comps = [False] * r, []
        for s in range(r):
            if seen[s]:
                continue
            stack, comp = [s], []
            seen[s] = True
            while stack:
                i = stack.pop()
                comp.append(i)
                for j in np.flatnonzero(adj[i]):
                    if not seen[j]:
                        seen[j] = True
                        stack.append(int(j))
            comps.append(sorted(comp))
        return comps

    def exact_factor(self) -> tuple[float, list[int]]:
        """Product of closed-form group fractions, and the constraint indices left for sampling."""
        a = self.constraints
        factor, rest = 1.0, []
        for g in self.groups:
            if len(g) == 1:
                factor *= 0.5
            elif len(g) == 2:
                u = a[g[0]] / np.linalg.norm(a[g[0]])
                v = a[g[1]] / np.linalg.norm(a[g[1]])
                theta = math.acos(float(np.clip(u @ v, -1.0, 1.0)))
                factor *= (math.pi - theta) / (2 * math.pi)
            else:
                rest.extend(g)
        return factor, rest

    @property
    def is_exact(self) -> bool:
        return not self.exact_factor()[1]


def _irredundant(a: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Drop constraint vectors that lie in the cone generated by the others (or duplicate them)."""
    if a.shape[0] == 0:
        return a
    a = a / np.linalg.norm(a, axis=1, keepdims=True)
    keep = list(range(a.shape[0]))
    for j in range(a.shape[0]):
        others = [i for i in keep if i != j]
        if not others:
            continue
        _, resid = nnls(a[others].T, a[j])
        if resid <= 1e-9:
            keep.remove(j)
    return a[keep]


class Polytope:
    """Convex hull of finitely many points in R^d.

    ``ambient`` is ``("quaternionic", n)``, ``("complex", n)`` or ``("real", d)``;
    it fixes how the real coordinates are read (4n or 2n of them).
    """

    def __init__(self, vertices, ambient=None, _reduce: bool = True):
        v = np.atleast_2d(np.asarray(vertices, dtype=float))
        if v.size == 0:
            raise EmptyPolytope("polytope needs at least one vertex")
        if _reduce:
            v = _extreme_points(v)
        self.vertices = v
        self.d = v.shape[1]
        self.ambient = _check_ambient(ambient, self.d)
        self._lattice: dict[int, list[tuple]] | None = None
        self._cones: dict[tuple, NormalCone] = {}

    # -- basic geometry -----------------------------------------------------

    @cached_property
    def _hull(self):
        return affine_hull(self.vertices)

    @property
    def dim(self) -> int:
        return self._hull[1].shape[1]

    @property
    def n(self) -> int:
        return self.ambient[1] if self.ambient[0] != "real" else self.d

    def support(self, u) -> tuple[float, list[int]]:
        """``(max_v <u, v>, argmax indices)``."""
        vals = self.vertices @ np.asarray(u, dtype=float)
        top = float(vals.max())
        tol = 1e-9 * max(1.0, abs(top), float(np.max(np.abs(vals))))
        return top, [int(i) for i in np.flatnonzero(vals >= top - tol)]

    def support_values(self, u) -> np.ndarray:
        return np.max(np.atleast_2d(u) @ self.vertices.T, axis=1)

    def translate(self, a) -> "Polytope":
        return self._copy_with(self.vertices + np.asarray(a, dtype=float))

    def scale(self, lam: float) -> "Polytope":
        if lam <= 0:
            raise ValidationError("scale factor must be positive")
        return self._copy_with(self.vertices * float(lam))

    def transform(self, matrix, shift=None) -> "Polytope":
        """Image under ``x -> M x + shift`` for an invertible M; the face lattice carries over."""
        m = np.asarray(matrix, dtype=float)
        if abs(np.linalg.det(m)) < 1e-12:
            raise ValidationError("transform must be invertible")
        v = self.vertices @ m.T + (0.0 if shift is None else np.asarray(shift, dtype=float))
        return self._copy_with(v)

    def _copy_with(self, vertices) -> "Polytope":
        # affine bijections keep the vertex order, so the index-set lattice is reused
        out = Polytope.__new__(Polytope)
        out.vertices = np.asarray(vertices, dtype=float)
        out.d = out.vertices.shape[1]
        out.ambient = self.ambient
        out._lattice = self._full_lattice()
        out._cones = {}
        return out

    # -- faces --------------------------------------------------------------

    def _full_lattice(self) -> dict[int, list[tuple]]:
        if self._lattice is None:
            if len(self.vertices) > GENERIC_VERTEX_CAP:
                raise TooManyVertices(
                    f"{len(self.vertices)} vertices exceed the generic cap of {GENERIC_VERTEX_CAP}; use a structured constructor"
                )
            self._lattice = _generic_lattice(self.vertices)
        return self._lattice

    def face_index_sets(self, k: int) -> list[tuple]:
        return list(self._full_lattice().get(k, []))

    def make_face(self, indices) -> Face:
        idx = tuple(sorted(int(i) for i in indices))
        pts = self.vertices[list(idx)]
        origin, basis = affine_hull(pts)
        k = basis.shape[1]
        return Face(idx, k, basis, _relative_volume(pts, origin, basis), origin)

    def faces(self, k: int) -> list[Face]:
        return [self.make_face(s) for s in self.face_index_sets(k)]

    def is_face(self, indices) -> bool:
        """Linear feasibility: some u has argmax set exactly ``indices``."""
        return _is_face_lp(self.vertices, indices)

    # -- normal cones -------------------------------------------------------

    def normal_cone(self, face: Face) -> NormalCone:
        key = face.indices
        if key in self._cones:
            return self._cones[key]
        lattice = self._full_lattice()
        if key not in set(lattice.get(face.dim, [])):
            raise NotAFace(f"vertex set {key} is not a face")
        cone = self._structured_cone(face)
        if cone is None:
            cone = _generic_cone(self.vertices, face)
        self._cones[key] = cone
        return cone

    def _structured_cone(self, face: Face):
        return None

    # -- H-representation ---------------------------------------------------

    @cached_property
    def hrep(self):
        """``(A, b, E, e)`` with the polytope equal to ``{A x <= b, E x = e}``."""
        origin, basis = self._hull
        d, k = self.d, basis.shape[1]
        comp = _orth_complement(basis, d)
        e_mat, e_vec = comp.T, comp.T @ origin
        if k == 0:
            return np.zeros((0, d)), np.zeros(0), e_mat, e_vec
        coords = (self.vertices - origin) @ basis
        if k == 1:
            lo, hi = coords[:, 0].min(), coords[:, 0].max()
            a = np.array([basis[:, 0], -basis[:, 0]])
            b = np.array([hi + origin @ basis[:, 0], -lo - origin @ basis[:, 0]])
            return a, b, e_mat, e_vec
        hull = ConvexHull(coords)
        eq = _merge_rows(hull.equations)
        a_c, b_c = eq[:, :-1], -eq[:, -1]
        a = a_c @ basis.T
        b = b_c + a @ origin
        return a, b, e_mat, e_vec

    def contains(self, x, tol: float = 1e-9) -> np.ndarray:
        a, b, e, ev = self.hrep
        x = np.atleast_2d(np.asarray(x, dtype=float))
        scale = max(1.0, float(np.max(np.abs(self.vertices))))
        ok = np.all(x @ a.T <= b + tol * scale, axis=1)
        if e.shape[0]:
            ok &= np.all(np.abs(x @ e.T - ev) <= tol * scale, axis=1)
        return ok

    def volume(self) -> float:
        """Volume relative to the affine hull (k-volume for a k-dimensional polytope)."""
        origin, basis = self._hull
        return _relative_volume(self.vertices, origin, basis)

    def to_json(self) -> dict:
        return {"ambient": {"kind": self.ambient[0], "n": self.ambient[1]}, "vertices": self.vertices.tolist()}

    def __repr__(self) -> str:
        return f"{type(self).__name__}(vertices={len(self.vertices)}, d={self.d}, dim={self.dim})"


def _check_ambient(ambient, d: int):
    if ambient is None:
        if d % 4 == 0:
            return ("quaternionic", d // 4)
        return ("real", d)
    kind, n = (ambient["kind"], int(ambient["n"])) if isinstance(ambient, dict) else (ambient[0], int(ambient[1]))
    width = {"quaternionic": 4 * n, "complex": 2 * n, "real": n}.get(kind)
    if width is None:
        raise ValidationError(f"unknown ambient kind {kind!r}")
    if width != d:
        raise ValidationError(f"{kind} ambient of dimension {n} needs {width} coordinates, got {d}")
    return (kind, n)


def _merge_rows(eq: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    out = []
    for row in eq:
        if not any(np.allclose(row, r, atol=tol) for r in out):
            out.append(row)
    return np.array(out)


def _dedupe(v: np.ndarray) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(v))))
    keep = []
    for i, p in enumerate(v):
        if not any(np.max(np.abs(p - v[j])) <= 1e-12 * scale for j in keep):
            keep.append(i)
    return v[keep]


def _extreme_points(v: np.ndarray) -> np.ndarray:
    v = _dedupe(v)
    origin, basis = affine_hull(v)
    k = basis.shape[1]
    if k == 0:
        return v[:1]
    coords = (v - origin) @ basis
    if k == 1:
        return v[[int(np.argmin(coords[:, 0])), int(np.argmax(coords[:, 0]))]]
    try:
        hull = ConvexHull(coords)
    except QhullError as exc:
        raise ValidationError(f"convex hull failed: {exc}") from exc
    return v[np.sort(hull.vertices)]


def _relative_volume(pts, origin, basis) -> float:
    k = basis.shape[1]
    if k == 0:
        return 1.0
    coords = (pts - origin) @ basis
    if k == 1:
        return float(coords.max() - coords.min())
    return float(ConvexHull(coords).volume)


def _facets_of(vertices: np.ndarray, idx: tuple) -> list[tuple]:
    pts = vertices[list(idx)]
    origin, basis = affine_hull(pts)
    k = basis.shape[1]
    if k == 0:
        return []
    coords = (pts - origin) @ basis
    if k == 1:
        return [(idx[int(np.argmin(coords[:, 0]))],), (idx[int(np.argmax(coords[:, 0]))],)]
    hull = ConvexHull(coords)
    scale = max(1.0, float(np.max(np.abs(coords))))
    sets = set()
    for row in hull.equations:
        dist = coords @ row[:-1] + row[-1]
        members = tuple(idx[i] for i in np.flatnonzero(np.abs(dist) <= 1e-8 * scale))
        sets.add(members)
    return sorted(sets)


def _generic_lattice(vertices: np.ndarray) -> dict[int, list[tuple]]:
    top = tuple(range(len(vertices)))
    origin, basis = affine_hull(vertices)
    dim = basis.shape[1]
    lattice: dict[int, set] = {dim: {top}}
    for k in range(dim, 0, -1):
        found = set()
        for f in lattice.get(k, ()):
            found.update(_facets_of(vertices, f))
        lattice[k - 1] = found
    return {k: sorted(v) for k, v in lattice.items()}


def _generic_cone(vertices: np.ndarray, face: Face) -> NormalCone:
    d = vertices.shape[1]
    span = _orth_complement(face.basis, d)
    inside = set(face.indices)
    others = [i for i in range(len(vertices)) if i not in inside]
    if not others:
        return NormalCone(face, span, np.zeros((0, span.shape[1])))
    a = (vertices[others] - face.origin) @ span
    norms = np.linalg.norm(a, axis=1)
    scale = max(1.0, float(np.max(np.abs(vertices))))
    a = a[norms > 1e-12 * scale]
    return NormalCone(face, span, _irredundant(a))


def _is_face_lp(vertices: np.ndarray, indices) -> bool:
    idx = sorted(set(int(i) for i in indices))
    m, d = vertices.shape
    if not idx:
        return False
    others = [i for i in range(m) if i not in idx]
    if not others:
        return True
    # variables (u, h, t): u.v = h on idx, u.w <= h - t on others, maximize t with |u| <= 1
    nv = d + 2
    a_eq = np.hstack([vertices[idx], -np.ones((len(idx), 1)), np.zeros((len(idx), 1))])
    a_ub = np.hstack([vertices[others], -np.ones((len(others), 1)), np.ones((len(others), 1))])
    bounds = [(-1, 1)] * d + [(None, None), (None, 1)]
    c = np.zeros(nv)
    c[-1] = -1.0
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(len(others)), A_eq=a_eq, b_eq=np.zeros(len(idx)), bounds=bounds, method="highs")
    scale = max(1.0, float(np.max(np.abs(vertices))))
    return bool(res.status == 0 and -res.fun > 1e-9 * scale)


# ---------------------------------------------------------------------------
# structured constructors


class Box(Polytope):
    """Axis-aligned box ``prod [lo_a, hi_a]``; degenerate sides (lo = hi) are allowed."""

    def __init__(self, lo, hi, ambient=None):
        lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
        if lo.shape != hi.shape or np.any(hi < lo):
            raise ValidationError("box needs lo <= hi componentwise")
        self.lo, self.hi = lo, hi
        self.free_axes = [a for a in range(lo.size) if hi[a] > lo[a]]
        corners = list(itertools.product(*[(lo[a], hi[a]) if a in self.free_axes else (lo[a],) for a in range(lo.size)]))
        super().__init__(np.array(corners), ambient, _reduce=False)
        self._lattice = self._box_lattice()

    def translate(self, a) -> "Box":
        a = np.asarray(a, dtype=float)
        return Box(self.lo + a, self.hi + a, self.ambient)

    def scale(self, lam: float) -> "Box":
        if lam <= 0:
            raise ValidationError("scale factor must be positive")
        return Box(self.lo * lam, self.hi * lam, self.ambient)

    def _box_lattice(self):
        free = self.free_axes
        m = len(free)
        # vertex i has bit j set when free axis j sits at hi
        bits = np.array(list(itertools.product([0, 1], repeat=m)), dtype=int).reshape(-1, m)
        lattice: dict[int, list[tuple]] = {}
        for pattern in itertools.product((0, 1, 2), repeat=m):
            k = sum(1 for p in pattern if p == 2)
            mask = np.ones(len(bits), dtype=bool)
            for j, p in enumerate(pattern):
                if p != 2:
                    mask &= bits[:, j] == p
            lattice.setdefault(k, []).append(tuple(int(i) for i in np.flatnonzero(mask)))
        return {k: sorted(v) for k, v in lattice.items()}

    def _structured_cone(self, face: Face):
        d = self.d
        v = self.vertices[list(face.indices)]
        moving = [a for a in self.free_axes if np.ptp(v[:, a]) > 0]
        span_axes = [a for a in range(d) if a not in moving]
        span = np.eye(d)[:, span_axes]
        rows = []
        for col, a in enumerate(span_axes):
            if a not in self.free_axes:
                continue
            r = np.zeros(len(span_axes))
            r[col] = -1.0 if v[0, a] == self.hi[a] else 1.0
            rows.append(r)
        return NormalCone(face, span, np.array(rows, dtype=float).reshape(len(rows), len(span_axes)))


def box(lo, hi, ambient=None) -> Box:
    return Box(lo, hi, ambient)


class Simplex(Polytope):
    """Simplex on affinely independent vertices; every vertex subset is a face."""

    def __init__(self, vertices, ambient=None):
        super().__init__(vertices, ambient, _reduce=False)
        m = len(self.vertices)
        if self.dim != m - 1:
            raise ValidationError("simplex vertices must be affinely independent")
        self._lattice = {k: list(itertools.combinations(range(m), k + 1)) for k in range(m)}


def simplex(vertices, ambient=None) -> Simplex:
    return Simplex(vertices, ambient)


def segment(a, b, ambient=None) -> Polytope:
    return Polytope(np.array([a, b], dtype=float), ambient)


class Product(Polytope):
    """Cartesian product; faces are products of faces and normal cones are direct sums."""

    def __init__(self, factors, ambient=None):
        self.factors = list(factors)
        grids = [range(len(f.vertices)) for f in self.factors]
        self._combos = list(itertools.product(*grids))
        verts = np.array([np.concatenate([f.vertices[i] for f, i in zip(self.factors, c)]) for c in self._combos])
        super().__init__(verts, ambient, _reduce=False)
        self._lattice = self._product_lattice()

    def _product_lattice(self):
        pos = {c: i for i, c in enumerate(self._combos)}
        per = [f._full_lattice() for f in self.factors]
        lattice: dict[int, list[tuple]] = {}
        for choice in itertools.product(*[[(k, s) for k, sets in lat.items() for s in sets] for lat in per]):
            k = sum(c[0] for c in choice)
            idx = tuple(sorted(pos[c] for c in itertools.product(*[c[1] for c in choice])))
            lattice.setdefault(k, []).append(idx)
        return {k: sorted(v) for k, v in lattice.items()}

    def _structured_cone(self, face: Face):
        combos = [self._combos[i] for i in face.indices]
        spans, rows, offset = [], [], 0
        dims = [f.d for f in self.factors]
        total_d = sum(dims)
        blocks = []
        for j, f in enumerate(self.factors):
            sub = sorted({c[j] for c in combos})
            cone = f.normal_cone(f.make_face(sub))
            blocks.append(cone)
        m_tot = sum(c.dim for c in blocks)
        span = np.zeros((total_d, m_tot))
        cons = []
        row_off, col_off = 0, 0
        for f, c in zip(self.factors, blocks):
            span[row_off : row_off + f.d, col_off : col_off + c.dim] = c.span
            for r in c.constraints:
                full = np.zeros(m_tot)
                full[col_off : col_off + c.dim] = r
                cons.append(full)
            row_off += f.d
            col_off += c.dim
        return NormalCone(face, span, np.array(cons, dtype=float).reshape(len(cons), m_tot))


def product(*factors, ambient=None) -> Product:
    return Product(factors, ambient)


def zonotope(generators, center=None, ambient=None) -> Polytope:
    """Minkowski sum of segments ``[-g/2, g/2]``; vertices come from all sign patterns."""
    g = np.atleast_2d(np.asarray(generators, dtype=float))
    if g.shape[0] > 16:
        raise TooManyVertices("zonotope with more than 16 generators")
    signs = np.array(list(itertools.product([-0.5, 0.5], repeat=g.shape[0])))
    pts = signs @ g + (0.0 if center is None else np.asarray(center, dtype=float))
    return Polytope(pts, ambient)


# ---------------------------------------------------------------------------
# exterior angles


def angle_sampler(d: int, samples: int, seed, chunk: int = 1 << 16):
    """Yield blocks of standard Gaussian vectors in R^d, a fixed stream for a given seed."""
    rng = np.random.default_rng(seed)
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        yield rng.standard_normal((m, d))
        done += m


def exterior_angle(cone: NormalCone, samples: int = 200_000, seed=0, exact: bool = True) -> tuple[float, float]:
    """``(gamma, stderr)``: the fraction of the sphere of ``span(cone)`` inside the cone.

    Closed forms cover rays, half-spaces, orthants and planar wedges (and
    orthogonal products of these).  Otherwise Gaussian directions are drawn
    in the ambient space and projected onto the span.
    """
    if cone.dim == 0:
        raise DegenerateCone("zero-dimensional normal cone")
    factor, rest = cone.exact_factor() if exact else (1.0, list(range(cone.constraints.shape[0])))
    if not rest:
        return factor, 0.0
    amb = cone.constraints[rest] @ cone.span.T
    hits = 0
    for z in angle_sampler(cone.span.shape[0], samples, seed):
        hits += int(np.sum(np.all(z @ amb.T <= 0.0, axis=1)))
    p = hits / samples
    return factor * p, factor * math.sqrt(max(p * (1 - p), 0.0) / samples)


# ---------------------------------------------------------------------------
# intersections, splitting, distances


def _implicit_equalities(a, b, e, ev, tol):
    """Flag inequalities that hold with equality on the whole feasible set; None if infeasible."""
    d = a.shape[1] if a.size else e.shape[1]
    flags = np.zeros(a.shape[0], dtype=bool)
    # one LP per constraint: maximise its slack
    for i in range(a.shape[0]):
        c = a[i]
        res = linprog(c, A_ub=a, b_ub=b, A_eq=e if e.shape[0] else None, b_eq=ev if e.shape[0] else None,
                      bounds=[(None, None)] * d, method="highs")
        if res.status == 2:
            return None
        if res.status != 0:
            continue
        slack = b[i] - res.fun
        flags[i] = slack <= tol
    return flags


def from_hrep(a, b, e=None, ev=None, ambient=None, tol: float = 1e-9, scale: float = 1.0) -> Polytope | None:
    """Vertices of ``{A x <= b, E x = ev}``; None when the set is empty.

    Inequalities that are tight on the whole set are promoted to equalities,
    the problem is restricted to the resulting affine subspace, and the
    vertices come from a half-space intersection around a Chebyshev center.
    """
    a, b = np.atleast_2d(np.asarray(a, dtype=float)), np.asarray(b, dtype=float)
    d = a.shape[1]
    e = np.zeros((0, d)) if e is None else np.asarray(e, dtype=float).reshape(-1, d)
    ev = np.zeros(0) if ev is None else np.asarray(ev, dtype=float)
    flags = _implicit_equalities(a, b, e, ev, tol * scale)
    if flags is None:
        return None
    e = np.vstack([e, a[flags]])
    ev = np.concatenate([ev, b[flags]])
    a, b = a[~flags], b[~flags]
    if e.shape[0]:
        x0 = np.linalg.lstsq(e, ev, rcond=None)[0]
        basis = null_space(e, rcond=1e-10)
    else:
        x0, basis = np.zeros(d), np.eye(d)
    k = basis.shape[1]
    if k == 0:
        return Polytope(x0[None], ambient)
    ar, br = a @ basis, b - a @ x0
    norms = np.linalg.norm(ar, axis=1)
    keep = norms > 1e-14
    ar, br, norms = ar[keep], br[keep], norms[keep]
    if k == 1:
        col = ar[:, 0]
        hi = np.min(br[col > 0] / col[col > 0]) if np.any(col > 0) else np.inf
        lo = np.max(br[col < 0] / col[col < 0]) if np.any(col < 0) else -np.inf
        if not np.isfinite(hi - lo):
            raise ValidationError("constraint set is unbounded")
        if hi < lo - tol * scale:
            return None
        return Polytope(np.array([x0 + lo * basis[:, 0], x0 + hi * basis[:, 0]]), ambient)
    c = np.zeros(k + 1)
    c[-1] = -1.0
    res = linprog(c, A_ub=np.hstack([ar, norms[:, None]]), b_ub=br, bounds=[(None, None)] * k + [(0, None)], method="highs")
    if res.status == 3:
        raise ValidationError("constraint set is unbounded")
    if res.status != 0 or -res.fun <= tol * scale:
        return None
    hs = HalfspaceIntersection(np.hstack([ar, -br[:, None]]), res.x[:k])
    return Polytope(hs.intersections @ basis.T + x0, ambient)


def _scale_of(*ps) -> float:
    return max([1.0] + [float(np.max(np.abs(p.vertices))) for p in ps])


def intersection(p1: Polytope, p2: Polytope, tol: float = 1e-9) -> Polytope | None:
    """``p1 cap p2`` as a polytope, or None when empty."""
    a1, b1, e1, f1 = p1.hrep
    a2, b2, e2, f2 = p2.hrep
    return from_hrep(
        np.vstack([a1, a2]), np.concatenate([b1, b2]), np.vstack([e1, e2]), np.concatenate([f1, f2]),
        p1.ambient, tol, _scale_of(p1, p2),
    )


def split_by_hyperplane(p: Polytope, normal, offset: float) -> tuple[Polytope | None, Polytope | None]:
    """``(p cap {<normal, x> <= offset}, p cap {<normal, x> >= offset})``."""
    normal = np.asarray(normal, dtype=float)
    a, b, e, ev = p.hrep
    out = []
    for sign in (1.0, -1.0):
        out.append(from_hrep(np.vstack([a, sign * normal]), np.concatenate([b, [sign * offset]]), e, ev, p.ambient, scale=_scale_of(p)))
    return out[0], out[1]


def point_distance(x, vertices) -> float:
    """Euclidean distance from x to conv(vertices), by NNLS with a weighted sum-to-one row."""
    v = np.atleast_2d(np.asarray(vertices, dtype=float))
    x = np.asarray(x, dtype=float)
    scale = max(1.0, float(np.max(np.abs(v))), float(np.max(np.abs(x))))
    w = 1e4 * scale
    mat = np.vstack([v.T, w * np.ones(len(v))])
    rhs = np.concatenate([x, [w]])
    lam, _ = nnls(mat, rhs, maxiter=50 * len(v) + 100)
    lam = lam / lam.sum()
    return float(np.linalg.norm(v.T @ lam - x))


def hausdorff_distance(p1: Polytope, p2: Polytope) -> float:
    """Max over the vertices of each body of the distance to the other body."""
    d12 = max(point_distance(x, p2.vertices) for x in p1.vertices)
    d21 = max(point_distance(x, p1.vertices) for x in p2.vertices)
    return max(d12, d21)


def union_is_convex(p1: Polytope, p2: Polytope, samples: int = 2000, seed=0, tol: float = 1e-9) -> bool:
    """Sample ``conv(p1 cup p2)`` and check every point lies in one of the bodies."""
    rng = np.random.default_rng(seed)
    pts = np.vstack([p1.vertices, p2.vertices])
    lam = rng.dirichlet(np.full(len(pts), 0.3), size=samples)
    x = lam @ pts
    ok = p1.contains(x, tol) | p2.contains(x, tol)
    return bool(np.all(ok))


def require_convex_union(p1: Polytope, p2: Polytope, samples: int = 2000, seed=0):
    if not union_is_convex(p1, p2, samples, seed):
        raise UnionNotConvex("a sampled point of the convex hull lies in neither body")
