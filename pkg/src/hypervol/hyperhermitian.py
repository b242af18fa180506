"""Quaternionic matrices with the Moore determinant and its polarization, the mixed discriminant.

Matrices are arrays of shape ``(n, n, 4)``; batched functions accept any
number of leading axes, ``(..., n, n, 4)``.  :class:`QMatrix` and
:class:`HyperHermitian` wrap single matrices for the public API.

Two independent routes to the Moore determinant are provided:

* :func:`moore_det_spectral` diagonalizes the Hermitian complex adjoint
  ``chi(A)`` (2n x 2n), whose eigenvalues come in coincident pairs, and
  multiplies one eigenvalue per pair.
* :func:`moore_det_schur` eliminates in quaternion arithmetic, pivoting on
  real diagonal entries; congruence invariance of the determinant under
  symplectic changes of basis permits random retries when every diagonal
  entry vanishes.
"""
from __future__ import annotations

import itertools
import json
import math
from typing import Iterable, Sequence

import numpy as np

from .errors import PairingBroken, PivotFailure, SizeMismatch, ValidationError
from .quaternion import MULT, complexify, qconj, qmul, qnorm2, realize4

__all__ = [
    "QMatrix",
    "HyperHermitian",
    "qmatmul",
    "qstar",
    "chi",
    "realize",
    "moore_det",
    "moore_det_spectral",
    "moore_det_schur",
    "det_plus_diagonal",
    "mixed_discriminant",
    "is_nonneg_definite",
    "realization_identity_check",
    "minor",
    "random_qmatrix",
    "random_hyperhermitian",
    "random_nonneg",
    "random_symplectic",
    "identity",
    "diag",
    "outer",
]

PAIRING_RTOL = 1e-7
PIVOT_RTOL = 1e-10
PIVOT_RETRIES = 5
HYPERHERMITIAN_TOL = 1e-9
MAX_POLARIZATION_N = 8


# ---------------------------------------------------------------------------
# array-level operations


def qmatmul(a, b):
    """Product of quaternionic matrices of shapes (..., n, m, 4) @ (..., m, p, 4)."""
    return np.einsum("...ija,...jkb,abc->...ikc", a, b, MULT)


def qstar(a):
    """Quaternionic conjugate transpose."""
    return qconj(np.swapaxes(np.asarray(a, dtype=float), -2, -3))


def chi(a):
    """Complex adjoint: the 2n x 2n complex matrix with 2x2 blocks ``complexify(a_ij)``."""
    a = np.asarray(a, dtype=float)
    n = a.shape[-2]
    blocks = complexify(a)  # (..., n, n, 2, 2)
    blocks = np.swapaxes(blocks, -2, -3)  # (..., n, 2, n, 2)
    return blocks.reshape(a.shape[:-3] + (2 * n, 2 * n))


def realize(a):
    """Real realization: the 4n x 4n matrix with 4x4 blocks ``realize4(a_ij)``."""
    a = getattr(a, "data", a)
    a = np.asarray(a, dtype=float)
    n = a.shape[-2]
    blocks = realize4(a)  # (..., n, n, 4, 4)
    blocks = np.swapaxes(blocks, -2, -3)
    return blocks.reshape(a.shape[:-3] + (4 * n, 4 * n))


def identity(n: int) -> np.ndarray:
    out = np.zeros((n, n, 4))
    out[np.arange(n), np.arange(n), 0] = 1.0
    return out


def diag(values) -> np.ndarray:
    """Real diagonal quaternionic matrix."""
    values = np.asarray(values, dtype=float)
    n = values.shape[-1]
    out = np.zeros(values.shape[:-1] + (n, n, 4))
    out[..., np.arange(n), np.arange(n), 0] = values
    return out


def outer(v) -> np.ndarray:
    """Rank-one hyperhermitian matrix ``v v*`` for a quaternion vector of shape (..., n, 4)."""
    v = np.asarray(v, dtype=float)
    return qmul(v[..., :, None, :], qconj(v)[..., None, :, :])


def minor(a, removed: Iterable[int]) -> np.ndarray:
    """Delete the rows and columns listed in ``removed``."""
    a = np.asarray(a, dtype=float)
    removed = set(removed)
    keep = [i for i in range(a.shape[-2]) if i not in removed]
    return a[..., keep, :, :][..., :, keep, :]


def _hermitian_residual(a) -> float:
    a = np.asarray(a, dtype=float)
    return float(np.max(np.abs(a - qstar(a)), initial=0.0))


def _scale(a) -> float:
    return float(np.max(np.abs(a), initial=0.0))


# ---------------------------------------------------------------------------
# Moore determinant


def moore_det_spectral(a, pairing_rtol: float = PAIRING_RTOL):
    """Moore determinant from the paired spectrum of the complex adjoint.

    Accepts a single matrix or a batch ``(..., n, n, 4)``.  Raises
    :class:`PairingBroken` when a sorted eigenvalue pair ``(l_{2i-1}, l_{2i})``
    is farther apart than ``pairing_rtol * max|l|``; that gap is exact zero in
    theory and only grows for non-hyperhermitian input or numerical breakdown.
    """
    a = np.asarray(getattr(a, "data", a), dtype=float)
    resid = np.max(np.abs(a - qstar(a)), axis=(-3, -2, -1), initial=0.0)
    size = np.max(np.abs(a), axis=(-3, -2, -1), initial=0.0)
    if np.any(resid > HYPERHERMITIAN_TOL * np.maximum(size, 1.0)):
        raise PairingBroken("input is not hyperhermitian, so the spectrum of chi(A) cannot pair up")
    c = chi(a)
    c = 0.5 * (c + np.conj(np.swapaxes(c, -1, -2)))
    ev = np.linalg.eigvalsh(c)
    first, second = ev[..., 0::2], ev[..., 1::2]
    scale = np.max(np.abs(ev), axis=-1, keepdims=True)
    gap = np.abs(second - first)
    if np.any(gap > pairing_rtol * np.maximum(scale, 1e-300)):
        worst = float(np.max(gap / np.maximum(scale, 1e-300)))
        raise PairingBroken(f"eigenvalue pair gap {worst:.3e} exceeds {pairing_rtol:.1e} (relative)")
    det = np.prod(0.5 * (first + second), axis=-1)
    return float(det) if det.ndim == 0 else det


def moore_det(a):
    """Moore determinant, batched; closed forms for n <= 3, spectral otherwise.

    The n = 3 form is ``abc - a|z|^2 - b|y|^2 - c|x|^2 + 2 Re(x z conj(y))`` for
    off-diagonal entries ``x = a_12, y = a_13, z = a_23``.
    """
    a = np.asarray(getattr(a, "data", a), dtype=float)
    n = a.shape[-2]
    if n == 0:
        out = np.ones(a.shape[:-3])
    elif n == 1:
        out = a[..., 0, 0, 0]
    elif n == 2:
        out = a[..., 0, 0, 0] * a[..., 1, 1, 0] - qnorm2(a[..., 0, 1, :])
    elif n == 3:
        d0, d1, d2 = a[..., 0, 0, 0], a[..., 1, 1, 0], a[..., 2, 2, 0]
        x, y, z = a[..., 0, 1, :], a[..., 0, 2, :], a[..., 1, 2, :]
        cyc = qmul(qmul(x, z), qconj(y))[..., 0]
        out = d0 * d1 * d2 - d0 * qnorm2(z) - d1 * qnorm2(y) - d2 * qnorm2(x) + 2.0 * cyc
    else:
        return moore_det_spectral(a)
    return float(out) if np.ndim(out) == 0 else out


def moore_det_schur(a, rng=None, pivot_rtol: float = PIVOT_RTOL, retries: int = PIVOT_RETRIES) -> float:
    """Moore determinant by quaternionic Schur-complement elimination.

    With ``A = [[a11, w], [v, B]]`` and ``a11`` real, ``det A = a11 det(B - v w / a11)``
    (the Schur complement is hyperhermitian again).  The pivot is the
    largest diagonal entry, moved to the front by a permutation congruence.
    When every diagonal entry of a nonzero block is below ``pivot_rtol * |A|``,
    the block is replaced by ``U* B U`` with a random symplectic ``U``, which
    leaves the determinant unchanged.
    """
    a = np.array(getattr(a, "data", a), dtype=float)
    if rng is None:
        rng = np.random.default_rng(0)
    tol = pivot_rtol * max(_scale(a), 1e-300)
    det = 1.0
    tries = 0
    while a.shape[0] > 0:
        d = a[np.arange(a.shape[0]), np.arange(a.shape[0]), 0]
        p = int(np.argmax(np.abs(d)))
        if abs(d[p]) <= tol:
            if _scale(a) <= tol:
                return 0.0
            if tries >= retries:
                raise PivotFailure(f"no pivot above {tol:.3e} after {retries} congruence retries")
            tries += 1
            u = random_symplectic(a.shape[0], rng)
            a = qmatmul(qmatmul(qstar(u), a), u)
            a = 0.5 * (a + qstar(a))
            continue
        order = [p] + [i for i in range(a.shape[0]) if i != p]
        a = a[order][:, order]
        pivot = a[0, 0, 0]
        det *= pivot
        col = a[1:, 0, :]
        row = a[0, 1:, :]
        a = a[1:, 1:, :] - qmul(col[:, None, :], row[None, :, :]) / pivot
        a = 0.5 * (a + qstar(a))
    return float(det)


def det_plus_diagonal(a, t) -> float:
    """``det(A + diag(t))`` expanded as ``sum_I prod_{i in I} t_i det M_I(A)``.

    ``M_I`` deletes the rows and columns in ``I``; the minor for ``I = [n]`` has
    determinant 1.
    """
    a = np.asarray(getattr(a, "data", a), dtype=float)
    t = np.asarray(t, dtype=float)
    n = a.shape[0]
    total = 0.0
    for r in range(n + 1):
        for subset in itertools.combinations(range(n), r):
            weight = float(np.prod(t[list(subset)])) if subset else 1.0
            total += weight * moore_det(minor(a, subset)) if r < n else weight
    return float(total)


def _subset_masks(m: int) -> np.ndarray:
    masks = np.array(list(itertools.product([0, 1], repeat=m))[1:], dtype=float)
    return masks


def mixed_discriminant(mats) -> float | np.ndarray:
    """Mixed discriminant of n hyperhermitian n x n matrices by polarization.

    ``det(A_1, ..., A_n) = (1/n!) sum_{S nonempty} (-1)^{n-|S|} det(sum_{i in S} A_i)``.

    ``mats`` is a sequence of n matrices or an array of shape
    ``(..., n, n, n, 4)`` (axis -4 indexes the tuple).  There are ``2^n - 1``
    determinant evaluations per tuple, so ``n`` is capped at 8.
    """
    if isinstance(mats, (list, tuple)):
        arrs = [np.asarray(getattr(m, "data", m), dtype=float) for m in mats]
        if len({x.shape for x in arrs}) > 1:
            raise SizeMismatch("matrices in a mixed tuple must share one size")
        mats = np.stack(arrs) if arrs else np.zeros((0, 0, 0, 4))
    mats = np.asarray(mats, dtype=float)
    m, n = mats.shape[-4], mats.shape[-2]
    if mats.shape[-3] != n or m != n:
        raise SizeMismatch(f"need {n} matrices of size {n}x{n}, got {m} of size {mats.shape[-3]}x{n}")
    if n == 0:
        out = np.ones(mats.shape[:-4])
        return float(out) if out.ndim == 0 else out
    if n > MAX_POLARIZATION_N:
        raise SizeMismatch(f"polarization supports n <= {MAX_POLARIZATION_N}, got {n}")
    masks = _subset_masks(n)
    sums = np.einsum("sm,...mijc->...sijc", masks, mats)
    dets = moore_det(sums)
    signs = (-1.0) ** (n - masks.sum(axis=1))
    out = np.einsum("...s,s->...", dets, signs) / math.factorial(n)
    return float(out) if np.ndim(out) == 0 else out


def is_nonneg_definite(a, tol: float = 1e-10) -> bool:
    """True iff the smallest eigenvalue of ``chi(A)`` is at least ``-tol``."""
    a = np.asarray(getattr(a, "data", a), dtype=float)
    c = chi(a)
    ev = np.linalg.eigvalsh(0.5 * (c + c.conj().T))
    return bool(ev[0] >= -tol)


def realization_identity_check(a) -> tuple[float, float, float]:
    """``(det realize(A), det(A* A)^2, det(A A*)^2)``, which agree for every A."""
    a = np.asarray(getattr(a, "data", a), dtype=float)
    ata = qmatmul(qstar(a), a)
    aat = qmatmul(a, qstar(a))
    return (
        float(np.linalg.det(realize(a))),
        float(moore_det_spectral(0.5 * (ata + qstar(ata)))) ** 2,
        float(moore_det_spectral(0.5 * (aat + qstar(aat)))) ** 2,
    )


# ---------------------------------------------------------------------------
# random generators


def random_qmatrix(n: int, rng, m: int | None = None) -> np.ndarray:
    return rng.standard_normal((n, n if m is None else m, 4))


def random_hyperhermitian(n: int, rng) -> np.ndarray:
    g = random_qmatrix(n, rng)
    return g + qstar(g)


def random_nonneg(n: int, rng, rank: int | None = None) -> np.ndarray:
    """``sum_{i <= rank} v_i v_i*`` with Gaussian quaternion vectors."""
    rank = n if rank is None else rank
    v = rng.standard_normal((rank, n, 4))
    return outer(v).sum(axis=0) if rank else np.zeros((n, n, 4))


def _qinner(x, y):
    # <x, y> = sum conj(x_i) y_i
    return qmul(qconj(x), y).sum(axis=-2)


def random_symplectic(n: int, rng) -> np.ndarray:
    """Random U with U* U = Id, by Gram-Schmidt on Gaussian quaternion columns."""
    cols = rng.standard_normal((n, n, 4))  # cols[k] is column k
    out = []
    for k in range(n):
        v = cols[k]
        for u in out:
            v = v - qmul(u, _qinner(u, v)[None, :])
        v = v / np.sqrt(qnorm2(v).sum())
        out.append(v)
    return np.stack(out, axis=1)


# ---------------------------------------------------------------------------
# wrappers


class QMatrix:
    """A general n x n quaternionic matrix."""

    def __init__(self, entries):
        data = np.array(getattr(entries, "data", entries), dtype=float)
        if data.ndim != 3 or data.shape[0] != data.shape[1] or data.shape[2] != 4:
            raise ValidationError(f"expected an (n, n, 4) array, got shape {data.shape}")
        data.setflags(write=False)
        self.data = data

    @property
    def n(self) -> int:
        return self.data.shape[0]

    def star(self) -> "QMatrix":
        return QMatrix(qstar(self.data))

    def __matmul__(self, other: "QMatrix") -> "QMatrix":
        return QMatrix(qmatmul(self.data, other.data))

    def __add__(self, other):
        return type(self)(self.data + np.asarray(getattr(other, "data", other)))

    def __mul__(self, scalar: float):
        return type(self)(self.data * float(scalar))

    __rmul__ = __mul__

    def realize(self) -> np.ndarray:
        return realize(self.data)

    def chi(self) -> np.ndarray:
        return chi(self.data)

    def to_json(self) -> dict:
        return {"n": self.n, "entries": self.data.tolist()}

    @classmethod
    def from_json(cls, doc):
        if isinstance(doc, str):
            doc = json.loads(doc)
        try:
            n = int(doc["n"])
            data = np.asarray(doc["entries"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad matrix document: {exc}") from exc
        if data.shape != (n, n, 4):
            raise ValidationError(f"entries shape {data.shape} does not match n={n}")
        return cls(data)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n})"


class HyperHermitian(QMatrix):
    """Quaternionic matrix with ``a_ij = conj(a_ji)``.

    Validation tolerance is relative to the largest entry; the stored data is
    symmetrized so the diagonal is exactly real.
    """

    def __init__(self, entries, tol: float = HYPERHERMITIAN_TOL):
        data = np.array(getattr(entries, "data", entries), dtype=float)
        super().__init__(data)
        resid = _hermitian_residual(self.data)
        if resid > tol * max(1.0, _scale(self.data)):
            raise ValidationError(f"matrix is not hyperhermitian (residual {resid:.3e})")
        sym = 0.5 * (data + qstar(data))
        sym.setflags(write=False)
        self.data = sym

    def moore_det(self) -> float:
        return float(moore_det(self.data))

    def eigenvalues(self) -> np.ndarray:
        """The n real eigenvalues (one per coincident pair of ``chi(A)``)."""
        ev = np.linalg.eigvalsh(self.chi())
        return 0.5 * (ev[0::2] + ev[1::2])


def as_array(a) -> np.ndarray:
    return np.asarray(getattr(a, "data", a), dtype=float)


def stack_matrices(mats: Sequence) -> np.ndarray:
    return np.stack([as_array(m) for m in mats])
