"""A concrete model of the (k,k)-form algebra on quaternionic n-space.

A degree-k class is a formal real combination of k-fold products
``A_1 A_2 ... A_k`` of hyperhermitian n x n matrices.  Products commute, and
two classes are identified when they pair identically with every class of
the complementary degree.  The pairing of ``A_1 ... A_k`` with
``B_1 ... B_{n-k}`` is the mixed discriminant of the n matrices, so that
``pair(A^k, A^(n-k)) = det A`` and the orientation ``(Id)^n`` pairs to 1.

Degree 1 classes are exactly hyperhermitian matrices.  Degree n-1 classes
are identified with hyperhermitian matrices through the trace duality
``Tr(D X) = pair(omega, X)`` where ``Tr`` is the real part of the trace.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegreeMismatch, DegreeOverflow, InsufficientSamples, SizeMismatch, ValidationError
from .hyperhermitian import (
    HyperHermitian,
    QMatrix,
    chi,
    identity,
    mixed_discriminant,
    outer,
    qstar,
    random_hyperhermitian,
)
from .quaternion import qconj, qmul, qnorm2

__all__ = [
    "FormClass",
    "PositivityCertificate",
    "pair",
    "product",
    "gram_rank",
    "certify_positivity",
    "sampled_weak_test",
    "hyperhermitian_basis",
    "dual_representative",
    "quaternionic_eigh",
    "expected_dimension",
]

# Terms are batched in chunks of this many mixed discriminants.
_CHUNK = 4096


def expected_dimension(n: int, k: int) -> int:
    return math.comb(2 * n, 2 * k)


class FormClass:
    """Element of the degree-k part, stored as ``sum_t coef_t * prod(factors_t)``.

    ``factors`` of each term is an array of shape ``(k, n, n, 4)``.
    """

    def __init__(self, n: int, k: int, terms=()):
        if not 0 <= k <= n:
            raise DegreeOverflow(f"degree {k} outside [0, {n}]")
        self.n = int(n)
        self.k = int(k)
        coefs, facs = [], []
        for coef, factors in terms:
            f = np.asarray([np.asarray(getattr(m, "data", m), dtype=float) for m in factors]).reshape(-1, n, n, 4)
            if f.shape[0] != k:
                raise DegreeMismatch(f"term has {f.shape[0]} factors, expected {k}")
            coefs.append(float(coef))
            facs.append(f)
        self.coefs = np.array(coefs, dtype=float)
        self.factors = np.stack(facs) if facs else np.zeros((0, k, n, n, 4))

    # -- constructors -------------------------------------------------------

    @classmethod
    def unit(cls, n: int) -> "FormClass":
        return cls(n, 0, [(1.0, [])])

    @classmethod
    def monomial(cls, mats: Sequence, coef: float = 1.0, n: int | None = None) -> "FormClass":
        mats = [np.asarray(getattr(m, "data", m), dtype=float) for m in mats]
        if n is None:
            if not mats:
                raise ValidationError("n is required for the empty product")
            n = mats[0].shape[0]
        return cls(n, len(mats), [(coef, mats)])

    @classmethod
    def power(cls, a, k: int) -> "FormClass":
        a = np.asarray(getattr(a, "data", a), dtype=float)
        return cls.monomial([a] * k, n=a.shape[0])

    @classmethod
    def _raw(cls, n, k, coefs, factors) -> "FormClass":
        out = cls.__new__(cls)
        out.n, out.k = n, k
        out.coefs = np.asarray(coefs, dtype=float)
        out.coefs = out.coefs.reshape(-1)
        out.factors = np.asarray(factors, dtype=float).reshape(out.coefs.size, k, n, n, 4)
        return out

    # -- algebra ------------------------------------------------------------

    @property
    def terms(self):
        return list(zip(self.coefs.tolist(), self.factors))

    def __len__(self) -> int:
        return len(self.coefs)

    def _check_same(self, other: "FormClass"):
        if self.n != other.n:
            raise SizeMismatch(f"ambient dimensions differ: {self.n} vs {other.n}")
        if self.k != other.k:
            raise DegreeMismatch(f"degrees differ: {self.k} vs {other.k}")

    def __add__(self, other: "FormClass") -> "FormClass":
        self._check_same(other)
        return FormClass._raw(
            self.n, self.k, np.concatenate([self.coefs, other.coefs]), np.concatenate([self.factors, other.factors])
        )

    def __mul__(self, scalar: float) -> "FormClass":
        return FormClass._raw(self.n, self.k, self.coefs * float(scalar), self.factors)

    __rmul__ = __mul__

    def __neg__(self) -> "FormClass":
        return self * -1.0

    def __sub__(self, other: "FormClass") -> "FormClass":
        return self + (-other)

    def __matmul__(self, other: "FormClass") -> "FormClass":
        return product(self, other)

    def scalar(self) -> float:
        """The real number represented by a degree-0 or degree-n class."""
        if self.k == 0:
            return float(self.coefs.sum())
        if self.k == self.n:
            return pair(self, FormClass.unit(self.n))
        raise DegreeMismatch(f"degree {self.k} class is not a scalar (n={self.n})")

    def matrix(self) -> np.ndarray:
        """Matrix representative of a degree-1 class."""
        if self.k != 1:
            raise DegreeMismatch("only degree 1 classes are matrices")
        return np.einsum("t,tijc->ijc", self.coefs, self.factors[:, 0])

    def equals(self, other: "FormClass", seed: int = 0, rtol: float = 1e-9) -> bool:
        self._check_same(other)
        return (self - other).is_zero(seed=seed, scale=max(self.magnitude(), other.magnitude()), rtol=rtol)

    def magnitude(self) -> float:
        """Crude size: ``sum |coef| * prod ||A_i||``, used to scale tolerances."""
        if len(self) == 0:
            return 0.0
        norms = np.sqrt(np.sum(self.factors**2, axis=(-3, -2, -1)))
        return float(np.sum(np.abs(self.coefs) * np.prod(norms, axis=1))) if self.k else float(np.abs(self.coefs).sum())

    def is_zero(self, seed: int = 0, scale: float | None = None, rtol: float = 1e-9) -> bool:
        """Pairing test against ``3 * binomial(2n, 2k)`` powers ``B^(n-k)`` of random B."""
        vals = self.probe(seed)
        scale = self.magnitude() if scale is None else scale
        return bool(np.max(np.abs(vals), initial=0.0) <= rtol * max(scale, 1.0))

    def probe(self, seed: int = 0) -> np.ndarray:
        """Pairings with the seeded spanning family of the complementary degree."""
        rng = np.random.default_rng(seed)
        m = self.n - self.k
        count = 3 * expected_dimension(self.n, self.k)
        bs = np.stack([random_hyperhermitian(self.n, rng) for _ in range(count)])
        bs /= np.sqrt(np.sum(bs**2, axis=(-3, -2, -1), keepdims=True))
        family = np.repeat(bs[:, None], m, axis=1)
        return pair_many(self, family)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "terms": [
                {"coef": c, "factors": [{"n": self.n, "entries": f.tolist()} for f in fs]}
                for c, fs in zip(self.coefs.tolist(), self.factors)
            ],
        }

    @classmethod
    def from_json(cls, doc) -> "FormClass":
        if isinstance(doc, str):
            doc = json.loads(doc)
        try:
            n, k = int(doc["n"]), int(doc["k"])
            terms = [
                (float(t["coef"]), [HyperHermitian.from_json(f).data for f in t["factors"]]) for t in doc["terms"]
            ]
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"bad form document: {exc}") from exc
        return cls(n, k, terms)

    def __repr__(self) -> str:
        return f"FormClass(n={self.n}, k={self.k}, terms={len(self)})"


def product(omega: FormClass, eta: FormClass) -> FormClass:
    """Product of classes: concatenate factor lists, bilinear over terms."""
    if omega.n != eta.n:
        raise SizeMismatch(f"ambient dimensions differ: {omega.n} vs {eta.n}")
    k = omega.k + eta.k
    if k > omega.n:
        raise DegreeOverflow(f"degree {omega.k} + {eta.k} exceeds n={omega.n}")
    ta, tb = len(omega), len(eta)
    coefs = np.outer(omega.coefs, eta.coefs).reshape(-1)
    fa = np.repeat(omega.factors, tb, axis=0)
    fb = np.tile(eta.factors, (ta, 1, 1, 1, 1))
    return FormClass._raw(omega.n, k, coefs, np.concatenate([fa, fb], axis=1))


def _mixed_batched(mats: np.ndarray) -> np.ndarray:
    out = np.empty(mats.shape[0])
    for s in range(0, mats.shape[0], _CHUNK):
        out[s : s + _CHUNK] = mixed_discriminant(mats[s : s + _CHUNK])
    return out


def pair(omega: FormClass, eta: FormClass) -> float:
    """Bilinear extension of ``(A_1..A_k, B_1..B_{n-k}) -> det(A_1, .., B_{n-k})``."""
    if omega.n != eta.n:
        raise SizeMismatch(f"ambient dimensions differ: {omega.n} vs {eta.n}")
    if omega.k + eta.k != omega.n:
        raise DegreeMismatch(f"degrees {omega.k} and {eta.k} are not complementary for n={omega.n}")
    if omega.n == 0:
        return float(omega.coefs.sum() * eta.coefs.sum())
    both = product(omega, eta)
    if len(both) == 0:
        return 0.0
    return float(np.dot(both.coefs, _mixed_batched(both.factors)))


def pair_many(omega: FormClass, monomials: np.ndarray) -> np.ndarray:
    """Pair ``omega`` with each monomial in an array of shape ``(m, n-k, n, n, 4)``."""
    n, k = omega.n, omega.k
    monomials = np.asarray(monomials, dtype=float)
    if monomials.ndim != 5:
        monomials = monomials.reshape(-1, n - k, n, n, 4)
    if monomials.shape[1:] != (n - k, n, n, 4):
        raise DegreeMismatch(f"monomials must have shape (m, {n - k}, {n}, {n}, 4)")
    m, t = monomials.shape[0], len(omega)
    if t == 0 or m == 0:
        return np.zeros(m)
    if n == 0:
        return np.full(m, omega.coefs.sum())
    full = np.concatenate(
        [np.broadcast_to(omega.factors[None], (m, t, k, n, n, 4)), np.broadcast_to(monomials[:, None], (m, t, n - k, n, n, 4))],
        axis=2,
    ).reshape(m * t, n, n, n, 4)
    vals = _mixed_batched(full).reshape(m, t)
    return vals @ omega.coefs


# ---------------------------------------------------------------------------
# dimension check


def _sample_monomials(rng, count: int, degree: int, n: int) -> np.ndarray:
    mats = np.stack([random_hyperhermitian(n, rng) for _ in range(count * degree)]) if count * degree else np.zeros((0, n, n, 4))
    mats /= np.maximum(np.sqrt(np.sum(mats**2, axis=(-3, -2, -1), keepdims=True)), 1e-300)
    return mats.reshape(count, degree, n, n, 4)


def gram_matrix(n: int, k: int, rows: int, cols: int, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    left = _sample_monomials(rng, rows, k, n)
    right = _sample_monomials(rng, cols, n - k, n)
    full = np.concatenate(
        [np.broadcast_to(left[:, None], (rows, cols, k, n, n, 4)), np.broadcast_to(right[None], (rows, cols, n - k, n, n, 4))],
        axis=2,
    ).reshape(rows * cols, n, n, n, 4)
    if n == 0:
        return np.ones((rows, cols))
    return _mixed_batched(full).reshape(rows, cols)


def gram_rank(n: int, k: int, samples: int | None = None, seed=0, rtol: float = 1e-8) -> int:
    """Numerical rank of the sampled degree-k by degree-(n-k) pairing matrix.

    Rows are products of k random hyperhermitian matrices and columns
    products of n-k of them.  Singular values at or below ``rtol * s_max``
    are discarded.  The expected rank is ``binomial(2n, 2k)``.
    """
    if not 0 <= k <= n:
        raise DegreeOverflow(f"degree {k} outside [0, {n}]")
    need = expected_dimension(n, k)
    if samples is None:
        samples = 2 * need + 5
    if samples < need:
        raise InsufficientSamples(f"{samples} samples cannot reveal rank {need}")
    g = gram_matrix(n, k, samples, samples, seed)
    s = np.linalg.svd(g, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))


# ---------------------------------------------------------------------------
# positivity


@dataclass
class PositivityCertificate:
    """Outcome of a positivity decision.

    ``kind`` is ``"strong"``, ``"weak"`` or ``"indefinite"``.  For a strong
    certificate ``witness`` is a class built only from nonnegative rank-one
    data that reconstructs the input.  For an indefinite one it is a strongly
    positive class of complementary degree whose pairing ``value`` with the
    input is negative.  ``method`` says whether the decision is exact or sampled.
    """

    kind: str
    method: str
    witness: FormClass | None = None
    value: float | None = None
    spectrum: list = field(default_factory=list)
    seed: int | None = None
    trials: int | None = None

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "method": self.method,
            "value": self.value,
            "spectrum": [float(x) for x in self.spectrum],
            "seed": self.seed,
            "trials": self.trials,
            "witness": None if self.witness is None else self.witness.to_json(),
        }


def _qinner(u, v):
    return qmul(qconj(u), v).sum(axis=-2)


def quaternionic_eigh(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues ``lam`` and quaternion-orthonormal eigenvectors ``V`` (columns) with ``A v_i = v_i lam_i``.

    Each eigenvector of ``chi(A)`` with components ``(alpha_i, beta_i)`` in the
    i-th coordinate block maps to the quaternion ``alpha_i + (-conj(beta_i)) j``.
    Degenerate eigenspaces return redundant vectors, so a greedy quaternionic
    Gram-Schmidt keeps the n least redundant ones.
    """
    a = np.asarray(getattr(a, "data", a), dtype=float)
    n = a.shape[0]
    c = chi(a)
    ev, w = np.linalg.eigh(0.5 * (c + c.conj().T))
    alpha, beta = w[0::2, :].T, w[1::2, :].T  # (2n, n)
    b = -np.conj(beta)
    cand = np.stack([alpha.real, alpha.imag, b.real, b.imag], axis=-1)  # (2n, n, 4)
    chosen: list[np.ndarray] = []
    used: list[int] = []
    for _ in range(n):
        best, best_norm, best_idx = None, -1.0, -1
        for idx in range(2 * n):
            if idx in used:
                continue
            v = cand[idx]
            for u in chosen:
                v = v - qmul(u, _qinner(u, v)[None, :])
            nv = float(np.sqrt(qnorm2(v).sum()))
            if nv > best_norm + 1e-12:
                best, best_norm, best_idx = v, nv, idx
        chosen.append(best / best_norm)
        used.append(best_idx)
    vecs = np.stack(chosen, axis=1)  # (n, n, 4), column i is vector i
    lam = np.array([float(_qinner(vecs[:, i], qmul(a, vecs[None, :, i]).sum(axis=1))[0]) for i in range(n)])
    order = np.argsort(lam)
    return lam[order], vecs[:, order]


def hyperhermitian_basis(n: int) -> np.ndarray:
    """Basis of the real vector space of hyperhermitian n x n matrices, shape ``(2n^2 - n, n, n, 4)``."""
    basis = []
    for i in range(n):
        e = np.zeros((n, n, 4))
        e[i, i, 0] = 1.0
        basis.append(e)
    for i in range(n):
        for j in range(i + 1, n):
            for c in range(4):
                e = np.zeros((n, n, 4))
                e[i, j, c] = 1.0
                e[j, i] = qconj(e[i, j])
                basis.append(e)
    return np.stack(basis)


def real_trace_pairing(d, x) -> np.ndarray:
    """``Re tr(D X) = sum_ij Re(d_ij x_ji)``, batched over leading axes."""
    return np.einsum("...ija,...jia->...", np.asarray(d) * np.array([1, -1, -1, -1]), x) * 1.0


def dual_representative(omega: FormClass) -> np.ndarray:
    """The hyperhermitian D with ``Re tr(D X) = pair(omega, X)`` for every hyperhermitian X."""
    n = omega.n
    if omega.k != n - 1:
        raise DegreeMismatch(f"dual representative needs degree n-1, got {omega.k}")
    basis = hyperhermitian_basis(n)
    rhs = pair_many(omega, basis[:, None])
    g = real_trace_pairing(basis[:, None], basis[None, :])
    coef = np.linalg.solve(g, rhs)
    return np.einsum("b,bijc->ijc", coef, basis)


def _strong_tol(omega: FormClass) -> float:
    return 1e-9 * max(1.0, omega.magnitude())


def sampled_weak_test(omega: FormClass, trials: int = 400, seed=0) -> PositivityCertificate:
    """Pair ``omega`` with random strongly positive monomials ``G_1 ... G_{n-k}``.

    Each ``G_i = sum_{j <= n-k} v_j v_j*`` with Gaussian quaternion vectors.  A
    negative pairing beyond tolerance yields an indefinite certificate;
    otherwise the answer is "weak", a necessary condition only.
    """
    n, k, m = omega.n, omega.k, omega.n - omega.k
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((trials, m, m, n, 4))
    v /= np.sqrt(np.sum(v**2, axis=(-2, -1), keepdims=True))
    gs = outer(v).sum(axis=2) if m else np.zeros((trials, 0, n, n, 4))
    vals = pair_many(omega, gs)
    tol = _strong_tol(omega)
    worst = int(np.argmin(vals)) if trials else 0
    if trials and vals[worst] < -tol:
        witness = FormClass._raw(n, m, [1.0], gs[worst][None])
        return PositivityCertificate("indefinite", "sampled", witness, float(vals[worst]), seed=seed, trials=trials)
    lo = float(vals.min()) if trials else None
    return PositivityCertificate("weak", "sampled", None, lo, seed=seed, trials=trials)


def certify_positivity(omega: FormClass, trials: int = 400, seed=0) -> PositivityCertificate:
    """Decide positivity of ``omega``.

    Degrees 0, 1, n-1 and n are decided exactly, where the strong and weak
    cones coincide: through the sign of a scalar, the spectrum of the matrix
    representative, or the spectrum of the trace-dual representative.  Other
    degrees fall back to :func:`sampled_weak_test`.
    """
    n, k = omega.n, omega.k
    tol = _strong_tol(omega)
    if k == 0 or k == n:
        val = omega.scalar()
        if val >= -tol:
            wit = FormClass.power(identity(n), k) * max(val, 0.0) if n else FormClass.unit(0) * max(val, 0.0)
            return PositivityCertificate("strong", "exact", wit, val, [val])
        beta = FormClass.power(identity(n), n - k)
        return PositivityCertificate("indefinite", "exact", beta, val, [val])
    if k == 1:
        lam, vecs = quaternionic_eigh(omega.matrix())
        if lam[0] >= -tol:
            terms = [(max(l, 0.0), [outer(vecs[:, i])]) for i, l in enumerate(lam)]
            return PositivityCertificate("strong", "exact", FormClass(n, 1, terms), float(lam[0]), lam.tolist())
        p = identity(n) - outer(vecs[:, 0])
        beta = FormClass.power(p, n - 1) if n > 1 else FormClass.unit(n)
        return PositivityCertificate("indefinite", "exact", beta, float(pair(omega, beta)), lam.tolist())
    if k == n - 1:
        d = dual_representative(omega)
        lam, vecs = quaternionic_eigh(d)
        if lam[0] >= -tol:
            terms = [(n * max(l, 0.0), [identity(n) - outer(vecs[:, i])] * (n - 1)) for i, l in enumerate(lam)]
            return PositivityCertificate("strong", "exact", FormClass(n, n - 1, terms), float(lam[0]), lam.tolist())
        beta = FormClass.monomial([outer(vecs[:, 0])])
        return PositivityCertificate("indefinite", "exact", beta, float(pair(omega, beta)), lam.tolist())
    return sampled_weak_test(omega, trials, seed)
