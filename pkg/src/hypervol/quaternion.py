"""Quaternion scalars and their real and complex matrix realizations.

Quaternions are stored as real arrays whose last axis holds the coefficients
``(t, x, y, z)`` of ``1, i, j, k``.  All array functions broadcast over the
leading axes, so a quaternionic n x n matrix is simply an array of shape
``(n, n, 4)``.

Convention: quaternionic space is a *right* module.  Matrices act on column
vectors from the left and scalars multiply coordinates from the right, so the
real realization of a scalar ``q`` is the matrix of left multiplication
``v -> q v`` in the basis ``(1, i, j, k)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Quaternion",
    "MULT",
    "BASIS",
    "qmul",
    "qconj",
    "qnorm2",
    "realize4",
    "right4",
    "complexify",
]

#: Basis quaternions 1, i, j, k as rows.
BASIS = np.eye(4)


def qmul(p, q):
    """Hamilton product of quaternion arrays, broadcasting over leading axes."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    p0, p1, p2, p3 = np.moveaxis(p, -1, 0)
    q0, q1, q2, q3 = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            p0 * q0 - p1 * q1 - p2 * q2 - p3 * q3,
            p0 * q1 + p1 * q0 + p2 * q3 - p3 * q2,
            p0 * q2 - p1 * q3 + p2 * q0 + p3 * q1,
            p0 * q3 + p1 * q2 - p2 * q1 + p3 * q0,
        ],
        axis=-1,
    )


def qconj(q):
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def qnorm2(q):
    q = np.asarray(q, dtype=float)
    return np.sum(q * q, axis=-1)


#: Structure constants: ``e_a * e_b = sum_c MULT[a, b, c] e_c``.
MULT = qmul(BASIS[:, None, :], BASIS[None, :, :])

#: ``CONJ_MULT[a, b] = e_a * conj(e_b)``, used by the quaternionic Hessian.
CONJ_MULT = qmul(BASIS[:, None, :], qconj(BASIS)[None, :, :])


def realize4(q):
    """4x4 real matrix of ``v -> q v`` on R^4 = H (basis 1, i, j, k).

    Broadcasts: an input of shape ``(..., 4)`` gives ``(..., 4, 4)``.
    """
    q = np.asarray(q, dtype=float)
    # column b is q * e_b
    return np.einsum("...a,abc->...cb", q, MULT)


def right4(q):
    """4x4 real matrix of right multiplication ``v -> v q``."""
    q = np.asarray(q, dtype=float)
    # column a is e_a * q
    return np.einsum("...b,abc->...ca", q, MULT)


def complexify(q):
    """2x2 complex matrix of ``q = a + b j`` as ``[[a, b], [-conj(b), conj(a)]]``."""
    q = np.asarray(q, dtype=float)
    a = q[..., 0] + 1j * q[..., 1]
    b = q[..., 2] + 1j * q[..., 3]
    out = np.empty(q.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = a
    out[..., 0, 1] = b
    out[..., 1, 0] = -np.conj(b)
    out[..., 1, 1] = np.conj(a)
    return out


@dataclass(frozen=True)
class Quaternion:
    """A single quaternion ``t + x i + y j + z k``."""

    t: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def from_array(cls, a) -> "Quaternion":
        t, x, y, z = (float(c) for c in np.asarray(a, dtype=float).reshape(4))
        return cls(t, x, y, z)

    def to_array(self) -> np.ndarray:
        return np.array([self.t, self.x, self.y, self.z])

    def to_json(self) -> list:
        return [self.t, self.x, self.y, self.z]

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion.from_array(qmul(self.to_array(), other.to_array()))
        return Quaternion.from_array(self.to_array() * float(other))

    def __rmul__(self, other):
        return Quaternion.from_array(self.to_array() * float(other))

    def __add__(self, other):
        if not isinstance(other, Quaternion):
            other = Quaternion(float(other))
        return Quaternion.from_array(self.to_array() + other.to_array())

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, Quaternion):
            other = Quaternion(float(other))
        return Quaternion.from_array(self.to_array() - other.to_array())

    def __neg__(self):
        return Quaternion(-self.t, -self.x, -self.y, -self.z)

    def conj(self) -> "Quaternion":
        return Quaternion(self.t, -self.x, -self.y, -self.z)

    def norm2(self) -> float:
        return self.t**2 + self.x**2 + self.y**2 + self.z**2

    def norm(self) -> float:
        return float(np.sqrt(self.norm2()))

    def realize4(self) -> np.ndarray:
        return realize4(self.to_array())

    def complexify(self) -> np.ndarray:
        return complexify(self.to_array())

    def isclose(self, other: "Quaternion", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.to_array(), other.to_array(), atol=atol, rtol=0))
