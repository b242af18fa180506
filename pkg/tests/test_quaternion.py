import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hypervol.quaternion import MULT, Quaternion, complexify, qconj, qmul, qnorm2, realize4, right4

E1, EI, EJ, EK = np.eye(4)
quats = arrays(np.float64, 4, elements=st.floats(-10, 10, allow_nan=False))


def test_defining_relations():
    assert np.allclose(qmul(EI, EJ), EK)
    assert np.allclose(qmul(EJ, EK), EI)
    assert np.allclose(qmul(EK, EI), EJ)
    for e in (EI, EJ, EK):
        assert np.allclose(qmul(e, e), -E1)


def test_norm_by_hand():
    q = np.array([1.0, 2.0, 3.0, 4.0])
    assert np.allclose(qmul(q, qconj(q)), [30.0, 0, 0, 0])
    assert qnorm2(q) == 30.0
    assert np.allclose(qmul(E1, q), q)


def test_structure_constants_match_product():
    assert np.allclose(np.einsum("a,b,abc->c", EI + 2 * EJ, EK, MULT), qmul(EI + 2 * EJ, EK))


@settings(max_examples=200, deadline=None)
@given(quats, quats, quats)
def test_algebra_laws(p, q, r):
    assert np.allclose(qmul(qmul(p, q), r), qmul(p, qmul(q, r)), atol=1e-9 * (1 + np.abs(p).max() * np.abs(q).max() * np.abs(r).max()))
    assert np.allclose(qconj(qmul(p, q)), qmul(qconj(q), qconj(p)), atol=1e-9 * (1 + np.abs(p).max() * np.abs(q).max()))
    assert np.array_equal(qconj(qconj(p)), p)


def test_realizations_examples():
    assert np.allclose(realize4(E1), np.eye(4))
    assert np.isclose(np.linalg.det(realize4(E1 + EI)), 4.0)
    assert np.allclose(realize4(EI) @ realize4(EI), realize4(-E1))
    assert np.allclose(complexify(E1), np.eye(2))
    assert np.allclose(complexify(EJ), [[0, 1], [-1, 0]])
    assert np.isclose(np.linalg.det(complexify(np.array([1.0, 2, 3, 4]))), 30.0)


def test_realize4_is_left_multiplication(rng):
    q, v = rng.standard_normal(4), rng.standard_normal(4)
    assert np.allclose(realize4(q) @ v, qmul(q, v))
    assert np.allclose(right4(q) @ v, qmul(v, q))


def test_thousand_random_pairs(rng):
    p, q = rng.standard_normal((1000, 4)), rng.standard_normal((1000, 4))
    pq = qmul(p, q)
    r = realize4(pq)
    assert np.max(np.abs(r - realize4(p) @ realize4(q))) <= 1e-12 * np.max(np.abs(r))
    c = complexify(pq)
    assert np.max(np.abs(c - complexify(p) @ complexify(q))) <= 1e-12 * np.max(np.abs(c))
    n2 = qnorm2(p)
    assert np.allclose(np.linalg.det(realize4(p)), n2**2, rtol=1e-12)
    assert np.allclose(np.linalg.det(complexify(p)).real, n2, rtol=1e-12)
    assert np.allclose(realize4(qconj(p)), np.swapaxes(realize4(p), -1, -2))
    assert np.allclose(complexify(qconj(p)), np.conj(np.swapaxes(complexify(p), -1, -2)))


def test_unit_quaternions_are_unitary(rng):
    q = rng.standard_normal(4)
    q /= np.sqrt(qnorm2(q))
    c = complexify(q)
    assert np.allclose(c @ c.conj().T, np.eye(2))


def test_scalar_class():
    q = Quaternion(1, 2, 3, 4)
    assert q * q.conj() == Quaternion(30.0)
    assert q.norm2() == 30.0
    assert Quaternion(0, 1) * Quaternion(0, 0, 1) == Quaternion(0, 0, 0, 1)
    assert q.to_json() == [1, 2, 3, 4]
    assert Quaternion.from_array(q.to_array()) == q
    assert 2 * q == q + q
