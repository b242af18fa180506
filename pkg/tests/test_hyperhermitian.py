import itertools
import json
import math

import numpy as np
import pytest

from hypervol import hyperhermitian as H
from hypervol.errors import PairingBroken, PivotFailure, SizeMismatch, ValidationError


def two_by_two(a, b, q):
    m = np.zeros((2, 2, 4))
    m[0, 0, 0], m[1, 1, 0] = a, b
    m[0, 1] = q
    m[1, 0] = q * np.array([1, -1, -1, -1])
    return m


def test_closed_forms():
    m = two_by_two(2.0, 3.0, np.array([0, 1.0, 0, 0]))
    for f in (H.moore_det, H.moore_det_spectral, H.moore_det_schur):
        assert abs(float(f(m)) - 5.0) < 1e-10
    assert np.isclose(np.linalg.det(H.realize(m)), 625.0)
    lam = [1.5, -2.0, 0.5, 3.0]
    assert np.isclose(H.moore_det_spectral(H.diag(lam)), np.prod(lam))
    assert H.moore_det(H.identity(3)) == pytest.approx(1.0)


def test_complex_hermitian_case():
    c = np.array([[2, 1 + 0.5j], [1 - 0.5j, 4]])
    a = np.zeros((2, 2, 4))
    a[..., 0], a[..., 1] = c.real, c.imag
    assert H.moore_det_schur(a) == pytest.approx(6.75, rel=1e-12)
    assert H.moore_det_spectral(a) == pytest.approx(6.75, rel=1e-12)


def test_n3_closed_form_matches_spectral(rng):
    for _ in range(50):
        a = H.random_hyperhermitian(3, rng)
        assert H.moore_det(a) == pytest.approx(H.moore_det_spectral(a), rel=1e-10, abs=1e-10)


def test_batched_dispatch(rng):
    mats = np.stack([H.random_hyperhermitian(4, rng) for _ in range(5)])
    out = H.moore_det(mats)
    assert np.allclose(out, [H.moore_det_spectral(m) for m in mats])


def test_rank_one_is_singular(rng):
    for n in (2, 3, 4):
        v = rng.standard_normal((n, 4))
        assert abs(H.moore_det(H.outer(v))) < 1e-10
        assert H.is_nonneg_definite(H.outer(v))


def test_sign_is_recovered(rng):
    a = H.diag([1.0, -1.0, 2.0])
    u = H.random_symplectic(3, rng)
    b = H.qmatmul(H.qmatmul(u, a), H.qstar(u))
    assert H.moore_det_spectral(b) == pytest.approx(-2.0)
    assert not H.is_nonneg_definite(H.diag([1.0, -1.0]))


def test_symplectic_is_unitary(rng):
    u = H.random_symplectic(3, rng)
    assert np.allclose(H.qmatmul(H.qstar(u), u), H.identity(3), atol=1e-12)


def test_realization_multiplicative(rng):
    a, b = H.random_qmatrix(3, rng), H.random_qmatrix(3, rng)
    assert np.allclose(H.realize(H.qmatmul(a, b)), H.realize(a) @ H.realize(b))
    assert np.allclose(H.chi(H.qmatmul(a, b)), H.chi(a) @ H.chi(b))
    assert np.allclose(H.realize(H.identity(2)), np.eye(8))


def test_realization_identity_examples():
    assert np.allclose(H.realization_identity_check(H.identity(2)), (1, 1, 1))
    q = np.zeros((1, 1, 4))
    q[0, 0] = [1, 1, 0, 0]
    assert np.allclose(H.realization_identity_check(q), (4, 4, 4))


def test_nonneg_determinant(rng):
    for n in (1, 2, 3, 4):
        a = H.random_nonneg(n, rng)
        assert H.moore_det(a) >= -1e-10


def test_schur_retries_on_zero_diagonal():
    # zero diagonal forces the random congruence path
    a = np.zeros((2, 2, 4))
    a[0, 1, 2] = 1.0
    a[1, 0, 2] = -1.0
    assert H.moore_det_schur(a, np.random.default_rng(0)) == pytest.approx(-1.0)


def test_schur_zero_matrix_and_retry_limit():
    assert H.moore_det_schur(np.zeros((2, 2, 4))) == 0.0
    a = np.zeros((2, 2, 4))
    a[0, 1, 2], a[1, 0, 2] = 1.0, -1.0
    with pytest.raises(PivotFailure):
        H.moore_det_schur(a, np.random.default_rng(0), retries=0)


def test_pairing_check_rejects_non_hyperhermitian(rng):
    a = H.random_qmatrix(3, rng)
    with pytest.raises(PairingBroken):
        H.moore_det_spectral(a)


def test_det_plus_diagonal(rng):
    assert H.det_plus_diagonal(np.zeros((3, 3, 4)), [1, 2, 3]) == pytest.approx(6.0)
    a = H.random_hyperhermitian(3, rng)
    assert H.det_plus_diagonal(a, [1, 2, 3]) == pytest.approx(H.moore_det_spectral(a + H.diag([1, 2, 3])), rel=1e-9)
    assert H.det_plus_diagonal(a, [0, 0, 0]) == pytest.approx(H.moore_det(a))


def test_mixed_discriminant_basics(rng):
    a = H.random_hyperhermitian(3, rng)
    assert H.mixed_discriminant([a] * 3) == pytest.approx(H.moore_det(a), rel=1e-9)
    m = rng.standard_normal((3, 3))
    perm = sum(np.prod([m[i, s[i]] for i in range(3)]) for s in itertools.permutations(range(3)))
    assert H.mixed_discriminant([H.diag(row) for row in m]) == pytest.approx(perm / math.factorial(3))
    n = 2
    d1, d2 = H.diag([1.0, 0.0]), H.diag([0.0, 1.0])
    assert H.mixed_discriminant([d1, d2]) == pytest.approx(0.5)


def test_mixed_discriminant_size_errors(rng):
    with pytest.raises(SizeMismatch):
        H.mixed_discriminant([H.identity(2)])
    with pytest.raises(SizeMismatch):
        H.mixed_discriminant([H.identity(2), H.identity(3)])


def test_mixed_discriminant_batched(rng):
    mats = np.stack([[H.random_hyperhermitian(2, rng) for _ in range(2)] for _ in range(4)])
    out = H.mixed_discriminant(mats)
    assert np.allclose(out, [H.mixed_discriminant(list(m)) for m in mats])


def test_json_round_trip(rng):
    a = H.HyperHermitian(H.random_hyperhermitian(2, rng))
    b = H.HyperHermitian.from_json(json.dumps(a.to_json()))
    assert np.allclose(a.data, b.data)
    assert b.moore_det() == pytest.approx(a.moore_det())


def test_validation_on_load(rng):
    with pytest.raises(ValidationError):
        H.HyperHermitian(H.random_qmatrix(2, rng))
    with pytest.raises(ValidationError):
        H.HyperHermitian.from_json({"n": 3, "entries": np.zeros((2, 2, 4)).tolist()})
    with pytest.raises(ValidationError):
        H.HyperHermitian.from_json({"entries": []})
