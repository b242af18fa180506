import json
import math

import numpy as np
import pytest

from hypervol import forms as F
from hypervol import hyperhermitian as H
from hypervol.errors import DegreeMismatch, DegreeOverflow, InsufficientSamples


def test_pairing_normalization(rng):
    for n in (1, 2, 3):
        for k in range(n + 1):
            assert F.pair(F.FormClass.power(H.identity(n), k), F.FormClass.power(H.identity(n), n - k)) == pytest.approx(1.0)
    a = H.random_hyperhermitian(3, rng)
    assert F.pair(F.FormClass.power(a, 1), F.FormClass.power(a, 2)) == pytest.approx(H.moore_det(a), rel=1e-9)
    val = F.pair(F.FormClass.monomial([H.diag([1.0, 0.0])]), F.FormClass.monomial([H.diag([0.0, 1.0])]))
    assert val == pytest.approx(0.5)


def test_pair_degree_mismatch():
    with pytest.raises(DegreeMismatch):
        F.pair(F.FormClass.power(H.identity(2), 1), F.FormClass.power(H.identity(2), 2))


def test_product_rules(rng):
    a, b, c = (H.random_hyperhermitian(3, rng) for _ in range(3))
    fa, fb, fc = (F.FormClass.monomial([m]) for m in (a, b, c))
    assert F.product(fa, fb).equals(F.product(fb, fa))
    assert F.product(F.product(fa, fb), fc).equals(F.product(fa, F.product(fb, fc)))
    assert F.product(fa, F.FormClass.unit(3)).equals(fa)
    assert F.pair(F.product(fa, fa), fa) == pytest.approx(H.moore_det(a), rel=1e-9)
    with pytest.raises(DegreeOverflow):
        F.product(F.FormClass.power(a, 2), F.FormClass.power(a, 2))


def test_linear_structure(rng):
    a, b = H.random_hyperhermitian(2, rng), H.random_hyperhermitian(2, rng)
    lhs = F.FormClass.monomial([a + b])
    rhs = F.FormClass.monomial([a]) + F.FormClass.monomial([b])
    assert lhs.equals(rhs)
    assert (lhs - rhs).is_zero()
    assert not F.FormClass.monomial([a]).is_zero()
    assert (2.0 * lhs).equals(lhs + lhs)


def test_rank_one_square_vanishes(rng):
    for n in (2, 3):
        v = rng.standard_normal((n, 4))
        sq = F.FormClass.power(H.outer(v), 2)
        assert sq.is_zero(scale=float(np.sum(v**2)) ** 2)
    # a rank two square does not vanish
    v, w = rng.standard_normal((2, 2, 4))
    assert not F.FormClass.power(H.outer(v) + H.outer(w), 2).is_zero()


@pytest.mark.parametrize("n,k", [(1, 0), (1, 1), (2, 0), (2, 1), (2, 2), (3, 1), (3, 2)])
def test_gram_rank(n, k):
    assert F.gram_rank(n, k) == math.comb(2 * n, 2 * k)


def test_gram_rank_needs_samples():
    with pytest.raises(InsufficientSamples):
        F.gram_rank(3, 1, samples=10)


def test_degree_one_has_matrix_dimension():
    # degree one classes are matrices, so the rank equals dim of the hyperhermitian space
    assert F.expected_dimension(2, 1) == 2 * 2**2 - 2
    assert F.hyperhermitian_basis(2).shape[0] == 6


def test_quaternionic_eigh(rng):
    for n in (1, 2, 3, 4):
        a = H.random_hyperhermitian(n, rng)
        lam, vecs = F.quaternionic_eigh(a)
        for i in range(n):
            av = H.qmatmul(a, vecs[:, i : i + 1])[:, 0]
            assert np.allclose(av, vecs[:, i] * lam[i], atol=1e-9)
        gram = H.qmatmul(H.qstar(vecs), vecs)
        assert np.allclose(gram, H.identity(n), atol=1e-9)


def test_quaternionic_eigh_degenerate(rng):
    u = H.random_symplectic(3, rng)
    a = H.qmatmul(H.qmatmul(u, H.diag([1.0, 1.0, 2.0])), H.qstar(u))
    lam, vecs = F.quaternionic_eigh(a)
    assert np.allclose(lam, [1, 1, 2])
    assert np.allclose(H.qmatmul(H.qstar(vecs), vecs), H.identity(3), atol=1e-9)


def test_dual_representative(rng):
    n = 3
    om = F.product(F.FormClass.monomial([H.random_nonneg(n, rng)]), F.FormClass.monomial([H.random_hyperhermitian(n, rng)]))
    d = F.dual_representative(om)
    for _ in range(5):
        x = H.random_hyperhermitian(n, rng)
        assert F.real_trace_pairing(d, x) == pytest.approx(F.pair(om, F.FormClass.monomial([x])), rel=1e-9, abs=1e-12)


def test_projection_pullback_dual_is_rank_one(rng):
    # (Id - vv*)^(n-1) for a unit v has dual representative proportional to vv*/n
    n = 3
    v = rng.standard_normal((n, 4))
    v /= np.linalg.norm(v)
    om = F.FormClass.power(H.identity(n) - H.outer(v), n - 1)
    d = F.dual_representative(om)
    assert np.allclose(d, H.outer(v) / n, atol=1e-10)
    cert = F.certify_positivity(om)
    assert cert.kind == "strong" and cert.method == "exact"


def test_certificates(rng):
    for n in (1, 2, 3):
        for k in range(n + 1):
            assert F.certify_positivity(F.FormClass.power(H.identity(n), k)).kind == "strong"
    bad = F.FormClass.monomial([H.diag([1.0, -1.0, 0.0])])
    cert = F.certify_positivity(bad)
    assert cert.kind == "indefinite"
    assert F.pair(bad, cert.witness) < 0


def test_strong_certificate_reconstructs(rng):
    n = 3
    a = H.random_nonneg(n, rng)
    cert = F.certify_positivity(F.FormClass.monomial([a]))
    assert cert.kind == "strong"
    assert cert.witness.equals(F.FormClass.monomial([a]))
    om = F.product(F.FormClass.monomial([H.random_nonneg(n, rng)]), F.FormClass.monomial([H.random_nonneg(n, rng)]))
    cert = F.certify_positivity(om)
    assert cert.kind == "strong"
    assert cert.witness.equals(om, rtol=1e-8)


def test_indefinite_degree_n_minus_one(rng):
    n = 3
    u = H.random_symplectic(n, rng)
    d = H.qmatmul(H.qmatmul(u, H.diag([-0.5, 1.0, 1.0])), H.qstar(u))
    lam, vecs = F.quaternionic_eigh(d)
    om = F.FormClass(n, n - 1, [(n * l, [H.identity(n) - H.outer(vecs[:, i])] * (n - 1)) for i, l in enumerate(lam)])
    assert np.allclose(F.dual_representative(om), d, atol=1e-9)
    cert = F.certify_positivity(om)
    assert cert.kind == "indefinite" and cert.value < 0
    assert F.sampled_weak_test(om).kind == "indefinite"


def test_scalar_degrees():
    neg = F.FormClass.unit(2) * -1.0
    assert F.certify_positivity(neg).kind == "indefinite"
    top = F.FormClass.power(H.identity(2), 2) * 3.0
    assert top.scalar() == pytest.approx(3.0)


def test_middle_degree_is_sampled(rng):
    n = 4
    om = F.FormClass.power(H.random_nonneg(n, rng), 2)
    cert = F.certify_positivity(om, trials=50, seed=3)
    assert cert.method == "sampled" and cert.kind == "weak" and cert.trials == 50 and cert.seed == 3


def test_json_round_trip(rng):
    om = F.product(F.FormClass.monomial([H.random_hyperhermitian(2, rng)]), F.FormClass.monomial([H.identity(2)]))
    back = F.FormClass.from_json(json.dumps(om.to_json()))
    assert back.equals(om)
    json.dumps(F.certify_positivity(F.FormClass.monomial([H.identity(2)])).to_json())
