import math

import numpy as np
import pytest

from hypervol import hyperhermitian as H
from hypervol import polytope as P
from hypervol import valuations as V
from hypervol.errors import NotOrthonormal, ValidationError

Q1 = ("quaternionic", 1)
Q2 = ("quaternionic", 2)


def orthonormal_rows(n, d, rng):
    return np.linalg.qr(rng.standard_normal((d, n)))[0].T


def test_segment_pseudovolume_is_length(rng):
    for _ in range(5):
        v = rng.standard_normal(4)
        rep = V.pseudovolume_q(P.segment(np.zeros(4), v, Q1))
        assert rep.value == pytest.approx(np.linalg.norm(v), rel=1e-12)
        assert rep.stderr == 0.0


def test_cube_pseudovolume():
    # each of the 32 edges has f = 1, length 1 and angle 1/8
    rep = V.pseudovolume_q(P.box([0] * 4, [1] * 4, Q1))
    assert rep.value == pytest.approx(4.0)


def test_real_square_in_h2():
    sq = P.Polytope([[0] * 8, [1] + [0] * 7, [0] * 4 + [1, 0, 0, 0], [1, 0, 0, 0, 1, 0, 0, 0]], Q2)
    assert V.pseudovolume_q(sq).value == pytest.approx(1.0)


def test_quaternionic_line_has_zero_distortion():
    basis = np.zeros((2, 8))
    basis[0, 0] = 1.0
    basis[1, 1] = 1.0  # q and q*i span part of one quaternionic line
    assert V.distortion_quaternionic(basis) == pytest.approx(0.0, abs=1e-12)


def test_distortion_routes_agree(rng):
    for n in (1, 2, 3):
        for _ in range(10):
            b = orthonormal_rows(n, 4 * n, rng)
            a = V.distortion_quaternionic(b)
            m = V.distortion_quaternionic_moore(b)
            assert a == pytest.approx(m, abs=1e-10)
            assert -1e-12 <= a <= 1 + 1e-12


def test_distortion_is_spsp_invariant(rng):
    b = orthonormal_rows(2, 8, rng)
    g = V.random_spsp(2, rng)
    assert np.allclose(g @ g.T, np.eye(8), atol=1e-12)
    assert V.distortion_quaternionic(b @ g.T) == pytest.approx(V.distortion_quaternionic(b), abs=1e-10)


def test_distortion_checks_orthonormality():
    with pytest.raises(NotOrthonormal):
        V.distortion_quaternionic(2 * np.eye(4)[:1])
    with pytest.raises(ValidationError):
        V.distortion_quaternionic(np.eye(3))


def test_complex_distortion():
    real_plane = np.array([[1, 0, 0, 0], [0, 0, 1, 0]], dtype=float)
    complex_line = np.array([[1, 0, 0, 0], [0, 1, 0, 0]], dtype=float)
    assert V.distortion_complex(real_plane) == pytest.approx(1.0)
    assert V.distortion_complex(complex_line) == pytest.approx(0.0, abs=1e-12)


def test_kazarnovskii_of_real_segment():
    seg = P.segment([0, 0], [3, 4], ("complex", 1))
    assert V.kazarnovskii(seg).value == pytest.approx(5.0)


def test_kazarnovskii_needs_complex_ambient():
    with pytest.raises(ValidationError):
        V.kazarnovskii(P.segment(np.zeros(4), np.ones(4), Q1))
    with pytest.raises(ValidationError):
        V.pseudovolume_q(P.segment([0, 0], [1, 1], ("complex", 1)))


def test_additivity_with_common_stream():
    cube = P.box([0] * 4, [1] * 4, Q1)
    k1, k2 = P.split_by_hyperplane(cube, [1, 0.3, -0.2, 0.1], 0.55)
    k1 = P.Polytope(k1.vertices, Q1)
    k2 = P.Polytope(k2.vertices, Q1)
    res = V.valuation_additivity_check(k1, k2, lambda p: V.pseudovolume_q(p, 20_000, 7), union=cube)
    assert res["gap"] <= 3 * res["stderr"] + 1e-12
    assert res["paired_stderr"] is not None and res["paired_stderr"] <= res["stderr"]


def test_additivity_requires_convex_union():
    a = P.box([0] * 4, [1] * 4, Q1)
    with pytest.raises(ValidationError):
        V.valuation_additivity_check(a, a.translate([1, 1, 0, 0]), V.pseudovolume_q)


def test_homogeneity_degree_n(rng):
    p = P.Polytope(rng.standard_normal((5, 4)), Q1)
    a = V.pseudovolume_q(p, 20_000, 3)
    b = V.pseudovolume_q(p.scale(1.7), 20_000, 3)
    assert b.value == pytest.approx(1.7 * a.value, rel=1e-12)


def test_support_measure_ball_mass_is_length():
    v = np.array([0.6, -0.3, 0.2, 0.5])
    meas = V.ma_support_measure(P.segment(np.zeros(4), v, Q1))
    per_unit = meas.mass_in_ball() / P.unit_ball_volume(3)
    assert per_unit == pytest.approx(np.linalg.norm(v), rel=1e-9)
    assert meas.to_json()["variant"] == "proof"


def test_zonotope_volume():
    assert V.zonotope_volume(np.eye(3)) == pytest.approx(1.0)
    assert V.zonotope_volume([[1, 0], [0, 1], [1, 1]]) == pytest.approx(3.0)
    assert V.zonotope_volume(np.eye(3)[:2]) == 0.0


def test_statement_density_depends_on_basis(rng):
    seg = P.segment(np.zeros(4), [1, 0, 0, 0], Q1)
    cone = seg.normal_cone(seg.faces(1)[0])
    base = V.statement_density(cone)
    rot = np.linalg.qr(rng.standard_normal((3, 3)))[0]
    twisted = P.NormalCone(cone.face, cone.span @ rot, cone.constraints @ rot)
    # cube on the coordinate basis of the orthogonal complement
    assert base == pytest.approx(9.0)
    # same span and cone with a rotated unit cube gives a different value
    assert abs(V.statement_density(twisted) - base) > 0.5
    with pytest.raises(ValidationError):
        V.ma_support_measure(seg, "other")


def test_spsp_matrix_preserves_hermitian_form(rng):
    u = H.random_symplectic(2, rng)
    g = V.spsp_matrix(u, np.array([0, 1, 0, 0.0]))
    assert np.allclose(g.T @ g, np.eye(8), atol=1e-12)
