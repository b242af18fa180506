import json
import math

import numpy as np
import pytest
import sympy as sp
from scipy import integrate

from hypervol import hyperhermitian as H
from hypervol import psh as S
from hypervol.errors import NotDifferentiable, SupportEscapesGrid, ValidationError
from hypervol.forms import FormClass


def fd_hessian(model, x, h=1e-4):
    d = x.size
    out = np.zeros((d, d))
    for a in range(d):
        for b in range(d):
            ea, eb = np.eye(d)[a] * h, np.eye(d)[b] * h
            out[a, b] = (model(x + ea + eb) - model(x + ea - eb) - model(x - ea + eb) + model(x - ea - eb)) / (4 * h * h)
    return out


def random_poly(d, rng, terms=10, degree=3):
    exps = rng.integers(0, degree + 1, size=(terms, d))
    exps[exps.sum(axis=1) > degree] = 0
    return S.Polynomial(exps, rng.standard_normal(terms))


def test_polynomial_derivatives_match_finite_differences(rng):
    f = random_poly(4, rng)
    x = rng.standard_normal(4) * 0.5
    assert np.allclose(f.hessian(x[None])[0], fd_hessian(f, x), atol=1e-5)
    g = np.array([(f(x + 1e-6 * e) - f(x - 1e-6 * e)) / 2e-6 for e in np.eye(4)])
    assert np.allclose(f.gradient(x[None])[0], g, atol=1e-6)


def test_mollified_hessian_matches_finite_differences(rng):
    base = S.MaxAffine(rng.standard_normal((5, 4)), rng.standard_normal(5))
    m = S.Mollified(base, 0.3)
    x = rng.standard_normal(4) * 0.3
    assert np.allclose(m.hessian(x[None])[0], fd_hessian(m, x, 1e-3), atol=1e-4)
    assert np.all(m.value(x[None]) >= base.value(x[None]))
    assert np.all(m.value(x[None]) <= base.value(x[None]) + 0.3 * math.log(5) + 1e-12)


def test_squared_norm_constant():
    for n in (1, 2):
        f = S.norm_squared(n)
        x = np.arange(4 * n, dtype=float) / 7
        assert np.allclose(S.hessian(f, x), 8 * H.identity(n))
        assert S.ma_density(f, x) == pytest.approx(8.0**n)


def test_affine_has_zero_density(rng):
    f = S.Polynomial.quadratic(np.zeros((8, 8)), rng.standard_normal(8), 1.0)
    assert S.ma_density(f, rng.standard_normal(8)) == 0.0


def test_hessian_is_hyperhermitian_and_nonneg_for_convex(rng):
    g = rng.standard_normal((8, 8))
    f = S.Polynomial.quadratic(g @ g.T)
    h = S.hessian(f, rng.standard_normal(8))
    assert np.allclose(h, H.qstar(h), atol=1e-12)
    assert H.is_nonneg_definite(h)
    assert S.ma_density(f, rng.standard_normal(8)) >= -1e-9


def test_one_variable_hessian_is_laplacian(rng):
    f = random_poly(4, rng, terms=12, degree=4)
    x = rng.standard_normal((20, 4))
    h = S.hessian(f, x)
    lap = np.trace(f.hessian(x), axis1=-2, axis2=-1)
    assert np.allclose(h[:, 0, 0, 0], lap, atol=1e-10)
    assert np.allclose(h[:, 0, 0, 1:], 0, atol=1e-10)


def test_dirac_examples():
    t = S.Polynomial([[1, 0, 0, 0]], [1.0])
    assert np.allclose(S.dirac_dbar(t, np.zeros(4)), [1, 0, 0, 0])
    f = S.norm_squared(1)
    x = np.array([0.3, -0.2, 0.5, 0.1])
    comps = S.dirac_d_field(f)
    assert np.allclose(S.dirac_dbar(comps, x), [8, 0, 0, 0])


def test_dbar_d_is_laplacian(rng):
    f = random_poly(8, rng, terms=15, degree=4)
    x = rng.standard_normal((10, 8))
    for i in range(2):
        dd = S.dirac_dbar_field(S.dirac_d_field(f, i), i)
        lap = sum(f.derivative(4 * i + l).derivative(4 * i + l).value(x) for l in range(4))
        assert np.max(np.abs(dd[0].value(x) - lap)) < 1e-9
        assert all(np.max(np.abs(c.value(x))) < 1e-9 for c in dd[1:])


def test_chain_rule_with_singular_map(rng):
    f = random_poly(8, rng, terms=12, degree=4)
    a = H.qmatmul(H.random_qmatrix(2, rng, 1), H.random_qmatrix(1, rng, 2))
    q = rng.standard_normal(8)
    lhs = S.hessian(S.Pullback(f, a), q)
    rhs = H.qmatmul(H.qmatmul(H.qstar(a), S.hessian(f, H.realize(a) @ q)), a)
    assert np.allclose(lhs, rhs, atol=1e-10)


def test_max_affine_refuses_kinks():
    m = S.MaxAffine([[1, 0, 0, 0], [-1, 0, 0, 0]])
    assert m(np.array([0.5, 0, 0, 0])) == 0.5
    assert np.allclose(m.hessian(np.array([[0.5, 0, 0, 0]])), 0)
    with pytest.raises(NotDifferentiable):
        m.hessian(np.zeros((1, 4)))


def test_smooth_max_kernel():
    k = S.default_kernel()
    x = np.linspace(-3, 3, 601)
    chi = k.chi(x)
    assert np.all(chi[x <= -1] == 0) and np.allclose(chi[x >= 1], x[x >= 1])
    d1 = k.d1(x)
    assert np.all((d1 >= 0) & (d1 <= 1))
    assert np.all(k.d2(x) >= 0)
    assert np.all(np.diff(d1) >= -1e-12)
    # chi' is the derivative of chi, gamma' = chi'^2
    mid = np.linspace(-0.9, 0.9, 19)
    h = 1e-5
    assert np.allclose((k.chi(mid + h) - k.chi(mid - h)) / (2 * h), k.d1(mid), atol=1e-6)
    assert np.allclose((k.gamma(mid + h) - k.gamma(mid - h)) / (2 * h), k.d1(mid) ** 2, atol=1e-6)
    assert np.allclose((k.d1(mid + h) - k.d1(mid - h)) / (2 * h), k.d2(mid), atol=1e-3)


def test_smooth_max_converges_from_above(rng):
    u = S.Polynomial.quadratic(np.eye(4), rng.standard_normal(4))
    v = S.Polynomial.quadratic(2 * np.eye(4))
    x = rng.standard_normal((200, 4))
    exact = np.maximum(u.value(x), v.value(x))
    errs = []
    for j in (1, 4, 16):
        psi = S.SmoothMax(u, v, j).value(x)
        assert np.all(psi >= exact - 1e-12)
        errs.append(np.max(psi - exact))
    assert errs[0] > errs[1] > errs[2]
    mn = S.SmoothMin(u, v, 16)
    assert np.max(np.abs(mn.value(x) - np.minimum(u.value(x), v.value(x)))) <= errs[2] + 1e-12


def test_smooth_max_is_convex(rng):
    u = S.Polynomial.quadratic(np.eye(8), rng.standard_normal(8))
    v = S.Polynomial.quadratic(3 * np.eye(8))
    psi = S.SmoothMax(u, v, 5.0)
    hs = psi.hessian(rng.standard_normal((50, 8)))
    assert np.min(np.linalg.eigvalsh(hs)) >= -1e-9


def _oracle_reduce(expr, x, y, z):
    return sp.expand(sp.rem(sp.expand(expr), z**2 - z * (x + y) + x * y, z))


@pytest.mark.parametrize("p", [2, 3, 4, 5, 6])
def test_symbolic_identity_against_sympy(p):
    x, y, z = sp.symbols("x y z")
    m = sum(x**k * y ** (p - 1 - k) for k in range(p))
    t = sum(x**k * y ** (p - k) for k in range(1, p))
    assert _oracle_reduce(z**p - (z * m - t), x, y, z) == 0
    assert _oracle_reduce(x**p + y**p - z**p - (x + y - z) ** p, x, y, z) == 0
    assert S.blocki_symbolic_check(p)


def test_symbolic_negative_control():
    assert not S.blocki_symbolic_check(2, relation="wrong")
    with pytest.raises(ValidationError):
        S.blocki_symbolic_check(3, n=2)


def test_current_pair_constant_density():
    f = S.norm_squared(1)
    bump = S.Bump(np.zeros(4), 0.5)
    grid = S.GridSpec.around(bump, 0.05)
    dens = S.TestDensity.scalar(bump, 1)
    mass = sum(float(np.sum(bump(p))) for p, _ in grid.chunks()) * grid.weight()
    assert S.current_pair([f], dens, grid) == pytest.approx(8 * mass, rel=1e-12)


def test_current_pair_positive_for_convex(rng):
    g = rng.standard_normal((8, 8))
    f = S.Polynomial.quadratic(g @ g.T)
    bump = S.Bump(np.zeros(8), 0.5)
    grid = S.GridSpec(bump.support_box(), None, "sobol_ball", 4096, 1)
    v = rng.standard_normal((2, 4))
    dens = S.TestDensity(bump, FormClass.monomial([H.outer(v)]))
    assert S.current_pair([f], dens, grid) >= -1e-12


def test_support_must_fit_grid():
    bump = S.Bump(np.zeros(4), 0.5)
    grid = S.GridSpec(np.array([[-0.3, 0.3]] * 4), 0.1)
    with pytest.raises(SupportEscapesGrid):
        S.current_pair([S.norm_squared(1)], S.TestDensity.scalar(bump, 1), grid)


def test_grid_spec_json_and_rules():
    g = S.GridSpec.from_json({"box": [[0, 1]] * 2, "spacing": 0.25})
    assert g.size() == 16 and g.weight() == pytest.approx(1 / 16)
    assert S.GridSpec.from_json(json.loads(json.dumps(g.to_json()))).to_json() == g.to_json()
    aniso = S.GridSpec(np.array([[0, 1], [0, 1]]), [0.5, 0.25])
    assert aniso.size() == 8
    ball = S.GridSpec(np.array([[-1, 1]] * 3), rule="sobol_ball", points=1024, seed=2)
    pts = np.concatenate([p for p, _ in ball.chunks()])
    assert np.all(np.linalg.norm(pts, axis=1) <= 1 + 1e-12)
    assert ball.weight() * ball.size() == pytest.approx(4 * math.pi / 3)
    with pytest.raises(ValidationError):
        S.GridSpec(np.array([[0, 1]]), None)
    with pytest.raises(ValidationError):
        S.GridSpec(np.array([[0, 1], [0, 2]]), rule="sobol_ball", points=8)
    with pytest.raises(ValidationError):
        S.GridSpec.from_json({"spacing": 0.1})


def _box_oracle(eps, side, center, radius):
    """Separable reduction: for a centered box, h_eps(u) = sum_a eps log(2 cosh(side u_a / (2 eps)))."""

    def marginal(s):
        rest = radius**2 - s**2
        if rest <= 0:
            return 0.0
        f = lambda r: 4 * math.pi * r * r * math.exp(1 - 1 / (1 - (s * s + r * r) / radius**2))
        return integrate.quad(f, 0, math.sqrt(rest), limit=200)[0]

    total = 0.0
    for c in center:
        g = lambda x: side**2 / (4 * eps) / math.cosh(side * x / (2 * eps)) ** 2 * marginal(x - c)
        total += integrate.quad(g, c - radius, c + radius, limit=400, points=[0.0] if abs(c) < radius else None)[0]
    return total


def test_mollified_box_matches_one_dimensional_oracle():
    side, center, radius = 4.0, np.array([0.0, 0.5, 0.5, 0.5]), 0.3
    from hypervol.polytope import box

    base = S.MaxAffine.support(box([-side / 2] * 4, [side / 2] * 4).vertices)
    bump = S.Bump(center, radius)
    grid = S.GridSpec.around(bump, np.array([0.01, 0.03, 0.03, 0.03]))
    for eps in (0.2, 0.1):
        got = S.current_pair([S.Mollified(base, eps)], S.TestDensity.scalar(bump, 1), grid)
        assert got == pytest.approx(_box_oracle(eps, side, center, radius), rel=1e-4)


def test_blocki_numeric_gap_shrinks(rng):
    g1, g2 = rng.standard_normal((2, 8, 8))
    u = S.Polynomial.quadratic(g1 @ g1.T / 8 + 0.5 * np.eye(8), 0.5 * rng.standard_normal(8))
    v = S.Polynomial.quadratic(g2 @ g2.T / 8 + 0.5 * np.eye(8), 0.5 * rng.standard_normal(8))
    bump = S.Bump(np.zeros(8), 0.5)
    grid = S.GridSpec(bump.support_box(), None, "sobol_ball", 1 << 13, 0)
    rep = S.blocki_numeric_check(u, v, 2, S.TestDensity.scalar(bump, 2), [2, 8, 32], grid)
    gaps = [r["gap"] for r in rep]
    assert gaps[0] > gaps[1] > gaps[2]
    assert rep[-1]["gap"] < 0.05 * abs(rep[-1]["lhs"])
    assert set(rep[0]) >= {"j", "lhs", "rhs", "gap"}


def test_model_validation():
    with pytest.raises(ValidationError):
        S.Polynomial([[1, 2]], [1.0, 2.0])
    with pytest.raises(ValidationError):
        S.Mollified(S.MaxAffine([[1.0]]), 0.0)
