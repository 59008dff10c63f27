import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from finsler_santalo import metric as mc
from finsler_santalo import Euclidean, FunkBall, InvalidInputError, Randers, Riemannian
from finsler_santalo.errors import IllConditionedError

from strategies import ball_points, randers_params, vectors

FUNK = FunkBall(2)


@given(ball_points(), vectors(), st.floats(0.01, 50))
def test_positive_homogeneity(x, y, lam):
    assert np.isclose(FUNK.F(x, lam * y), lam * FUNK.F(x, y), rtol=1e-12)


@given(ball_points(), vectors())
def test_tensor_euler_identity_and_definiteness(x, y):
    g = mc.fundamental_tensor(FUNK, x, y)
    assert np.isclose(y @ g @ y, FUNK.F(x, y) ** 2, rtol=1e-10)
    assert np.all(np.linalg.eigvalsh(g) > 0)


@given(ball_points(0.8), vectors(0.2, 3.0))
@settings(max_examples=30)
def test_closed_form_tensor_matches_finite_differences(x, y):
    g = mc.fundamental_tensor(FUNK, x, y)
    assert np.allclose(g, mc.fd_tensor(FUNK, x, y), rtol=1e-5, atol=1e-6)


@given(ball_points(), vectors(0.1, 3.0))
def test_funk_spray_is_half_F_y(x, y):
    assert np.allclose(mc.spray_coefficients(FUNK, x, y), 0.5 * FUNK.F(x, y) * y, rtol=1e-12)


@given(ball_points(0.8), vectors(0.2, 3.0))
@settings(max_examples=20)
def test_spray_formula_matches_closed_form(x, y):
    G = mc.spray_coefficients(FUNK, x, y)
    assert np.allclose(mc.spray_formula(FUNK, x, y), G, rtol=1e-5, atol=1e-6)


@given(ball_points(0.8), vectors(), st.floats(0.1, 10))
def test_spray_two_homogeneous(x, y, lam):
    assert np.allclose(mc.spray_coefficients(FUNK, x, lam * y), lam ** 2 * mc.spray_coefficients(FUNK, x, y))


@given(ball_points(), vectors())
def test_legendre_round_trip_and_dual_of_image(x, y):
    xi = mc.legendre(FUNK, x, y)
    assert np.isclose(mc.dual_norm(FUNK, x, xi), FUNK.F(x, y), rtol=1e-11)
    assert np.allclose(mc.legendre_inverse(FUNK, x, xi), y, rtol=1e-9, atol=1e-11)


@given(randers_params(), ball_points(), vectors())
@settings(max_examples=40)
def test_randers_closed_form_dual_matches_search(params, x, xi):
    m = Randers.constant(*params)
    assert np.isclose(mc.dual_norm(m, x, xi), mc.dual_norm_search(m, x, xi), rtol=1e-9)


@given(ball_points(), vectors())
def test_funk_dual_closed_form(x, xi):
    assert np.isclose(mc.dual_norm(FUNK, x, xi), np.linalg.norm(xi) - xi @ x, rtol=1e-11)


def test_funk_dual_oracle(oracle):
    assert mc.dual_norm(FUNK, [0.5, 0.0], [1.0, 0.0]) == pytest.approx(oracle["funk_dual_at_half_xi_x"], rel=1e-12)
    assert mc.dual_norm(FUNK, [0.3, -0.4], [0.7, 1.1]) == pytest.approx(oracle["funk_dual_at_point_xi"], rel=1e-10)


@given(ball_points(), vectors())
def test_reverse_metric(x, y):
    rev = mc.reverse_metric(FUNK)
    assert np.isclose(rev.F(x, y), FUNK.F(x, -y))
    assert np.isclose(rev.reverse().F(x, y), FUNK.F(x, y))


def test_funk_ricci_constant_flag_curvature():
    x, y = np.array([0.2, -0.1]), np.array([0.3, 0.7])
    assert mc.ricci(FUNK, x, y) == pytest.approx(-0.25 * FUNK.F(x, y) ** 2, rel=1e-4)


def test_sphere_chart_ricci_is_metric():
    m = Riemannian.round_sphere_chart()
    x, y = np.array([0.2, -0.1]), np.array([0.3, 0.7])
    assert mc.ricci(m, x, y) == pytest.approx(m.F(x, y) ** 2, rel=1e-4)


def test_euclidean_ricci_zero():
    assert abs(mc.ricci(Euclidean(2), np.zeros(2), np.array([1.0, 2.0]))) < 1e-8


def test_constants_known_values():
    assert tuple(mc.constants_at(FUNK, np.zeros(2))) == pytest.approx((1.0, 1.0))
    lam, Lam = mc.constants_at(FUNK, np.array([0.5, 0.0]))
    assert lam == pytest.approx(3.0, rel=1e-9)
    assert Lam == pytest.approx(9.0, rel=1e-9)
    assert tuple(mc.constants_at(Euclidean(2), np.array([3.0, 1.0]))) == pytest.approx((1.0, 1.0))


@given(randers_params())
@settings(max_examples=20)
def test_constant_randers_uniformity_closed_form(params):
    A, b = params
    s = np.sqrt(b @ np.linalg.solve(A, b))
    _, Lam = mc.constants_at(Randers.constant(A, b), np.zeros(2))
    assert Lam == pytest.approx(((1 + s) / (1 - s)) ** 2, rel=1e-6)


def test_riemannian_constants_are_one():
    m = Riemannian.constant([[2.0, 0.3], [0.3, 1.0]])
    assert tuple(mc.constants_at(m, np.zeros(2))) == pytest.approx((1.0, 1.0))


def test_funk_rejects_points_outside_ball():
    with pytest.raises(InvalidInputError):
        FUNK.F(np.array([1.2, 0.0]), np.array([1.0, 0.0]))


def test_randers_rejects_large_one_form():
    with pytest.raises(InvalidInputError):
        Randers.constant(np.eye(2), [1.1, 0.0]).F(np.zeros(2), np.array([1.0, 0.0]))


def test_zero_vector_tensor_is_rejected():
    with pytest.raises((InvalidInputError, IllConditionedError)):
        mc.fundamental_tensor(FUNK, np.zeros(2), np.zeros(2))


def test_three_dimensional_funk():
    m = FunkBall(3)
    x, y = np.array([0.1, 0.2, -0.3]), np.array([0.5, -0.2, 0.4])
    g = mc.fundamental_tensor(m, x, y)
    assert y @ g @ y == pytest.approx(m.F(x, y) ** 2, rel=1e-10)
    assert mc.dual_norm(m, x, y) == pytest.approx(np.linalg.norm(y) - y @ x, rel=1e-10)
