import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from finsler_santalo import Domain, Euclidean, FunkBall, Randers, Riemannian
from finsler_santalo import bounds as bd
from finsler_santalo.errors import InvalidInputError, UnsupportedDomainError

FUNK = FunkBall(2)


@pytest.mark.parametrize("r", [0.3, 0.5, 0.7])
def test_funk_reference_against_independent_distances(r, oracle):
    ref = bd.funk_reference(2, r)
    # d(p, -p) along a diameter: reverse distance to 0 plus forward distance from 0
    back = -np.log(1 + r)
    assert ref.diam == pytest.approx(oracle[f"funk_distance_origin_to_{r}"] - back, rel=1e-12)
    assert ref.mu_BH == pytest.approx(np.pi * r * r)
    assert ref.A_plus + ref.A_minus == pytest.approx(4 * np.pi * r)


def test_funk_reference_example_values():
    ref = bd.funk_reference(2, 0.5)
    assert ref.mu_BH == pytest.approx(np.pi / 4)
    assert (ref.A_plus, ref.A_minus) == pytest.approx((1.5 * np.pi, 0.5 * np.pi))
    assert ref.Lambda == pytest.approx(9.0)
    assert ref.diam == pytest.approx(np.log(3.0))
    with pytest.raises(InvalidInputError):
        bd.funk_reference(2, 1.0)


def test_measured_quantities_match_reference():
    q = bd.measure_all(FUNK, "bh", Domain.ball(0.3))
    ref = bd.funk_reference(2, 0.3)
    assert q.mu == pytest.approx(ref.mu_BH, rel=1e-10)
    assert q.A_plus == pytest.approx(ref.A_plus, rel=1e-10)
    assert q.Lambda == pytest.approx(ref.Lambda, rel=1e-8)
    assert q.diam == pytest.approx(ref.diam, rel=1e-6)
    assert q.omega == pytest.approx(1.0, abs=1e-10)


def test_euclidean_diameter_of_ellipse():
    assert bd.measure_diameter(Euclidean(2), Domain.ellipse(1.0, 0.5)) == pytest.approx(2.0, rel=1e-6)


def test_measure_omega_reports_spacing():
    om, spacing = bd.measure_omega(FUNK, "bh", Domain.ball(0.5))
    assert om == pytest.approx(1.0, abs=2e-3)
    assert spacing > 0


def test_diameter_needs_minimizing_domain():
    with pytest.raises(UnsupportedDomainError):
        bd.measure_diameter(FUNK, Domain.ball(0.5, convex_minimizing=False))


def test_thm12_bound_values():
    assert bd.thm12_bound(2, np.pi, 1.0, "bh") == pytest.approx(2.0)
    assert bd.thm12_bound(2, np.pi, 2.0, "bh") == pytest.approx(2.0 / 2 ** 9)
    assert bd.thm12_bound(2, np.pi, 2.0, "ht") == pytest.approx(2.0 / 2 ** 5)
    with pytest.raises(InvalidInputError):
        bd.thm12_bound(2, np.pi, 0.5, "bh")


@given(st.floats(1.0, 50.0), st.floats(1.0, 50.0), st.floats(0.1, 5.0))
def test_thm13_rhs_decreases_in_lambda(L1, L2, D):
    lo, hi = sorted((L1, L2))
    for which in (1, 2):
        assert bd.thm13_rhs(2, D, hi, 1.0, which) <= bd.thm13_rhs(2, D, lo, 1.0, which) * (1 + 1e-12)


def test_thm13_reports_and_mutation():
    reps = bd.thm13_check(FUNK, "bh", Domain.ball(0.5))
    assert [r.id for r in reps] == ["thm13.1+", "thm13.2+", "thm13.1-", "thm13.2-"]
    assert all(r.satisfied for r in reps)
    ref = bd.funk_reference(2, 0.9)
    q = bd.Measured(ref.mu_BH, ref.A_plus, ref.A_minus, ref.Lambda, ref.diam, ref.omega)
    mut = {r.id: r for r in bd.thm13_check(FUNK, "bh", Domain.ball(0.9), q, drop_lambda=True)}
    assert mut["thm13.1-"].lhs == pytest.approx(2 / 9)
    assert not mut["thm13.1-"].satisfied


def test_lemma51_euclidean_equality(oracle):
    th = np.linspace(0, 2 * np.pi, 9)[:-1]
    xb = np.stack([np.cos(th), np.sin(th)], -1)
    for sign in "+-":
        val, bound = bd.lemma51_values(Euclidean(2), "ht", Domain.ball(1.0), xb, sign)
        assert val == pytest.approx(np.full(8, oracle["lemma51_euclid"]), rel=1e-12)
        assert bound == pytest.approx(np.full(8, 2.0))


def test_lemma51_funk_values():
    xb = np.array([[0.5, 0.0]])
    v, _ = bd.lemma51_values(FUNK, "ht", Domain.ball(0.5), xb, "+")
    assert v[0] == pytest.approx(1.0, rel=1e-10)
    rep = bd.lemma51_check(FUNK, "bh", Domain.ball(0.5), xb, "-")
    assert rep.satisfied


def test_prop42_euclidean_equality_and_scaling():
    lhs, rhs = bd.prop42_values(Euclidean(2), [[0.0, 0.0]], [[1.0, 0.0]])
    assert lhs[0] == pytest.approx(1.0) and rhs[0] == pytest.approx(1.0, rel=1e-12)
    x, xi = np.array([[0.5, 0.0]]), np.array([[0.3, -1.2]])
    l1, r1 = bd.prop42_values(FUNK, x, xi)
    l2, r2 = bd.prop42_values(FUNK, x, 2.5 * xi)
    assert l1[0] > r1[0]
    assert (l2[0], r2[0]) == pytest.approx((6.25 * l1[0], 6.25 * r1[0]), rel=1e-12)


@given(st.floats(0.0, 0.9), st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))
@settings(max_examples=40)
def test_lemma21_pointwise(r, a, b):
    x = r * np.array([[np.cos(a), np.sin(a)]])
    w = np.array([[np.cos(b), np.sin(b)]])
    for kind in ("bh", "ht"):
        et, Lam = bd.lemma21_values(FUNK, kind, x, w / FUNK.F(x, w)[:, None])
        assert Lam[0] ** -2 * (1 - 1e-12) <= et[0] <= Lam[0] ** 2 * (1 + 1e-12)


def test_berger_kazdan_sphere_equality(oracle):
    m = Riemannian.round_sphere_chart()
    lhs, rhs = bd.berger_kazdan_values(m, [[1.0, 0.0]], [[0.0, 1.0]], [np.pi])
    assert lhs[0] == pytest.approx(oracle["berger_kazdan_sphere_lhs"], rel=1e-6)
    assert rhs[0] == pytest.approx(np.pi)


def test_berger_kazdan_euclidean_strict():
    lhs, rhs = bd.berger_kazdan_values(Euclidean(2), [[0.0, 0.0]], [[1.0, 0.0]], [1.0])
    # F(t) = t, so the left side is l^3 / 6 against l^3 / pi^2
    assert lhs[0] == pytest.approx(1 / 6, rel=1e-10)
    assert rhs[0] == pytest.approx(1 / np.pi ** 2)


def test_cor55_example(oracle):
    lam, S = bd.cor55_bounds(bd.ComparisonVolumeInputs(0.0, np.pi, 1.0, 2, 4 * np.pi ** 2))
    assert lam == pytest.approx(oracle["cor55_lambda_example"], rel=1e-12)
    assert S == pytest.approx(oracle["cor55_sobolev_example"], rel=1e-12)


def test_cor55_positive_curvature_gives_larger_bound():
    flat = bd.cor55_bounds(bd.ComparisonVolumeInputs(0.0, 2.0, 1.5, 2, 3.0))
    pos = bd.cor55_bounds(bd.ComparisonVolumeInputs(0.5, 2.0, 1.5, 2, 3.0))
    neg = bd.cor55_bounds(bd.ComparisonVolumeInputs(-0.5, 2.0, 1.5, 2, 3.0))
    assert pos[0] > flat[0] > neg[0] and pos[1] > flat[1] > neg[1]
    with pytest.raises(InvalidInputError):
        bd.ComparisonVolumeInputs(0.0, 2.0, 0.9, 2, 3.0)


def test_cor56_constant_and_euclidean_bounds(oracle):
    assert bd.cor56_constant(2, 1.0, "bh") == pytest.approx(oracle["cor56_euclid_constant"])
    for r in (0.1, 1.0, 3.0):
        vb, ab = bd.cor56_bounds(2, 1.0, r, "bh")
        assert vb <= np.pi * r * r and ab <= 2 * np.pi * r
    assert bd.cor56_bounds(2, 100.0, 1.0, "bh")[0] < bd.cor56_bounds(2, 2.0, 1.0, "bh")[0]


def test_forward_ball_check_funk():
    reps = bd.forward_ball_check(FUNK, "ht", np.zeros(2), 0.5)
    assert all(r.satisfied for r in reps)
    rho = 1 - np.exp(-0.5)
    assert reps[0].inputs["Lambda"] == pytest.approx(((1 + rho) / (1 - rho)) ** 2, rel=1e-8)
    assert "reconstructed" in reps[0].note


def test_torus_diameter_euclidean():
    assert bd.torus_diameter(Euclidean(2)) == pytest.approx(np.pi * np.sqrt(2), rel=1e-8)


def test_constants_candidates_straight_split_arithmetic():
    rows = bd.constants_candidates(Euclidean(2), "bh", [bd.Splitting(0.0, 0.0, np.pi)])
    r = rows[0]
    mu = 4 * np.pi ** 2
    assert r["A_plus"] == pytest.approx(4 * np.pi) and r["A_minus"] == pytest.approx(4 * np.pi)
    assert r["cheeger_candidate"] == pytest.approx(4 * np.pi / (mu / 2))
    assert r["passed"]


def test_constants_candidates_wavy_randers_split():
    m = Randers.constant(np.eye(2), [0.3, 0.0])
    r = bd.constants_candidates(m, "ht", [bd.Splitting(0.3, 0.3, 2.0)])[0]
    assert r["energy_limit_rel_err_plus"] < 1e-8 and r["eikonal_max_err_plus"] < 1e-10
    assert r["chain_plus"]["satisfied"] and r["chain_minus"]["satisfied"]
    with pytest.raises(InvalidInputError):
        bd.constants_candidates(m, "ht", [bd.Splitting(0.0, 0.0, 4.0)])


@pytest.mark.slow
def test_grid_band_energy_cross_check():
    m = Randers.constant(np.eye(2), [0.3, 0.0])
    split = bd.Splitting(0.0, 0.5, np.pi)
    A = bd.constants_candidates(m, "bh", [split])[0]["A_plus"]
    assert bd.grid_band_energy(m, "bh", split, 0.4) == pytest.approx(A, rel=3e-2)


def test_cor55_torus_check():
    rep = bd.cor55_torus_check(Randers.constant(np.eye(2), [0.3, 0.0]), "bh", resolution=32, iters=50)
    assert rep.satisfied and rep.lhs > 1.0


def test_report_orientation():
    rep = bd.BoundsReport.make("x", 1.0, 1.0, strict=True)
    assert not rep.satisfied and rep.margin == 0.0
    assert bd.BoundsReport.make("x", 1.0, 1.0).satisfied
