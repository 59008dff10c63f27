"""One test per acceptance criterion, each at its stated tolerance.

Run standalone with ``python3 tests/test_acceptance.py``; a PASS/FAIL line per
criterion is printed in the terminal summary.
"""
import sys
import time

import numpy as np
import pytest

from finsler_santalo import Domain, Euclidean, FunkBall, Riemannian
from finsler_santalo import bounds as bd
from finsler_santalo.geodesics import integrand_bump, integrand_one
from finsler_santalo.santalo import Quadrature, refinement_errors, verify
from finsler_santalo.spectral import disk_eigenvalue, hemisphere_eigenvalue, minimize


def test_01_funk_golden_values(acceptance):
    t0 = time.perf_counter()
    rows = bd.funk_report(0.5, "bh")
    runtime = time.perf_counter() - t0
    tol = {"mu": 1e-3, "A_plus": 1e-3, "A_minus": 1e-3, "Lambda": 1e-2, "diam": 1e-2, "omega": 2e-3}
    ok = all(r["error"] <= tol[r["quantity"]] for r in rows) and runtime <= 120
    worst = max(rows, key=lambda r: r["error"] / tol[r["quantity"]])
    acceptance(1, "Funk golden values", ok, f"worst {worst['quantity']} err={worst['error']:.2e}, {runtime:.1f}s")
    assert ok, rows


def test_02_santalo_identity(acceptance, oracle):
    t0 = time.perf_counter()
    cases = [(Euclidean(2), Domain.ball(1.0)), (FunkBall(2), Domain.ball(0.5))]
    reports = []
    for m, dom in cases:
        for f in (integrand_one(), integrand_bump()):
            reports.extend(verify(m, "bh", dom, f, tol=1e-3))
    euclid_one = reports[0].lhs
    ratios = []
    for m, dom in cases:
        errs = refinement_errors(m, "bh", dom, integrand_bump(), levels=2)
        ratios.append(errs[0] / max(errs[1], 1e-300))
    runtime = time.perf_counter() - t0
    worst = max(r.rel_err for r in reports)
    ok = (worst <= 1e-3
          and abs(euclid_one - oracle["euclid_lhs_one"]) / oracle["euclid_lhs_one"] <= 5e-3
          and min(ratios) >= 3 and runtime <= 300)
    acceptance(2, "Santalo formulas (i), (ii)", ok,
               f"max rel={worst:.2e}, doubling gain>={min(ratios):.0f}x, {runtime:.0f}s")
    assert ok


def _bundle_samples(m, radius, count, rng):
    r = radius * np.sqrt(rng.random(count))
    a = rng.uniform(0, 2 * np.pi, count)
    X = np.stack([r * np.cos(a), r * np.sin(a)], -1)
    b = rng.uniform(0, 2 * np.pi, count)
    W = np.stack([np.cos(b), np.sin(b)], -1)
    return X, W / m.F(X, W)[:, None]


def test_03_distortion_bounds(acceptance, rng):
    m = FunkBall(2)
    X, Y = _bundle_samples(m, 0.5, 10_000, rng)
    bad = 0
    for kind in ("bh", "ht"):
        et, Lam = bd.lemma21_values(m, kind, X, Y)
        bad += int(np.sum((et > Lam ** 2) | (et < Lam ** -2.0)))
    acceptance(3, "Distortion bounds", bad == 0, f"violations={bad} / 20000")
    assert bad == 0


def test_04_gradient_estimate(acceptance, rng):
    m = FunkBall(2)
    X, _ = _bundle_samples(m, 0.9, 1000, rng)
    xi = rng.standard_normal((1000, 2))
    lhs, rhs = bd.prop42_values(m, X, xi)
    held = bool(np.all(lhs >= rhs))
    el, er = bd.prop42_values(Euclidean(2), X, xi)
    eq = float(np.max(np.abs(el - er) / el))
    ok = held and eq <= 1e-4
    acceptance(4, "Gradient estimate", ok, f"min ratio={np.min(lhs / rhs):.3f}, Euclidean rel={eq:.1e}")
    assert ok


def test_05_boundary_integral_bound(acceptance):
    m, dom = FunkBall(2), Domain.ball(0.5)
    th = 2 * np.pi * np.arange(256) / 256
    u = np.stack([np.cos(th), np.sin(th)], -1)
    held = True
    for kind in ("bh", "ht"):
        for sign in "+-":
            val, bound = bd.lemma51_values(m, kind, dom, 0.5 * u, sign)
            held &= bool(np.all(val <= bound))
    ev, eb = bd.lemma51_values(Euclidean(2), "bh", Domain.ball(1.0), u, "+")
    eq = float(np.max(np.abs(ev - 2.0)) / 2.0)
    ok = held and eq <= 1e-4 and float(np.max(np.abs(eb - 2.0))) <= 1e-12
    acceptance(5, "Boundary integral bound", ok, f"Euclidean rel={eq:.1e}")
    assert ok


def test_06_eigenvalue_chain(acceptance):
    oracle = disk_eigenvalue(2, 1.0)
    lam = minimize(Euclidean(2), "bh", Domain.ball(1.0), 128).eigenvalue
    rel = (lam - oracle) / oracle
    m, dom = FunkBall(2), Domain.ball(0.5)
    Lam, _ = bd.measure_uniformity(m, dom)
    D = bd.measure_diameter(m, dom)
    strict = []
    for kind in ("bh", "ht"):
        val = minimize(m, kind, dom, 128).eigenvalue
        strict.append(val > bd.thm12_bound(2, D, Lam, kind))
    hemi = hemisphere_eigenvalue(2, np.pi)
    ok = 0 <= rel <= 0.03 and all(strict) and abs(hemi - 2) <= 1e-6
    acceptance(6, "Eigenvalue chain", ok, f"disk rel={rel:.2e}, hemisphere={hemi:.10f}")
    assert ok


def test_07_isoperimetric_bounds(acceptance):
    m = FunkBall(2)
    held = True
    for r in (0.3, 0.5, 0.7):
        held &= all(rep.satisfied for rep in bd.thm13_check(m, "bh", Domain.ball(r)))
    mutated = bd.thm13_check(m, "bh", Domain.ball(0.9), drop_lambda=True)
    mutation_fails = not all(rep.satisfied for rep in mutated)
    ok = held and mutation_fails
    acceptance(7, "Isoperimetric bounds", ok, f"mutation at r=0.9 fails: {mutation_fails}")
    assert ok


def test_08_berger_kazdan(acceptance, rng):
    m = FunkBall(2)
    X, Y = _bundle_samples(m, 0.3, 20, rng)
    L = rng.uniform(0.2, 1.0, 20)
    lhs, rhs = bd.berger_kazdan_values(m, X, Y, L)
    held = bool(np.all(lhs >= rhs))
    sl, sr = bd.berger_kazdan_values(Riemannian.round_sphere_chart(), [[1.0, 0.0]], [[0.0, 1.0]], [np.pi])
    rel = float(abs(sl[0] - sr[0]) / sr[0])
    ok = held and rel <= 0.02
    acceptance(8, "Berger-Kazdan density", ok, f"sphere rel={rel:.1e}, Funk min ratio={np.min(lhs / rhs):.3f}")
    assert ok


def test_09_f_eps_construction(acceptance):
    from finsler_santalo import Randers
    m = Randers.constant(np.eye(2), [0.3, 0.0])
    rows = bd.constants_candidates(m, "bh", [bd.Splitting(0.0, 0.0, np.pi), bd.Splitting(0.0, 0.5, np.pi)])
    worst = max(max(r["energy_limit_rel_err_plus"], r["energy_limit_rel_err_minus"]) for r in rows)
    ok = worst <= 1e-2
    acceptance(9, "f_eps energy limit", ok, f"max rel={worst:.1e}")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-p", "no:cacheprovider"]))
