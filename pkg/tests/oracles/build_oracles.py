"""Independent reference values, frozen into frozen.json.

Nothing here imports the package: the Funk norm is re-typed from its formula,
duals come from a scalar optimizer, tensors from finite differences and
integrals from scipy's adaptive quadrature.  Re-run after changing a value:

    python3 tests/oracles/build_oracles.py
"""
import json
import math
import os

import numpy as np
from scipy import integrate, optimize, special
from scipy.linalg import eigh_tridiagonal


def funk(x, y):
    x, y = np.asarray(x, float), np.asarray(y, float)
    a = 1.0 - x @ x
    xy = x @ y
    return (math.sqrt(a * (y @ y) + xy * xy) + xy) / a


def dual_by_optimizer(F, x, xi):
    """max over angles of xi.w / F(x, w)."""
    xi = np.asarray(xi, float)

    def neg(t):
        w = np.array([math.cos(t), math.sin(t)])
        return -(xi @ w) / F(x, w)

    grid = np.linspace(0, 2 * np.pi, 721)
    t0 = grid[np.argmin([neg(t) for t in grid])]
    res = optimize.minimize_scalar(neg, bracket=(t0 - 0.01, t0, t0 + 0.01), tol=1e-14)
    return -res.fun


def tensor_fd(F, x, y, h=1e-4):
    def E(v):
        return 0.5 * F(x, v) ** 2
    g = np.zeros((2, 2))
    I = np.eye(2)
    for i in range(2):
        for j in range(2):
            g[i, j] = (E(y + h * I[i] + h * I[j]) - E(y + h * I[i] - h * I[j])
                       - E(y - h * I[i] + h * I[j]) + E(y - h * I[i] - h * I[j])) / (4 * h * h)
    return g


def indicatrix_line_element(F, x, t, h=1e-6):
    """|dy/dt|_{g_y} for y(t) = w(t) / F(x, w(t))."""
    def y(s):
        w = np.array([math.cos(s), math.sin(s)])
        return w / F(x, w)
    yt = y(t)
    dy = (y(t + h) - y(t - h)) / (2 * h)
    return math.sqrt(dy @ tensor_fd(F, x, yt) @ dy), yt


def lhs_oracle(F, radius, f, n_r=24, n_a=48, n_t=96):
    """int_{|x|<R} dmu int_{S_x} e^tau f dnu by a Gauss x trapezoid product rule with FD tensors.

    sigma dx e^tau = sqrt(det g) dx, so no volume density is needed.
    """
    u, wu = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * radius * (u + 1)
    wr = 0.5 * radius * wu
    a = 2 * np.pi * np.arange(n_a) / n_a
    t = 2 * np.pi * np.arange(n_t) / n_t
    total = 0.0
    for ri, wri in zip(r, wr):
        for ai in a:
            x = ri * np.array([math.cos(ai), math.sin(ai)])
            inner = 0.0
            for ti in t:
                le, yt = indicatrix_line_element(F, x, ti)
                inner += f(x, yt) * le * math.sqrt(np.linalg.det(tensor_fd(F, x, yt)))
            total += wri * ri * (2 * np.pi / n_a) * inner * (2 * np.pi / n_t)
    return total


def bump(x, y, c=(0.1, 0.05), w=0.3, tilt=0.5):
    d = x - np.asarray(c)
    return math.exp(-(d @ d) / w ** 2) * (1 + tilt * y[0])


def hemisphere_fd(n, D, N=4000):
    """Lowest Dirichlet eigenvalue of -(s^{n-1} u')' / s^{n-1} on the polar cap, s = sin(theta),
    radius D / pi, by a symmetric finite-difference (Sturm-Liouville) discretization."""
    R = D / np.pi
    th_end = np.pi / 2
    hgrid = th_end / N
    th = hgrid * np.arange(N + 1)
    mid = 0.5 * (th[:-1] + th[1:])
    p = np.sin(mid) ** (n - 1)
    wgt = np.sin(th[1:N]) ** (n - 1)
    wgt[0] = max(wgt[0], 1e-300)
    # unknowns u_1..u_{N-1}; u_N = 0 (equator), Neumann at the pole through p(0) ~ 0
    diag = (p[:-1] + p[1:]) / hgrid ** 2
    diag[0] = p[1] / hgrid ** 2  # ghost u_0 = u_1
    off = -p[1:-1] / hgrid ** 2
    s = 1 / np.sqrt(wgt)
    ev = eigh_tridiagonal(diag * s * s, off * s[:-1] * s[1:], select="i", select_range=(0, 0))[0][0]
    return ev / R ** 2


def main():
    out = {}
    # Funk distances along the x-axis and the exit time from the origin
    for r in (0.3, 0.5, 0.7):
        out[f"funk_distance_origin_to_{r}"] = integrate.quad(lambda s: funk([s, 0], [1, 0]), 0, r,
                                                             epsabs=1e-14, epsrel=1e-14)[0]
    out["funk_dual_at_half_xi_x"] = dual_by_optimizer(funk, [0.5, 0], [1, 0])
    out["funk_dual_at_point_xi"] = dual_by_optimizer(funk, [0.3, -0.4], [0.7, 1.1])
    # Busemann-Hausdorff and Holmes-Thompson densities of the Funk metric
    for name, x in (("half", [0.5, 0.0]), ("mixed", [0.3, 0.4])):
        area = integrate.quad(lambda t: 0.5 / funk(x, [math.cos(t), math.sin(t)]) ** 2, 0, 2 * np.pi,
                              epsabs=1e-13, epsrel=1e-13, limit=200)[0]
        dual_area = integrate.quad(
            lambda t: 0.5 / dual_by_optimizer(funk, x, [math.cos(t), math.sin(t)]) ** 2,
            0, 2 * np.pi, epsabs=1e-11, epsrel=1e-11, limit=200)[0]
        out[f"funk_sigma_bh_{name}"] = np.pi / area
        out[f"funk_sigma_ht_{name}"] = dual_area / np.pi
    # boundary areas of Omega_0.5 (sigma_BH = 1): A_pm = int F*(-/+ nu) ds
    for sign, s in (("plus", -1), ("minus", 1)):
        out[f"funk_area_{sign}"] = integrate.quad(
            lambda t: 0.5 * dual_by_optimizer(funk, [0.5 * math.cos(t), 0.5 * math.sin(t)],
                                              [s * math.cos(t), s * math.sin(t)]),
            0, 2 * np.pi, epsabs=1e-10, epsrel=1e-10, limit=200)[0]
    # sphere-bundle integrals
    out["euclid_lhs_one"] = 2 * np.pi * np.pi
    out["euclid_lhs_bump"] = 2 * np.pi * integrate.dblquad(
        lambda r, a: r * math.exp(-((r * math.cos(a) - 0.1) ** 2 + (r * math.sin(a) - 0.05) ** 2) / 0.09),
        0, 2 * np.pi, 0, 1, epsabs=1e-13, epsrel=1e-13)[0]
    out["funk_lhs_one"] = lhs_oracle(funk, 0.5, lambda x, y: 1.0)
    out["funk_lhs_bump"] = lhs_oracle(funk, 0.5, bump)
    # eigenvalues
    out["disk_dirichlet_j01_sq"] = float(special.jn_zeros(0, 1)[0] ** 2)
    out["hemisphere_2_pi_fd"] = hemisphere_fd(2, np.pi)
    out["hemisphere_3_pi_fd"] = hemisphere_fd(3, np.pi)
    out["randers_torus_x2_mode"] = 1 / (1 - 0.3 ** 2)
    # constants
    pi = math.pi
    out["cor55_lambda_example"] = ((4 * pi ** 2) / (4 * 2 * pi * (pi ** 2 / 2))) ** 2
    out["cor55_sobolev_example"] = (4 * pi ** 2) ** 3 / (4 * (2 * pi) * (4 * pi) * (pi ** 2 / 2) ** 3)
    out["lemma51_euclid"] = integrate.quad(math.cos, -pi / 2, pi / 2)[0]
    out["berger_kazdan_sphere_lhs"] = integrate.dblquad(lambda t, r: math.sin(t), 0, pi, 0,
                                                        lambda r: pi - r)[0]
    out["cor56_euclid_constant"] = math.sqrt(2 * pi)
    path = os.path.join(os.path.dirname(__file__), "frozen.json")
    with open(path, "w") as fh:
        json.dump({k: float(v) for k, v in sorted(out.items())}, fh, indent=2)
        fh.write("\n")
    for k, v in sorted(out.items()):
        print(f"{k:34s} {v:.15g}")


if __name__ == "__main__":
    main()
