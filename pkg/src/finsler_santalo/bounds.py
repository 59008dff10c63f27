"""Closed-form bounds, their numerical checks, and the Funk-disk reference values."""
import logging
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import quad

from . import metric as mc
from . import geodesics as gd
from ._optim import zoom_maximize, zoom_minimize
from .domains import Domain, boundary_quadrature
from .errors import InvalidInputError, UnsupportedDomainError
from .measures import (MeasureKind, _indicatrix_batch, _sigma_from_batch, boundary_area, hemisphere_rule,
                       omega_pm, sigma, sphere_volume, volume)
from .spectral import hemisphere_eigenvalue

log = logging.getLogger(__name__)


@dataclass
class BoundsReport:
    """An inequality normalized to lhs >= rhs."""
    id: str
    lhs: float
    rhs: float
    satisfied: bool
    margin: float
    inputs: dict = field(default_factory=dict)
    note: str = ""

    @classmethod
    def make(cls, id, lhs, rhs, inputs=None, strict=False, note=""):
        lhs, rhs = float(lhs), float(rhs)
        ok = lhs > rhs if strict else lhs >= rhs
        return cls(id, lhs, rhs, bool(ok), lhs - rhs, inputs or {}, note)

    def to_dict(self):
        return asdict(self)


def _exp_eigen(kind):
    return 4 if MeasureKind.parse(kind) is MeasureKind.BH else 2


# ---------------------------------------------------------------------------
# Funk disk reference
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FunkReference:
    n: int
    r: float
    mu_BH: float
    A_plus: float
    A_minus: float
    Lambda: float
    diam: float
    omega: float

    def to_dict(self):
        return asdict(self)


def funk_reference(n, r):
    if n < 2 or not 0 < r < 1:
        raise InvalidInputError("need n >= 2 and 0 < r < 1")
    c = sphere_volume(n - 1)
    return FunkReference(n, r, c / n * r ** n, c * (1 + r) * r ** (n - 1), c * (1 - r) * r ** (n - 1),
                         ((1 + r) / (1 - r)) ** 2, float(np.log((1 + r) / (1 - r))), 1.0)


# ---------------------------------------------------------------------------
# measured geometric quantities
# ---------------------------------------------------------------------------

def _polar_samples(dom, n_rad=9, n_ang=32):
    th = 2 * np.pi * np.arange(n_ang) / n_ang
    dirs = np.stack([np.cos(th), np.sin(th)], -1)
    R = dom.boundary_radius(dirs)
    s = np.linspace(0.0, 1.0, n_rad)
    pts = dom.center + (s[None, :, None] * R[:, None, None]) * dirs[:, None, :]
    return np.unique(pts.reshape(-1, 2).round(15), axis=0)


def measure_uniformity(m, dom, n_rad=9, n_ang=32):
    """Sup of Lambda_F(x) over a polar sample of the closed domain (boundary included)."""
    _, Lam, arg = mc.constants_sup(m, _polar_samples(dom, n_rad, n_ang))
    return Lam, arg


def _boundary_param(dom, phi):
    dirs = np.stack([np.cos(phi), np.sin(phi)], -1)
    p = dom.center + dom.boundary_radius(dirs)[..., None] * dirs
    if dom.name != "ball":
        p = dom.project_to_boundary(p)
    return p


def measure_diameter(m, dom, grid=32, refine_top=4, levels=16, dt=gd.DEFAULT_DT):
    """sup d(p, q) over the closed planar domain.

    Under the minimizing assumption every geodesic from a boundary point is
    minimizing until it exits, so the sup of exit times over inward unit
    vectors at boundary points is the diameter.  Inward directions at p(a) are
    parameterized by a second boundary angle b through the chord p(b) - p(a),
    which keeps the maximizing set well aligned with the search lattice.
    """
    if not dom.convex_minimizing:
        raise UnsupportedDomainError("diameter via exit times needs a convex_minimizing domain")
    if m.dim != 2:
        raise InvalidInputError("measure_diameter is planar")

    def exit_times(q):
        p = _boundary_param(dom, q[:, 0])
        w = _boundary_param(dom, q[:, 1]) - p
        ok = (np.linalg.norm(w, axis=1) > 1e-9) & (np.sum(w * dom.grad(p), axis=1) < -1e-9)
        out = np.zeros(len(q))
        if np.any(ok):
            y = w[ok] / m.F(p[ok], w[ok])[:, None]
            out[ok] = gd.trace_to_exit(m, dom, p[ok], y, dt=dt, from_boundary=True).t_exit
        return out

    a = 2 * np.pi * (np.arange(grid) + 0.5) / grid
    Q = np.stack(np.meshgrid(a, a + np.pi / grid, indexing="ij"), -1).reshape(-1, 2)
    vals = exit_times(Q)
    top = np.argsort(vals)[-refine_top:]
    _, best = zoom_maximize(exit_times, Q[top], 2 * np.pi / grid, levels=levels)
    return float(max(vals.max(), best.max()))


def measure_omega(m, kind, dom, grid=32, levels=20):
    """inf over the domain of omega_x (sample minimum on a grid^2 lattice, then refined)."""
    ext = dom.boundary_radius(np.array([[1.0, 0], [0, 1.0], [-1.0, 0], [0, -1.0]])).max()
    ax = dom.center[0] + np.linspace(-ext, ext, grid), dom.center[1] + np.linspace(-ext, ext, grid)
    P = np.stack(np.meshgrid(*ax, indexing="ij"), -1).reshape(-1, 2)
    P = P[dom.h(P) < 0]
    om = omega_pm(m, kind, dom, P)[0]

    def fun(q):
        inside = dom.h(q) < 0
        out = np.full(len(q), np.inf)
        if np.any(inside):
            out[inside] = omega_pm(m, kind, dom, q[inside])[0]
        return out

    j = np.argmin(om)
    _, best = zoom_minimize(fun, P[j:j + 1], 2 * ext / grid, levels=levels)
    return float(min(om.min(), best.min())), float(2 * ext / (grid - 1))


@dataclass
class Measured:
    mu: float
    A_plus: float
    A_minus: float
    Lambda: float
    diam: float
    omega: float

    def to_dict(self):
        return asdict(self)


def measure_all(m, kind, dom, order=256):
    Lam, _ = measure_uniformity(m, dom)
    return Measured(volume(m, kind, dom), boundary_area(m, kind, dom, "+", order),
                    boundary_area(m, kind, dom, "-", order), Lam, measure_diameter(m, dom),
                    measure_omega(m, kind, dom)[0])


def funk_report(r=0.5, kind="bh", n=2, tolerances=None):
    """Measured Funk-disk quantities next to the closed forms."""
    tol = {"mu": 1e-3, "A_plus": 1e-3, "A_minus": 1e-3, "Lambda": 1e-2, "diam": 1e-2, "omega": 2e-3}
    tol.update(tolerances or {})
    ref = funk_reference(n, r)
    meas = measure_all(mc.FunkBall(n), kind, Domain.ball(r, n))
    rows = []
    for key, rk in (("mu", "mu_BH"), ("A_plus", "A_plus"), ("A_minus", "A_minus"), ("Lambda", "Lambda"),
                    ("diam", "diam"), ("omega", "omega")):
        mv, rv = getattr(meas, key), getattr(ref, rk)
        err = abs(mv - rv) if key == "omega" else abs(mv - rv) / abs(rv)
        rows.append({"quantity": key, "measured": mv, "reference": rv,
                     "error": err, "error_kind": "abs" if key == "omega" else "rel",
                     "tolerance": tol[key], "passed": bool(err <= tol[key])})
    return rows


# ---------------------------------------------------------------------------
# individual inequalities
# ---------------------------------------------------------------------------

def thm12_bound(n, D, Lam, kind):
    if Lam < 1 or D <= 0:
        raise InvalidInputError("need Lambda >= 1 and D > 0")
    return hemisphere_eigenvalue(n, D) / Lam ** (_exp_eigen(kind) * n + 1)


def thm13_rhs(n, D, Lam, omega, which, drop_lambda=False):
    c = sphere_volume
    if which == 1:
        L = 1.0 if drop_lambda else Lam ** (2 * n + 0.5)
        return (n - 1) * c(n - 1) * omega / (c(n - 2) * D * L)
    L = 1.0 if drop_lambda else Lam ** (2 * n + 2.5)
    return c(n - 1) * omega ** (1 + 1 / n) / ((c(n) / 2) ** (1 - 1 / n) * L)


def thm13_check(m, kind, dom, measured=None, drop_lambda=False):
    """Both isoperimetric inequalities for both boundary measures (4 reports)."""
    if not dom.convex_minimizing:
        raise UnsupportedDomainError("thm13_check needs a convex_minimizing domain")
    q = measured or measure_all(m, kind, dom)
    n = m.dim
    out = []
    for sign, A in (("+", q.A_plus), ("-", q.A_minus)):
        out.append(BoundsReport.make(f"thm13.1{sign}", A / q.mu, thm13_rhs(n, q.diam, q.Lambda, q.omega, 1, drop_lambda),
                                     {**q.to_dict(), "drop_lambda": drop_lambda}, strict=True))
        out.append(BoundsReport.make(f"thm13.2{sign}", A / q.mu ** (1 - 1 / n),
                                     thm13_rhs(n, q.diam, q.Lambda, q.omega, 2, drop_lambda),
                                     {**q.to_dict(), "drop_lambda": drop_lambda}, strict=True))
    return out


def lemma51_values(m, kind, dom, xb, sign, order=128):
    """(hemisphere integral, c_{n-2}/(n-1) Lambda(x)^{2n+1/2}) at boundary points xb."""
    xb = np.atleast_2d(np.asarray(xb, dtype=float))
    n = m.dim
    dh = dom.grad(xb)
    cov = -dh if sign in ("+", 1) else dh
    fstar = mc.dual_norm(m, xb, cov)
    hr = hemisphere_rule(m, xb, cov, order)
    g_ny = np.einsum("pi,pni->pn", cov, hr.nodes) / fstar[:, None]
    sig = sigma(m, kind, xb)
    lhs = np.sum(hr.weights * g_ny * hr.sqrt_det_g / sig[:, None], axis=1)
    _, Lam = mc.constants_batch(m, xb)
    return lhs, sphere_volume(n - 2) / (n - 1) * Lam ** (2 * n + 0.5)


def lemma51_check(m, kind, dom, xb, sign="+", order=128):
    val, bound = lemma51_values(m, kind, dom, xb, sign, order)
    k = int(np.argmin(bound - val))
    return BoundsReport.make(f"lemma51{sign}", bound[k], val[k],
                             {"points": int(len(val)), "worst_point": np.atleast_2d(xb)[k].tolist(),
                              "max_integral": float(val.max())},
                             note="worst point over the sample; satisfied iff every point satisfies")


def lemma21_values(m, kind, X, Y):
    """(e^tau, Lambda(x)) at sphere-bundle points; expected Lambda^-n <= e^tau <= Lambda^n."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    g = mc.fundamental_tensor(m, X, Y)
    et = np.sqrt(np.linalg.det(g)) / sigma(m, kind, X)
    _, Lam = mc.constants_batch(m, X, refine=False)
    return et, Lam


def prop42_values(m, x, xi, order=128):
    """(F*(xi)^2, n/(c_{n-1} Lambda^{n+1}) int <y, xi>^2 dnu) for batches of (x, xi)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    n = m.dim
    Y, W, *_ = _indicatrix_batch(m, x, order)
    integral = np.sum(W * np.einsum("pni,pi->pn", Y, xi) ** 2, axis=1)
    _, Lam = mc.constants_batch(m, x)
    return mc.dual_norm(m, x, xi) ** 2, n / (sphere_volume(n - 1) * Lam ** (n + 1)) * integral


def prop42_check(m, x, xi, order=128):
    lhs, rhs = prop42_values(m, x, xi, order)
    k = int(np.argmin(lhs - rhs))
    return BoundsReport.make("prop42", lhs[k], rhs[k], {"points": int(np.size(lhs))})


# ---------------------------------------------------------------------------
# Berger-Kazdan iterated integral
# ---------------------------------------------------------------------------

def berger_kazdan_values(m, X, Y, L, n_r=16, n_t=16, dt=1e-2):
    """LHS int_0^l dr int_0^{l-r} F(t, phi_r(y)) dt and RHS (pi c_n / (2 c_{n-1})) (l/pi)^{n+1}."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    L = np.atleast_1d(np.asarray(L, dtype=float))
    n = m.dim
    u, w = np.polynomial.legendre.leggauss(n_r)
    ut, wt = np.polynomial.legendre.leggauss(n_t)
    R = 0.5 * L[:, None] * (1 + u[None])
    xs, ys = gd.flow_to_nodes(m, X, Y, R, dt)
    G = len(L)
    span = (L[:, None] - R).reshape(-1)
    T = 0.5 * span[:, None] * (1 + ut[None])
    dens = gd.polar_density_nodes(m, xs.reshape(-1, n), ys.reshape(-1, n), T, dt)
    inner = 0.5 * span * (dens @ wt)
    lhs = 0.5 * L * (inner.reshape(G, n_r) @ w)
    rhs = np.pi * sphere_volume(n) / (2 * sphere_volume(n - 1)) * (L / np.pi) ** (n + 1)
    return lhs, rhs


# ---------------------------------------------------------------------------
# corollaries
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonVolumeInputs:
    k: float
    D: float
    Lam: float
    n: int
    V: float

    def __post_init__(self):
        if self.D <= 0 or self.Lam < 1:
            raise InvalidInputError("need D > 0 and Lambda >= 1")


def s_k(k, t):
    """Comparison function: sin(sqrt(k) t)/sqrt(k), t, or sinh(sqrt(-k) t)/sqrt(-k)."""
    if k > 0:
        return np.sin(np.sqrt(k) * t) / np.sqrt(k)
    if k < 0:
        return np.sinh(np.sqrt(-k) * t) / np.sqrt(-k)
    return t


def cor55_bounds(inp, kind=None):
    """(lambda_1 lower bound, Sobolev-constant lower bound); both measures share the formulas."""
    del kind
    n, D, Lam, V = inp.n, inp.D, inp.Lam, inp.V
    I = quad(lambda t: s_k(inp.k, t) ** (n - 1), 0.0, D, epsabs=1e-14, epsrel=1e-13)[0]
    lam = ((n - 1) * V / (4 * sphere_volume(n - 2) * Lam ** (4 * n + 1) * D * I)) ** 2
    S = V ** (n + 1) / (4 * sphere_volume(n - 1) * sphere_volume(n) ** (n - 1)
                        * Lam ** (4 * n * n + 4.5 * n) * I ** (n + 1))
    return float(lam), float(S)


def cor56_constant(n, Lam, kind):
    """C(n, Lambda), reconstructed: the (2) isoperimetric constant with omega replaced by its
    lower bound Lambda^{-2n} (BH) or 1 (HT)."""
    om = Lam ** (-2 * n) if MeasureKind.parse(kind) is MeasureKind.BH else 1.0
    return thm13_rhs(n, 1.0, Lam, om, 2)


def cor56_bounds(n, Lam, r, kind):
    C = cor56_constant(n, Lam, kind)
    return C / n ** n * r ** n, C / n ** (n - 1) * r ** (n - 1)


def forward_ball_check(m, kind, x, r, n_dirs=128):
    """Measured forward-ball volume and sphere areas against the lower bounds C r^n / n^n and C r^(n-1) / n^(n-1).

    Lambda is the uniformity constant measured over the ball itself.
    """
    ball = gd.forward_ball(m, np.asarray(x, dtype=float), r, n_dirs)
    Lam, _ = measure_uniformity(m, ball)
    vb, ab = cor56_bounds(m.dim, Lam, r, kind)
    inputs = {"r": r, "center": np.asarray(x, dtype=float).tolist(), "Lambda": Lam,
              "kind": MeasureKind.parse(kind).value}
    note = "C(n, Lambda) reconstructed"
    return [BoundsReport.make("cor56.volume", volume(m, kind, ball), vb, inputs, note=note),
            BoundsReport.make("cor56.area+", boundary_area(m, kind, ball, "+"), ab, inputs, note=note),
            BoundsReport.make("cor56.area-", boundary_area(m, kind, ball, "-"), ab, inputs, note=note)]


# ---------------------------------------------------------------------------
# flat torus with a constant Randers norm
# ---------------------------------------------------------------------------

def torus_diameter(m, period=2 * np.pi, grid=64, shifts=2):
    """max_v min_k F(v + period k) for a constant (translation-invariant) norm."""
    ks = np.array([(i, j) for i in range(-shifts, shifts + 1) for j in range(-shifts, shifts + 1)], float)
    x0 = np.zeros(2)

    def dist(v):
        cand = v[:, None, :] + period * ks[None]
        return m.F(np.broadcast_to(x0, cand.shape), cand).min(axis=1)

    a = period * np.arange(grid) / grid
    V = np.stack(np.meshgrid(a, a, indexing="ij"), -1).reshape(-1, 2)
    vals = dist(V)
    top = np.argsort(vals)[-4:]
    _, best = zoom_maximize(dist, V[top], period / grid, levels=20)
    return float(max(vals.max(), best.max()))


@dataclass(frozen=True)
class Splitting:
    """Two curves x^1 = a + A sin(x^2) and x^1 = a + gap + A sin(x^2) splitting the torus;
    M1 is the strip between them."""
    offset: float = 0.0
    amplitude: float = 0.0
    gap: float = np.pi

    def describe(self):
        return {"offset": self.offset, "amplitude": self.amplitude, "gap": self.gap}


def _curve(split, which, s):
    c = split.offset + (split.gap if which == 1 else 0.0)
    p = np.stack([c + split.amplitude * np.sin(s), s], -1)
    dp = np.stack([split.amplitude * np.cos(s), np.ones_like(s)], -1)
    # h < 0 inside M1: curve 0 is its left edge, curve 1 its right edge
    dh = np.stack([-np.ones_like(s), split.amplitude * np.cos(s)], -1) if which == 0 else \
        np.stack([np.ones_like(s), -split.amplitude * np.cos(s)], -1)
    return p, dp, dh


def splitting_areas(m, kind, split, n_s=256):
    """A_+(Gamma) and A_-(Gamma) with n_+ pointing into M1, as sums over both curves."""
    s = 2 * np.pi * np.arange(n_s) / n_s
    out = {"+": 0.0, "-": 0.0}
    for which in (0, 1):
        p, dp, dh = _curve(split, which, s)
        sig = sigma(m, kind, p)
        for sg, cov in (("+", -dh), ("-", dh)):
            fs = mc.dual_norm(m, p, cov)
            # dA_e = |p'| ds and |dh| = |p'| for these graphs, so the ratio is F*(cov)
            out[sg] += float(np.sum(sig * fs * np.linalg.norm(dp, axis=-1) / np.linalg.norm(dh, axis=-1))
                             * 2 * np.pi / n_s)
    return out["+"], out["-"]


def _band_energy(m, kind, split, eps, sign="+", n_s=256, n_t=8, h=1e-5):
    """int F*(df_eps) dmu over the band {0 < d(Gamma, x) < eps} on one side of Gamma.

    sign "+" is the band inside M1 (f_eps^+), "-" the band inside M2 (f_eps^-).
    Uses adapted coordinates Phi(s, t) = p(s) + t n(s) with n the unit normal
    into that side, so t = d(Gamma, x) and F*(dt) = 1 (returned as the max
    eikonal error).  Returns (energy, eikonal error, band volume).
    """
    s = 2 * np.pi * np.arange(n_s) / n_s
    u, w = np.polynomial.legendre.leggauss(n_t)
    t = 0.5 * eps * (1 + u)
    energy, eik, vol = 0.0, 0.0, 0.0
    for which in (0, 1):
        def normal(ss):
            p, _, dh = _curve(split, which, ss)
            y = mc.legendre_inverse(m, p, -dh if sign == "+" else dh)
            return y / m.F(p, y)[:, None]

        p, dp, _ = _curve(split, which, s)
        nrm = normal(s)
        dn = (normal(s + h) - normal(s - h)) / (2 * h)
        for tk, wk in zip(t, w):
            X = np.mod(p + tk * nrm, 2 * np.pi)
            J = np.stack([dp + tk * dn, nrm], axis=-1)  # columns dPhi/ds, dPhi/dt
            det = np.abs(np.linalg.det(J))
            dt_cov = np.linalg.inv(J)[:, 1, :]  # dt as a covector
            fs = mc.dual_norm(m, X, dt_cov)
            eik = max(eik, float(np.max(np.abs(fs - 1.0))))
            sig = sigma(m, kind, X)
            wgt = 0.5 * eps * wk * 2 * np.pi / n_s
            energy += float(np.sum(sig * fs / eps * det) * wgt)
            vol += float(np.sum(sig * det) * wgt)
    return energy, eik, vol


def richardson_limit(eps_values, values):
    """E(0) from the quadratic through three (eps, E) pairs."""
    V = np.vander(np.asarray(eps_values, float), len(values), increasing=True)
    return float(np.linalg.solve(V, np.asarray(values, float))[0])


def constants_candidates(m, kind, splits, eps_values=(0.2, 0.1, 0.05), n_s=256, rtol=1e-2):
    """Candidate Cheeger/isoperimetric values and the f_eps energy limits for each splitting.

    For each sign the energy of f_eps is extrapolated to eps = 0 and compared
    with A_+/-(Gamma); the matched Sobolev candidate of the limit function then
    enters the chain 2 A^n >= S mu(M1)^{n-1} (n = 2 here).
    """
    period = 2 * np.pi
    sig0 = float(sigma(m, kind, np.zeros(2)))
    mu_total = sig0 * period ** 2
    out = []
    for split in splits:
        if not 0 < split.gap <= np.pi:
            raise InvalidInputError("M1 must be the smaller side: need 0 < gap <= pi")
        areas = dict(zip("+-", splitting_areas(m, kind, split, n_s)))
        mu1 = sig0 * split.gap * period
        mu2 = mu_total - mu1
        row = {"split": split.describe(), "A_plus": areas["+"], "A_minus": areas["-"],
               "mu_M1": mu1, "mu_M2": mu2,
               "cheeger_candidate": min(areas.values()) / mu1,
               "isoperimetric_candidate": min(areas.values()) ** 2 / mu1, "eps": list(eps_values)}
        ok = True
        for sg, tag in (("+", "plus"), ("-", "minus")):
            energies, eiks = [], []
            for eps in eps_values:
                e, eik, _ = _band_energy(m, kind, split, eps, sg, n_s)
                energies.append(e)
                eiks.append(eik)
            E0 = richardson_limit(eps_values, energies)
            rel = abs(E0 - areas[sg]) / areas[sg]
            # limit test function: indicator of M1 (or its negative), inf over alpha of int |f - alpha|^2
            S_cand = E0 ** 2 * (mu1 + mu2) / (mu1 * mu2)
            chain = BoundsReport.make(f"prop61.chain{sg}", 2 * areas[sg] ** 2, S_cand * mu1 * (1 - 1e-9),
                                      {"split": split.describe()},
                                      note="rhs carries a 1e-9 relative slack; equality at mu(M1) = mu(M2)")
            row.update({f"energies_{tag}": energies, f"energy_limit_{tag}": E0,
                        f"energy_limit_rel_err_{tag}": rel, f"eikonal_max_err_{tag}": max(eiks),
                        f"sobolev_candidate_{tag}": S_cand, f"chain_{tag}": chain.to_dict()})
            ok = ok and rel <= rtol and chain.satisfied
        row["passed"] = bool(ok)
        out.append(row)
    return out


def grid_band_energy(m, kind, split, eps, resolution=96, curve_samples=384):
    """Independent check: f_eps sampled on a periodic P1 mesh from brute-force distances
    d(Gamma, x) = min_p F(x - p) over curve samples and lattice shifts."""
    from .spectral import torus_grid
    mesh = torus_grid(resolution)
    x = mesh.nodes
    s = 2 * np.pi * np.arange(curve_samples) / curve_samples
    d = np.full(len(x), np.inf)
    for which in (0, 1):
        p, _, _ = _curve(split, which, s)
        for kx in (-1, 0, 1):
            for ky in (-1, 0, 1):
                q = p + 2 * np.pi * np.array([kx, ky])
                for i0 in range(0, len(x), 4096):
                    v = x[i0:i0 + 4096, None, :] - q[None]
                    dd = m.F(np.zeros_like(v), v).min(axis=1)
                    d[i0:i0 + 4096] = np.minimum(d[i0:i0 + 4096], dd)
    # membership in M1 (between the curves, modulo the period)
    left = split.offset + split.amplitude * np.sin(x[:, 1])
    inM1 = np.mod(x[:, 0] - left, 2 * np.pi) < split.gap
    f = np.where(inM1, np.minimum(1.0, d / eps), 0.0)
    g = (mesh.grad_op @ f).reshape(-1, 2)
    fs = mc.dual_norm(m, mesh.centroids, g)
    return float(np.sum(mesh.areas * sigma(m, kind, mesh.centroids) * fs))


def cor55_torus_check(m, kind, resolution=48, iters=200):
    """lambda_1 on the flat torus (mean-zero class) against the lambda-bound, with k = 0
    since a constant norm has vanishing Ricci curvature."""
    from .spectral import minimize, torus_grid
    period = 2 * np.pi
    Lam = mc.constants_at(m, np.zeros(2)).uniformity
    D = torus_diameter(m, period)
    V = float(sigma(m, kind, np.zeros(2))) * period ** 2
    lam_b, S_b = cor55_bounds(ComparisonVolumeInputs(0.0, D, Lam, 2, V))
    res = minimize(m, kind, grid_or_mesh=torus_grid(resolution, period), iters=iters)
    return BoundsReport.make("cor55.torus", res.eigenvalue, lam_b,
                             {"Lambda": Lam, "diam": D, "volume": V, "sobolev_bound": S_b,
                              "eigen_status": res.status, "resolution": resolution})
