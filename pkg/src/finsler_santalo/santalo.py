"""Sphere-bundle integrals versus boundary flow-out integrals.

The left side integrates f e^tau over SM against dmu x dnu; the right sides
integrate over inward (outward) unit vectors on the boundary, weighted by
e^tau g_n(n, y) dnu dA_+/-, the line integral of f along the forward (backward)
flow up to the exit time.
"""
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import metric as mc
from .domains import boundary_quadrature, domain_quadrature
from .errors import UnsupportedDomainError
from .geodesics import DEFAULT_DT, DEFAULT_T_MAX, trace_to_exit
from .measures import _indicatrix_batch, _sigma_from_batch, boundary_normals, hemisphere_rule, sigma

INWARD, OUTWARD = "inward", "outward"


@dataclass
class Quadrature:
    """Node counts for each integration layer."""
    n_boundary: int = 256
    n_hemisphere: int = 128
    dt: float = DEFAULT_DT
    n_radial: int = 32
    n_angular: int = 64
    n_indicatrix: int = 128
    t_max: float = DEFAULT_T_MAX

    def scaled(self, factor):
        """Every layer refined by ``factor`` (dt divided by it)."""
        return Quadrature(int(self.n_boundary * factor), int(self.n_hemisphere * factor),
                          self.dt / factor, int(self.n_radial * factor), int(self.n_angular * factor),
                          int(self.n_indicatrix * factor), self.t_max)


@dataclass
class SantaloReport:
    lhs: float
    rhs: float
    abs_err: float
    rel_err: float
    formula: str
    nodes: dict
    runtime: float
    tol: float = None
    passed: bool = None
    extra: dict = field(default_factory=dict)

    def to_dict(self, with_runtime=False):
        d = asdict(self)
        if not with_runtime:
            d.pop("runtime")
        return d


def relative_error(a, b, eps=1e-300):
    return abs(a - b) / max(abs(a), abs(b), eps)


def _check_domain(dom):
    if not dom.convex_minimizing:
        raise UnsupportedDomainError("only convex_minimizing domains are supported (all of SM is swept)")


def lhs_integral(m, kind, dom, f, quad=None, omit_tau=False):
    """int_M dmu(x) int_{S_x} e^tau f dnu_x."""
    _check_domain(dom)
    q = quad or Quadrature()
    pts, w = domain_quadrature(dom, q.n_radial, q.n_angular)
    Y, W, sdet, rho, wd = _indicatrix_batch(m, pts, q.n_indicatrix)
    sig = _sigma_from_batch(kind, m.dim, W, sdet, rho, wd)
    etau = np.ones_like(sdet) if omit_tau else sdet / sig[:, None]
    vals = f(np.broadcast_to(pts[:, None, :], Y.shape), Y)
    if not np.all(np.isfinite(vals)):
        raise ValueError("integrand returned non-finite values")
    inner = np.sum(W * etau * vals, axis=1)
    return float(np.sum(w * sig * inner))


def _chunks(n, workers):
    k = max(1, int(workers))
    edges = np.linspace(0, n, k + 1).astype(int)
    return [(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _rhs(m, kind, dom, f, quad, sign, workers, omit_tau, backend):
    _check_domain(dom)
    q = quad or Quadrature()
    bq = boundary_quadrature(dom, q.n_boundary)
    xb = bq.points
    npl, nmi = boundary_normals(m, dom, xb)
    nvec = npl if sign > 0 else nmi
    sig = sigma(m, kind, xb, q.n_indicatrix)
    dA = bq.weights * sig * np.abs(np.sum(nvec * bq.normals, axis=-1))
    dh = dom.grad(xb)
    cov = -dh if sign > 0 else dh
    fstar = mc.dual_norm(m, xb, cov)

    def part(lo, hi):
        hr = hemisphere_rule(m, xb[lo:hi], cov[lo:hi], q.n_hemisphere)
        Y = hr.nodes
        P, N, n = Y.shape
        X = np.broadcast_to(xb[lo:hi, None, :], Y.shape)
        g_ny = np.einsum("pi,pni->pn", cov[lo:hi], Y) / fstar[lo:hi, None]
        etau = np.ones((P, N)) if omit_tau else hr.sqrt_det_g / sig[lo:hi, None]
        eb = trace_to_exit(m, dom, X.reshape(-1, n), Y.reshape(-1, n), f, q.dt, q.t_max,
                           backward=sign < 0, from_boundary=True, backend=backend)
        line = eb.integral.reshape(P, N)
        inner = np.sum(hr.weights * etau * g_ny * line, axis=1)
        return inner, eb.t_exit.reshape(P, N)

    spans = _chunks(len(xb), workers)
    if len(spans) > 1:
        with ThreadPoolExecutor(max_workers=len(spans)) as ex:
            parts = list(ex.map(lambda s: part(*s), spans))
    else:
        parts = [part(*spans[0])]
    inner = np.concatenate([p[0] for p in parts])
    texit = np.concatenate([p[1] for p in parts])
    return float(np.sum(dA * inner)), float(np.max(texit))


def rhs_inward(m, kind, dom, f, quad=None, workers=1, omit_tau=False, backend="auto"):
    """Boundary flow-out over inward unit vectors, forward flow to the exit time."""
    return _rhs(m, kind, dom, f, quad, +1, workers, omit_tau, backend)[0]


def rhs_outward(m, kind, dom, f, quad=None, workers=1, omit_tau=False, backend="auto"):
    """Boundary flow-in over outward unit vectors, backward flow to the entry time."""
    return _rhs(m, kind, dom, f, quad, -1, workers, omit_tau, backend)[0]


def _nodes(q):
    return {"boundary": q.n_boundary, "hemisphere": q.n_hemisphere, "dt": q.dt,
            "domain_radial": q.n_radial, "domain_angular": q.n_angular, "indicatrix": q.n_indicatrix}


def verify(m, kind, dom, f, tol=1e-2, quad=None, workers=1, omit_tau=False, backend="auto", atol=1e-9):
    """LHS against both boundary formulas; returns [inward report, outward report].

    A formula passes when rel_err <= tol, or abs_err <= atol for integrals that
    vanish by symmetry.
    """
    q = quad or Quadrature()
    t0 = time.perf_counter()
    lhs = lhs_integral(m, kind, dom, f, q)
    t_lhs = time.perf_counter() - t0
    reports = []
    for formula, sign in ((INWARD, 1), (OUTWARD, -1)):
        t1 = time.perf_counter()
        rhs, tmax = _rhs(m, kind, dom, f, q, sign, workers, omit_tau, backend)
        err = relative_error(lhs, rhs)
        reports.append(SantaloReport(lhs, rhs, abs(lhs - rhs), err, formula, _nodes(q),
                                     t_lhs + time.perf_counter() - t1, tol,
                                     bool(err <= tol or abs(lhs - rhs) <= atol),
                                     {"max_exit_time": tmax, "omit_tau": omit_tau}))
    return reports


def refinement_errors(m, kind, dom, f, base=None, levels=3, formula=INWARD,
                      backend="auto"):
    """|LHS - RHS| at successively doubled node counts.

    Both sides are refined together; returns the list of relative errors.
    """
    q0 = base or Quadrature(n_boundary=32, n_hemisphere=16, dt=8e-3, n_radial=8, n_angular=16,
                            n_indicatrix=32)
    sign = 1 if formula == INWARD else -1
    errs = []
    for k in range(levels):
        q = q0.scaled(2 ** k)
        lhs = lhs_integral(m, kind, dom, f, q)
        rhs = _rhs(m, kind, dom, f, q, sign, 1, False, backend)[0]
        errs.append(relative_error(lhs, rhs))
    return errs
