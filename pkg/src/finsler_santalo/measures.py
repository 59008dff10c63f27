"""Volume measures, the indicatrix measure and boundary measures.

The indicatrix S_x = {F(x, .) = 1} is parameterized radially over Euclidean
unit directions, y(w) = w / F(x, w).  Pulling the (n-1)-form
sqrt(det g) sum (-1)^{i-1} y^i dy^1..^dy^i..dy^n back through this map gives
sqrt(det g(x, y(w))) F(x, w)^{-n} dOmega(w), which is what every weight below uses.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import gamma

from . import metric as mc
from .domains import _sphere_rule, boundary_quadrature, domain_quadrature
from .errors import IllConditionedError, InvalidDomainError, UnsupportedDomainError


def sphere_volume(k):
    """c_k = vol(S^k) = 2 pi^{(k+1)/2} / Gamma((k+1)/2)."""
    return 2.0 * np.pi ** ((k + 1) / 2.0) / gamma((k + 1) / 2.0)


def ball_volume(n):
    return sphere_volume(n - 1) / n


class MeasureKind(str, Enum):
    BH = "bh"
    HT = "ht"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        v = str(value).strip().lower().replace("-", "").replace("_", "")
        aliases = {"bh": cls.BH, "busemannhausdorff": cls.BH, "ht": cls.HT, "holmesthompson": cls.HT}
        if v not in aliases:
            raise ValueError(f"unknown measure kind {value!r}")
        return aliases[v]


@dataclass(frozen=True)
class IndicatrixQuadrature:
    x: np.ndarray
    nodes: np.ndarray     # (N, n), F(x, node) = 1
    weights: np.ndarray   # (N,), sums to the nu_x-measure of S_x
    order: int
    sqrt_det_g: np.ndarray
    radius: np.ndarray    # 1 / F(x, w) for the Euclidean direction w of each node
    solid_angle: np.ndarray


def _indicatrix_batch(m, X, order):
    """Nodes and weights for a batch of base points X (P, n)."""
    X = np.asarray(X, dtype=float)
    m.check_points(X)
    n = m.dim
    dirs, w, _ = _sphere_rule(order, n)
    rho = 1.0 / m.F(X[:, None, :], dirs[None])
    Y = rho[..., None] * dirs[None]
    g = m.tensor(np.broadcast_to(X[:, None, :], Y.shape), Y)
    det = np.linalg.det(g)
    if np.any(det <= 0) or not np.all(np.isfinite(det)):
        bad = np.argwhere(~(det > 0))[0]
        raise IllConditionedError(f"fundamental tensor not positive definite at x={X[bad[0]]}, "
                                  f"y={Y[tuple(bad)]}", condition=float("inf"))
    sdet = np.sqrt(det)
    weights = w[None] * sdet * rho ** n
    return Y, weights, sdet, rho, w


def indicatrix_quadrature(m, x, order=128):
    """Quadrature for integrals over S_x against the induced Riemannian measure."""
    if m.dim == 2 and order < 16:
        raise ValueError("indicatrix order must be at least 16")
    x = np.asarray(x, dtype=float)
    Y, W, sdet, rho, w = _indicatrix_batch(m, x[None], order)
    return IndicatrixQuadrature(x, Y[0], W[0], order, sdet[0], rho[0], w)


def _sigma_from_batch(kind, n, weights, sdet, rho, w):
    kind = MeasureKind.parse(kind)
    if kind is MeasureKind.BH:
        vol = np.sum(w[None] * rho ** n, axis=-1) / n  # divergence theorem on the indicatrix
        return ball_volume(n) / vol
    return np.sum(weights * sdet, axis=-1) / sphere_volume(n - 1)


# per-dimension defaults: (indicatrix order, boundary order, domain angular order)
_DEFAULT_ORDERS = {2: (128, 256, 64), 3: (32, 32, 24)}
_CHUNK = 1 << 18  # max base points x directions handled at once


def _defaults(n, order=None, boundary=None, angular=None):
    d = _DEFAULT_ORDERS.get(n, _DEFAULT_ORDERS[3])
    return (d[0] if order is None else order, d[1] if boundary is None else boundary,
            d[2] if angular is None else angular)


def _blocked(m, X, order, fn):
    """Apply fn(W, sdet, rho, w) to blocks of base points and concatenate."""
    n_dirs = _sphere_rule(order, m.dim)[0].shape[0]
    step = max(1, _CHUNK // n_dirs)
    parts = []
    for i in range(0, X.shape[0], step):
        _, W, sdet, rho, w = _indicatrix_batch(m, X[i:i + step], order)
        parts.append(fn(W, sdet, rho, w))
    return np.concatenate(parts) if parts else np.empty(0)


def sigma(m, kind, x, order=None):
    """Density of the Busemann-Hausdorff or Holmes-Thompson measure at x (batched)."""
    order = _defaults(m.dim, order)[0]
    x = np.asarray(x, dtype=float)
    X = x.reshape(-1, m.dim)
    out = _blocked(m, X, order, lambda W, sdet, rho, w: _sigma_from_batch(kind, m.dim, W, sdet, rho, w))
    return out.reshape(x.shape[:-1])


def distortion(m, kind, x, y, order=None):
    """tau(x, y) = log(sqrt(det g(x, y)) / sigma(x))."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    g = mc.fundamental_tensor(m, x, y)
    return np.log(np.sqrt(np.linalg.det(g)) / sigma(m, kind, x, order))


def omega_pm(m, kind, dom, x, order=None):
    """(omega_x^+, omega_x^-) = c_{n-1}^{-1} int_{S_x} e^tau dnu_x on convex domains."""
    if not dom.convex_minimizing:
        raise UnsupportedDomainError("omega_pm needs a convex_minimizing domain")
    order = _defaults(m.dim, order)[0]
    x = np.asarray(x, dtype=float)
    X = x.reshape(-1, m.dim)

    def block(W, sdet, rho, w):
        sig = _sigma_from_batch(kind, m.dim, W, sdet, rho, w)
        return np.sum(W * sdet, axis=-1) / sig / sphere_volume(m.dim - 1)

    om = _blocked(m, X, order, block).reshape(x.shape[:-1])
    return om, om.copy()


def boundary_normals(m, dom, xb, tol=1e-9):
    """Unit inward/outward normals n_+ = L^{-1}(-dh)/F*(-dh), n_- = L^{-1}(dh)/F*(dh)."""
    xb = np.asarray(xb, dtype=float)
    if np.any(np.abs(dom.h(xb)) > tol):
        raise InvalidDomainError("boundary_normals called off the boundary")
    dh = dom.grad(xb)
    if np.any(np.linalg.norm(dh, axis=-1) < 1e-12):
        raise InvalidDomainError("degenerate dh on the boundary")
    out = []
    for xi in (-dh, dh):
        y = mc.legendre_inverse(m, xb, xi)
        out.append(y / m.F(xb, y)[..., None])
    return out[0], out[1]


def _sign(sign):
    if sign in ("+", 1, "plus", "inward"):
        return 1
    if sign in ("-", -1, "minus", "outward"):
        return -1
    raise ValueError(f"bad sign {sign!r}")


def boundary_area(m, kind, dom, sign, order=None, order_indicatrix=None):
    """A_+/-(boundary) = int sigma |<n_+/-, nu_e>| dA_e (interior-product formula)."""
    s = _sign(sign)
    order_indicatrix, order, _ = _defaults(m.dim, order_indicatrix, order)
    bq = boundary_quadrature(dom, order)
    npl, nmi = boundary_normals(m, dom, bq.points)
    nvec = npl if s > 0 else nmi
    proj = np.sum(nvec * bq.normals, axis=-1)
    sig = sigma(m, kind, bq.points, order_indicatrix)
    return float(np.sum(bq.weights * sig * np.abs(proj)))


def boundary_area_dual_form(m, kind, dom, sign, order=None, order_indicatrix=None):
    """Equivalent form int sigma F*(-/+ dh) / |dh| dA_e, avoiding the Legendre inverse."""
    s = _sign(sign)
    order_indicatrix, order, _ = _defaults(m.dim, order_indicatrix, order)
    bq = boundary_quadrature(dom, order)
    dh = dom.grad(bq.points)
    fs = mc.dual_norm(m, bq.points, -s * dh)
    sig = sigma(m, kind, bq.points, order_indicatrix)
    return float(np.sum(bq.weights * sig * fs / np.linalg.norm(dh, axis=-1)))


def volume(m, kind, dom, n_radial=32, n_angular=None, order_indicatrix=None):
    order_indicatrix, _, n_angular = _defaults(m.dim, order_indicatrix, None, n_angular)
    pts, w = domain_quadrature(dom, n_radial, n_angular)
    return float(np.sum(w * sigma(m, kind, pts, order_indicatrix)))


@dataclass(frozen=True)
class HemisphereRule:
    """Quadrature on S^{+/-}_x for a batch of boundary points."""
    nodes: np.ndarray      # (P, N, n) unit vectors
    weights: np.ndarray    # (P, N) nu_x weights
    sqrt_det_g: np.ndarray


def hemisphere_rule(m, xb, covector, order=128):
    """Nodes of {y in S_x : covector(y) > 0}.

    For n = 2 the set is the Euclidean half-circle of directions with
    covector(w) > 0, integrated exactly with Gauss-Legendre in the angle, so
    the quadrature sees no kink at the tangency directions.  For n = 3 the
    product rule is filtered by sign.
    """
    xb = np.asarray(xb, dtype=float)
    cv = np.asarray(covector, dtype=float)
    n = m.dim
    if n == 2:
        t, wt = np.polynomial.legendre.leggauss(order)
        phi0 = np.arctan2(cv[:, 1], cv[:, 0])
        th = phi0[:, None] + 0.5 * np.pi * t[None, :]
        dirs = np.stack([np.cos(th), np.sin(th)], axis=-1)
        dw = np.broadcast_to(0.5 * np.pi * wt, th.shape)
    elif n == 3:
        d3, w3, _ = _sphere_rule(order, 3)
        dirs = np.broadcast_to(d3, (len(xb),) + d3.shape)
        keep = np.sum(dirs * cv[:, None, :], axis=-1) > 0
        dw = np.where(keep, w3[None], 0.0)
    else:
        raise InvalidDomainError("hemisphere rule supports n = 2, 3")
    rho = 1.0 / m.F(xb[:, None, :], dirs)
    Y = rho[..., None] * dirs
    g = m.tensor(np.broadcast_to(xb[:, None, :], Y.shape), Y)
    sdet = np.sqrt(np.linalg.det(g))
    return HemisphereRule(Y, dw * sdet * rho ** n, sdet)
