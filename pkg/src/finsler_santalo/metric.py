"""Pointwise Finsler metric evaluations.

Every routine accepts batched input: ``x`` and ``y`` are arrays whose last axis
has length ``dim`` and whose leading axes broadcast against each other.

Four metric families are provided (Euclidean, Riemannian, Randers, Funk) plus
the reverse-metric wrapper.  Families that admit closed forms override the
generic finite-difference machinery; the generic code stays available through
``method="fd"``/``method="formula"`` and is what the closed forms are tested
against.
"""
import logging
from typing import NamedTuple

import numpy as np

from ._optim import zoom_maximize
from .errors import ConvergenceError, IllConditionedError, InvalidInputError

log = logging.getLogger(__name__)

# finite-difference steps; tolerances in the test-suite are calibrated to these
HESS_STEP = 1e-4
XDIFF_STEP = 1e-4


def _as(a):
    return np.asarray(a, dtype=float)


def directions(theta):
    """Unit vectors (cos, sin) for an array of angles."""
    theta = _as(theta)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def sphere_directions(phi, psi):
    phi, psi = np.broadcast_arrays(_as(phi), _as(psi))
    s = np.sin(phi)
    return np.stack([s * np.cos(psi), s * np.sin(psi), np.cos(phi)], axis=-1)


def _angles_to_dirs(params, dim):
    """Map (P, dim-1) angle parameters to Euclidean unit vectors."""
    if dim == 2:
        return directions(params[..., 0])
    return sphere_directions(params[..., 0], params[..., 1])


def _direction_grid(dim, n2=64, n3=(32, 64)):
    """Coarse direction lattice together with its angle parameters."""
    if dim == 2:
        th = 2 * np.pi * np.arange(n2) / n2
        return directions(th), th[:, None]
    nphi, npsi = n3
    phi = (np.arange(nphi) + 0.5) * np.pi / nphi
    psi = 2 * np.pi * np.arange(npsi) / npsi
    P, S = np.meshgrid(phi, psi, indexing="ij")
    par = np.stack([P.ravel(), S.ravel()], axis=-1)
    return sphere_directions(par[:, 0], par[:, 1]), par


class FinslerMetric:
    """Base class: subclasses implement :meth:`F` and optionally closed forms."""

    family = "generic"
    has_analytic_tensor = False
    has_fast_spray = False
    has_fast_dual = False
    # numba kernel family code; None means numpy path only
    kernel_code = None

    def __init__(self, dim):
        if dim < 1:
            raise InvalidInputError("dimension must be positive")
        self.dim = int(dim)

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"

    # -- to be provided by families -------------------------------------------
    def F(self, x, y):
        raise NotImplementedError

    def check_points(self, x):
        """Raise InvalidInputError if ``x`` is outside the metric's domain."""

    def tensor(self, x, y):
        return fd_tensor(self, x, y)

    def spray(self, x, y):
        return spray_formula(self, x, y)

    def dual(self, x, xi):
        """Return (F*(xi), maximizer y) with F(x, y) = 1."""
        return dual_search(self, x, xi)

    def reverse(self):
        return ReversedMetric(self)

    def describe(self):
        return {"family": self.family, "dim": self.dim}


class Euclidean(FinslerMetric):
    family = "euclidean"
    has_analytic_tensor = True
    has_fast_spray = True
    has_fast_dual = True
    kernel_code = 0

    def F(self, x, y):
        x, y = np.broadcast_arrays(_as(x), _as(y))
        return np.linalg.norm(y, axis=-1)

    def tensor(self, x, y):
        x, y = np.broadcast_arrays(_as(x), _as(y))
        return np.broadcast_to(np.eye(self.dim), y.shape + (self.dim,)).copy()

    def spray(self, x, y):
        x, y = np.broadcast_arrays(_as(x), _as(y))
        return np.zeros_like(y)

    def dual(self, x, xi):
        x, xi = np.broadcast_arrays(_as(x), _as(xi))
        nrm = np.linalg.norm(xi, axis=-1)
        safe = np.where(nrm > 0, nrm, 1.0)
        return nrm, xi / safe[..., None]

    def reverse(self):
        return self


class Riemannian(FinslerMetric):
    """F = sqrt(y^T A(x) y) for a symmetric positive definite matrix field.

    ``matrix`` maps (..., n) points to (..., n, n) matrices.  ``matrix_grad``
    (optional) returns (..., n, n, n) with the derivative direction last; when
    absent it is approximated by central differences.
    """

    family = "riemannian"
    has_analytic_tensor = True
    has_fast_spray = True
    has_fast_dual = True

    def __init__(self, matrix, dim, matrix_grad=None, name="riemannian", params=None):
        super().__init__(dim)
        self._matrix = matrix
        self._matrix_grad = matrix_grad
        self.name = name
        self.params = params or {}

    @classmethod
    def constant(cls, A):
        A = _as(A)
        n = A.shape[0]
        return cls(lambda x: np.broadcast_to(A, _as(x).shape[:-1] + (n, n)).copy(), n,
                   matrix_grad=lambda x: np.zeros(_as(x).shape[:-1] + (n, n, n)),
                   name="constant", params={"A": A.tolist()})

    @classmethod
    def round_sphere_chart(cls, radius=1.0, dim=2):
        """Stereographic chart of the round sphere of the given radius."""
        R2 = float(radius) ** 2
        eye = np.eye(dim)

        def matrix(x):
            x = _as(x)
            c = 4.0 * R2 / (1.0 + np.sum(x * x, axis=-1)) ** 2
            return c[..., None, None] * eye

        def grad(x):
            x = _as(x)
            d = -16.0 * R2 / (1.0 + np.sum(x * x, axis=-1)) ** 3
            return d[..., None, None, None] * eye[..., None] * x[..., None, None, :]

        return cls(matrix, dim, grad, name="round-sphere", params={"radius": float(radius)})

    def describe(self):
        return {"family": self.family, "dim": self.dim, "name": self.name, **self.params}

    def matrix(self, x):
        return self._matrix(_as(x))

    def matrix_grad(self, x):
        x = _as(x)
        if self._matrix_grad is not None:
            return self._matrix_grad(x)
        h = 1e-5
        out = []
        for k in range(self.dim):
            e = np.zeros(self.dim)
            e[k] = h
            out.append((self._matrix(x + e) - self._matrix(x - e)) / (2 * h))
        return np.stack(out, axis=-1)

    def F(self, x, y):
        x, y = np.broadcast_arrays(_as(x), _as(y))
        A = self.matrix(x)
        return np.sqrt(np.einsum("...i,...ij,...j->...", y, A, y))

    def tensor(self, x, y):
        x, y = np.broadcast_arrays(_as(x), _as(y))
        return self.matrix(x)

    def spray(self, x, y):
        x, y = np.broadcast_arrays(_as(x), _as(y))
        A = self.matrix(x)
        dA = self.matrix_grad(x)  # dA[..., l, j, k] = d a_lj / dx^k
        t1 = 2.0 * np.einsum("...ljk,...j,...k->...l", dA, y, y)
        t2 = np.einsum("...jkl,...j,...k->...l", dA, y, y)
        return 0.25 * np.linalg.solve(A, (t1 - t2)[..., None])[..., 0]

    def dual(self, x, xi):
        x, xi = np.broadcast_arrays(_as(x), _as(xi))
        A = self.matrix(x)
        v = np.linalg.solve(A, xi[..., None])[..., 0]
        val = np.sqrt(np.maximum(np.sum(xi * v, axis=-1), 0.0))
        safe = np.where(val > 0, val, 1.0)
        return val, v / safe[..., None]

    def reverse(self):
        return self


class Randers(FinslerMetric):
    """F = sqrt(y^T a(x) y) + b(x).y with |b|_a < 1.

    The fundamental tensor and the dual norm have closed forms (the dual of a
    Randers norm is again of Randers type); the spray falls back to the
    generic formula.
    """

    family = "randers"
    has_analytic_tensor = True
    has_fast_dual = True

    def __init__(self, a_field, b_field, dim, probe=None, name="randers", params=None):
        super().__init__(dim)
        self._a = a_field
        self._b = b_field
        self.name = name
        self.params = params or {}
        if probe is None:
            g = np.linspace(-1.0, 1.0, 5)
            probe = np.stack(np.meshgrid(*([g] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
        if len(probe):
            nb = self.beta_norm(probe)
            if np.any(nb >= 1.0):
                raise InvalidInputError(f"one-form violates |b|_a < 1 (max {nb.max():.4g})")

    @classmethod
    def constant(cls, A, b):
        A, b = _as(A), _as(b)
        n = A.shape[0]
        return cls(lambda x: np.broadcast_to(A, _as(x).shape[:-1] + (n, n)).copy(),
                   lambda x: np.broadcast_to(b, _as(x).shape[:-1] + (n,)).copy(),
                   n, probe=np.zeros((1, n)), name="constant-randers",
                   params={"A": A.tolist(), "b": b.tolist()})

    def describe(self):
        return {"family": self.family, "dim": self.dim, "name": self.name, **self.params}

    def a(self, x):
        return self._a(_as(x))

    def b(self, x):
        return self._b(_as(x))

    def beta_norm(self, x):
        A, b = self.a(x), self.b(x)
        return np.sqrt(np.sum(b * np.linalg.solve(A, b[..., None])[..., 0], axis=-1))

    def F(self, x, y):
        x, y = np.broadcast_arrays(_as(x), _as(y))
        self.check_points(x)
        A, b = self.a(x), self.b(x)
        return np.sqrt(np.einsum("...i,...ij,...j->...", y, A, y)) + np.sum(b * y, axis=-1)

    def tensor(self, x, y):
        x, y = np.broadcast_arrays(_as(x), _as(y))
        self.check_points(x)
        A, b = self.a(x), self.b(x)
        Ay = np.einsum("...ij,...j->...i", A, y)
        alpha = np.sqrt(np.sum(y * Ay, axis=-1))
        ell = Ay / alpha[..., None]
        Fv = alpha + np.sum(b * y, axis=-1)
        lb = ell + b
        return ((Fv / alpha)[..., None, None] * (A - ell[..., :, None] * ell[..., None, :])
                + lb[..., :, None] * lb[..., None, :])

    def dual(self, x, xi):
        # F*(xi) = (sqrt((1 - s^2) |xi|^2_{a^-1} + <xi, b#>^2) - <xi, b#>) / (1 - s^2),
        # b# = a^{-1} b, s = |b|_a; the maximizer is the xi-gradient of F*.
        x, xi = np.broadcast_arrays(_as(x), _as(xi))
        self.check_points(x)
        A, b = self.a(x), self.b(x)
        Ainv_xi = np.linalg.solve(A, xi[..., None])[..., 0]
        bs = np.linalg.solve(A, b[..., None])[..., 0]
        c = 1.0 - np.sum(b * bs, axis=-1)
        xb = np.sum(xi * bs, axis=-1)
        q = np.sqrt(c * np.sum(xi * Ainv_xi, axis=-1) + xb * xb)
        val = (q - xb) / c
        safe = np.where(q > 0, q, 1.0)
        arg = ((c[..., None] * Ainv_xi + xb[..., None] * bs) / safe[..., None] - bs) / c[..., None]
        return val, np.where((q > 0)[..., None], arg, 0.0)


class FunkBall(Randers):
    """Funk metric of the Euclidean unit ball.

    Its indicatrix at x is the unit ball translated by -x, which gives the
    dual norm |xi| - xi.x in closed form, and it is projectively flat with
    spray G = F y / 2.
    """

    family = "funk"
    has_fast_spray = True
    has_fast_dual = True
    kernel_code = 1

    def __init__(self, dim=2):
        n = int(dim)
        eye = np.eye(n)

        def a_field(x):
            x = _as(x)
            s = 1.0 - np.sum(x * x, axis=-1)
            return ((s[..., None, None] * eye + x[..., :, None] * x[..., None, :])
                    / (s * s)[..., None, None])

        def b_field(x):
            x = _as(x)
            return x / (1.0 - np.sum(x * x, axis=-1))[..., None]

        super().__init__(a_field, b_field, n, probe=np.zeros((0, n)), name="funk")

    def describe(self):
        return {"family": self.family, "dim": self.dim}

    def check_points(self, x):
        if np.any(np.sum(_as(x) ** 2, axis=-1) >= 1.0):
            raise InvalidInputError("Funk metric is only defined for |x| < 1")

    def F(self, x, y):
        x, y = np.broadcast_arrays(_as(x), _as(y))
        self.check_points(x)
        xx = np.sum(x * x, axis=-1)
        xy = np.sum(x * y, axis=-1)
        yy = np.sum(y * y, axis=-1)
        s = 1.0 - xx
        return (np.sqrt(s * yy + xy * xy) + xy) / s

    def spray(self, x, y):
        x, y = np.broadcast_arrays(_as(x), _as(y))
        return 0.5 * self.F(x, y)[..., None] * y

    def dual(self, x, xi):
        x, xi = np.broadcast_arrays(_as(x), _as(xi))
        self.check_points(x)
        nrm = np.linalg.norm(xi, axis=-1)
        safe = np.where(nrm > 0, nrm, 1.0)
        val = nrm - np.sum(xi * x, axis=-1)
        arg = np.where((nrm > 0)[..., None], xi / safe[..., None] - x, 0.0)
        return val, arg


class ReversedMetric(FinslerMetric):
    """F~(x, y) = F(x, -y)."""

    def __init__(self, base):
        super().__init__(base.dim)
        self.base = base
        self.family = "reversed-" + base.family
        self.has_analytic_tensor = base.has_analytic_tensor
        self.has_fast_spray = base.has_fast_spray
        self.has_fast_dual = base.has_fast_dual
        self.kernel_code = None if base.kernel_code is None else base.kernel_code + 100

    def describe(self):
        return {"family": "reversed", "base": self.base.describe()}

    def check_points(self, x):
        self.base.check_points(x)

    def F(self, x, y):
        return self.base.F(x, -_as(y))

    def tensor(self, x, y):
        if self.base.has_analytic_tensor:
            return self.base.tensor(x, -_as(y))
        return fd_tensor(self, x, y)

    def spray(self, x, y):
        if self.base.has_fast_spray:
            return self.base.spray(x, -_as(y))
        return spray_formula(self, x, y)

    def dual(self, x, xi):
        if self.base.has_fast_dual:
            v, arg = self.base.dual(x, -_as(xi))
            return v, -arg
        return dual_search(self, x, xi)

    def reverse(self):
        return self.base


# ---------------------------------------------------------------------------
# generic numerical routines
# ---------------------------------------------------------------------------

def fd_tensor(m, x, y):
    """Half the y-Hessian of F^2 by central differences, step 1e-4 max(1, |y|)."""
    x, y = np.broadcast_arrays(_as(x), _as(y))
    n = m.dim
    h = HESS_STEP * np.maximum(1.0, np.linalg.norm(y, axis=-1))
    E = np.eye(n)
    signs = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=float)
    # offsets[i, j, s] = s0 e_i + s1 e_j
    offs = signs[None, None, :, 0, None] * E[:, None, None, :] + signs[None, None, :, 1, None] * E[None, :, None, :]
    Y = y[..., None, None, None, :] + h[..., None, None, None, None] * offs
    X = x[..., None, None, None, :]
    f = m.F(X, Y) ** 2
    d = f[..., 0] - f[..., 1] - f[..., 2] + f[..., 3]
    return d / (8.0 * h[..., None, None] ** 2)


def spray_formula(m, x, y, h=XDIFF_STEP):
    """G^i = 1/4 g^{il} (2 d_k g_jl - d_l g_jk) y^j y^k with central x-differences."""
    x, y = np.broadcast_arrays(_as(x), _as(y))
    n = m.dim
    g = m.tensor(x, y)
    dg = []
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        dg.append((m.tensor(x + e, y) - m.tensor(x - e, y)) / (2 * h))
    dg = np.stack(dg, axis=-3)  # dg[..., k, j, l] = d g_jl / dx^k
    t1 = 2.0 * np.einsum("...kjl,...j,...k->...l", dg, y, y)
    t2 = np.einsum("...ljk,...j,...k->...l", dg, y, y)
    return 0.25 * np.linalg.solve(g, (t1 - t2)[..., None])[..., 0]


def _golden_refine(obj, lo, hi, iters=60):
    """Batched golden-section maximization on [lo, hi]."""
    r = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo.copy(), hi.copy()
    for _ in range(iters):
        c = b - r * (b - a)
        d = a + r * (b - a)
        left = obj(c) > obj(d)
        b = np.where(left, d, b)
        a = np.where(left, a, c)
    return 0.5 * (a + b)


def dual_search(m, x, xi):
    """F*(xi) = sup xi(y) over the indicatrix, by a coarse grid plus refinement."""
    x, xi = np.broadcast_arrays(_as(x), _as(xi))
    shape = xi.shape[:-1]
    n = m.dim
    X = x.reshape(-1, n)
    XI = xi.reshape(-1, n)
    P = X.shape[0]
    dirs, par = _direction_grid(n)
    vals = (XI @ dirs.T) / m.F(X[:, None, :], dirs[None, :, :])
    k = np.argmax(vals, axis=1)
    if n == 2:
        th0 = par[k, 0]
        step = 2 * np.pi / len(dirs)

        def obj(t):
            w = directions(t)
            return np.sum(XI * w, axis=-1) / m.F(X, w)

        th = _golden_refine(obj, th0 - step, th0 + step)
        w = directions(th)
    else:
        def fun(q):
            idx = np.repeat(np.arange(P), q.shape[0] // P)
            w = _angles_to_dirs(q, n)
            return np.sum(XI[idx] * w, axis=-1) / m.F(X[idx], w)

        best, _ = zoom_maximize(fun, par[k], np.array([np.pi / 32, np.pi / 32]))
        w = _angles_to_dirs(best, n)
    yunit = w / m.F(X, w)[:, None]
    val = np.sum(XI * yunit, axis=-1)
    zero = np.linalg.norm(XI, axis=-1) == 0
    val = np.where(zero, 0.0, val)
    yunit[zero] = 0.0
    return val.reshape(shape), yunit.reshape(shape + (n,))


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def eval_F(m, x, y):
    """Finsler norm F(x, y)."""
    m.check_points(x)
    return m.F(x, y)


def fundamental_tensor(m, x, y, method="auto", check=True):
    """g_ij(x, y) = 1/2 d^2 F^2 / dy^i dy^j.

    ``method`` is ``"auto"`` (closed form when the family has one), ``"fd"``
    (central differences) or ``"analytic"``.
    """
    y = _as(y)
    if np.any(np.linalg.norm(y, axis=-1) == 0):
        raise InvalidInputError("fundamental tensor needs y != 0")
    m.check_points(x)
    if method == "fd" or (method == "auto" and not m.has_analytic_tensor):
        g = fd_tensor(m, x, y)
    elif method in ("auto", "analytic"):
        if not m.has_analytic_tensor:
            raise InvalidInputError(f"{m.family} has no closed-form tensor")
        g = m.tensor(x, y)
    else:
        raise ValueError(f"unknown method {method!r}")
    if check:
        ev = np.linalg.eigvalsh(0.5 * (g + np.swapaxes(g, -1, -2)))
        if np.any(ev[..., 0] <= 0) or not np.all(np.isfinite(ev)):
            cond = float(np.max(np.abs(ev[..., -1]) / np.maximum(np.abs(ev[..., 0]), 1e-300)))
            raise IllConditionedError("fundamental tensor is not positive definite", condition=cond)
    return g


def spray_coefficients(m, x, y, method="auto"):
    """Geodesic coefficients G^i(x, y); ``method="formula"`` forces the generic route."""
    y = _as(y)
    if np.any(np.linalg.norm(y, axis=-1) == 0):
        raise InvalidInputError("spray needs y != 0")
    m.check_points(x)
    if method == "formula":
        return spray_formula(m, x, y)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    return m.spray(x, y)


def _spray_jacobians(m, x, y, hx=1e-3, hy=1e-3):
    """dG/dx, dG/dy, d2G/dxdy, d2G/dydy by central differences of the spray."""
    n = m.dim
    E = np.eye(n)
    G = m.spray(x, y)
    Gx = np.stack([(m.spray(x + hx * E[k], y) - m.spray(x - hx * E[k], y)) / (2 * hx)
                   for k in range(n)], axis=-1)  # [..., i, k] = dG^i/dx^k
    Gy = np.stack([(m.spray(x, y + hy * E[k]) - m.spray(x, y - hy * E[k])) / (2 * hy)
                   for k in range(n)], axis=-1)
    Gxy = np.empty(G.shape + (n, n))  # [..., i, j, k] = d2G^i / dx^j dy^k
    Gyy = np.empty(G.shape + (n, n))
    for j in range(n):
        for k in range(n):
            Gxy[..., j, k] = (m.spray(x + hx * E[j], y + hy * E[k]) - m.spray(x + hx * E[j], y - hy * E[k])
                              - m.spray(x - hx * E[j], y + hy * E[k]) + m.spray(x - hx * E[j], y - hy * E[k])) / (4 * hx * hy)
            if j == k:
                Gyy[..., j, k] = (m.spray(x, y + hy * E[j]) - 2 * G + m.spray(x, y - hy * E[j])) / hy ** 2
            else:
                Gyy[..., j, k] = (m.spray(x, y + hy * (E[j] + E[k])) - m.spray(x, y + hy * (E[j] - E[k]))
                                  - m.spray(x, y - hy * (E[j] - E[k])) + m.spray(x, y - hy * (E[j] + E[k]))) / (4 * hy * hy)
    return G, Gx, Gy, Gxy, Gyy


def ricci(m, x, y, h=1e-3):
    """Ricci curvature Ric(y) = sum_i R^i_i by nested differences of the spray.

    Uses the family's best spray; the generic formula spray is itself a finite
    difference and too noisy to be differentiated twice more.
    """
    x, y = np.broadcast_arrays(_as(x), _as(y))
    if np.any(np.linalg.norm(y, axis=-1) == 0):
        raise InvalidInputError("ricci needs y != 0")
    m.check_points(x)
    if h < 1e-7:
        raise IllConditionedError("difference step too small for nested differences")
    G, Gx, Gy, Gxy, Gyy = _spray_jacobians(m, x, y, h, h)
    R = (2.0 * Gx
         - np.einsum("...j,...ijk->...ik", y, Gxy)
         + 2.0 * np.einsum("...j,...ijk->...ik", G, Gyy)
         - np.einsum("...ij,...jk->...ik", Gy, Gy))
    return np.trace(R, axis1=-2, axis2=-1)


def dual_norm(m, x, xi):
    """F*(x, xi) = sup_{F(x,y)=1} xi(y)."""
    m.check_points(x)
    return m.dual(x, xi)[0]


def dual_norm_search(m, x, xi):
    """Generic grid-plus-refinement dual norm, bypassing closed forms."""
    m.check_points(x)
    return dual_search(m, x, xi)[0]


def legendre(m, x, y):
    """L(y) = g_y(y, .) as a covector; L(0) = 0."""
    x, y = np.broadcast_arrays(_as(x), _as(y))
    m.check_points(x)
    nz = np.linalg.norm(y, axis=-1) > 0
    ys = np.where(nz[..., None], y, 1.0)
    if m.has_analytic_tensor:
        L = np.einsum("...ij,...j->...i", m.tensor(x, ys), ys)
    else:
        L = _fd_half_grad_F2(m, x, ys)
    return np.where(nz[..., None], L, 0.0)


def _fd_half_grad_F2(m, x, y):
    n = m.dim
    h = HESS_STEP * np.maximum(1.0, np.linalg.norm(y, axis=-1))[..., None]
    out = [(m.F(x, y + h * e) ** 2 - m.F(x, y - h * e) ** 2) / (4 * h[..., 0]) for e in np.eye(n)]
    return np.stack(out, axis=-1)


def legendre_inverse(m, x, xi, tol=1e-13, max_iter=50):
    """Solve L(y) = xi by damped Newton seeded from the indicatrix maximizer of xi."""
    x, xi = np.broadcast_arrays(_as(x), _as(xi))
    m.check_points(x)
    nrm = np.linalg.norm(xi, axis=-1)
    if np.any(nrm == 0):
        raise InvalidInputError("legendre_inverse needs xi != 0")
    val, arg = m.dual(x, xi)
    y = val[..., None] * arg
    res = legendre(m, x, y) - xi
    rn = np.linalg.norm(res, axis=-1) / nrm
    for _ in range(max_iter):
        if np.all(rn < tol):
            break
        g = m.tensor(x, y)
        step = np.linalg.solve(g, res[..., None])[..., 0]
        lam = np.ones(rn.shape)
        for _ in range(30):
            yn = y - lam[..., None] * step
            rnew = legendre(m, x, yn) - xi
            rnn = np.linalg.norm(rnew, axis=-1) / nrm
            bad = rnn > rn
            if not np.any(bad & (rn >= tol)):
                break
            lam = np.where(bad, 0.5 * lam, lam)
        act = rn >= tol
        y = np.where(act[..., None], yn, y)
        res = np.where(act[..., None], rnew, res)
        rn = np.where(act, rnn, rn)
    if np.any(rn >= max(tol, 1e-9)):
        raise ConvergenceError("Legendre inversion did not converge", residual=float(np.max(rn)))
    return y


def reverse_metric(m):
    return m.reverse()


class PointConstants(NamedTuple):
    reversibility: float
    uniformity: float


def _pencil_max(gx, gz):
    """Largest generalized eigenvalue of (gx, gz): sup_Y gx(Y,Y)/gz(Y,Y)."""
    if gx.shape[-1] == 2:
        a, b, d = gx[..., 0, 0], gx[..., 0, 1], gx[..., 1, 1]
        p, q, s = gz[..., 0, 0], gz[..., 0, 1], gz[..., 1, 1]
        det_z = p * s - q * q
        tr = (a * s + d * p - 2 * b * q) / det_z
        det = (a * d - b * b) / det_z
        return 0.5 * tr + np.sqrt(np.maximum(0.25 * tr * tr - det, 0.0))
    L = np.linalg.cholesky(gz)
    Li = np.linalg.inv(L)
    C = Li @ gx @ np.swapaxes(Li, -1, -2)
    return np.linalg.eigvalsh(C)[..., -1]


def constants_at(m, x, refine=True):
    """(lambda_F(x), Lambda_F(x)) by a coarse direction grid plus zoom refinement.

    Lambda_F(x) = sup g_X(Y,Y)/g_Z(Y,Y); the sup over Y is the largest
    eigenvalue of the pencil (g_X, g_Z), so only X and Z are searched.
    """
    x = _as(x)
    lam, Lam = constants_batch(m, x[None, :], refine=refine)
    return PointConstants(float(lam[0]), float(Lam[0]))


def constants_batch(m, X, refine=True, pair_grid=None):
    """Vectorized :func:`constants_at` for points X of shape (P, n)."""
    X = _as(X)
    m.check_points(X)
    n = m.dim
    P = X.shape[0]
    dirs, par = _direction_grid(n)
    rat = m.F(X[:, None, :], -dirs[None]) / m.F(X[:, None, :], dirs[None])
    k = np.argmax(rat, axis=1)
    lam = rat[np.arange(P), k]
    if pair_grid is None:
        pair_grid = 64 if n == 2 else (16, 32)
    if n == 2:
        pd, pp = _direction_grid(2, n2=pair_grid)
    else:
        pd, pp = _direction_grid(n, n3=pair_grid)
    K = len(pd)
    G = m.tensor(np.repeat(X, K, axis=0), np.tile(pd, (P, 1))).reshape(P, K, n, n)
    pen = _pencil_max(G[:, :, None], G[:, None, :])  # (P, K, K)
    flat = pen.reshape(P, -1).argmax(axis=1)
    iX, iZ = np.unravel_index(flat, (K, K))
    Lam = pen.reshape(P, -1)[np.arange(P), flat]
    if not refine:
        return lam, Lam

    d = n - 1
    if n == 2:
        w_lam = np.array([2 * np.pi / 64])
        w_pair = np.array([2 * np.pi / pair_grid] * 2)
    else:
        w_lam = np.array([np.pi / 32, np.pi / 32])
        w_pair = np.array([np.pi / pair_grid[0], np.pi / pair_grid[0]] * 2)

    def f_lam(q):
        idx = np.arange(q.shape[0]) // (q.shape[0] // P)
        w = _angles_to_dirs(q, n)
        return m.F(X[idx], -w) / m.F(X[idx], w)

    def f_pair(q):
        idx = np.arange(q.shape[0]) // (q.shape[0] // P)
        wx = _angles_to_dirs(q[:, :d], n)
        wz = _angles_to_dirs(q[:, d:], n)
        return _pencil_max(m.tensor(X[idx], wx), m.tensor(X[idx], wz))

    _, lam_r = zoom_maximize(f_lam, par[k], w_lam, levels=18)
    start = np.concatenate([pp[iX], pp[iZ]], axis=1)
    _, Lam_r = zoom_maximize(f_pair, start, w_pair, levels=18)
    moved = np.abs(Lam_r - Lam) / Lam
    if np.any(moved > 0.01):
        log.warning("uniformity constant refinement moved the grid sup by %.2f%%", 100 * moved.max())
    return np.maximum(lam, lam_r), np.maximum(Lam, Lam_r)


def constants_sup(m, points, refine_top=4):
    """Sup of lambda_F and Lambda_F over sample points, refining the best few."""
    points = _as(points)
    lam, Lam = constants_batch(m, points, refine=False)
    top = np.unique(np.concatenate([np.argsort(lam)[-refine_top:], np.argsort(Lam)[-refine_top:]]))
    lr, Lr = constants_batch(m, points[top], refine=True)
    lam[top] = np.maximum(lam[top], lr)
    Lam[top] = np.maximum(Lam[top], Lr)
    return float(lam.max()), float(Lam.max()), points[int(np.argmax(Lam))]
