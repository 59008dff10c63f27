"""First eigenvalue of the nonlinear Laplacian by Rayleigh-quotient descent.

Functions are continuous piecewise linear on a triangulation whose interior
vertices are the nodes of a rectangular grid inside the domain and whose
outer vertices lie on the boundary (value 0).  On each triangle du is
constant, so

    E(u) = sum_T |T| sigma(c_T) F*(c_T, du_T)^2  /  u^T M u,

with M the sigma-weighted P1 mass matrix.  The derivative of F*(xi) in xi is
the dual maximizer, which gives the exact gradient of the discrete quotient.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.optimize import brentq
from scipy.sparse.linalg import splu
from scipy.spatial import Delaunay

from .errors import ConvergenceError, InvalidInputError, StepSizeError
from .measures import sigma

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# meshes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Mesh:
    nodes: np.ndarray        # (P, 2)
    tris: np.ndarray         # (T, 3)
    free: np.ndarray         # (P,) bool, False on the Dirichlet boundary
    spacing: float
    periodic: bool = False
    period: float = None
    grad_op: sp.csr_matrix = field(default=None, repr=False)  # (2T, P): rows 2t, 2t+1
    areas: np.ndarray = field(default=None, repr=False)
    centroids: np.ndarray = field(default=None, repr=False)

    @property
    def n_free(self):
        return int(self.free.sum())


def _finish(nodes, tris, free, spacing, periodic=False, period=None, coords=None):
    """Barycentric gradients, areas and the sparse gradient operator.

    ``coords`` (T, 3, 2) gives unwrapped vertex coordinates for periodic meshes.
    """
    V = nodes[tris] if coords is None else coords
    e1 = V[:, 1] - V[:, 0]
    e2 = V[:, 2] - V[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    flip = det < 0
    if np.any(flip):
        tris = tris.copy()
        tris[flip] = tris[flip][:, [0, 2, 1]]
        V = V.copy()
        V[flip] = V[flip][:, [0, 2, 1]]
        det = np.abs(det)
    keep = det > 1e-14 * spacing ** 2
    tris, V, det = tris[keep], V[keep], det[keep]
    area = 0.5 * det
    # gradient of the barycentric coordinate of vertex k: rot(edge opposite k) / (2 area)
    grads = np.empty((len(tris), 3, 2))
    for k in range(3):
        a, b = V[:, (k + 1) % 3], V[:, (k + 2) % 3]
        d = b - a
        grads[:, k, 0] = d[:, 1] / det
        grads[:, k, 1] = -d[:, 0] / det
    T = len(tris)
    rows = np.concatenate([2 * np.arange(T)[:, None].repeat(3, 1).ravel(),
                           (2 * np.arange(T) + 1)[:, None].repeat(3, 1).ravel()])
    cols = np.concatenate([tris.ravel(), tris.ravel()])
    vals = np.concatenate([grads[:, :, 0].ravel(), grads[:, :, 1].ravel()])
    G = sp.csr_matrix((vals, (rows, cols)), shape=(2 * T, len(nodes)))
    cent = V.mean(axis=1)
    if periodic:
        cent = np.mod(cent, period)
    return Mesh(nodes, tris, free, spacing, periodic, period, G, area, cent)


def _boundary_curve(dom, n):
    th = 2 * np.pi * np.arange(n) / n
    dirs = np.stack([np.cos(th), np.sin(th)], -1)
    return dom.center + dom.boundary_radius(dirs)[:, None] * dirs


def grid(dom, resolution=128):
    """Mesh of a planar star-shaped domain from a resolution x resolution grid.

    Grid nodes at distance >= 0.3 h from the boundary are free; boundary nodes
    are spaced ~h in arc length.
    """
    if dom.dim != 2:
        raise InvalidInputError("spectral meshes are planar")
    if resolution < 32:
        raise InvalidInputError("grid resolution must be at least 32")
    dense = _boundary_curve(dom, 64 * resolution)
    lo, hi = dense.min(axis=0), dense.max(axis=0)
    h = float(np.max(hi - lo)) / (resolution - 1)
    axes = [np.arange(lo[k], hi[k] + 0.5 * h, h) for k in range(2)]
    G = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, 2)
    hv = dom.h(G)
    dist = -hv / np.linalg.norm(dom.grad(G), axis=-1)
    inner = G[(hv < 0) & (dist >= 0.3 * h)]
    seg = np.linalg.norm(np.diff(np.vstack([dense, dense[:1]]), axis=0), axis=1)
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    nb = max(16, int(np.ceil(arc[-1] / h)))
    s = arc[-1] * np.arange(nb) / nb
    closed = np.vstack([dense, dense[:1]])
    bnd = np.stack([np.interp(s, arc, closed[:, k]) for k in range(2)], -1)
    bnd = dom.project_to_boundary(bnd)
    nodes = np.vstack([inner, bnd])
    free = np.zeros(len(nodes), dtype=bool)
    free[: len(inner)] = True
    tri = Delaunay(nodes).simplices
    cent = nodes[tri].mean(axis=1)
    tri = tri[dom.h(cent) < 0]
    return _finish(nodes, tri, free, h)


def torus_grid(resolution=64, period=2 * np.pi):
    """Periodic mesh of the flat torus [0, period)^2."""
    N = int(resolution)
    h = period / N
    ii, jj = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    nodes = np.stack([ii * h, jj * h], -1).reshape(-1, 2)
    idx = lambda i, j: (i % N) * N + (j % N)
    i, j = ii.ravel(), jj.ravel()
    t1 = np.stack([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)], -1)
    t2 = np.stack([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)], -1)
    base = np.stack([i * h, j * h], -1)
    off1 = np.array([[0, 0], [h, 0], [h, h]])
    off2 = np.array([[0, 0], [h, h], [0, h]])
    coords = np.concatenate([base[:, None] + off1, base[:, None] + off2])
    tris = np.concatenate([t1, t2])
    return _finish(nodes, tris, np.ones(len(nodes), dtype=bool), h, True, period, coords)


@dataclass
class GridFunction:
    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.mesh.nodes),):
            raise InvalidInputError("values must have one entry per mesh node")
        if not np.all(np.isfinite(self.values)):
            raise InvalidInputError("non-finite grid values")
        if np.any(self.values[~self.mesh.free] != 0):
            raise InvalidInputError("Dirichlet nodes must carry zero")

    @classmethod
    def sample(cls, mesh, fn):
        v = np.where(mesh.free, fn(mesh.nodes), 0.0)
        return cls(mesh, v)


# ---------------------------------------------------------------------------
# the discrete quotient
# ---------------------------------------------------------------------------

class _Quotient:
    def __init__(self, m, kind, mesh, order_indicatrix=64):
        self.m, self.mesh = m, mesh
        self.sig = sigma(m, kind, mesh.centroids, order_indicatrix)
        w = mesh.areas * self.sig
        self.w = w
        T = len(mesh.tris)
        loc = (np.ones((3, 3)) + np.eye(3)) / 12.0
        r = np.repeat(mesh.tris, 3, axis=1).ravel()
        c = np.tile(mesh.tris, (1, 3)).ravel()
        v = (w[:, None, None] * loc[None]).reshape(T, 9).ravel()
        P = len(mesh.nodes)
        self.M = sp.csr_matrix((v, (r, c)), shape=(P, P))
        Gd = mesh.grad_op
        W2 = sp.diags(np.repeat(w, 2))
        self.K = (Gd.T @ W2 @ Gd).tocsr()
        self.mass_vec = np.asarray(self.M.sum(axis=1)).ravel()

    def grads(self, u):
        return (self.mesh.grad_op @ u).reshape(-1, 2)

    def numerator(self, u, with_grad=False):
        g = self.grads(u)
        val, arg = self.m.dual(self.mesh.centroids, g)
        N = float(np.sum(self.w * val * val))
        if not with_grad:
            return N
        dN = 2.0 * (self.mesh.grad_op.T @ ((self.w * val)[:, None] * arg).ravel())
        return N, dN

    def denominator(self, u):
        return float(u @ (self.M @ u))

    def value(self, u):
        D = self.denominator(u)
        if D <= 0:
            raise InvalidInputError("zero function has no Rayleigh quotient")
        return self.numerator(u) / D

    def gradient(self, u):
        D = self.denominator(u)
        N, dN = self.numerator(u, True)
        return N / D, (dN - 2.0 * (N / D) * (self.M @ u)) / D

    def project(self, u):
        """Mean-zero projection with respect to the measure (periodic meshes)."""
        if not self.mesh.periodic:
            return u
        return u - (self.mass_vec @ u) / self.mass_vec.sum()


def energy(m, kind, dom, u, order_indicatrix=64):
    """E(u) = int F*(du)^2 dmu / int u^2 dmu for a GridFunction u."""
    del dom  # the mesh carries the domain
    return _Quotient(m, kind, u.mesh, order_indicatrix).value(u.values)


def energy_gradient(m, kind, u, order_indicatrix=64):
    """(E(u), dE/du) with respect to all nodal values."""
    return _Quotient(m, kind, u.mesh, order_indicatrix).gradient(u.values)


@dataclass
class EigenResult:
    eigenvalue: float
    u: GridFunction
    iterations: int
    converged: bool
    trace: list
    status: str

    def to_dict(self):
        return {"eigenvalue": self.eigenvalue, "iterations": self.iterations,
                "converged": self.converged, "status": self.status, "trace": list(self.trace)}


def minimize(m, kind, dom=None, grid_or_mesh=128, iters=500, u0=None, rtol=1e-10,
             order_indicatrix=64, seed=0):
    """Preconditioned descent on the discrete Rayleigh quotient.

    The preconditioner is the sigma-weighted Euclidean stiffness matrix; with
    the normalization u^T M u = 1 a unit step in the Euclidean case is exactly
    an inverse-iteration step.  Energies are monotone nonincreasing thanks to
    Armijo backtracking.  Periodic meshes work in the mean-zero class.
    """
    if isinstance(grid_or_mesh, Mesh):
        mesh = grid_or_mesh
    else:
        if dom is None:
            raise InvalidInputError("a domain is required to build the grid")
        mesh = grid(dom, int(grid_or_mesh))
    Q = _Quotient(m, kind, mesh, order_indicatrix)
    free = mesh.free
    idx = np.flatnonzero(free)
    Kf = Q.K[idx][:, idx]
    if mesh.periodic:
        Kf = Kf + 1e-2 * Q.M[idx][:, idx]
    lu = splu(Kf.tocsc())
    if u0 is None:
        if mesh.periodic:
            rng = np.random.default_rng(seed)
            x = mesh.nodes
            u = np.cos(x[:, 0]) + 0.5 * np.sin(x[:, 1]) + 1e-3 * rng.standard_normal(len(x))
        else:
            u = np.where(free, np.maximum(-dom.h(mesh.nodes), 0.0), 0.0)
    else:
        u = np.array(u0.values if isinstance(u0, GridFunction) else u0, dtype=float)
    u = Q.project(np.where(free, u, 0.0))
    u /= np.sqrt(Q.denominator(u))
    R, g = Q.gradient(u)
    trace = [R]
    status, converged = "max-iterations", False
    for it in range(1, iters + 1):
        d = np.zeros_like(u)
        d[idx] = -lu.solve(g[idx])
        d = Q.project(d)
        slope = float(g @ d)
        if slope >= 0:
            status, converged = "stationary", True
            break
        alpha = 0.5
        for _ in range(50):
            un = u + alpha * d
            Rn = Q.value(un)
            if Rn <= R + 1e-4 * alpha * slope:
                break
            alpha *= 0.5
        else:
            if (R - Rn) <= rtol * R:
                status, converged = "stall", True
                break
            raise StepSizeError(f"line search failed at iteration {it} (quotient {R:.6g})")
        un /= np.sqrt(Q.denominator(un))
        dec = (R - Rn) / R
        u = un
        R, g = Q.gradient(u)
        trace.append(R)
        if dec < rtol:
            status, converged = "stall", True
            break
    if not np.isfinite(R):
        raise ConvergenceError("Rayleigh quotient became non-finite", residual=float("nan"))
    return EigenResult(float(R), GridFunction(mesh, u), len(trace) - 1, converged, trace, status)


# ---------------------------------------------------------------------------
# radial Sturm-Liouville oracles
# ---------------------------------------------------------------------------

def _shoot(lam, n, s_end, weight_ratio, s0):
    """u'' + (J'/J) u' + lam u = 0 from the regular center; returns u(s_end)."""
    u0 = 1.0 - lam * s0 ** 2 / (2 * n)
    du0 = -lam * s0 / n

    def rhs(s, z):
        return [z[1], -weight_ratio(s) * z[1] - lam * z[0]]

    sol = solve_ivp(rhs, (s0, s_end), [u0, du0], method="DOP853", rtol=1e-12, atol=1e-14)
    return sol.y[0, -1]


def _first_zero_lambda(n, s_end, weight_ratio, scale):
    s0 = 1e-6 * s_end
    f = lambda lam: _shoot(lam, n, s_end, weight_ratio, s0)
    step = 0.25 * scale
    a, fa = 0.0, 1.0
    for k in range(1, 400):
        b = k * step
        fb = f(b)
        if fa > 0 >= fb:
            return brentq(f, a, b, xtol=1e-15 * scale, rtol=1e-14, maxiter=200)
        a, fa = b, fb
    raise ConvergenceError("no sign change found while bracketing the eigenvalue", residual=float(fa))


def disk_eigenvalue(n=2, radius=1.0):
    """First Dirichlet eigenvalue of the flat n-ball by radial shooting."""
    ratio = lambda s: (n - 1) / s
    return _first_zero_lambda(n, radius, ratio, 1.0 / radius ** 2)


def hemisphere_eigenvalue(n, D):
    """First Dirichlet eigenvalue of the hemisphere of the round n-sphere with diameter D.

    Shooting in the geodesic distance from the pole on the sphere of radius
    D / pi, with weight sin^{n-1}(s / r), up to the equator s = D / 2.
    """
    if n < 2 or D <= 0:
        raise InvalidInputError("need n >= 2 and D > 0")
    r = D / np.pi
    ratio = lambda s: (n - 1) * np.cos(s / r) / (r * np.sin(s / r))
    return _first_zero_lambda(n, 0.5 * D, ratio, 1.0 / r ** 2)
