"""Compact domains described by an implicit function h (h < 0 inside).

Boundaries are assumed star-shaped about ``center``; every quadrature in the
package parameterizes the boundary as center + R(w) w over Euclidean unit
directions w.
"""
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidDomainError

_BALL, _IMPLICIT = 0, -1


@dataclass(frozen=True)
class Domain:
    h: Callable
    grad: Callable
    dim: int
    center: np.ndarray
    extent: float  # upper bound on the distance from center to the boundary
    convex_minimizing: bool = True
    hess: Optional[Callable] = None
    name: str = "implicit"
    params: dict = field(default_factory=dict)
    kernel_code: int = _IMPLICIT

    # -- constructors ---------------------------------------------------------
    @classmethod
    def ball(cls, radius, dim=2, center=None, convex_minimizing=True):
        """Euclidean ball; h = (|x-c|^2 - R^2) / (2R) so |grad h| = 1 on the boundary."""
        R = float(radius)
        c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)

        def h(x):
            d = np.asarray(x, dtype=float) - c
            return (np.sum(d * d, axis=-1) - R * R) / (2 * R)

        def grad(x):
            return (np.asarray(x, dtype=float) - c) / R

        def hess(x):
            x = np.asarray(x, dtype=float)
            return np.broadcast_to(np.eye(dim) / R, x.shape + (dim,)).copy()

        return cls(h, grad, dim, c, 1.5 * R, convex_minimizing, hess, "ball",
                   {"radius": R, "center": c.tolist()}, _BALL)

    @classmethod
    def ellipse(cls, a, b, convex_minimizing=True):
        a, b = float(a), float(b)
        s = np.array([1 / a ** 2, 1 / b ** 2])

        def h(x):
            x = np.asarray(x, dtype=float)
            return 0.5 * (np.sum(s * x * x, axis=-1) - 1.0)

        def grad(x):
            return s * np.asarray(x, dtype=float)

        def hess(x):
            x = np.asarray(x, dtype=float)
            return np.broadcast_to(np.diag(s), x.shape + (2,)).copy()

        return cls(h, grad, 2, np.zeros(2), 1.5 * max(a, b), convex_minimizing, hess,
                   "ellipse", {"a": a, "b": b})

    @classmethod
    def rectangle(cls, width, height, center=None):
        """Axis-parallel rectangle; h is only Lipschitz, so it serves the spectral
        module and membership tests, not boundary flows."""
        a, b = 0.5 * float(width), 0.5 * float(height)
        c = np.zeros(2) if center is None else np.asarray(center, dtype=float)

        def h(x):
            d = np.abs(np.asarray(x, dtype=float) - c)
            return np.maximum(d[..., 0] - a, d[..., 1] - b)

        def grad(x):
            d = np.asarray(x, dtype=float) - c
            first = (np.abs(d[..., 0]) - a) >= (np.abs(d[..., 1]) - b)
            g = np.zeros(d.shape)
            g[..., 0] = np.where(first, np.sign(d[..., 0]), 0.0)
            g[..., 1] = np.where(first, 0.0, np.sign(d[..., 1]))
            return g

        return cls(h, grad, 2, c, 1.5 * float(np.hypot(a, b)), True, None, "rectangle",
                   {"width": 2 * a, "height": 2 * b})

    @classmethod
    def star(cls, radius_fn, dim=2, center=None, extent=None, convex_minimizing=True):
        """Star-shaped planar domain {|x - c| < R(angle)}; ``radius_fn`` must be smooth
        and return (R, dR/dangle) for an array of angles."""
        if dim != 2:
            raise InvalidDomainError("star domains are planar")
        c = np.zeros(2) if center is None else np.asarray(center, dtype=float)

        def h(x):
            d = np.asarray(x, dtype=float) - c
            R, _ = radius_fn(np.arctan2(d[..., 1], d[..., 0]))
            return np.linalg.norm(d, axis=-1) - R

        def grad(x):
            d = np.asarray(x, dtype=float) - c
            r = np.linalg.norm(d, axis=-1)
            th = np.arctan2(d[..., 1], d[..., 0])
            _, dR = radius_fn(th)
            er = d / r[..., None]
            et = np.stack([-er[..., 1], er[..., 0]], axis=-1)
            return er - (dR / r)[..., None] * et

        if extent is None:
            extent = 1.5 * float(np.max(radius_fn(np.linspace(0, 2 * np.pi, 721))[0]))
        return cls(h, grad, 2, c, extent, convex_minimizing, None, "star", {})

    def describe(self):
        return {"type": self.name, **self.params, "convex_minimizing": self.convex_minimizing}

    # -- helpers ----------------------------------------------------------------
    def inside(self, x):
        return self.h(x) < 0

    def hessian(self, x, step=1e-5):
        if self.hess is not None:
            return self.hess(x)
        x = np.asarray(x, dtype=float)
        cols = []
        for k in range(self.dim):
            e = np.zeros(self.dim)
            e[k] = step
            cols.append((self.grad(x + e) - self.grad(x - e)) / (2 * step))
        return np.stack(cols, axis=-1)

    def boundary_radius(self, dirs, iters=100):
        """R(w) with h(center + R w) = 0, by bisection along each ray."""
        dirs = np.asarray(dirs, dtype=float)
        if self.name == "ball":
            return np.full(dirs.shape[:-1], self.params["radius"])
        lo = np.zeros(dirs.shape[:-1])
        hi = np.full(dirs.shape[:-1], self.extent)
        if np.any(self.h(self.center + hi[..., None] * dirs) <= 0):
            raise InvalidDomainError("boundary not reached within the domain extent")
        if np.any(self.h(self.center) >= 0):
            raise InvalidDomainError("center is not inside the domain")
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            neg = self.h(self.center + mid[..., None] * dirs) < 0
            lo = np.where(neg, mid, lo)
            hi = np.where(neg, hi, mid)
            if np.max(hi - lo) < 1e-15:
                break
        return 0.5 * (lo + hi)

    def project_to_boundary(self, x, iters=3):
        """Newton steps along grad h to make |h| tiny."""
        x = np.array(x, dtype=float)
        for _ in range(iters):
            g = self.grad(x)
            x = x - (self.h(x) / np.sum(g * g, axis=-1))[..., None] * g
        return x


@dataclass(frozen=True)
class BoundaryQuadrature:
    points: np.ndarray     # (N, n)
    weights: np.ndarray    # Euclidean surface element weights (N,)
    normals: np.ndarray    # Euclidean outward unit normals (N, n)
    order: int


def _sphere_rule(order, dim):
    """Directions and solid-angle weights: trapezoid (n=2) / Gauss x trapezoid (n=3)."""
    if dim == 2:
        th = 2 * np.pi * np.arange(order) / order
        return np.stack([np.cos(th), np.sin(th)], -1), np.full(order, 2 * np.pi / order), th
    if dim == 3:
        npol = max(order // 2, 2)
        u, wu = np.polynomial.legendre.leggauss(npol)
        psi = 2 * np.pi * np.arange(order) / order
        U, S = np.meshgrid(u, psi, indexing="ij")
        s = np.sqrt(1 - U ** 2)
        dirs = np.stack([s * np.cos(S), s * np.sin(S), U], -1).reshape(-1, 3)
        w = (wu[:, None] * np.full(order, 2 * np.pi / order)[None, :]).ravel()
        return dirs, w, None
    raise InvalidDomainError("only dimensions 2 and 3 are supported")


def boundary_quadrature(dom, order=256):
    """Boundary nodes with Euclidean area weights R^{n-1} |grad h| / (grad h . w) dOmega."""
    dirs, w, _ = _sphere_rule(order, dom.dim)
    R = dom.boundary_radius(dirs)
    pts = dom.center + R[:, None] * dirs
    if dom.name != "ball":
        pts = dom.project_to_boundary(pts)
    g = dom.grad(pts)
    gn = np.linalg.norm(g, axis=-1)
    if np.any(gn < 1e-12):
        raise InvalidDomainError("degenerate gradient of h on the boundary")
    cosang = np.sum(g * dirs, axis=-1) / gn
    if np.any(cosang <= 0):
        raise InvalidDomainError("boundary is not star-shaped about the center")
    weights = w * R ** (dom.dim - 1) / cosang
    return BoundaryQuadrature(pts, weights, g / gn[:, None], order)


def domain_quadrature(dom, n_radial=32, n_angular=64):
    """Polar (Gauss in r, trapezoid/product in angle) rule for integrals over {h < 0}."""
    dirs, w, _ = _sphere_rule(n_angular, dom.dim)
    R = dom.boundary_radius(dirs)
    t, wt = np.polynomial.legendre.leggauss(n_radial)
    s = 0.5 * (t + 1.0)  # nodes on [0, 1]
    r = R[:, None] * s[None, :]
    pts = dom.center + r[..., None] * dirs[:, None, :]
    wts = w[:, None] * (0.5 * wt)[None, :] * R[:, None] * r ** (dom.dim - 1)
    return pts.reshape(-1, dom.dim), wts.ravel()
