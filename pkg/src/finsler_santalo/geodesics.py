"""Geodesic flow on the unit sphere bundle, exit times and the polar volume density.

Geodesics solve x'' = -2 G(x, x') and are integrated with classical RK4 at a
fixed step, renormalizing F(x, x') = 1 after every step.  Batched tracing to
the boundary runs through a numba kernel for the built-in metric, domain and
integrand families and through a vectorized numpy loop otherwise.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import metric as mc
from ._accel import numba_enabled
from .errors import (ConjugatePointError, DomainExitError, InvalidDomainError, InvalidInputError,
                     RunawayError)

log = logging.getLogger(__name__)

DEFAULT_DT = 1e-3
DEFAULT_T_MAX = 50.0
BISECT_ITERS = 60


# ---------------------------------------------------------------------------
# integrands on SM
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Integrand:
    """A function f(x, y) on the unit sphere bundle, batched over leading axes.

    ``code``/``params`` identify the built-in families the compiled kernel knows;
    code -1 means "python callable only".
    """
    name: str
    fn: Callable
    code: int = -1
    params: tuple = ()
    describe_params: dict = field(default_factory=dict)

    def __call__(self, x, y):
        return self.fn(np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    def reflected(self):
        """(x, y) -> f(x, -y)."""
        fn = self.fn
        p = self.params
        if self.code in (1, 2):
            p = (-p[0],) + tuple(p[1:])
        return Integrand(self.name + "(-y)", lambda x, y: fn(x, -y), self.code, p,
                         {**self.describe_params, "reflected": True})

    def describe(self):
        return {"name": self.name, **self.describe_params}


def integrand_one():
    return Integrand("one", lambda x, y: np.ones(np.shape(y)[:-1]), 0, ())


def integrand_zero():
    return Integrand("zero", lambda x, y: np.zeros(np.shape(y)[:-1]))


def integrand_coordinate(i=0):
    i = int(i)
    return Integrand("coordinate", lambda x, y: y[..., i], 1, (1.0, float(i)), {"index": i})


def integrand_bump(center=(0.1, 0.05), width=0.3, tilt=0.5):
    """exp(-|x - c|^2 / w^2) (1 + tilt y^1): smooth, and not even in y."""
    c = np.asarray(center, dtype=float)
    w, a = float(width), float(tilt)

    def fn(x, y):
        d = x - c
        return np.exp(-np.sum(d * d, axis=-1) / w ** 2) * (1.0 + a * y[..., 0])

    return Integrand("bump", fn, 2, (1.0, w, a) + tuple(c),
                     {"center": c.tolist(), "width": w, "tilt": a})


def builtin_integrand(name, **params):
    table = {"one": integrand_one, "zero": integrand_zero,
             "coordinate": integrand_coordinate, "bump": integrand_bump}
    if name not in table:
        raise InvalidInputError(f"unknown integrand {name!r}; choose from {sorted(table)}")
    return table[name](**params)


# ---------------------------------------------------------------------------
# single-trajectory records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FlowState:
    x: np.ndarray
    y: np.ndarray

    @classmethod
    def unit(cls, m, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return cls(x, y / m.F(x, y)[..., None])


@dataclass(frozen=True)
class ExitRecord:
    t_exit: float
    x_exit: np.ndarray
    y_exit: np.ndarray
    integral: float = 0.0
    chord_error: float = None  # straight-chord cross-check for projectively flat metrics


@dataclass(frozen=True)
class ExitBatch:
    t_exit: np.ndarray
    x_exit: np.ndarray
    y_exit: np.ndarray
    integral: np.ndarray
    backend: str


# ---------------------------------------------------------------------------
# numpy integrator
# ---------------------------------------------------------------------------

def _accel(m, x, v):
    try:
        return -2.0 * m.spray(x, v)
    except InvalidInputError as exc:
        raise DomainExitError(f"trajectory left the domain of the metric: {exc}") from exc


def _rk4(m, f, x, v, dt):
    """One augmented RK4 step; dt may be an array broadcasting against x[..., 0]."""
    dt = np.asarray(dt, dtype=float)
    d = dt[..., None]
    a1 = _accel(m, x, v)
    i1 = f(x, v) if f is not None else 0.0
    x2, v2 = x + 0.5 * d * v, v + 0.5 * d * a1
    a2 = _accel(m, x2, v2)
    i2 = f(x2, v2) if f is not None else 0.0
    x3, v3 = x + 0.5 * d * v2, v + 0.5 * d * a2
    a3 = _accel(m, x3, v3)
    i3 = f(x3, v3) if f is not None else 0.0
    x4, v4 = x + d * v3, v + d * a3
    a4 = _accel(m, x4, v4)
    i4 = f(x4, v4) if f is not None else 0.0
    xn = x + d / 6.0 * (v + 2 * v2 + 2 * v3 + v4)
    vn = v + d / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4)
    return xn, vn, dt / 6.0 * (i1 + 2 * i2 + 2 * i3 + i4)


def _renorm(m, x, v):
    return v / m.F(x, v)[..., None]


def flow(m, s, t, dt=DEFAULT_DT, renormalize=True):
    """phi_t(s); negative t runs the flow backward.  Batched over leading axes of s."""
    if dt <= 0:
        raise InvalidInputError("dt must be positive")
    x = np.asarray(s.x, dtype=float)
    v = np.asarray(s.y, dtype=float)
    nsteps = int(np.ceil(abs(t) / dt - 1e-9))
    if nsteps == 0:
        return FlowState(x.copy(), v.copy())
    h = t / nsteps
    drift = 0.0
    for _ in range(nsteps):
        x, v, _ = _rk4(m, None, x, v, h)
        if renormalize:
            fv = m.F(x, v)
            drift = max(drift, float(np.max(np.abs(fv - 1.0))))
            v = v / fv[..., None]
    if drift > 1e-8:
        log.debug("flow renormalization: max per-step drift %.3e", drift)
    return FlowState(x, v)


def _boundary_steps(m, dom, X0, V0, dt, direction):
    """Per-trajectory step for starts on the boundary.

    A boundary start with a nearly tangent velocity returns to the boundary
    after roughly t* = -2 e'(0) / e''(0), e(t) = h(x(t)); using dt <= t*/32 keeps
    at least ~32 steps on such short chords.
    """
    g = dom.grad(X0)
    Hs = dom.hessian(X0)
    e1 = direction * np.sum(g * V0, axis=-1)
    G = m.spray(X0, V0)
    e2 = np.einsum("...i,...ij,...j->...", V0, Hs, V0) - 2.0 * np.sum(g * G, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        tstar = np.where(e2 > 0, -2.0 * e1 / e2, np.inf)
    return np.clip(tstar / 32.0, 1e-12, dt)


def _trace_numpy(m, dom, f, X0, V0, dts, direction, t_max):
    B = X0.shape[0]
    t_out = np.zeros(B)
    x_out = np.zeros_like(X0)
    v_out = np.zeros_like(V0)
    i_out = np.zeros(B)
    idx = np.arange(B)
    x, v = X0.copy(), V0.copy()
    t = np.zeros(B)
    acc = np.zeros(B)
    step = dts * direction
    while idx.size:
        xn, vn, inc = _rk4(m, f, x, v, step)
        hit = dom.h(xn) >= 0.0
        if np.any(hit):
            xs, vs, hs = x[hit], v[hit], step[hit]
            lo = np.zeros(hs.size)
            hi = np.ones(hs.size)
            for _ in range(BISECT_ITERS):
                mid = 0.5 * (lo + hi)
                xb, _, _ = _rk4(m, None, xs, vs, mid * hs)
                neg = dom.h(xb) < 0.0
                lo = np.where(neg, mid, lo)
                hi = np.where(neg, hi, mid)
            sfrac = 0.5 * (lo + hi)
            xb, vb, ib = _rk4(m, f, xs, vs, sfrac * hs)
            k = idx[hit]
            t_out[k] = t[hit] + sfrac * dts[k]
            x_out[k] = xb
            v_out[k] = _renorm(m, xb, vb)
            i_out[k] = acc[hit] + direction * ib
        keep = ~hit
        idx = idx[keep]
        x, v = xn[keep], _renorm(m, xn[keep], vn[keep])
        acc = acc[keep] + direction * (inc[keep] if np.ndim(inc) else inc)
        t = t[keep] + dts[idx]
        step = step[keep]
        if idx.size and np.any(t > t_max):
            k = idx[np.argmax(t > t_max)]
            raise RunawayError(f"no boundary exit before t_max={t_max} for x={X0[k]}, y={V0[k]}")
    return t_out, x_out, v_out, i_out


def kernel_supported(m, dom, f):
    return (m.kernel_code in (0, 1, 101) and dom.kernel_code == 0
            and (f is None or f.code in (0, 1, 2)))


def trace_to_exit(m, dom, X0, V0, f=None, dt=DEFAULT_DT, t_max=DEFAULT_T_MAX, backward=False,
                  from_boundary=False, backend="auto"):
    """Trace a batch of unit vectors until the geodesic meets h = 0.

    Returns exit times, exit states and the line integral of ``f`` along each
    trajectory (with respect to |dt|).  ``backward`` traces phi_{-t}.
    ``backend`` is "auto", "numba" or "numpy".
    """
    X0 = np.atleast_2d(np.asarray(X0, dtype=float))
    V0 = np.atleast_2d(np.asarray(V0, dtype=float))
    if dt <= 0:
        raise InvalidInputError("dt must be positive")
    direction = -1.0 if backward else 1.0
    if from_boundary:
        dts = _boundary_steps(m, dom, X0, V0, dt, direction)
    else:
        dts = np.full(X0.shape[0], float(dt))
    use_kernel = backend == "numba" or (backend == "auto" and numba_enabled())
    if use_kernel and kernel_supported(m, dom, f):
        from ._kernels import LEFT_METRIC, RUNAWAY, trace_batch
        fcode = 0 if f is None else f.code
        fp = np.asarray(f.params if f is not None and f.params else (0.0,), dtype=float)
        integ_on = f is not None
        t, x, v, I, status = trace_batch(int(m.kernel_code), np.asarray(dom.center, dtype=float),
                                         float(dom.params["radius"]), fcode, fp, X0, V0, dts,
                                         direction, float(t_max), BISECT_ITERS)
        if np.any(status == RUNAWAY):
            k = int(np.argmax(status == RUNAWAY))
            raise RunawayError(f"no boundary exit before t_max={t_max} for x={X0[k]}, y={V0[k]}")
        if np.any(status == LEFT_METRIC):
            k = int(np.argmax(status == LEFT_METRIC))
            raise DomainExitError(f"trajectory from x={X0[k]}, y={V0[k]} left the metric's domain")
        return ExitBatch(t, x, v, I if integ_on else np.zeros_like(I), "numba")
    if backend == "numba" and not kernel_supported(m, dom, f):
        raise InvalidInputError("no compiled kernel for this metric/domain/integrand combination")
    t, x, v, I = _trace_numpy(m, dom, f, X0, V0, dts, direction, t_max)
    return ExitBatch(t, x, v, I, "numpy")


def exit_time(m, dom, s, dt=DEFAULT_DT, t_max=DEFAULT_T_MAX, tol=1e-12, backend="auto"):
    """First boundary hit of the forward geodesic through s."""
    x = np.asarray(s.x, dtype=float)
    y = np.asarray(s.y, dtype=float)
    hx = float(dom.h(x))
    on_boundary = abs(hx) <= 1e-9
    if hx > 1e-9:
        raise InvalidDomainError(f"start point {x} is outside the domain")
    if on_boundary and float(np.dot(dom.grad(x), y)) >= -tol:
        raise InvalidDomainError("boundary start must point strictly inward")
    b = trace_to_exit(m, dom, x[None], y[None], dt=dt, t_max=t_max, from_boundary=on_boundary,
                      backend=backend)
    xe = b.x_exit[0]
    chord = None
    if m.family == "funk" and dom.name == "ball":
        # forward Funk geodesics are straight: intersect the ray with the sphere
        c, R = np.asarray(dom.center), dom.params["radius"]
        u = y / np.linalg.norm(y)
        p = x - c
        bq = np.dot(p, u)
        lam = -bq + np.sqrt(bq * bq - (np.dot(p, p) - R * R))
        chord = float(np.linalg.norm(xe - (x + lam * u)))
    return ExitRecord(float(b.t_exit[0]), xe, b.y_exit[0], 0.0, chord)


# ---------------------------------------------------------------------------
# variational flow and the polar density
# ---------------------------------------------------------------------------

def _spray_first_jacobians(m, x, v, h=1e-5):
    n = m.dim
    E = np.eye(n)
    Gx = np.stack([(m.spray(x + h * E[k], v) - m.spray(x - h * E[k], v)) / (2 * h)
                   for k in range(n)], axis=-1)
    Gy = np.stack([(m.spray(x, v + h * E[k]) - m.spray(x, v - h * E[k])) / (2 * h)
                   for k in range(n)], axis=-1)
    return Gx, Gy


def _var_rhs(m, x, v, J, K):
    try:
        Gx, Gy = _spray_first_jacobians(m, x, v)
        a = -2.0 * m.spray(x, v)
    except InvalidInputError as exc:
        raise DomainExitError(f"variational flow left the metric's domain: {exc}") from exc
    return v, a, K, -2.0 * (Gx @ J + Gy @ K)


def _var_step(m, x, v, J, K, h):
    d = h[:, None]
    D = h[:, None, None]
    k1 = _var_rhs(m, x, v, J, K)
    k2 = _var_rhs(m, x + 0.5 * d * k1[0], v + 0.5 * d * k1[1], J + 0.5 * D * k1[2], K + 0.5 * D * k1[3])
    k3 = _var_rhs(m, x + 0.5 * d * k2[0], v + 0.5 * d * k2[1], J + 0.5 * D * k2[2], K + 0.5 * D * k2[3])
    k4 = _var_rhs(m, x + d * k3[0], v + d * k3[1], J + D * k3[2], K + D * k3[3])
    x = x + d / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    v = v + d / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    J = J + D / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
    K = K + D / 6 * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
    return x, v, J, K


def _tangent_frame(m, x, y):
    """Basis of T_y S_x = ker g_y(y, .), shape (B, n, n-1)."""
    L = mc.legendre(m, x, y)
    frames = []
    for row in L:
        _, _, Vt = np.linalg.svd(row[None, :])
        frames.append(Vt[1:].T)
    return np.asarray(frames)


def polar_density_nodes(m, X, Y, T, dt=DEFAULT_DT):
    """F(t, y) at node times T (B, K), increasing in each row, from starts (X, Y).

    F(t, y) = sqrt(det g(gamma, gamma')) |det[gamma', J]| / (sqrt(det g(x, y)) |det[y, E]|),
    where J solves the linearized geodesic equation with J(0) = 0, J'(0) = E and
    E spans T_y S_x.  The measure density sigma cancels between e^tau and the
    polar Jacobian, so the result does not depend on the chosen measure.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    T = np.atleast_2d(np.asarray(T, dtype=float))
    B, n = X.shape
    Y = Y / m.F(X, Y)[:, None]
    Efr = _tangent_frame(m, X, Y)
    base = np.sqrt(np.linalg.det(mc.fundamental_tensor(m, X, Y)))
    base = base * np.abs(np.linalg.det(np.concatenate([Y[:, :, None], Efr], axis=2)))
    x, v = X.copy(), Y.copy()
    J = np.zeros((B, n, n - 1))
    K = Efr.copy()
    gaps = np.diff(np.concatenate([np.zeros((B, 1)), T], axis=1), axis=1)
    if np.any(gaps < 0):
        raise InvalidInputError("node times must be non-negative and increasing")
    sub = max(1, int(np.ceil(np.max(gaps) / dt)))
    out = np.zeros(T.shape)
    t_now = np.zeros(B)
    sign0 = None
    for k in range(T.shape[1]):
        h = gaps[:, k] / sub
        for _ in range(sub):
            x, v, J, K = _var_step(m, x, v, J, K, h)
            v = v / m.F(x, v)[:, None]
            t_now = t_now + h
            det = np.linalg.det(np.concatenate([v[:, :, None], J], axis=2))
            if sign0 is None:
                sign0 = np.sign(det)
            flipped = (np.sign(det) != sign0) & (t_now > 0)
            if np.any(flipped):
                j = int(np.argmax(flipped))
                raise ConjugatePointError(f"Jacobian changed sign along the geodesic from x={X[j]}",
                                          r=float(t_now[j]))
        sq = np.sqrt(np.linalg.det(mc.fundamental_tensor(m, x, v)))
        out[:, k] = sq * np.abs(det) / base
    return out


def polar_density(m, kind, x, y, r, dt=DEFAULT_DT):
    """F(r, y) = e^{tau(gamma_y(r))} sigma_hat_x(r, y); ``kind`` cancels (see polar_density_nodes)."""
    del kind
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise InvalidInputError("polar_density needs r > 0")
    shape = np.broadcast_shapes(x.shape[:-1], y.shape[:-1], r.shape)
    X = np.broadcast_to(x, shape + x.shape[-1:]).reshape(-1, m.dim)
    Y = np.broadcast_to(y, shape + y.shape[-1:]).reshape(-1, m.dim)
    R = np.broadcast_to(r, shape).reshape(-1)
    vals = polar_density_nodes(m, X, Y, R[:, None], dt)[:, 0]
    return float(vals[0]) if shape == () else vals.reshape(shape)


def flow_to_nodes(m, X, Y, T, dt=DEFAULT_DT):
    """States phi_t at node times T (B, K) for each start (X[b], Y[b])."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    T = np.atleast_2d(np.asarray(T, dtype=float))
    gaps = np.diff(np.concatenate([np.zeros((X.shape[0], 1)), T], axis=1), axis=1)
    sub = max(1, int(np.ceil(np.max(np.abs(gaps)) / dt)))
    x, v = X.copy(), Y / m.F(X, Y)[:, None]
    xs, vs = [], []
    for k in range(T.shape[1]):
        h = gaps[:, k] / sub
        for _ in range(sub):
            x, v, _ = _rk4(m, None, x, v, h)
            v = _renorm(m, x, v)
        xs.append(x)
        vs.append(v)
    return np.stack(xs, axis=1), np.stack(vs, axis=1)


def forward_ball(m, x, r, n_dirs=128, dt=DEFAULT_DT):
    """The forward metric ball {d(x, z) < r} of a planar metric, as a star domain.

    Valid where geodesics from x minimize up to length r; its boundary is traced
    by phi_r over the indicatrix and interpolated with a trigonometric series.
    """
    from .domains import Domain
    if m.dim != 2:
        raise InvalidInputError("forward_ball is planar")
    x = np.asarray(x, dtype=float)
    th = 2 * np.pi * np.arange(n_dirs) / n_dirs
    dirs = np.stack([np.cos(th), np.sin(th)], -1)
    X = np.broadcast_to(x, dirs.shape)
    pts, _ = flow_to_nodes(m, X, dirs, np.full((n_dirs, 1), float(r)), dt)
    d = pts[:, 0] - x
    ang = np.mod(np.arctan2(d[:, 1], d[:, 0]), 2 * np.pi)
    order = np.argsort(ang)
    ang, rad = ang[order], np.linalg.norm(d, axis=1)[order]
    # resample the radius onto a uniform angular grid, then Fourier interpolate
    grid = 2 * np.pi * np.arange(n_dirs) / n_dirs
    rg = np.interp(grid, ang, rad, period=2 * np.pi)
    coef = np.fft.rfft(rg) / n_dirs
    k = np.arange(coef.size)

    def radius_fn(a):
        a = np.asarray(a, dtype=float)
        ph = np.exp(1j * k * a[..., None])
        w = np.where(k == 0, 1.0, 2.0)
        if n_dirs % 2 == 0:
            w = np.where(k == n_dirs // 2, 1.0, w)
        R = np.real(np.sum(w * coef * ph, axis=-1))
        dR = np.real(np.sum(w * coef * 1j * k * ph, axis=-1))
        return R, dR

    return Domain.star(radius_fn, 2, x, 1.5 * float(np.max(rad)))
