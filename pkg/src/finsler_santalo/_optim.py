"""Batched derivative-free refinement used by the sup/inf searches."""
import itertools

import numpy as np


def zoom_maximize(fun, start, width, levels=20, k=5, shrink=0.4):
    """Maximize ``fun`` independently for a batch of starting points.

    ``fun`` maps parameters of shape (P, d) to values of shape (P,).  Each level
    evaluates a k**d local lattice around the current best point of every batch
    member and contracts the lattice by ``shrink``.  Returns (best_params, best_values).
    """
    best = np.array(start, dtype=float)
    if best.ndim == 1:
        best = best[:, None]
    P, d = best.shape
    width = np.broadcast_to(np.asarray(width, dtype=float), (d,)).copy()
    best_val = fun(best)
    offs = np.linspace(-1.0, 1.0, k)
    lattice = np.array(list(itertools.product(offs, repeat=d)))  # (k**d, d)
    for _ in range(levels):
        cand = best[:, None, :] + lattice[None, :, :] * width
        vals = fun(cand.reshape(-1, d)).reshape(P, -1)
        j = np.argmax(vals, axis=1)
        cv = vals[np.arange(P), j]
        better = cv > best_val
        best[better] = cand[np.arange(P), j][better]
        best_val = np.where(better, cv, best_val)
        width *= shrink
    return best, best_val


def zoom_minimize(fun, start, width, **kw):
    p, v = zoom_maximize(lambda q: -fun(q), start, width, **kw)
    return p, -v
