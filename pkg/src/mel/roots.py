"""Bracketing root finders used by the solvers."""
from __future__ import annotations

import numpy as np
from scipy import optimize


def bisect_root(f, lo, hi, maxiter=200):
    """Bisection on a sign-changing bracket; returns the midpoint of the final bracket."""
    flo, fhi = float(f(lo)), float(f(hi))
    if flo == 0.0:
        return float(lo)
    if fhi == 0.0:
        return float(hi)
    if flo * fhi > 0:
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    return float(optimize.bisect(lambda x: float(f(x)), lo, hi, xtol=1e-15,
                                 rtol=4 * np.finfo(float).eps, maxiter=maxiter,
                                 disp=False))


def _evaluate(f, xs):
    try:
        ys = np.asarray(f(xs), dtype=float)
        if ys.shape == xs.shape:
            return ys
    except (TypeError, ValueError):
        pass
    return np.array([float(f(x)) for x in xs])


def sign_change_roots(f, lo, hi, n=10_000):
    """All roots of f on [lo, hi] visible as sign changes on an n-point grid."""
    xs = np.linspace(lo, hi, n + 1)
    ys = _evaluate(f, xs)
    roots = [float(x) for x in xs[ys == 0.0]]
    idx = np.nonzero(ys[:-1] * ys[1:] < 0)[0]
    for i in idx:
        roots.append(bisect_root(f, xs[i], xs[i + 1]))
    return sorted(roots)
