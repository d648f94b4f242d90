"""One-dimensional searches over the Lagrange multiplier nu."""

import numpy as np
from scipy.optimize import minimize_scalar

from .config import DEFAULT_TOL


def maximize_over_nu(f, nu_max=DEFAULT_TOL.nu_max, points=DEFAULT_TOL.nu_grid_points,
                     doublings=DEFAULT_TOL.nu_doublings, xtol=DEFAULT_TOL.nu_xtol, concave=False):
    """sup over nu >= 0 of f(nu).  Returns (value, nu_star).

    A coarse grid on [0, nu_max] locates the bracket (the range is doubled while
    the best point sits on the right edge), then a bounded Brent search refines
    inside the neighbouring grid cells.  With ``concave=True`` a function that
    does not increase just off nu = 0 is maximised at nu = 0 without
    refinement.  The grid also serves as the fallback when f is not unimodal.
    """
    cache = {}

    def g(nu):
        nu = float(nu)
        if nu not in cache:
            cache[nu] = float(f(nu))
        return cache[nu]

    hi = float(nu_max)
    for _ in range(doublings + 1):
        grid = np.linspace(0.0, hi, points)
        vals = np.array([g(v) for v in grid])
        i = int(np.argmax(vals))
        if i < points - 1:
            break
        hi *= 2.0
    if concave and i == 0 and g(0.0) >= g(xtol):
        return g(0.0), 0.0
    lo_b = grid[max(i - 1, 0)]
    hi_b = grid[min(i + 1, points - 1)]
    best_nu, best = float(grid[i]), float(vals[i])
    if hi_b > lo_b:
        res = minimize_scalar(lambda v: -g(v), bounds=(lo_b, hi_b), method="bounded",
                              options={"xatol": xtol})
        if -res.fun > best:
            best_nu, best = float(res.x), float(-res.fun)
    # endpoints of the bracket are exact candidates too (e.g. optimum at nu = 0)
    for cand in (lo_b, hi_b):
        if g(cand) > best:
            best_nu, best = float(cand), g(cand)
    return best, best_nu


def minimize_over_nu(f, **kw):
    """inf over nu >= 0 of f(nu).  Returns (value, nu_star)."""
    val, nu = maximize_over_nu(lambda v: -f(v), **kw)
    return -val, nu
