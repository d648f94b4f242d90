"""Legendre-Fenchel transforms and exponent-versus-rate curves.

Each slope (lambda or rho) yields a supporting line of the exponent curve; the
curve is the upper envelope of those lines over a slope grid.  Slopes are
independent, so they are mapped in parallel with a thread pool capped by
EXPONENT_KIT_THREADS.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import SlopeParams, max_e0, theta_min, theta_min_closed_lambda1
from .config import DEFAULT_TOL, thread_count
from .probability import JointDist, uniform_on_support
from .search import maximize_over_nu, minimize_over_nu
from .source import guessing_exponent, slope_value_source


@dataclass
class SampledFunction:
    params: np.ndarray
    values: np.ndarray
    witness: np.ndarray = None

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.params.shape != self.values.shape or self.params.ndim != 1:
            raise ValueError("params and values must be 1-D of equal length")
        if self.params.size and np.any(np.diff(self.params) <= 0):
            raise ValueError("params must be strictly increasing")


@dataclass
class ExponentCurve:
    rate_grid: np.ndarray
    exponent: np.ndarray
    lambda_star: np.ndarray
    nu_star: np.ndarray
    slopes: dict = field(default_factory=dict)

    def rows(self):
        return list(zip(self.rate_grid.tolist(), self.exponent.tolist(),
                        self.lambda_star.tolist(), self.nu_star.tolist()))


def lft_1d(f, y_grid):
    """Discrete conjugate F*(y) = max_i (x_i y - F(x_i)); +inf samples are skipped."""
    y = np.asarray(y_grid, dtype=float)
    if f.params.size == 0 or y.size == 0:
        raise ValueError("empty input to lft_1d")
    ok = np.isfinite(f.values)
    if not np.any(ok):
        raise ValueError("no finite samples")
    x, fx = f.params[ok], f.values[ok]
    table = y[:, None] * x[None, :] - fx[None, :]
    idx = np.argmax(table, axis=1)
    return SampledFunction(y, table[np.arange(y.size), idx], witness=x[idx])


def _pmap(fn, items):
    n = thread_count()
    if n == 1:
        return [fn(v) for v in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def default_lambda_grid(n=DEFAULT_TOL.slope_points):
    return np.linspace(0.0, 1.0, n)


def default_rho_grid(n=DEFAULT_TOL.slope_points, rho_max=DEFAULT_TOL.rho_max):
    return np.concatenate([[0.0], np.geomspace(1e-3, rho_max, n - 1)])


# state key of each run that can seed the next run at a nearby nu
_WARM_KEY = {"tz": "px", "arimoto": "px", "algB": "pxy", "family": "q", "jo": "q", "param-arimoto": "p"}


def _blend(state, prob, keep=0.9):
    """Mix a warm state with the uniform start so that no entry is stuck at zero."""
    if state is None:
        return None
    if isinstance(state, JointDist):
        u = uniform_on_support(prob.support).mass
        return JointDist(keep * state.mass + (1 - keep) * u)
    st = np.asarray(state, dtype=float)
    return keep * st + (1 - keep) / st.size


def _constant_cost(prob):
    return bool(np.all(prob.cost == prob.cost[0]))


# ---------------------------------------------------------------- channel

def slope_value_channel(lam, gamma, prob, alg="arimoto", stop=None):
    """G_DK^{(lam)}(Gamma) = sup_nu [Theta^{(lam, lam nu)} - lam nu Gamma].  Returns (value, nu_star)."""
    if gamma < prob.gamma_min - 1e-15:
        raise ValueError(f"Gamma={gamma} is below the minimum cost {prob.gamma_min}")
    if lam == 0:
        return 0.0, 0.0

    warm = {}

    def f(nu):
        if lam == 1:
            return theta_min_closed_lambda1(nu, prob) - nu * gamma
        val, tr = theta_min(SlopeParams(lam, nu), prob, alg=alg, stop=stop, init=_blend(warm.get(alg), prob))
        if tr is not None and alg in _WARM_KEY:
            warm[alg] = tr.state[_WARM_KEY[alg]]
        return val - lam * nu * gamma

    if _constant_cost(prob) and gamma >= prob.cost[0]:
        return f(0.0), 0.0
    # an infimum of functions affine in nu, hence concave
    return maximize_over_nu(f, concave=True)


def error_slope_value_channel(rho, gamma, prob, stop=None):
    """inf_nu [rho nu Gamma + max_p E0^{(rho,nu)}].  Returns (value, nu_star)."""
    if gamma < prob.gamma_min - 1e-15:
        raise ValueError(f"Gamma={gamma} is below the minimum cost {prob.gamma_min}")
    if rho == 0:
        return 0.0, 0.0

    def f(nu):
        return rho * nu * gamma + max_e0(rho, nu, prob, stop)[0]

    if _constant_cost(prob) and gamma >= prob.cost[0]:
        return f(0.0), 0.0
    return minimize_over_nu(f)


def cutoff_rate_channel(lam, gamma, prob, alg="arimoto", stop=None):
    """R-axis intercept -G_DK^{(lam)}(Gamma)/lam of the slope-lam supporting line."""
    if lam <= 0:
        raise ValueError("cutoff rate needs lambda > 0")
    return -slope_value_channel(lam, gamma, prob, alg, stop)[0] / lam


def _envelope(r, slopes, values, nus, sign):
    """max over slopes s of (sign * s * R + value)."""
    table = sign * np.outer(r, slopes) + values[None, :]
    idx = np.argmax(table, axis=1)
    return table[np.arange(r.size), idx], slopes[idx], nus[idx]


def channel_exponent_curve(prob, gamma, r_grid, mode="strong_converse", slope_grid=None, alg="arimoto", stop=None):
    """Strong-converse exponent G_DK(R, Gamma) or random-coding exponent E_r(R, Gamma) on ``r_grid``."""
    r = np.asarray(r_grid, dtype=float)
    if mode == "strong_converse":
        lams = default_lambda_grid() if slope_grid is None else np.asarray(slope_grid, dtype=float)
        res = _pmap(lambda l: slope_value_channel(l, gamma, prob, alg, stop), lams)
        sign = 1.0
    elif mode == "error":
        lams = np.linspace(0.0, 1.0, DEFAULT_TOL.slope_points) if slope_grid is None else np.asarray(slope_grid)
        res = _pmap(lambda s: error_slope_value_channel(s, gamma, prob, stop), lams)
        sign = -1.0
    else:
        raise ValueError(f"unknown mode {mode!r}")
    vals = np.array([v for v, _ in res])
    nus = np.array([n for _, n in res])
    exp, ls, ns = _envelope(r, lams, vals, nus, sign)
    return ExponentCurve(r, exp, ls, ns, {"slope": lams, "value": vals, "nu": nus})


# ---------------------------------------------------------------- source

def source_exponent_curve(prob, delta, r_grid, mode="strong_converse", slope_grid=None, alg="family", stop=None):
    """Strong-converse exponent G_CK(R, Delta) or Blahut's error exponent E_B(R, Delta) on ``r_grid``.

    For the strong-converse mode ``alg`` picks the inner minimiser; "arimoto"
    gives the rho in [-1, 0) form, whose rho -> 0 limit supplies the zero line.
    """
    r = np.asarray(r_grid, dtype=float)
    if mode == "strong_converse":
        lams = default_lambda_grid() if slope_grid is None else np.asarray(slope_grid, dtype=float)
        res = _pmap(lambda l: slope_value_source(l, delta, prob, alg=alg, stop=stop), lams)
        sign = -1.0
    elif mode == "error":
        lams = default_rho_grid() if slope_grid is None else np.asarray(slope_grid, dtype=float)
        res = [(-v, n) for v, n in _pmap(lambda s: guessing_exponent(s, delta, prob, stop=stop), lams)]
        sign = 1.0
    else:
        raise ValueError(f"unknown mode {mode!r}")
    vals = np.array([v for v, _ in res])
    nus = np.array([n for _, n in res])
    exp, ls, ns = _envelope(r, lams, vals, nus, sign)
    return ExponentCurve(r, exp, ls, ns, {"slope": lams, "value": vals, "nu": nus})
