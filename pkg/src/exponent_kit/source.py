"""Lossy-source-coding functionals and alternating-minimisation algorithms.

P_X is the source law, d(x, y) the distortion.  As on the channel side, ``lam``
is the slope in [0, 1], ``nu`` the distortion multiplier and ``mu = lam * nu``.
Run traces record the minimised objective after each half-step.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .channel import FamilyWeights, SlopeParams, _wlog, d_t
from .iteration import iterate
from .probability import (
    INF,
    JointDist,
    conditional_renyi,
    logsumexp,
    normalise_log,
    prob_vec,
    renyi_divergence,
    safe_log,
)
from .search import maximize_over_nu

NEG_INF = -math.inf

SourceSlopeParams = SlopeParams
SourceFamilyWeights = FamilyWeights


@dataclass(frozen=True, eq=False)
class SourceProblem:
    """Source law P_X with distortion matrix d[x, y] >= 0."""

    px: np.ndarray
    distortion: np.ndarray

    def __init__(self, px, distortion, strict=True):
        p = prob_vec(px)
        d = np.array(distortion, dtype=float)
        if d.ndim != 2 or d.shape[0] != p.size:
            raise ValueError("distortion must be |X| x |Y| with one row per source symbol")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise ValueError("distortions must be finite and nonnegative")
        missing = np.flatnonzero(d.min(axis=1) > 0)
        if missing.size:
            msg = f"source symbols {missing.tolist()} have no zero-distortion reproduction"
            if strict:
                raise ValueError(msg)
            warnings.warn(msg, stacklevel=2)
        d.setflags(write=False)
        object.__setattr__(self, "px", p)
        object.__setattr__(self, "distortion", d)

    @property
    def shape(self):
        return self.distortion.shape

    @property
    def log_px(self):
        return safe_log(self.px)

    @property
    def d_max(self):
        """Smallest distortion level reachable with a constant reproduction."""
        return float(np.min(self.px @ self.distortion))

    def __eq__(self, other):
        return (isinstance(other, SourceProblem)
                and np.array_equal(self.px, other.px)
                and np.array_equal(self.distortion, other.distortion))


def _mass(q):
    return q.mass if isinstance(q, JointDist) else np.asarray(q, dtype=float)


def _check_open_lambda(lam, name):
    if not 0.0 < lam < 1.0:
        raise ValueError(f"{name} needs lambda strictly inside (0, 1), got {lam}")


def _live(prob):
    return np.broadcast_to((prob.px > 0)[:, None], prob.shape)


def _mask(arr, live):
    return np.where(live, arr, NEG_INF)


def _log_parts(p):
    pj = p if isinstance(p, JointDist) else JointDist(p)
    return (safe_log(pj.marginal_x()), safe_log(pj.marginal_y()),
            safe_log(pj.conditional_y_given_x()), safe_log(pj.conditional_x_given_y()))


# ---------------------------------------------------------------- functionals

def e0s(rho, nu, py, prob):
    """log sum_x P(x) [sum_y py(y) e^{-nu d(x,y)}]^{-rho}."""
    ls = logsumexp(safe_log(py)[None, :] - nu * prob.distortion, axis=1)
    return float(logsumexp(_mask(prob.log_px - rho * ls, prob.px > 0)))


def a_s(rho, nu, pyx, prob):
    """(1+rho) log sum_y [sum_x P e^{rho nu d} p_{Y|X}^{1+rho}]^{1/(1+rho)}."""
    if rho <= -1:
        raise ValueError("rho must exceed -1")
    with np.errstate(invalid="ignore"):
        body = prob.log_px[:, None] + rho * nu * prob.distortion + (1.0 + rho) * safe_log(pyx)
    inner = logsumexp(_mask(body, _live(prob)), axis=0)
    return float((1.0 + rho) * logsumexp(inner / (1.0 + rho)))


def sibson_information(alpha, px, pyx):
    """Sibson's mutual information of order alpha."""
    with np.errstate(divide="ignore"):
        inner = logsumexp(safe_log(px)[:, None] + alpha * safe_log(pyx), axis=0)
    return float(alpha / (alpha - 1.0) * logsumexp(inner / alpha))


def f_ar_s(rho, nu, py, pyx, prob):
    """(1/rho) log sum P e^{rho nu d} py^{-rho} p_{Y|X}^{1+rho}."""
    if rho == 0:
        raise ValueError("use f_ar_s_limit at rho = 0")
    pyx = np.asarray(pyx, dtype=float)
    live = _live(prob) & (pyx > 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        body = (prob.log_px[:, None] + rho * nu * prob.distortion
                - rho * safe_log(py)[None, :] + (1.0 + rho) * safe_log(pyx))
    body = np.where(np.isnan(body), NEG_INF, body)
    return float(logsumexp(_mask(body, live)) / rho)


def f_ar_s_limit(nu, py, pyx, prob):
    """sum P p_{Y|X} (log(p_{Y|X}/py) + nu d)."""
    pyx = np.asarray(pyx, dtype=float)
    py = np.asarray(py, dtype=float)
    joint = prob.px[:, None] * pyx
    live = joint > 0
    if np.any(np.broadcast_to(py[None, :], joint.shape)[live] <= 0):
        return INF
    with np.errstate(divide="ignore", invalid="ignore"):
        body = np.log(pyx) - np.log(py)[None, :] + nu * prob.distortion
    return float(np.sum(joint[live] * body[live]))


def theta_s_batch(lam, mu, masses, prob):
    m = np.asarray(masses, dtype=float)
    qx = m.sum(axis=-1)
    qy = m.sum(axis=-2)
    pos = m > 0
    bad = np.any(pos & ~_live(prob), axis=(-1, -2))
    with np.errstate(divide="ignore", invalid="ignore"):
        lqx = np.log(qx)[..., :, None]
        integrand = (lqx - prob.log_px[:, None]
                     + lam * (np.log(m) - lqx - np.log(qy)[..., None, :])
                     + mu * prob.distortion)
        val = np.where(pos & _live(prob), m * integrand, 0.0).sum(axis=(-1, -2))
    return np.where(bad, INF, val)


def theta_s(lam, mu, q, prob):
    """D(q_X||P_X) + lam I(q_X, q_{Y|X}) + mu E_q[d]."""
    return float(theta_s_batch(lam, mu, _mass(q), prob))


def theta_s_min_closed_lambda0(mu, prob):
    """-log sum_x P e^{-mu min_y d}; zero whenever every symbol has a zero-distortion reproduction."""
    return float(-logsumexp(_mask(prob.log_px - mu * prob.distortion.min(axis=1), prob.px > 0)))


def theta_s_min_closed_lambda1(mu, prob):
    """-log max_y sum_x P e^{-mu d(x,y)}."""
    col = logsumexp(_mask(prob.log_px[:, None] - mu * prob.distortion, _live(prob)), axis=0)
    return float(-np.max(col))


def j_st(params, t, q, p, prob):
    th = theta_s(params.lam, params.mu, q, prob)
    if params.lam == 1:
        return th
    return th + (1.0 - params.lam) * d_t(t, q, p)


# ---------------------------------------------------------------- family

def gck1_weights(lam):
    return FamilyWeights(0.0, 0.0, lam / (1.0 - lam), 0.0)


def gck2_weights():
    return FamilyWeights(0.0, 1.0, 0.0, 0.0)


def jo_source_weights(lam):
    return FamilyWeights(0.0, 1.0, lam / (1.0 - lam), 0.0)


def source_family_update(params, t, p_prev, prob, branch=None):
    """Closed-form argmin over q of j_st(q, p_prev); branch "T3" or "T4" (T3 preferred)."""
    lam, nu = params.lam, params.nu
    _check_open_lambda(lam, "source_family_update")
    in3, in4 = t.in_T3(lam), t.in_T4()
    if branch is None:
        branch = "T3" if in3 else ("T4" if in4 else None)
    if branch is None or (branch == "T3" and not in3) or (branch == "T4" and not in4):
        raise ValueError(f"weights {t.as_tuple()} have no closed-form source update at lambda={lam}")
    lpx, lpy, lpyx, lpxy = _log_parts(p_prev)
    d = prob.distortion
    live = _live(prob)
    if branch == "T3":
        a = t.t1 + t.t4
        b = t.t2 + t.t4
        with np.errstate(invalid="ignore"):
            lh = (-lam * nu * d + _wlog((1.0 - lam) * b, lpyx) + lam * lpy[None, :]) / (lam + (1.0 - lam) * b)
        q_ygx = normalise_log(lh, axis=1)
        lk3 = logsumexp(lh, axis=1)
        lqx = (prob.log_px + _wlog((1.0 - lam) * a, lpx) + (lam + (1.0 - lam) * b) * lk3) / (1.0 + (1.0 - lam) * a)
        qx = normalise_log(np.where(prob.px > 0, lqx, NEG_INF))
        return JointDist(qx[:, None] * q_ygx)
    a = t.t1 + t.t3
    b = t.t1 + t.t4
    with np.errstate(invalid="ignore"):
        lg = _mask((prob.log_px[:, None] - lam * nu * d + (1.0 - lam) * lpyx + _wlog((1.0 - lam) * b, lpxy))
                   / (1.0 + (1.0 - lam) * b), live)
    q_xgy = normalise_log(lg, axis=0)
    lk4 = logsumexp(lg, axis=0)
    lqy = (_wlog(a, lpy) + (1.0 / (1.0 - lam) + b) * lk4) / (1.0 + a)
    return JointDist(q_xgy * normalise_log(lqy)[None, :])


def _uniform_joint(prob):
    return JointDist(np.broadcast_to(prob.px[:, None] > 0, prob.shape).astype(float))


def run_source_family(params, t, prob, init=None, stop=None, branch=None):
    """Alternate q <- argmin j_st(., p) and p <- q (full-joint copy)."""
    p0 = init if init is not None else _uniform_joint(prob)

    def step(p):
        q = source_family_update(params, t, p, prob, branch)
        return q, [j_st(params, t, q, p, prob), theta_s(params.lam, params.mu, q, prob)]

    return iterate(step, p0, stop, export=lambda q: {"q": q})


# ---------------------------------------------------------------- named algorithms

def kkt_residual_source(lam, nu, py, prob):
    """One-sided optimality gap of an output law for min_py -E0s^{(-lam, nu)}.

    With S_x = sum_y py e^{-nu d} the optimum satisfies
    -log sum_x P e^{-nu d} S_x^{lam-1} >= -log sum_x P S_x^lam for all y,
    with equality on the support.  Returns max_y of the violation (>= 0).
    """
    ls = logsumexp(safe_log(py)[None, :] - nu * prob.distortion, axis=1)
    lz = logsumexp(_mask(prob.log_px + lam * ls, prob.px > 0))
    lg = logsumexp(_mask(prob.log_px[:, None] - nu * prob.distortion + (lam - 1.0) * ls[:, None], _live(prob)),
                   axis=0)
    return float(max(0.0, np.max(lg - lz)))


def gck1_step(params, py_prev, prob):
    """Output-law update (weights (0,0,lam/(1-lam),0)); at lam = 0 the rate-distortion iteration.

    Returns (q_{Y|X}, q_X, next p_Y).
    """
    lam, nu = params.lam, params.nu
    lk = safe_log(py_prev)[None, :] - nu * prob.distortion
    q_ygx = normalise_log(lk, axis=1)
    ls = logsumexp(lk, axis=1)
    qx = normalise_log(_mask(prob.log_px + lam * ls, prob.px > 0))
    return q_ygx, qx, qx @ q_ygx


def run_gck1(params, prob, py0=None, stop=None):
    """Trace alternates -E0s^{(-lam,nu)}(p_Y^{[i]}), Theta_s(q^{[i]}), ...; stops early on the KKT residual.

    At lam = 0 it is the rate-distortion iteration and the trace holds I + nu E[d] style values.
    """
    ny = prob.shape[1]
    py0 = np.full(ny, 1.0 / ny) if py0 is None else np.asarray(py0, dtype=float)
    lam, nu = params.lam, params.nu
    kkt = lambda s: kkt_residual_source(lam, nu, s[0], prob)  # noqa: E731

    if lam == 0:
        def step(state):
            py, _ = state
            q_ygx, _, nxt = gck1_step(params, py, prob)
            return (nxt, q_ygx), [f_ar_s_limit(nu, py, q_ygx, prob), f_ar_s_limit(nu, nxt, q_ygx, prob)]

        return iterate(step, (py0, None), stop, kkt=kkt,
                       export=lambda s: {"py": s[0], "pyx": s[1]})

    def step(state):
        py, _ = state
        q_ygx, qx, nxt = gck1_step(params, py, prob)
        q = JointDist(qx[:, None] * q_ygx)
        return (nxt, q), [theta_s(lam, params.mu, q, prob), -e0s(-lam, nu, nxt, prob)]

    return iterate(step, (py0, None), stop, initial=-e0s(-lam, nu, py0, prob), kkt=kkt,
                   export=lambda s: {"py": s[0], "q": s[1]})


def rate_distortion_lagrangian(nu, prob, stop=None):
    """min over test channels of I + nu E[d].  Returns (value, p_Y)."""
    tr = run_gck1(SlopeParams(0.0, nu), prob, stop=stop)
    return tr.value, tr.state["py"]


def rate_distortion(delta, prob, stop=None):
    """R(Delta) = sup_nu [min (I + nu E d) - nu Delta].  Returns (value, nu_star)."""
    if delta >= prob.d_max:
        return 0.0, 0.0
    return maximize_over_nu(lambda nu: rate_distortion_lagrangian(nu, prob, stop)[0] - nu * delta,
                            concave=True)


def gck2_step(params, pyx_prev, prob):
    """Test-channel update (weights (0,1,0,0)).  Returns (q_{X|Y} indexed [x, y], q_Y, next p_{Y|X})."""
    lam, nu = params.lam, params.nu
    _check_open_lambda(lam, "gck2_step")
    with np.errstate(invalid="ignore"):
        lg = _mask(prob.log_px[:, None] - lam * nu * prob.distortion + (1.0 - lam) * safe_log(pyx_prev),
                   _live(prob))
    q_xgy = normalise_log(lg, axis=0)
    qy = normalise_log(logsumexp(lg, axis=0) / (1.0 - lam))
    q = JointDist(q_xgy * qy[None, :])
    return q_xgy, qy, q.conditional_y_given_x()


def run_gck2(params, prob, pyx0=None, stop=None):
    """Trace alternates -A_s^{(-lam,nu)}(p_{Y|X}^{[i]}), Theta_s(q^{[i]}), ..."""
    ny = prob.shape[1]
    pyx0 = np.full(prob.shape, 1.0 / ny) if pyx0 is None else np.asarray(pyx0, dtype=float)
    lam, nu = params.lam, params.nu

    def step(state):
        pyx, _ = state
        q_xgy, qy, nxt = gck2_step(params, pyx, prob)
        q = JointDist(q_xgy * qy[None, :])
        return (nxt, q), [theta_s(lam, params.mu, q, prob), -a_s(-lam, nu, nxt, prob)]

    return iterate(step, (pyx0, None), stop, initial=-a_s(-lam, nu, pyx0, prob),
                   export=lambda s: {"pyx": s[0], "q": s[1]})


def jo_source_step(params, q_prev, prob):
    """q_next proportional to P e^{-lam nu d} q_Y^lam q_{Y|X}^{1-lam}."""
    lam = params.lam
    _check_open_lambda(lam, "jo_source_step")
    qj = q_prev if isinstance(q_prev, JointDist) else JointDist(q_prev)
    with np.errstate(invalid="ignore"):
        lw = (prob.log_px[:, None] - lam * params.nu * prob.distortion
              + lam * safe_log(qj.marginal_y())[None, :]
              + (1.0 - lam) * safe_log(qj.conditional_y_given_x()))
    return JointDist(normalise_log(_mask(lw, _live(prob))))


def run_jo_source(params, prob, init=None, stop=None):
    q0 = init if init is not None else _uniform_joint(prob)
    t = jo_source_weights(params.lam)

    def step(q):
        nxt = jo_source_step(params, q, prob)
        return nxt, [j_st(params, t, nxt, q, prob), theta_s(params.lam, params.mu, nxt, prob)]

    return iterate(step, q0, stop, export=lambda q: {"q": q})


def arimoto_source_step(rho, nu, py_prev, prob):
    """Returns (p_{Y|X}, next p_Y)."""
    if rho == 0:
        raise ValueError("rho = 0 is the rate-distortion iteration; use rate_distortion_lagrangian")
    if rho <= -1:
        raise ValueError("rho must exceed -1")
    pyx = normalise_log(safe_log(py_prev)[None, :] - nu * prob.distortion, axis=1)
    with np.errstate(invalid="ignore"):
        body = _mask(prob.log_px[:, None] + rho * nu * prob.distortion + (1.0 + rho) * safe_log(pyx), _live(prob))
    return pyx, normalise_log(logsumexp(body, axis=0) / (1.0 + rho))


def run_arimoto_source(rho, nu, prob, py0=None, stop=None):
    """Minimises |rho| F_AR,s; trace alternates sgn(rho) E0s(p_Y), sgn(rho) A_s(p_{Y|X}).

    For rho = -lam the final value is min_q Theta_s^{(lam, lam nu)}; for rho > 0 it
    is min over p_Y of E0s.
    """
    ny = prob.shape[1]
    py0 = np.full(ny, 1.0 / ny) if py0 is None else np.asarray(py0, dtype=float)
    sgn = 1.0 if rho > 0 else -1.0
    kkt = None
    if rho < 0:
        kkt = lambda s: kkt_residual_source(-rho, nu, s[0], prob)  # noqa: E731

    def step(state):
        py, _ = state
        pyx, nxt = arimoto_source_step(rho, nu, py, prob)
        return (nxt, pyx), [sgn * e0s(rho, nu, py, prob), sgn * a_s(rho, nu, pyx, prob)]

    return iterate(step, (py0, None), stop, kkt=kkt, export=lambda s: {"py": s[0], "pyx": s[1]})


def min_e0s(rho, nu, prob, stop=None):
    """min over p_Y of E0s^{(rho, nu)} for rho > 0.  Returns (value, p_Y)."""
    if rho <= 0:
        raise ValueError("min_e0s needs rho > 0")
    tr = run_arimoto_source(rho, nu, prob, stop=stop)
    py = tr.state["py"]
    return min(tr.value, e0s(rho, nu, py, prob)), py


def tilted_test_channel(nu, py, prob):
    """p*_{Y|X}(py) proportional to py e^{-nu d}."""
    return normalise_log(safe_log(py)[None, :] - nu * prob.distortion, axis=1)


def renyi_gap_source(rho, nu, py, pyx, prob):
    """Residuals of the two Renyi-gap decompositions of f_ar_s.

    residual1 = f_ar_s - (1/rho) e0s - D_{1+rho}(pyx || p*_{Y|X}(py) | p*_X(py))
    residual2 = f_ar_s - (1/rho) a_s - D_{1+rho}(p*_Y(pyx) || py)
    """
    f = f_ar_s(rho, nu, py, pyx, prob)
    ls = logsumexp(safe_log(py)[None, :] - nu * prob.distortion, axis=1)
    star_x = normalise_log(_mask(prob.log_px - rho * ls, prob.px > 0))
    star_ygx = tilted_test_channel(nu, py, prob)
    r1 = f - e0s(rho, nu, py, prob) / rho - conditional_renyi(pyx, star_ygx, star_x, 1.0 + rho, axis=1)
    star_y = _optimal_output(rho, nu, pyx, prob)
    r2 = f - a_s(rho, nu, pyx, prob) / rho - renyi_divergence(star_y, py, 1.0 + rho)
    return r1, r2


def _optimal_output(rho, nu, pyx, prob):
    with np.errstate(invalid="ignore"):
        body = _mask(prob.log_px[:, None] + rho * nu * prob.distortion + (1.0 + rho) * safe_log(pyx), _live(prob))
    return normalise_log(logsumexp(body, axis=0) / (1.0 + rho))


# ---------------------------------------------------------------- dispatch, exponents

SOURCE_ALGORITHMS = ("family", "gck1", "gck2", "jo", "arimoto")


def theta_s_min(params, prob, alg="gck1", t=None, stop=None, init=None):
    """min_q Theta_s^{(lam, lam nu)} with closed forms at lam in {0, 1}.  Returns (value, trace or None)."""
    lam, nu = params.lam, params.nu
    if lam == 0:
        return theta_s_min_closed_lambda0(0.0, prob), None
    if lam == 1:
        return theta_s_min_closed_lambda1(nu, prob), None
    if alg == "gck1":
        tr = run_gck1(params, prob, py0=init, stop=stop)
    elif alg == "gck2":
        tr = run_gck2(params, prob, pyx0=init, stop=stop)
    elif alg == "family":
        tr = run_source_family(params, t or gck1_weights(lam), prob, init=init, stop=stop)
    elif alg == "jo":
        tr = run_jo_source(params, prob, init=init, stop=stop)
    elif alg == "arimoto":
        tr = run_arimoto_source(-lam, nu, prob, py0=init, stop=stop)
    else:
        raise ValueError(f"unknown source algorithm {alg!r}")
    return tr.value, tr


def guessing_exponent(rho, delta, prob, nu_search=None, stop=None):
    """Guessing exponent E_AM = sup_nu [min_py E0s^{(rho,nu)} - rho nu Delta].  Returns (value, nu_star)."""
    if rho < 0:
        raise ValueError("guessing exponent needs rho >= 0")
    if rho == 0:
        return 0.0, 0.0
    search = nu_search or maximize_over_nu
    return search(lambda nu: min_e0s(rho, nu, prob, stop)[0] - rho * nu * delta)


def slope_value_source(lam, delta, prob, alg="gck1", t=None, stop=None):
    """G_CK^{(lam)}(Delta) = sup_nu [Theta_s min - lam nu Delta].  Returns (value, nu_star)."""
    if lam == 0:
        return 0.0, 0.0
    # a constant reproduction gives Theta_s min <= lam nu d_max, so nothing beats nu = 0;
    # near nu = 0 the iterations also converge too slowly to certify that numerically
    if delta >= prob.d_max:
        return 0.0, 0.0

    def f(nu):
        return theta_s_min(SlopeParams(lam, nu), prob, alg=alg, t=t, stop=stop)[0] - lam * nu * delta

    # an infimum of functions affine in nu, hence concave
    return maximize_over_nu(f, concave=True)


def cutoff_rate_source(lam, delta, prob, alg="gck1", stop=None, details=False):
    """R-axis intercept (1/lam) G_CK^{(lam)}(Delta) of the slope-lam supporting line.

    With ``details=True`` also returns the alternative expression
    -(1/lam) log sum_x P {sum_y p*_Y e^{-nu*(d - Delta)}}^lam evaluated at the
    optimal (nu*, p*_Y).
    """
    if lam <= 0:
        raise ValueError("cutoff rate needs lambda > 0")
    g, nu_star = slope_value_source(lam, delta, prob, alg=alg, stop=stop)
    value = g / lam
    if not details:
        return value
    if lam == 1:
        lcol = logsumexp(_mask(prob.log_px[:, None] - nu_star * prob.distortion, _live(prob)), axis=0)
        py = np.zeros(prob.shape[1])
        py[int(np.argmax(lcol))] = 1.0
    else:
        py = run_gck1(SlopeParams(lam, nu_star), prob, stop=stop).state["py"]
    ls = logsumexp(safe_log(py)[None, :] - nu_star * (prob.distortion - delta), axis=1)
    alt = float(-logsumexp(_mask(prob.log_px + lam * ls, prob.px > 0)) / lam)
    return {"value": value, "alternative": alt, "nu_star": nu_star, "py": py}
