"""Channel-coding functionals and alternating-minimisation algorithms.

Slope conventions: ``lam`` in [0, 1] is the strong-converse slope, ``nu`` the
cost multiplier, and the cost weight inside Theta is ``mu = lam * nu``.  The
signed parameter ``rho`` of Gallager/Arimoto functionals equals ``-lam`` on the
strong-converse side and is positive for error exponents.

Every ``run_*`` function returns an IterationTrace whose ``objective`` list is
the minimised objective after each half-step.
"""

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOL
from .iteration import StoppingRule, iterate
from .probability import (
    INF,
    JointDist,
    compose,
    conditional_kl,
    conditional_renyi,
    kernel,
    kl_divergence,
    logsumexp,
    mutual_information,
    normalise_log,
    renyi_divergence,
    safe_log,
    uniform_on_support,
    xlogx_ratio,
)

NEG_INF = -math.inf


@dataclass(frozen=True, eq=False)
class ChannelProblem:
    """DMC W(y|x) (rows indexed by x) with a nonnegative input cost c(x)."""

    W: np.ndarray
    cost: np.ndarray

    def __init__(self, W, cost=None):
        w = kernel(W)
        c = np.zeros(w.shape[0]) if cost is None else np.array(cost, dtype=float).ravel()
        if c.shape != (w.shape[0],):
            raise ValueError("cost must have one entry per input symbol")
        if not np.all(np.isfinite(c)) or np.any(c < 0):
            raise ValueError("costs must be finite and nonnegative")
        c.setflags(write=False)
        object.__setattr__(self, "W", w)
        object.__setattr__(self, "cost", c)

    @property
    def shape(self):
        return self.W.shape

    @property
    def support(self):
        return self.W > 0

    @property
    def log_w(self):
        return safe_log(self.W)

    @property
    def gamma_min(self):
        return float(self.cost.min())

    def __eq__(self, other):
        return (isinstance(other, ChannelProblem)
                and np.array_equal(self.W, other.W)
                and np.array_equal(self.cost, other.cost))


@dataclass(frozen=True)
class SlopeParams:
    lam: float
    nu: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {self.lam}")
        if self.nu < 0:
            raise ValueError(f"nu must be nonnegative, got {self.nu}")

    @property
    def mu(self):
        return self.lam * self.nu

    @property
    def rho(self):
        return -self.lam


@dataclass(frozen=True)
class FamilyWeights:
    t1: float
    t2: float
    t3: float
    t4: float

    def __post_init__(self):
        if min(self.t1, self.t2, self.t3, self.t4) < 0:
            raise ValueError("family weights must be nonnegative")

    def as_tuple(self):
        return (self.t1, self.t2, self.t3, self.t4)

    # channel manifolds
    def in_T1(self, tol=1e-12):
        return abs(self.t1 - (self.t2 + 1.0)) <= tol

    def in_T2(self, lam, tol=1e-12):
        if lam >= 1:
            return False
        return abs(self.t4 - (self.t3 + lam / (1.0 - lam))) <= tol

    # source manifolds
    def in_T3(self, lam, tol=1e-12):
        if lam >= 1:
            return False
        return abs(self.t3 - (self.t4 + lam / (1.0 - lam))) <= tol

    def in_T4(self, tol=1e-12):
        return abs(self.t2 - (self.t1 + 1.0)) <= tol


def tz_weights():
    return FamilyWeights(1.0, 0.0, 0.0, 0.0)


def algb_weights(lam):
    return FamilyWeights(0.0, 0.0, 0.0, lam / (1.0 - lam))


def jo_weights(lam):
    return FamilyWeights(1.0, 0.0, 0.0, lam / (1.0 - lam))


# ---------------------------------------------------------------- helpers

def _mask(arr, support):
    return np.where(support, arr, NEG_INF)


def _wlog(coef, logarr):
    """coef * log-array with 0 * (-inf) taken as 0."""
    if coef == 0:
        return np.zeros_like(logarr)
    return coef * logarr


def _tilted_log_w(prob, scale):
    """log W(y|x) + scale * c(x) on the support, -inf elsewhere."""
    with np.errstate(invalid="ignore"):
        return _mask(prob.log_w + scale * prob.cost[:, None], prob.support)


def _mass(q):
    return q.mass if isinstance(q, JointDist) else np.asarray(q, dtype=float)


def _check_open_lambda(lam, name):
    if not 0.0 < lam < 1.0:
        raise ValueError(f"{name} needs lambda strictly inside (0, 1), got {lam}")


def _check_rho(rho):
    if rho <= -1:
        raise ValueError(f"rho must exceed -1, got {rho}")


# ---------------------------------------------------------------- functionals

def e0(rho, nu, px, prob):
    """Gallager's E0 with cost tilt: -log sum_y [sum_x px (W e^{rho nu c})^{1/(1+rho)}]^{1+rho}."""
    _check_rho(rho)
    lw = _tilted_log_w(prob, rho * nu) / (1.0 + rho)
    inner = logsumexp(safe_log(px)[:, None] + lw, axis=0)
    return float(-logsumexp((1.0 + rho) * inner))


def e0_gap_bound(rho, nu, px, prob):
    """Certified bound on |optimal E0 - e0(px)| over input laws (max for rho > 0, min for rho < 0).

    With V = (W e^{rho nu c})^{1/(1+rho)}, alpha = px V and F = sum alpha^{1+rho},
    the gradient of F is (1+rho) beta with beta = V alpha^rho.  F is convex in px
    for rho > 0 and concave for rho in (-1, 0), so linearising at px bounds the
    optimum by (1+rho) beta_ext - rho F, with beta_ext the min (resp. max) of beta.
    """
    _check_rho(rho)
    if rho == 0:
        raise ValueError("no E0 optimisation at rho = 0")
    lv = _tilted_log_w(prob, rho * nu) / (1.0 + rho)
    la = logsumexp(safe_log(px)[:, None] + lv, axis=0)
    lf = logsumexp((1.0 + rho) * la)
    with np.errstate(invalid="ignore"):
        lb = logsumexp(_mask(lv + rho * la[None, :], prob.support), axis=1)
    lb = np.where(np.isnan(lb), np.inf if rho < 0 else -np.inf, lb)
    b_ext = np.exp((np.min(lb) if rho > 0 else np.max(lb)) - lf)
    bound = (1.0 + rho) * b_ext - rho
    if not bound > 0 or not np.isfinite(bound):
        return INF
    return abs(float(np.log(bound)))


def e0_slope_limit(nu, px, prob):
    """Limit of e0/rho as rho -> 0: I(px, W) - nu E[c]."""
    px = np.asarray(px, dtype=float)
    return mutual_information(px, prob.W) - nu * float(px @ prob.cost)


def a_func(rho, nu, pxy, prob):
    """rho log sum_x e^{-nu c} [sum_y p(x|y)^{-rho} W]^{-1/rho}; pxy indexed [x, y]."""
    if rho == 0:
        raise ValueError("a_func is undefined at rho = 0")
    _check_rho(rho)
    with np.errstate(invalid="ignore"):
        inner = logsumexp(_mask(-rho * safe_log(pxy) + prob.log_w, prob.support), axis=1)
        terms = -nu * prob.cost - inner / rho
    terms = np.where(np.isnan(terms), NEG_INF, terms)
    return float(rho * logsumexp(terms))


def f_ar(rho, nu, px, pxy, prob):
    """Arimoto's two-argument functional -(1/rho) log sum px^{1+rho} p(x|y)^{-rho} W e^{rho nu c}."""
    if rho == 0:
        raise ValueError("use f_ar_limit at rho = 0")
    _check_rho(rho)
    px = np.asarray(px, dtype=float)
    live = prob.support & (px[:, None] > 0)
    with np.errstate(invalid="ignore"):
        body = ((1.0 + rho) * safe_log(px)[:, None] - rho * safe_log(pxy)
                + prob.log_w + rho * nu * prob.cost[:, None])
    return float(-logsumexp(_mask(body, live)) / rho)


def f_ar_limit(nu, px, pxy, prob):
    """sum px W log(p(x|y) e^{-nu c} / px), the rho -> 0 form of f_ar."""
    px = np.asarray(px, dtype=float)
    pxy = np.asarray(pxy, dtype=float)
    joint = px[:, None] * prob.W
    live = joint > 0
    if np.any(pxy[live] <= 0):
        return NEG_INF
    with np.errstate(divide="ignore", invalid="ignore"):
        body = np.log(pxy) - nu * prob.cost[:, None] - np.log(px)[:, None]
    return float(np.sum(joint[live] * body[live]))


def theta_batch(lam, mu, masses, prob):
    """Theta for a stack of joint masses shaped (..., |X|, |Y|)."""
    m = np.asarray(masses, dtype=float)
    qx = m.sum(axis=-1)
    qy = m.sum(axis=-2)
    pos = m > 0
    bad = np.any(pos & ~prob.support, axis=(-1, -2))
    with np.errstate(divide="ignore", invalid="ignore"):
        lm = np.log(m)
        integrand = ((1.0 - lam) * (lm - np.log(qx)[..., :, None])
                     + lam * np.log(qy)[..., None, :]
                     - prob.log_w + mu * prob.cost[:, None])
        val = np.where(pos & prob.support, m * integrand, 0.0).sum(axis=(-1, -2))
    return np.where(bad, INF, val)


def theta(lam, mu, q, prob):
    """D(q_{Y|X}||W|q_X) - lam I(q_X, q_{Y|X}) + mu E[c]; +inf off the support of W."""
    return float(theta_batch(lam, mu, _mass(q), prob))


def theta_min_closed_lambda0(mu, prob):
    return mu * prob.gamma_min


def theta_min_closed_lambda1(mu, prob):
    """-log sum_y max_x W(y|x) e^{-mu c(x)}."""
    return float(-logsumexp(np.max(_tilted_log_w(prob, -mu), axis=0)))


def theta_argmin_lambda1(mu, prob):
    """Optimal joint at lam = 1: q_Y proportional to the column maxima, q_{X|Y} a point mass.

    Ties are broken by the lowest input index.
    """
    lw = _tilted_log_w(prob, -mu)
    best = np.argmax(lw, axis=0)
    qy = normalise_log(lw[best, np.arange(lw.shape[1])])
    mass = np.zeros(prob.shape)
    mass[best, np.arange(lw.shape[1])] = qy
    return JointDist(mass)


def _joint_kl(q, p):
    return xlogx_ratio(q, p)


def d_t(t, q, p):
    """Weighted divergence t1 D_X + t2 D_{Y|X} + t3 D_Y + t4 D_{X|Y}."""
    qj = q if isinstance(q, JointDist) else JointDist(q)
    pj = p if isinstance(p, JointDist) else JointDist(p)
    qm = qj.mass
    total = 0.0
    if t.t1:
        total += t.t1 * kl_divergence(qj.marginal_x(), pj.marginal_x())
    if t.t2:
        qx = qj.marginal_x()
        total += t.t2 * max(_joint_kl(qm, qx[:, None] * pj.conditional_y_given_x()), 0.0)
    if t.t3:
        total += t.t3 * kl_divergence(qj.marginal_y(), pj.marginal_y())
    if t.t4:
        qy = qj.marginal_y()
        total += t.t4 * max(_joint_kl(qm, pj.conditional_x_given_y() * qy[None, :]), 0.0)
    return total


def j_t(params, t, q, p, prob):
    """Surrogate objective Theta(q) + (1 - lam) D_t(q, p)."""
    th = theta(params.lam, params.mu, q, prob)
    if params.lam == 1:
        return th
    return th + (1.0 - params.lam) * d_t(t, q, p)


# ---------------------------------------------------------------- family

def _log_parts(p):
    pj = p if isinstance(p, JointDist) else JointDist(p)
    return (safe_log(pj.marginal_x()), safe_log(pj.marginal_y()),
            safe_log(pj.conditional_y_given_x()), safe_log(pj.conditional_x_given_y()))


def family_update(params, t, p_prev, prob, branch=None):
    """Closed-form argmin over q of j_t(q, p_prev).

    ``branch`` may force "T1" or "T2"; by default T1 is used when t lies in it.
    """
    lam, nu = params.lam, params.nu
    _check_open_lambda(lam, "family_update")
    in1, in2 = t.in_T1(), t.in_T2(lam)
    if branch is None:
        branch = "T1" if in1 else ("T2" if in2 else None)
    if branch is None or (branch == "T1" and not in1) or (branch == "T2" and not in2):
        raise ValueError(f"weights {t.as_tuple()} have no closed-form update at lambda={lam}")
    lpx, lpy, lpyx, lpxy = _log_parts(p_prev)
    lv = _tilted_log_w(prob, -lam * nu)
    S = prob.support
    if branch == "T1":
        a = t.t2 + t.t3
        b = t.t2 + t.t4
        with np.errstate(invalid="ignore"):
            lg = _mask((lpx[:, None] + _wlog(b, lpxy) + lv / (1.0 - lam)) / (1.0 + b), S)
        q_xgy = normalise_log(lg, axis=0)
        lk1 = logsumexp(lg, axis=0)
        lqy = (_wlog((1.0 - lam) * a, lpy) + (1.0 - lam) * (1.0 + b) * lk1) / (1.0 + (1.0 - lam) * a)
        qy = normalise_log(lqy)
        return JointDist(q_xgy * qy[None, :])
    a = t.t2 + t.t3
    cp = t.t1 + t.t3
    with np.errstate(invalid="ignore"):
        lh = _mask((_wlog((1.0 - lam) * a, lpyx) + lam * lpxy + lv) / (1.0 + (1.0 - lam) * a), S)
    q_ygx = normalise_log(lh, axis=1)
    lk2 = logsumexp(lh, axis=1)
    lqx = (_wlog((1.0 - lam) * cp, lpx) + (1.0 + (1.0 - lam) * a) * lk2) / (lam + (1.0 - lam) * cp)
    qx = normalise_log(lqx)
    return JointDist(qx[:, None] * q_ygx)


def run_family(params, t, prob, init=None, stop=None, branch=None):
    """Alternate q <- argmin j_t(., p) and p <- q from a full-support start."""
    p0 = init if init is not None else uniform_on_support(prob.support)

    def step(p):
        q = family_update(params, t, p, prob, branch)
        return q, [j_t(params, t, q, p, prob), theta(params.lam, params.mu, q, prob)]

    return iterate(step, p0, stop, export=lambda q: {"q": q})


# ---------------------------------------------------------------- named algorithms

def tz_step(params, px_prev, prob):
    """One sweep of the input-distribution algorithm (weights (1,0,0,0)).

    Returns (q_{X|Y} indexed [x, y], q_Y, next p_X).
    """
    lam, nu = params.lam, params.nu
    if lam == 0:
        raise ValueError("the input-distribution update is frozen at lambda = 0; use the closed form")
    _check_open_lambda(lam, "tz_step")
    lg = safe_log(px_prev)[:, None] + _tilted_log_w(prob, -lam * nu) / (1.0 - lam)
    q_xgy = normalise_log(lg, axis=0)
    qy = normalise_log((1.0 - lam) * logsumexp(lg, axis=0))
    px_next = q_xgy @ qy
    return q_xgy, qy, px_next


def run_tz(params, prob, px0=None, stop=None):
    """Trace alternates E0^{(-lam,nu)}(p^{[i]}), Theta(q^{[i]}), E0(p^{[i+1]}), ..."""
    n = prob.shape[0]
    px0 = np.full(n, 1.0 / n) if px0 is None else np.asarray(px0, dtype=float)
    rho = -params.lam

    def step(state):
        px, _ = state
        q_xgy, qy, px_next = tz_step(params, px, prob)
        q = JointDist(q_xgy * qy[None, :])
        return (px_next, q), [theta(params.lam, params.mu, q, prob), e0(rho, params.nu, px_next, prob)]

    return iterate(step, (px0, None), stop, initial=e0(rho, params.nu, px0, prob),
                   kkt=lambda s: e0_gap_bound(rho, params.nu, s[0], prob),
                   export=lambda s: {"px": s[0], "q": s[1]})


def algb_step(params, pxy_prev, prob):
    """One sweep of the backward-conditional algorithm (weights (0,0,0,lam/(1-lam))).

    Returns (q_{Y|X}, q_X, next p(x|y) indexed [x, y]).  At lam = 0 the
    geometric-mean capacity update is used.
    """
    lam, nu = params.lam, params.nu
    if lam >= 1:
        raise ValueError("the backward-conditional update degenerates at lambda = 1; use the closed form")
    S = prob.support
    lp = safe_log(pxy_prev)
    if lam == 0:
        q_ygx = np.asarray(prob.W, dtype=float)
        with np.errstate(invalid="ignore"):
            geo = np.where(S, prob.W * lp, 0.0).sum(axis=1)
        qx = normalise_log(-nu * prob.cost + geo)
    else:
        with np.errstate(invalid="ignore"):
            lh = _mask(lam * lp + prob.log_w, S)
        q_ygx = normalise_log(lh, axis=1)
        qx = normalise_log(-nu * prob.cost + logsumexp(lh, axis=1) / lam)
    joint = JointDist(qx[:, None] * q_ygx)
    return q_ygx, qx, joint.conditional_x_given_y()


def _uniform_backward(prob):
    return uniform_on_support(prob.support).conditional_x_given_y()


def run_algb(params, prob, pxy0=None, stop=None):
    """Trace alternates A^{(-lam,nu)}(p^{[i]}), Theta(q^{[i]}), A(p^{[i+1]}), ...

    At lam = 0 the run is the cost-tilted capacity iteration and the trace holds
    -(I - nu E[c]) style values instead (see ``capacity_with_cost``).
    """
    pxy0 = _uniform_backward(prob) if pxy0 is None else np.asarray(pxy0, dtype=float)
    lam, nu = params.lam, params.nu

    if lam == 0:
        def step(state):
            pxy, _ = state
            q_ygx, qx, nxt = algb_step(params, pxy, prob)
            return (nxt, qx), [-f_ar_limit(nu, qx, pxy, prob), -f_ar_limit(nu, qx, nxt, prob)]

        return iterate(step, (pxy0, None), stop,
                       export=lambda s: {"pxy": s[0], "px": s[1]})

    def step(state):
        pxy, _ = state
        q_ygx, qx, nxt = algb_step(params, pxy, prob)
        q = JointDist(qx[:, None] * q_ygx)
        return (nxt, q), [theta(lam, params.mu, q, prob), a_func(-lam, nu, nxt, prob)]

    return iterate(step, (pxy0, None), stop, initial=a_func(-lam, nu, pxy0, prob),
                   export=lambda s: {"pxy": s[0], "q": s[1]})


def capacity_with_cost(nu, prob, stop=None):
    """max_p [I(p, W) - nu E_p[c]] by the geometric-mean iteration. Returns (value, p_X)."""
    tr = run_algb(SlopeParams(0.0, nu), prob, stop=stop)
    return -tr.value, tr.state["px"]


def arimoto_channel_step(rho, nu, px_prev, prob):
    """Returns (p(x|y) indexed [x, y], next p_X)."""
    if rho == 0:
        raise ValueError("rho = 0 is the capacity iteration; use capacity_with_cost")
    _check_rho(rho)
    pxy = normalise_log(safe_log(px_prev)[:, None] + _tilted_log_w(prob, rho * nu) / (1.0 + rho), axis=0)
    with np.errstate(invalid="ignore"):
        inner = logsumexp(_mask(-rho * safe_log(pxy) + prob.log_w, prob.support), axis=1)
    lpx = -nu * prob.cost - inner / rho
    return pxy, normalise_log(np.where(np.isnan(lpx), NEG_INF, lpx))


def run_arimoto_channel(rho, nu, prob, px0=None, stop=None):
    """Minimises -|rho| F_AR; trace alternates -sgn(rho) E0(p_X), -sgn(rho) A(p(x|y)).

    For rho < 0 the final value is min_p E0^{(rho,nu)}; for rho > 0 it is -max_p E0.
    The run stops once ``e0_gap_bound`` certifies the value to ``stop.kkt_tol``.
    """
    n = prob.shape[0]
    px0 = np.full(n, 1.0 / n) if px0 is None else np.asarray(px0, dtype=float)
    sgn = 1.0 if rho > 0 else -1.0

    def step(state):
        px, _ = state
        pxy, px_next = arimoto_channel_step(rho, nu, px, prob)
        return (px_next, pxy), [-sgn * e0(rho, nu, px, prob), -sgn * a_func(rho, nu, pxy, prob)]

    return iterate(step, (px0, None), stop, kkt=lambda s: e0_gap_bound(rho, nu, s[0], prob),
                   export=lambda s: {"px": s[0], "pxy": s[1]})


def max_e0(rho, nu, prob, stop=None):
    """max over p_X of E0^{(rho,nu)} for rho > 0.  Returns (value, p_X)."""
    if rho <= 0:
        raise ValueError("max_e0 needs rho > 0")
    tr = run_arimoto_channel(rho, nu, prob, stop=stop)
    px = tr.state["px"]
    return max(-tr.value, e0(rho, nu, px, prob)), px


def optimal_backward(rho, nu, px, prob):
    """Optimal p(x|y) for fixed p_X and the matching output law (Renyi-gap optimisers)."""
    lg = safe_log(px)[:, None] + _tilted_log_w(prob, rho * nu) / (1.0 + rho)
    return normalise_log(lg, axis=0), normalise_log((1.0 + rho) * logsumexp(lg, axis=0))


def optimal_input(rho, nu, pxy, prob):
    """Optimal p_X for fixed p(x|y)."""
    with np.errstate(invalid="ignore"):
        inner = logsumexp(_mask(-rho * safe_log(pxy) + prob.log_w, prob.support), axis=1)
    lpx = -nu * prob.cost - inner / rho
    return normalise_log(np.where(np.isnan(lpx), NEG_INF, lpx))


def renyi_gap_identities(rho, nu, px, pxy, prob):
    """Residuals of the two Renyi-gap decompositions of f_ar.

    residual1 = [(1/rho) e0 - f_ar] - D_{1+rho}(p*(x|y) || pxy | p*_Y)
    residual2 = [(1/rho) A  - f_ar] - D_{1+rho}(px || p*_X(pxy))
    """
    f = f_ar(rho, nu, px, pxy, prob)
    star_xgy, star_y = optimal_backward(rho, nu, px, prob)
    gap1 = e0(rho, nu, px, prob) / rho - f
    r1 = gap1 - conditional_renyi(star_xgy, pxy, star_y, 1.0 + rho, axis=0)
    gap2 = a_func(rho, nu, pxy, prob) / rho - f
    r2 = gap2 - renyi_divergence(px, optimal_input(rho, nu, pxy, prob), 1.0 + rho)
    return r1, r2


def jo_channel_step(params, q_prev, prob):
    """q_next proportional to q_X^{1-lam} q_{X|Y}^lam W e^{-lam nu c}."""
    lam = params.lam
    _check_open_lambda(lam, "jo_channel_step")
    qj = q_prev if isinstance(q_prev, JointDist) else JointDist(q_prev)
    with np.errstate(invalid="ignore"):
        lw = ((1.0 - lam) * safe_log(qj.marginal_x())[:, None]
              + lam * safe_log(qj.conditional_x_given_y())
              + _tilted_log_w(prob, -lam * params.nu))
    return JointDist(normalise_log(_mask(lw, prob.support)))


def run_jo_channel(params, prob, init=None, stop=None):
    q0 = init if init is not None else uniform_on_support(prob.support)
    t = jo_weights(params.lam)

    def step(q):
        nxt = jo_channel_step(params, q, prob)
        return nxt, [j_t(params, t, nxt, q, prob), theta(params.lam, params.mu, nxt, prob)]

    return iterate(step, q0, stop, export=lambda q: {"q": q})


# ---------------------------------------------------------------- parameterised Arimoto

def _param_arimoto_check(lam, t2, t3):
    _check_open_lambda(lam, "parameterized_arimoto_step")
    if t2 < 0 or t3 < 0:
        raise ValueError("t2, t3 must be nonnegative")


def param_arimoto_objective(lam, nu, t2, t3, p, phat, prob):
    """-k log sum [p_X^{(1-l)(1+t2)} p_{Y|X}^{(1-l)t2} phat_Y^{(1-l)t3} phat_{X|Y}^{(1-l)t3+l} V]^{1/k}."""
    _param_arimoto_check(lam, t2, t3)
    lpx, _, lpyx, _ = _log_parts(p)
    _, lhy, _, lhxy = _log_parts(phat)
    k = 1.0 + (1.0 - lam) * (t2 + t3)
    with np.errstate(invalid="ignore"):
        body = ((1.0 - lam) * (1.0 + t2) * lpx[:, None] + _wlog((1.0 - lam) * t2, lpyx)
                + _wlog((1.0 - lam) * t3, lhy)[None, :] + ((1.0 - lam) * t3 + lam) * lhxy
                + _tilted_log_w(prob, -lam * nu))
    body = _mask(np.where(np.isnan(body), NEG_INF, body), prob.support)
    return float(-k * logsumexp(body / k))


def parameterized_arimoto_step(lam, nu, t2, t3, p, prob):
    """One sweep of the two-joint Arimoto variant.  Returns (phat, p_next) as JointDists."""
    _param_arimoto_check(lam, t2, t3)
    lpx, _, lpyx, _ = _log_parts(p)
    lv = _tilted_log_w(prob, -lam * nu)
    S = prob.support
    with np.errstate(invalid="ignore"):
        g = _mask(lpx[:, None] + _wlog(t2 / (1.0 + t2), lpyx) + lv / ((1.0 - lam) * (1.0 + t2)), S)
    h_xgy = normalise_log(g, axis=0)
    h_y = normalise_log(logsumexp(g, axis=0) * (1.0 - lam) * (1.0 + t2) / (1.0 + (1.0 - lam) * t2))
    a = (1.0 - lam) * t3
    with np.errstate(invalid="ignore"):
        cl = _mask((_wlog(a, safe_log(h_y))[None, :] + (a + lam) * safe_log(h_xgy) + lv) / (1.0 + a), S)
    p_ygx = normalise_log(cl, axis=1)
    p_x = normalise_log(logsumexp(cl, axis=1) * (1.0 + a) / (lam + a))
    return JointDist(h_xgy * h_y[None, :]), compose(p_x, p_ygx)


def run_param_arimoto(lam, nu, t2, t3, prob, init=None, stop=None):
    p0 = init if init is not None else uniform_on_support(prob.support)

    def step(p):
        phat, nxt = parameterized_arimoto_step(lam, nu, t2, t3, p, prob)
        return nxt, [param_arimoto_objective(lam, nu, t2, t3, p, phat, prob),
                     param_arimoto_objective(lam, nu, t2, t3, nxt, phat, prob)]

    return iterate(step, p0, stop, export=lambda p: {"p": p})


# ---------------------------------------------------------------- minimax check

def minimax_saddle_point(rho, nu, prob, stop=None):
    """Saddle point (q_X, q_{Y|X}) of Theta^{(-rho,-rho nu)} via the error-exponent Arimoto run.

    Returns (q, pxy) where pxy is the converged backward conditional.
    """
    if not 0.0 < rho <= 1.0:
        raise ValueError(f"minimax saddle needs rho in (0, 1], got {rho}")
    tr = run_arimoto_channel(rho, nu, prob, stop=stop)
    pxy, _ = arimoto_channel_step(rho, nu, tr.state["px"], prob)
    with np.errstate(invalid="ignore"):
        lq = _mask(prob.log_w - rho * safe_log(pxy), prob.support)
    q_ygx = normalise_log(lq, axis=1)
    qx = optimal_input(rho, nu, pxy, prob)
    return compose(qx, q_ygx), pxy


def minimax_theta_saddle(rho, nu, prob, stop=None):
    """max_{q_X} min_{q_{Y|X}} Theta^{(-rho, -rho nu)}, evaluated at the constructed saddle point."""
    q, _ = minimax_saddle_point(rho, nu, prob, stop)
    return theta(-rho, -rho * nu, q, prob)


# ---------------------------------------------------------------- dispatch

CHANNEL_ALGORITHMS = ("family", "tz", "algB", "arimoto", "jo", "param-arimoto")


def theta_min(params, prob, alg="tz", t=None, stop=None, init=None):
    """min_q Theta^{(lam, lam nu)} with closed forms at the endpoints.

    Returns (value, trace or None).
    """
    lam, nu = params.lam, params.nu
    if lam == 0:
        return 0.0, None
    if lam == 1:
        return theta_min_closed_lambda1(nu, prob), None
    if alg == "tz":
        tr = run_tz(params, prob, px0=init, stop=stop)
    elif alg == "algB":
        tr = run_algb(params, prob, pxy0=init, stop=stop)
    elif alg == "family":
        tr = run_family(params, t or tz_weights(), prob, init=init, stop=stop)
    elif alg == "jo":
        tr = run_jo_channel(params, prob, init=init, stop=stop)
    elif alg == "arimoto":
        tr = run_arimoto_channel(-lam, nu, prob, px0=init, stop=stop)
    elif alg == "param-arimoto":
        t2, t3 = (t.t2, t.t3) if t is not None else (0.0, 0.0)
        tr = run_param_arimoto(lam, nu, t2, t3, prob, init=init, stop=stop)
    else:
        raise ValueError(f"unknown channel algorithm {alg!r}")
    return tr.value, tr


def default_stop():
    return StoppingRule(DEFAULT_TOL.rel_change, DEFAULT_TOL.max_iters)


def capacity(gamma, prob, stop=None):
    """C(Gamma) = inf_nu [max_p (I - nu E c) + nu Gamma].  Returns (value, nu_star)."""
    from .search import minimize_over_nu

    if gamma < prob.gamma_min - 1e-15:
        raise ValueError(f"Gamma={gamma} is below the minimum cost {prob.gamma_min}")
    if np.all(prob.cost == prob.cost[0]):
        return capacity_with_cost(0.0, prob, stop)[0], 0.0
    return minimize_over_nu(lambda nu: capacity_with_cost(nu, prob, stop)[0] + nu * gamma)
