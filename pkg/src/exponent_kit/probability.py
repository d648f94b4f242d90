"""Probability primitives: simplex vectors, kernels, joint distributions, divergences.

Conventions
-----------
Distributions are plain float arrays.  A forward kernel such as W(y|x) is an
array indexed ``[x, y]`` whose rows sum to one.  A backward conditional such as
q(x|y) is *also* indexed ``[x, y]``; its columns sum to one.  Keeping a single
index order avoids transposes inside the update rules.

All logarithms are natural.  Divergences return ``math.inf`` when the first
argument puts mass where the second has none; NaN is never returned.
"""

import math

import numpy as np

from .config import DEFAULT_TOL

INF = math.inf


def _freeze(a):
    a.setflags(write=False)
    return a


def _normalise(w, axis, tol):
    s = w.sum(axis=axis, keepdims=True)
    if np.any(s <= 0):
        raise ValueError("distribution has no positive mass")
    if np.all(np.abs(s - 1.0) <= tol):
        return w
    return w / s


def prob_vec(weights, tol=DEFAULT_TOL.norm):
    """Validate and normalise a probability vector; returns a read-only array."""
    w = np.array(weights, dtype=float).ravel()
    if w.size == 0:
        raise ValueError("empty distribution")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValueError("probabilities must be finite and nonnegative")
    return _freeze(_normalise(w, 0, tol))


def kernel(rows, axis=1, tol=DEFAULT_TOL.norm):
    """Validate a stochastic matrix.

    axis=1 means rows sum to one (forward kernel indexed [x, y]); axis=0 means
    columns sum to one (backward conditional indexed [x, y]).
    """
    k = np.array(rows, dtype=float)
    if k.ndim != 2 or k.size == 0:
        raise ValueError("kernel must be a non-empty 2-D array")
    if not np.all(np.isfinite(k)) or np.any(k < 0):
        raise ValueError("kernel entries must be finite and nonnegative")
    return _freeze(_normalise(k, axis, tol))


def logsumexp(a, axis=None, keepdims=False):
    """log(sum(exp(a))) along ``axis`` with the usual max shift.

    Same results as scipy.special.logsumexp for real input, without its
    per-call dispatch cost, which dominates on the tiny arrays used here.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim == 0:
        return a[()]
    m = np.maximum.reduce(a, axis=axis, keepdims=True)
    m[~np.isfinite(m)] = 0.0
    with np.errstate(divide="ignore"):
        out = np.log(np.add.reduce(np.exp(a - m), axis=axis, keepdims=True)) + m
    if not keepdims:
        out = np.squeeze(out, axis=axis) if axis is not None else out.reshape(())
    return out[()] if out.ndim == 0 else out


def safe_log(a):
    """Elementwise log with log(0) = -inf and no warnings."""
    a = np.asarray(a, dtype=float)
    with np.errstate(divide="ignore"):
        return np.log(a)


def normalise_log(logw, axis=None):
    """Exponentiate and normalise log-weights along ``axis``.

    Slices that are entirely -inf become uniform so the result stays stochastic.
    """
    logw = np.asarray(logw, dtype=float)
    if axis is None:
        z = logsumexp(logw)
        if not np.isfinite(z):
            raise ValueError("all weights are zero")
        return np.exp(logw - z)
    z = logsumexp(logw, axis=axis, keepdims=True)
    dead = ~np.isfinite(z)
    out = np.exp(logw - np.where(dead, 0.0, z))
    if np.any(dead):
        n = logw.shape[axis]
        out = np.where(dead, 1.0 / n, out)
    return out


def xlogx_ratio(p, q):
    """Sum of p*log(p/q) with 0*log(0/.) = 0 and p*log(p/0) = +inf."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pos = p > 0
    if np.any(q[pos] <= 0):
        return INF
    return float(np.sum(p[pos] * (np.log(p[pos]) - np.log(q[pos]))))


def _same_shape(a, b):
    if np.shape(a) != np.shape(b):
        raise ValueError(f"shape mismatch: {np.shape(a)} vs {np.shape(b)}")


def kl_divergence(p, q):
    """D(p||q) in nats."""
    _same_shape(p, q)
    return max(xlogx_ratio(p, q), 0.0)


def conditional_kl(pyx, qyx, px):
    """D(p_{Y|X} || q_{Y|X} | p_X) for forward kernels indexed [x, y]."""
    pyx = np.asarray(pyx, dtype=float)
    qyx = np.asarray(qyx, dtype=float)
    px = np.asarray(px, dtype=float)
    _same_shape(pyx, qyx)
    if px.shape != pyx.shape[:1]:
        raise ValueError("px does not match the kernel's conditioning alphabet")
    return max(xlogx_ratio(px[:, None] * pyx, px[:, None] * qyx), 0.0)


def _renyi_sum(p, q, alpha):
    """Sum p^a q^(1-a) with the 0-conventions; returns +inf when it diverges."""
    pos = p > 0
    if alpha > 1 and np.any(q[pos] <= 0):
        return INF
    both = pos & (q > 0)
    return float(np.sum(np.exp(alpha * np.log(p[both]) + (1 - alpha) * np.log(q[both]))))


def _renyi_from_sum(s, alpha):
    if s == INF:
        return INF
    if s <= 0:
        return INF  # alpha < 1 with disjoint supports
    return max(math.log(s) / (alpha - 1), 0.0)


def renyi_divergence(p, q, alpha):
    """D_alpha(p||q) = log(sum p^a q^(1-a)) / (a-1) for a > 0, a != 1."""
    if alpha <= 0 or alpha == 1:
        raise ValueError("alpha must be positive and different from 1; use kl_divergence at 1")
    _same_shape(p, q)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return _renyi_from_sum(_renyi_sum(p, q, alpha), alpha)


def conditional_renyi(p_cond, q_cond, w, alpha, axis=0):
    """Conditional Renyi divergence  log sum_y w(y) sum_x p^a q^(1-a) / (a-1).

    ``axis`` names the axis of the conditioned variable (the one each
    conditional distribution sums over).  The default axis=0 matches backward
    conditionals indexed [x, y] weighted by a distribution on y.
    """
    if alpha <= 0 or alpha == 1:
        raise ValueError("alpha must be positive and different from 1")
    p_cond = np.asarray(p_cond, dtype=float)
    q_cond = np.asarray(q_cond, dtype=float)
    w = np.asarray(w, dtype=float)
    _same_shape(p_cond, q_cond)
    other = 1 - axis
    if w.shape != (p_cond.shape[other],):
        raise ValueError("weights do not match the conditioning alphabet")
    wb = np.expand_dims(w, axis)
    live = np.broadcast_to(wb > 0, p_cond.shape)
    p = np.where(live, p_cond, 0.0)
    pos = p > 0
    if alpha > 1 and np.any(q_cond[pos] <= 0):
        return INF
    both = pos & (q_cond > 0)
    with np.errstate(divide="ignore"):
        terms = np.where(both, np.exp(alpha * safe_log(p) + (1 - alpha) * safe_log(q_cond)), 0.0)
    s = float(np.sum(wb * terms))
    return _renyi_from_sum(s, alpha)


def entropy(p):
    p = np.asarray(p, dtype=float)
    pos = p > 0
    return float(-np.sum(p[pos] * np.log(p[pos])))


def binary_entropy(p):
    """h(p) in nats."""
    return entropy([p, 1.0 - p])


def mutual_information(px, pyx):
    """I(p_X, p_{Y|X}) in nats."""
    px = np.asarray(px, dtype=float)
    pyx = np.asarray(pyx, dtype=float)
    if px.shape != pyx.shape[:1]:
        raise ValueError("px does not match kernel rows")
    py = px @ pyx
    joint = px[:, None] * pyx
    return max(xlogx_ratio(joint, px[:, None] * py[None, :]), 0.0)


class JointDist:
    """Immutable joint distribution on X x Y with derived marginals and conditionals."""

    __slots__ = ("mass",)

    def __init__(self, mass, tol=DEFAULT_TOL.norm):
        m = np.array(mass, dtype=float)
        if m.ndim != 2:
            raise ValueError("joint mass must be 2-D")
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise ValueError("joint mass must be finite and nonnegative")
        s = m.sum()
        if s <= 0:
            raise ValueError("joint mass is zero")
        if abs(s - 1.0) > tol:
            m = m / s
        object.__setattr__(self, "mass", _freeze(m))

    def __setattr__(self, name, value):
        raise AttributeError("JointDist is immutable")

    def __repr__(self):
        return f"JointDist({self.mass.tolist()!r})"

    @property
    def shape(self):
        return self.mass.shape

    def marginal_x(self):
        return self.mass.sum(axis=1)

    def marginal_y(self):
        return self.mass.sum(axis=0)

    def conditional_y_given_x(self):
        """Forward conditional [x, y]; rows with zero marginal are uniform."""
        px = self.marginal_x()
        out = np.full(self.mass.shape, 1.0 / self.mass.shape[1])
        live = px > 0
        out[live] = self.mass[live] / px[live, None]
        return out

    def conditional_x_given_y(self):
        """Backward conditional [x, y]; columns with zero marginal are uniform."""
        py = self.marginal_y()
        out = np.full(self.mass.shape, 1.0 / self.mass.shape[0])
        live = py > 0
        out[:, live] = self.mass[:, live] / py[live]
        return out

    @classmethod
    def from_backward(cls, py, pxy_cond):
        """Build from q_Y and a backward conditional q(x|y) indexed [x, y]."""
        return cls(np.asarray(pxy_cond) * np.asarray(py)[None, :])


def compose(px, k):
    """Joint p_X(x) k(y|x)."""
    px = np.asarray(px, dtype=float)
    k = np.asarray(k, dtype=float)
    if px.shape != k.shape[:1]:
        raise ValueError("px does not match kernel rows")
    return JointDist(px[:, None] * k)


def product(px, py):
    return JointDist(np.outer(px, py))


def uniform_on_support(support):
    """Uniform joint over the True entries of a boolean mask."""
    s = np.asarray(support, dtype=bool)
    return JointDist(s.astype(float) / s.sum())
