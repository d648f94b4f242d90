import math

import numpy as np
import pytest
from scipy.special import logsumexp as scipy_logsumexp

from exponent_kit.probability import (
    JointDist,
    binary_entropy,
    compose,
    conditional_kl,
    conditional_renyi,
    entropy,
    kernel,
    kl_divergence,
    logsumexp,
    mutual_information,
    normalise_log,
    prob_vec,
    product,
    renyi_divergence,
    uniform_on_support,
)


def test_prob_vec_validates_and_freezes():
    p = prob_vec([0.2, 0.3, 0.5])
    assert not p.flags.writeable
    with pytest.raises(ValueError):
        prob_vec([0.5, -0.1, 0.6])
    with pytest.raises(ValueError):
        prob_vec([])
    with pytest.raises(ValueError):
        prob_vec([np.nan, 1.0])
    with pytest.raises(ValueError):
        prob_vec([0.0, 0.0])


def test_prob_vec_leaves_canonical_input_untouched():
    w = [0.1, 0.2, 0.7]
    assert np.array_equal(prob_vec(w), np.array(w))
    assert math.isclose(prob_vec([1.0, 1.0, 2.0]).sum(), 1.0)


def test_kernel_axis_convention():
    fwd = kernel([[1.0, 3.0], [2.0, 2.0]])
    assert np.allclose(fwd.sum(axis=1), 1.0)
    back = kernel([[1.0, 3.0], [1.0, 1.0]], axis=0)
    assert np.allclose(back.sum(axis=0), 1.0)
    with pytest.raises(ValueError):
        kernel([0.5, 0.5])


def test_logsumexp_matches_scipy(rng):
    for shape, axis in [((4,), None), ((3, 4), 0), ((3, 4), 1), ((2, 3, 4), (1, 2)), ((2, 3), None)]:
        a = rng.normal(size=shape) * 5
        a[a < -4] = -np.inf
        np.testing.assert_allclose(logsumexp(a, axis=axis), scipy_logsumexp(a, axis=axis), rtol=1e-14)
        np.testing.assert_allclose(logsumexp(a, axis=axis, keepdims=True),
                                   scipy_logsumexp(a, axis=axis, keepdims=True), rtol=1e-14)
    assert logsumexp(np.full(3, -np.inf)) == -np.inf
    assert logsumexp([1000.0, 1000.0]) == pytest.approx(1000.0 + math.log(2.0))


def test_normalise_log_dead_slices_become_uniform():
    lw = np.array([[0.0, -np.inf], [np.log(3.0), -np.inf]])
    out = normalise_log(lw, axis=0)
    assert np.allclose(out[:, 0], [0.25, 0.75])
    assert np.allclose(out[:, 1], [0.5, 0.5])
    with pytest.raises(ValueError):
        normalise_log(np.full(2, -np.inf))


def test_kl_basic_properties(rng):
    p = rng.dirichlet(np.ones(4))
    q = rng.dirichlet(np.ones(4))
    assert kl_divergence(p, q) > 0
    assert kl_divergence(p, p) == 0.0
    assert kl_divergence([0.5, 0.5], [1.0, 0.0]) == math.inf
    assert kl_divergence([1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2.0))


def test_kl_chain_rule(rng):
    pj = JointDist(rng.dirichlet(np.ones(6)).reshape(2, 3))
    qj = JointDist(rng.dirichlet(np.ones(6)).reshape(2, 3))
    lhs = kl_divergence(pj.mass.ravel(), qj.mass.ravel())
    rhs = (kl_divergence(pj.marginal_x(), qj.marginal_x())
           + conditional_kl(pj.conditional_y_given_x(), qj.conditional_y_given_x(), pj.marginal_x()))
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_renyi_tends_to_kl(rng):
    p = rng.dirichlet(np.ones(3))
    q = rng.dirichlet(np.ones(3))
    kl = kl_divergence(p, q)
    assert renyi_divergence(p, q, 1 + 1e-6) == pytest.approx(kl, abs=1e-5)
    assert renyi_divergence(p, q, 1 - 1e-6) == pytest.approx(kl, abs=1e-5)


def test_renyi_nondecreasing_in_order(rng):
    p = rng.dirichlet(np.ones(4))
    q = rng.dirichlet(np.ones(4))
    vals = [renyi_divergence(p, q, a) for a in (0.2, 0.5, 0.9, 1.5, 2.0, 5.0)]
    assert all(b >= a - 1e-14 for a, b in zip(vals, vals[1:]))


def test_renyi_order_checks_and_support():
    with pytest.raises(ValueError):
        renyi_divergence([0.5, 0.5], [0.5, 0.5], 1.0)
    with pytest.raises(ValueError):
        renyi_divergence([0.5, 0.5], [0.5, 0.5], 0.0)
    assert renyi_divergence([0.5, 0.5], [1.0, 0.0], 2.0) == math.inf
    # order below one stays finite with partial overlap
    assert math.isfinite(renyi_divergence([0.5, 0.5], [1.0, 0.0], 0.5))


def test_conditional_renyi_is_log_of_weighted_average(rng):
    p = rng.dirichlet(np.ones(3), size=2).T  # columns are distributions over x
    q = rng.dirichlet(np.ones(3), size=2).T
    w = np.array([0.3, 0.7])
    a = 1.7
    direct = math.log(sum(w[y] * np.sum(p[:, y] ** a * q[:, y] ** (1 - a)) for y in range(2))) / (a - 1)
    assert conditional_renyi(p, q, w, a) == pytest.approx(direct, rel=1e-12)
    # single conditioning symbol reduces to the plain divergence
    assert conditional_renyi(p, q, np.array([1.0, 0.0]), a) == pytest.approx(
        renyi_divergence(p[:, 0], q[:, 0], a), rel=1e-12)
    # forward layout: rows are the conditional distributions
    assert conditional_renyi(p.T, q.T, w, a, axis=1) == pytest.approx(direct, rel=1e-12)


def test_entropy_and_mutual_information():
    assert entropy([0.5, 0.5]) == pytest.approx(math.log(2.0))
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(0.1) == pytest.approx(-(0.1 * math.log(0.1) + 0.9 * math.log(0.9)))
    w = np.array([[0.9, 0.1], [0.1, 0.9]])
    assert mutual_information([0.5, 0.5], w) == pytest.approx(math.log(2.0) - binary_entropy(0.1))
    assert mutual_information([1.0, 0.0], w) == pytest.approx(0.0, abs=1e-15)


def test_joint_marginals_and_conditionals(rng):
    m = rng.dirichlet(np.ones(6)).reshape(3, 2)
    j = JointDist(m)
    assert np.allclose(j.marginal_x(), m.sum(axis=1))
    assert np.allclose(j.conditional_y_given_x().sum(axis=1), 1.0)
    assert np.allclose(j.conditional_x_given_y().sum(axis=0), 1.0)
    back = JointDist.from_backward(j.marginal_y(), j.conditional_x_given_y())
    assert np.allclose(back.mass, m)
    assert np.allclose(compose(j.marginal_x(), j.conditional_y_given_x()).mass, m)


def test_joint_zero_marginals_and_immutability():
    j = JointDist([[0.5, 0.0], [0.5, 0.0]])
    assert np.allclose(j.conditional_x_given_y()[:, 1], 0.5)
    with pytest.raises(AttributeError):
        j.mass = None
    with pytest.raises(ValueError):
        j.mass[0, 0] = 1.0
    with pytest.raises(ValueError):
        JointDist([[0.5, -0.5], [0.5, 0.5]])


def test_product_and_uniform_support():
    j = product([0.25, 0.75], [0.5, 0.5])
    assert np.allclose(j.mass, [[0.125, 0.125], [0.375, 0.375]])
    u = uniform_on_support([[True, False], [True, True]])
    assert np.allclose(u.mass, [[1 / 3, 0.0], [1 / 3, 1 / 3]])
