import math
import warnings

import numpy as np
import pytest

from exponent_kit import source as src
from exponent_kit.channel import FamilyWeights, SlopeParams
from exponent_kit.iteration import StoppingRule
from exponent_kit.oracle import descent_audit
from exponent_kit.probability import JointDist, binary_entropy, kl_divergence, mutual_information
from exponent_kit.source import SourceProblem

from conftest import numeric_argmin, random_source

LN2 = math.log(2.0)


def theta_s_direct(lam, mu, q, prob):
    qj = JointDist(q)
    qx = qj.marginal_x()
    return (kl_divergence(qx, prob.px) + lam * mutual_information(qx, qj.conditional_y_given_x())
            + mu * float(np.sum(qj.mass * prob.distortion)))


def live_support(prob):
    return np.broadcast_to((prob.px > 0)[:, None], prob.shape)


# ---------------------------------------------------------------- problem


def test_source_problem_validation():
    with pytest.raises(ValueError):
        SourceProblem([0.5, 0.5], [[0.0, 1.0]])
    with pytest.raises(ValueError):
        SourceProblem([0.5, 0.5], [[0.0, -1.0], [1.0, 0.0]])
    p = SourceProblem([0.5, 0.5], [[0.0, 1.0], [1.0, 0.0]])
    assert p == SourceProblem([0.5, 0.5], [[0.0, 1.0], [1.0, 0.0]])
    assert p.d_max == pytest.approx(0.5)


def test_zero_distortion_row_strict_and_lenient():
    d = [[1.0, 1.0], [0.0, 1.0]]
    with pytest.raises(ValueError, match="zero-distortion"):
        SourceProblem([0.5, 0.5], d)
    with pytest.warns(UserWarning, match="zero-distortion"):
        p = SourceProblem([0.5, 0.5], d, strict=False)
    # the lambda = 0 closed form is no longer zero: -log E e^{-mu min_y d}
    assert src.theta_s_min_closed_lambda0(2.0, p) == pytest.approx(-math.log(0.5 * math.exp(-2.0) + 0.5))


# ---------------------------------------------------------------- functionals


def test_theta_s_matches_direct_formula(source33, rng):
    for _ in range(5):
        q = rng.dirichlet(np.ones(9)).reshape(3, 3)
        lam, mu = rng.uniform(), rng.uniform(0, 2)
        assert src.theta_s(lam, mu, q, source33) == pytest.approx(theta_s_direct(lam, mu, q, source33), rel=1e-12)


def test_theta_s_infinite_off_source_support():
    prob = SourceProblem([1.0, 0.0], [[0.0, 1.0], [1.0, 0.0]])
    assert src.theta_s(0.5, 0.0, [[0.25, 0.25], [0.25, 0.25]], prob) == math.inf


def test_lambda1_closed_form_is_attained(source33):
    for mu in (0.0, 0.7, 3.0):
        closed = src.theta_s_min_closed_lambda1(mu, source33)
        col = np.array([np.sum(source33.px * np.exp(-mu * source33.distortion[:, y])) for y in range(3)])
        y = int(np.argmax(col))
        q = np.zeros((3, 3))
        q[:, y] = source33.px * np.exp(-mu * source33.distortion[:, y])
        q /= q.sum()
        assert src.theta_s(1.0, mu, q, source33) == pytest.approx(closed, abs=1e-14)
        _, num = numeric_argmin(lambda m: src.theta_s(1.0, mu, m, source33), source33.shape,
                                live_support(source33))
        assert num >= closed - 1e-10


def test_lambda0_closed_form_vanishes_with_zero_distortion_rows(source33):
    assert src.theta_s_min_closed_lambda0(5.0, source33) == pytest.approx(0.0, abs=1e-15)


def test_sibson_information_tends_to_mutual_information(rng):
    px = rng.dirichlet(np.ones(3))
    w = rng.dirichlet(np.ones(4), size=3)
    mi = mutual_information(px, w)
    assert src.sibson_information(1 + 1e-6, px, w) == pytest.approx(mi, abs=1e-5)
    assert src.sibson_information(1 - 1e-6, px, w) == pytest.approx(mi, abs=1e-5)


def test_renyi_gap_residuals_vanish(rng):
    for _ in range(10):
        prob = random_source(rng, 3, 2)
        py = rng.dirichlet(np.ones(2))
        pyx = rng.dirichlet(np.ones(2), size=3)
        for rho in (-0.5, 0.5, 1.0):
            r1, r2 = src.renyi_gap_source(rho, 0.8, py, pyx, prob)
            assert abs(r1) < 1e-12 and abs(r2) < 1e-12


# ---------------------------------------------------------------- family updates


LAM = 0.25
SHIFT = LAM / (1 - LAM)


@pytest.mark.parametrize("t", [FamilyWeights(0, 0, SHIFT, 0), FamilyWeights(0, 1, 0, 0),
                               FamilyWeights(0.5, 0.2, 0.3 + SHIFT, 0.3), FamilyWeights(0.2, 1.2, 0.4, 0.1)])
def test_source_family_update_is_the_argmin(source33, t):
    params = SlopeParams(LAM, 0.9)
    p = JointDist([[0.1, 0.2, 0.05], [0.15, 0.1, 0.05], [0.05, 0.1, 0.2]])
    q = src.source_family_update(params, t, p, source33)
    fun = lambda m: src.j_st(params, t, m, p, source33)  # noqa: E731
    _, warm = numeric_argmin(fun, source33.shape, live_support(source33), x0=q.mass)
    _, cold = numeric_argmin(fun, source33.shape, live_support(source33))
    assert src.j_st(params, t, q, p, source33) <= min(warm, cold) + 1e-9


def test_source_branches_agree_on_intersection(source33):
    t = src.jo_source_weights(LAM)
    assert t.in_T3(LAM) and t.in_T4()
    params = SlopeParams(LAM, 0.9)
    p = JointDist([[0.1, 0.2, 0.05], [0.15, 0.1, 0.05], [0.05, 0.1, 0.2]])
    q3 = src.source_family_update(params, t, p, source33, branch="T3")
    q4 = src.source_family_update(params, t, p, source33, branch="T4")
    assert np.max(np.abs(q3.mass - q4.mass)) < 1e-10


def test_source_family_update_rejects_bad_weights(source33):
    p = JointDist(np.full((3, 3), 1 / 9))
    with pytest.raises(ValueError):
        src.source_family_update(SlopeParams(0.5), FamilyWeights(1, 0, 0, 0), p, source33)
    with pytest.raises(ValueError):
        src.source_family_update(SlopeParams(0.5), src.gck2_weights(), p, source33, branch="T3")
    with pytest.raises(ValueError):
        src.gck2_step(SlopeParams(1.0), np.full((3, 3), 1 / 3), source33)


# ---------------------------------------------------------------- algorithms


@pytest.mark.parametrize("alg", src.SOURCE_ALGORITHMS)
def test_every_source_algorithm_reaches_the_same_minimum(source33, alg):
    params = SlopeParams(0.6, 0.5)
    ref = src.theta_s_min(params, source33, alg="gck1")[0]
    val, tr = src.theta_s_min(params, source33, alg=alg)
    assert val == pytest.approx(ref, abs=1e-8)
    assert descent_audit(tr)


def test_unknown_source_algorithm(source33):
    with pytest.raises(ValueError):
        src.theta_s_min(SlopeParams(0.5), source33, alg="nope")


def test_gck1_at_lambda0_is_the_rate_distortion_iteration(hamming):
    for delta in (0.05, 0.1, 0.3):
        val, nu = src.rate_distortion(delta, hamming)
        assert val == pytest.approx(LN2 - binary_entropy(delta), abs=1e-7)
        # the optimal multiplier is log((1 - delta) / delta)
        assert nu == pytest.approx(math.log((1 - delta) / delta), rel=1e-4)
    assert src.rate_distortion(0.6, hamming)[0] == pytest.approx(0.0, abs=1e-12)


def test_kkt_residual_nonnegative_and_zero_at_optimum(source33, rng):
    lam, nu = 0.4, 1.3
    for _ in range(5):
        assert src.kkt_residual_source(lam, nu, rng.dirichlet(np.ones(3)), source33) >= 0.0
    tr = src.run_gck1(SlopeParams(lam, nu), source33)
    assert tr.converged
    assert src.kkt_residual_source(lam, nu, tr.state["py"], source33) < 1e-8


def test_expected_distortion_decreases_in_nu(source33):
    lam = 0.5
    dist = []
    for nu in (0.0, 0.5, 1.0, 2.0, 4.0):
        tr = src.run_gck1(SlopeParams(lam, nu), source33, stop=StoppingRule(0.0, 20000))
        dist.append(float(np.sum(tr.state["q"].mass * source33.distortion)))
    assert all(b <= a + 1e-9 for a, b in zip(dist, dist[1:]))


def test_min_e0s_and_arimoto_guards(source33):
    with pytest.raises(ValueError):
        src.min_e0s(0.0, 1.0, source33)
    with pytest.raises(ValueError):
        src.arimoto_source_step(0.0, 1.0, np.full(3, 1 / 3), source33)
    with pytest.raises(ValueError):
        src.guessing_exponent(-0.5, 0.1, source33)
    assert src.guessing_exponent(0.0, 0.1, source33) == (0.0, 0.0)


def test_min_e0s_beats_random_output_laws(source33, rng):
    val, _ = src.min_e0s(0.7, 1.1, source33)
    for _ in range(50):
        assert val <= src.e0s(0.7, 1.1, rng.dirichlet(np.ones(3)), source33) + 1e-12


# ---------------------------------------------------------------- slope values


def test_slope_value_zero_beyond_dmax(source33):
    delta = source33.d_max + 0.05
    val, nu = src.slope_value_source(0.5, delta, source33)
    assert val == pytest.approx(0.0, abs=1e-12)
    assert nu == 0.0
    assert src.rate_distortion(delta, source33) == (0.0, 0.0)
    # just below saturation the value is small and nonnegative
    val, _ = src.slope_value_source(0.5, source33.d_max - 0.05, source33)
    assert 0.0 <= val < 0.05


def test_cutoff_rate_alternative_form(source33):
    for lam in (0.3, 0.7, 1.0):
        out = src.cutoff_rate_source(lam, 0.3, source33, details=True)
        assert out["value"] == pytest.approx(out["alternative"], abs=1e-6)
    with pytest.raises(ValueError):
        src.cutoff_rate_source(0.0, 0.3, source33)


def test_cutoff_rate_is_at_most_rate_distortion(source33):
    # every supporting line of a curve that vanishes above R(Delta) crosses zero below it
    r = src.rate_distortion(0.3, source33)[0]
    cut = [src.cutoff_rate_source(lam, 0.3, source33) for lam in (0.9, 0.5, 0.2, 0.02)]
    assert all(c <= r + 1e-7 for c in cut)
    assert all(b >= a - 1e-9 for a, b in zip(cut, cut[1:]))


def test_lenient_problem_runs_without_warnings_leaking():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        p = SourceProblem([0.5, 0.5], [[1.0, 2.0], [0.0, 1.0]], strict=False)
    val, _ = src.theta_s_min(SlopeParams(0.5, 1.0), p)
    assert math.isfinite(val)
