import numpy as np
import pytest
from scipy.optimize import minimize

from exponent_kit.channel import ChannelProblem
from exponent_kit.source import SourceProblem


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def bsc():
    return ChannelProblem([[0.9, 0.1], [0.1, 0.9]])


@pytest.fixture
def cost_channel():
    return ChannelProblem([[0.8, 0.2], [0.3, 0.7]], [0.0, 1.0])


@pytest.fixture
def channel23():
    return ChannelProblem([[0.7, 0.2, 0.1], [0.1, 0.3, 0.6]], [0.2, 1.0])


@pytest.fixture
def hamming():
    return SourceProblem([0.5, 0.5], [[0.0, 1.0], [1.0, 0.0]])


@pytest.fixture
def source33():
    return SourceProblem([0.5, 0.3, 0.2], [[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]])


def random_channel(rng, nx, ny):
    return ChannelProblem(rng.dirichlet(np.ones(ny), size=nx), rng.uniform(0.0, 1.0, nx))


def random_source(rng, nx, ny):
    d = rng.uniform(0.1, 2.0, (nx, ny))
    d[np.arange(nx), rng.integers(ny, size=nx)] = 0.0
    return SourceProblem(rng.dirichlet(np.ones(nx)), d)


def numeric_argmin(fun, shape, support, x0=None):
    """Minimise fun(joint) over joints on ``support`` via a softmax parameterisation."""
    idx = np.flatnonzero(np.asarray(support).ravel())

    def unpack(z):
        w = np.exp(z - z.max())
        m = np.zeros(int(np.prod(shape)))
        m[idx] = w / w.sum()
        return m.reshape(shape)

    z0 = np.zeros(idx.size) if x0 is None else np.log(np.asarray(x0).ravel()[idx])
    res = minimize(lambda z: fun(unpack(z)), z0, method="BFGS", options={"gtol": 1e-10})
    return unpack(res.x), res.fun
