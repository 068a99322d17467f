import numpy as np
import pytest

from fwkit.objectives import Quadratic


def random_psd(rng, n, lo=0.0, hi=1.0):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return (q * np.linspace(lo, hi, n)) @ q.T


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def simplex_quadratic(rng):
    """Strongly convex quadratic on the 10-simplex with an interior minimizer."""
    n = 10
    Q = random_psd(rng, n, 1.0, 5.0)
    p = rng.dirichlet(np.full(n, 5.0))
    return Quadratic.centered(Q, p, 0.0), p
