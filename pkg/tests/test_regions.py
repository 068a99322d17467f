import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from fwkit.core import CapabilityError
from fwkit.regions import WeakSeparationCache, make_region, weak_separation

costs = lambda n: arrays(float, n, elements=st.floats(-10, 10, allow_nan=False))

POLYTOPES = [("simplex", {"n": 6}), ("l1_ball", {"n": 5, "tau": 2.0}), ("hypercube01", {"n": 6}),
             ("box", {"lower": [-1.0, 0.0, 2.0], "upper": [1.0, 3.0, 2.5]}), ("birkhoff", {"n": 4}),
             ("polytope", {"vertices": [[0.0, 0.0], [1.0, 2.0], [3.0, -1.0]]})]


@pytest.mark.parametrize("kind,params", POLYTOPES)
@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_polytope_lmo_is_optimal_vertex(kind, params, data):
    region = make_region(kind, **params)
    c = data.draw(costs(region.dim))
    V = region.enumerate_vertices()
    v = region.lmo(c)
    assert np.any(np.all(V == v, axis=1))
    vals = np.vstack([v, V]) @ c
    assert vals[0] == vals[1:].min()


@pytest.mark.parametrize("kind,params", POLYTOPES[:5])
def test_center_is_feasible(kind, params):
    region = make_region(kind, **params)
    assert region.contains(region.center())


def test_simplex_lmo_breaks_ties_by_lowest_index():
    np.testing.assert_array_equal(make_region("simplex", n=4).lmo(np.array([1.0, 0.0, 0.0, 2.0])),
                                  [0.0, 1.0, 0.0, 0.0])


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 7.0])
@settings(max_examples=40, deadline=None)
@given(c=costs(5))
def test_lp_ball_lmo_matches_dual_norm(p, c):
    if np.abs(c).max() < 1e-6:
        return
    region = make_region("lp_ball", n=5, p=p, tau=1.5)
    v = region.lmo(c)
    q = p / (p - 1)
    assert c @ v == pytest.approx(-1.5 * np.sum(np.abs(c) ** q) ** (1 / q), rel=1e-10)
    assert np.sum(np.abs(v) ** p) ** (1 / p) <= 1.5 * (1 + 1e-12)


@pytest.mark.parametrize("shape", [(4, 4), (3, 6), (7, 2)])
def test_nuclear_lmo_matches_svd(shape, rng):
    region = make_region("nuclear_ball", rows=shape[0], cols=shape[1], tau=2.0)
    for _ in range(20):
        C = rng.standard_normal(shape)
        v = region.lmo(C.ravel())
        s = np.linalg.svd(C, compute_uv=False)
        assert C.ravel() @ v == pytest.approx(-2.0 * s[0], rel=1e-8)
        assert region.contains(v)


def test_spectrahedron_lmo_is_bottom_eigenvector(rng):
    region = make_region("spectrahedron", n=5)
    B = rng.standard_normal((5, 5))
    C = B + B.T
    v = region.lmo(C.ravel())
    assert C.ravel() @ v == pytest.approx(np.linalg.eigvalsh(C)[0], rel=1e-8)


def test_birkhoff_lmo_on_larger_instance_matches_brute_force(rng):
    region = make_region("birkhoff", n=6)
    for _ in range(20):
        C = rng.integers(0, 5, (6, 6)).astype(float)   # many ties
        best = min(sum(C[i, p[i]] for i in range(6)) for p in itertools.permutations(range(6)))
        assert C.ravel() @ region.lmo(C.ravel()) == best


def test_away_vertex_stays_in_the_support():
    region = make_region("simplex", n=4)
    x = np.array([0.5, 0.0, 0.5, 0.0])
    v = region.away_vertex(np.array([1.0, 9.0, 3.0, 9.0]), x)
    np.testing.assert_array_equal(v, [0.0, 0.0, 1.0, 0.0])


def test_missing_capabilities_raise():
    with pytest.raises(CapabilityError):
        make_region("l1_ball", n=3).nep(np.ones(3), 1.0, np.zeros(3))
    with pytest.raises(CapabilityError):
        make_region("nuclear_ball", rows=2, cols=2).enumerate_vertices()
    with pytest.raises(ValueError):
        make_region("torus", n=3)


def test_nep_on_hypercube_minimizes_penalized_cost(rng):
    region = make_region("hypercube01", n=6)
    V = region.enumerate_vertices()
    for _ in range(20):
        c, x, lam = rng.standard_normal(6), rng.random(6), rng.uniform(0, 3)
        v = region.nep(c, lam, x)
        vals = V @ c + lam * ((V - x) ** 2).sum(1)
        assert c @ v + lam * ((v - x) ** 2).sum() == pytest.approx(vals.min(), abs=1e-12)


def test_weak_separation_cache_then_lmo():
    region = make_region("simplex", n=3)
    cache = WeakSeparationCache(capacity=2)
    x = np.full(3, 1 / 3)
    c = np.array([0.0, 1.0, 2.0])
    first = weak_separation(region, cache, c, x, phi=0.5)
    assert first.positive and first.lmo_calls == 1 and not first.cache_hit
    again = weak_separation(region, cache, c, x, phi=0.5)
    assert again.positive and again.cache_hit and again.lmo_calls == 0
    neg = weak_separation(region, cache, c, x, phi=5.0)
    assert not neg.positive and neg.gap == pytest.approx(1.0)
