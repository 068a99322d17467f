import math

import numpy as np
import pytest

from fwkit import RunConfig
from fwkit.core import ContractViolation
from fwkit.objectives import Quadratic
from fwkit.regions import make_region
from fwkit.stochastic import (EstimatorState, FiniteSumOracle, NoisyOracle, default_schedule,
                              estimate_gradient, is_power_checkpoint, run_scgs,
                              run_stochastic_fw)

VARIANTS = ["sfw", "momentum", "spider", "svrf", "one_sample"]


@pytest.fixture
def noisy(simplex_quadratic):
    obj, _ = simplex_quadratic
    return NoisyOracle(obj, 0.3, 13.0)


def test_power_checkpoints():
    assert [t for t in range(20) if is_power_checkpoint(t)] == [0, 1, 3, 7, 15]


def test_batch_mean_is_unbiased_with_the_right_variance(simplex_quadratic):
    obj, _ = simplex_quadratic
    orc = NoisyOracle(obj, 2.0)
    x = np.full(10, 0.1)
    b, reps = 16, 4000
    rng = np.random.default_rng(0)
    G = np.array([orc.mean_grad(x, b, rng) for _ in range(reps)])
    g = obj.gradient(x)
    se = 2.0 * 1.1 / math.sqrt(b * reps)
    assert np.all(np.abs(G.mean(0) - g) < 5 * se)
    np.testing.assert_allclose(G.var(0), 4.0 * 1.1 ** 2 / b, rtol=0.1)


def test_sample_mean_matches_explicit_draws(simplex_quadratic):
    """The shortcut z-bar has the law of an explicit mean of b draws."""
    obj, _ = simplex_quadratic
    orc = NoisyOracle(obj, 1.0)
    x = np.full(10, 0.1)
    rng = np.random.default_rng(1)
    explicit = np.array([orc.grads(x, orc.draw(rng, 8, n=10)).mean(0) for _ in range(3000)])
    shortcut = np.array([orc.mean_grad(x, 8, rng) for _ in range(3000)])
    np.testing.assert_allclose(explicit.var(0).mean(), shortcut.var(0).mean(), rtol=0.08)


def test_finite_sum_oracle_is_unbiased(rng):
    A, y = rng.standard_normal((30, 4)), rng.standard_normal(30)
    orc = FiniteSumOracle(A, y)
    x = rng.standard_normal(4)
    full = orc.grads(x, np.arange(30)).mean(0)
    np.testing.assert_allclose(full, orc.exact_gradient(x), atol=1e-12)


@pytest.mark.parametrize("variant", VARIANTS)
def test_runs_are_seed_reproducible(variant, noisy):
    region = make_region("simplex", n=10)
    cfg = lambda s: RunConfig(max_iters=40, tol=1e-12, seed=s, timing=False)
    a = run_stochastic_fw(variant, noisy, region, cfg(3))
    b = run_stochastic_fw(variant, noisy, region, cfg(3))
    c = run_stochastic_fw(variant, noisy, region, cfg(4))
    assert a.to_csv() == b.to_csv()
    assert a.to_csv() != c.to_csv()


@pytest.mark.parametrize("variant", VARIANTS)
def test_samples_column_matches_recorded_batches(variant, noisy):
    tr = run_stochastic_fw(variant, noisy, make_region("simplex", n=10),
                           RunConfig(max_iters=30, tol=1e-12, timing=False))
    assert tr.last("sfo_calls") == sum(tr.extra["samples"])
    assert len(tr.extra["samples"]) == 30


def test_svrf_charges_full_passes_on_a_finite_sum(rng):
    A, y = rng.standard_normal((25, 5)), rng.standard_normal(25)
    orc = FiniteSumOracle(A, y)
    sched = default_schedule("svrf")
    tr = run_stochastic_fw("svrf", orc, make_region("l1_ball", n=5),
                           RunConfig(max_iters=10, tol=1e-12, timing=False), schedule=sched)
    checkpoints = [t for t in range(10) if is_power_checkpoint(t)]
    diffs = sum(2 * 48 * (t + 2) for t in range(10) if t not in checkpoints)
    assert tr.last("sfo_calls") == diffs + 25 * len(checkpoints)


def test_estimator_state_is_not_mutated(noisy):
    state = EstimatorState("momentum", default_schedule("momentum"))
    x = np.full(10, 0.1)
    new, est, used = estimate_gradient(state, noisy, x, x, 0, np.random.default_rng(0))
    assert state.estimate is None and state.samples == []
    assert used == 1 and new.samples == [1]


def test_spider_checkpoint_batch_is_capped(noisy):
    sched = default_schedule("spider", L=1e-3, D=1e-3, sigma2=1.0)
    with pytest.warns(UserWarning):
        assert sched.checkpoint_batch(3) == 10 ** 6


@pytest.mark.parametrize("bad", ["adam", "lazy"])
def test_unknown_variant(bad, noisy):
    with pytest.raises(ContractViolation):
        run_stochastic_fw(bad, noisy, make_region("simplex", n=10), RunConfig())


def test_spider_schedule_needs_geometry():
    with pytest.raises(ContractViolation):
        default_schedule("spider")


def test_scgs_converges_under_noise(noisy):
    tr = run_scgs(noisy, make_region("simplex", n=10), RunConfig(max_iters=60, tol=1e-12,
                                                                  timing=False))
    assert tr.last("primal_gap") < 0.1 * tr.column("primal_gap")[0]
    assert tr.last("sfo_calls") == sum(tr.extra["samples"])
