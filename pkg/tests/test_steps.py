import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fwkit.core import ContractViolation
from fwkit.objectives import LpDistance, Quadratic, SeparableSine
from fwkit.steps import (AdaptiveState, StepContext, StepRule, adaptive_accepts, adaptive_step,
                         initial_smoothness, line_search, open_loop_step, short_step)

from conftest import random_psd


@pytest.mark.parametrize("t,shift,expected", [(0, 2, 1.0), (1, 2, 2 / 3), (8, 2, 0.2), (0, 4, 0.5)])
def test_open_loop(t, shift, expected):
    assert open_loop_step(t, shift) == expected


def test_open_loop_rejects_small_shift():
    with pytest.raises(ContractViolation):
        open_loop_step(3, 1)


def test_short_step_clips_and_handles_ascent():
    assert short_step(StepContext(0, 2.0, 1.0, 1.0, 4.0)) == 0.5
    assert short_step(StepContext(0, 10.0, 1.0, 0.7, 1.0)) == 0.7
    assert short_step(StepContext(0, -1.0, 1.0, 1.0, 1.0)) == 0.0
    with pytest.raises(ContractViolation):
        short_step(StepContext(0, 1.0, 1.0, 1.0, 0.0))


def test_unknown_step_rule():
    with pytest.raises(ValueError):
        StepRule("golden")


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), gmax=st.floats(0.05, 1.0))
def test_quadratic_line_search_is_exact(seed, gmax):
    rng = np.random.default_rng(seed)
    Q = random_psd(rng, 4, 0.1, 3.0)
    obj = Quadratic(Q, rng.standard_normal(4))
    x, d = rng.standard_normal(4), rng.standard_normal(4)
    gamma = line_search(obj, x, d, gmax)
    grid = np.linspace(0, gmax, 2001)
    vals = [obj.value(x - g * d) for g in grid]
    assert obj.value(x - gamma * d) <= min(vals) + 1e-12
    assert 0.0 <= gamma <= gmax


def test_generic_line_search_never_increases(rng):
    obj = SeparableSine(np.ones(3), np.full(3, 3.0), np.zeros(3))
    for _ in range(20):
        x, d = rng.uniform(-1, 1, 3), rng.standard_normal(3)
        gamma = line_search(obj, x, d, 1.0)
        assert obj.value(x - gamma * d) <= obj.value(x)


def test_adaptive_grows_from_a_tiny_estimate(rng):
    Q = random_psd(rng, 6, 0.0, 10.0)
    obj = Quadratic(Q, rng.standard_normal(6), L=10.0)
    x = np.zeros(6)
    x[0] = 1.0
    v = np.zeros(6)
    v[np.argmin(obj.gradient(x))] = 1.0
    state, gamma = adaptive_step(obj, x, v, AdaptiveState(1e-4))
    assert adaptive_accepts(obj, x, v - x, gamma, state.L_tilde, state.alpha)
    assert 1e-4 < state.L_tilde <= 2.0 * 10.0


def test_adaptive_zero_direction():
    obj = LpDistance(np.zeros(2))
    state, gamma = adaptive_step(obj, np.ones(2), np.ones(2), AdaptiveState(1.0))
    assert gamma == 0.0 and state.L_tilde == 1.0


@pytest.mark.parametrize("kw", [{"L_tilde": 0.0}, {"L_tilde": 1.0, "tau": 1.0},
                                {"L_tilde": 1.0, "alpha": 0.0}])
def test_adaptive_state_validation(kw):
    with pytest.raises(ValueError):
        AdaptiveState(**kw)


def test_initial_smoothness_is_exact_on_a_1d_quadratic():
    obj = Quadratic(np.array([[6.0]]))
    assert initial_smoothness(obj, np.array([0.5]), np.array([-1.0])) == pytest.approx(6.0)
