import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from fwkit.core import (ActiveSet, AtomStore, ContractViolation, NumericFailure, RunTrace,
                        TRACE_COLUMNS, active_set_update, check_finite, dual_gap,
                        finite_diff_check, fw_gap, strong_fw_gap)
from fwkit.objectives import Quadratic
from fwkit.regions import make_region

finite = st.floats(-1e3, 1e3, allow_nan=False)


@given(arrays(float, 6, elements=finite), arrays(float, 6, elements=finite))
def test_dual_gap_is_clipped_inner_product(g, x):
    v = make_region("simplex", n=6).lmo(g)
    gap = dual_gap(g, x, v)
    assert gap >= 0.0
    assert gap == max(float(g @ (x - v)), 0.0)


def test_fw_gap_reports_the_lmo_vertex():
    obj = Quadratic(np.eye(3), np.array([1.0, -2.0, 0.5]))
    rep = fw_gap(obj, np.full(3, 1 / 3), make_region("simplex", n=3))
    np.testing.assert_array_equal(rep.fw_vertex, [0.0, 1.0, 0.0])
    assert rep.fw_gap > 0


@pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
def test_check_finite_rejects(bad):
    with pytest.raises(NumericFailure):
        check_finite(np.array([1.0, bad]), "gradient")


def test_check_finite_passes_through():
    a = np.arange(3.0)
    assert check_finite(a) is a


def test_active_set_merges_duplicates_and_checks():
    act = ActiveSet.from_pairs([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]], [0.25, 0.5, 0.25])
    assert act.size == 2
    np.testing.assert_allclose(act.weights, [0.5, 0.5])
    act.check()
    broken = ActiveSet(act.atoms, np.array([0.7, 0.7]), act.iterate)
    with pytest.raises(ContractViolation):
        broken.check()


def test_tiny_weights_are_dropped():
    store = AtomStore(np.eye(3), [1.0 - 2e-13, 1e-13, 1e-13])
    assert len(store) == 1


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 4), st.floats(0.0, 1.0)), min_size=1, max_size=30))
def test_fw_steps_keep_a_valid_decomposition(moves):
    V = np.eye(5)
    act = ActiveSet.singleton(V[0])
    x = V[0].copy()
    for i, gamma in moves:
        act = active_set_update(act, "fw_step", V[i], gamma)
        x = (1 - gamma) * x + gamma * V[i]
        act.check(tol_rec=1e-9)
        np.testing.assert_allclose(act.iterate, x, atol=1e-9)


def test_away_step_and_drop():
    act = ActiveSet.from_pairs(np.eye(3), [0.5, 0.25, 0.25])
    out = active_set_update(act, "away_step", np.eye(3)[1], 1 / 3)   # gamma_max = 1/3
    assert out.size == 2
    np.testing.assert_allclose(out.iterate, [2 / 3, 0.0, 1 / 3])
    out = active_set_update(act, "drop", np.eye(3)[0])
    np.testing.assert_allclose(out.weights, [0.5, 0.5])
    with pytest.raises(ContractViolation):
        active_set_update(act, "away_step", np.eye(3)[0], 2.0)
    with pytest.raises(ContractViolation):
        active_set_update(act, "drop", np.array([0.0, 0.0, 0.0]))


def test_strong_gap_dominates_fw_gap(simplex_quadratic, rng):
    obj, _ = simplex_quadratic
    region = make_region("simplex", n=10)
    act = ActiveSet.from_pairs(np.eye(10)[:4], rng.dirichlet(np.ones(4)))
    g = obj.gradient(act.iterate)
    v = region.lmo(g)
    assert strong_fw_gap(obj, act, region) >= dual_gap(g, act.iterate, v) - 1e-12


def test_trace_csv_roundtrip():
    rows = [(0, 1.5, 0.25, math.nan, 0.5, 1, 1, 0, 1, 123), (1, 1.0 / 3, 0.0, 0.1, 0.0, 2, 2, 5, 2, 456)]
    tr = RunTrace(rows)
    text = tr.to_csv()
    assert text.splitlines()[0] == ",".join(TRACE_COLUMNS)
    back = RunTrace.from_csv(text)
    assert back.rows[1][1] == 1.0 / 3
    assert math.isnan(back.rows[0][3])
    assert RunTrace.from_csv(tr.to_csv(timing=False)).last("wall_time_ns") == 0


def test_finite_diff_check_flags_a_wrong_gradient():
    class Wrong(Quadratic):
        def gradient(self, x):
            return super().gradient(x) + 1.0

    good = Quadratic(np.diag([1.0, 2.0]))
    bad = Wrong(np.diag([1.0, 2.0]))
    x = np.array([0.3, -0.2])
    assert finite_diff_check(good, x) < 1e-8
    assert finite_diff_check(bad, x) > 0.1
