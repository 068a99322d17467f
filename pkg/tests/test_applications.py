import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fwkit.applications import (DOptimal, approx_caratheodory, design_state, dopt_design,
                                dopt_rank1_update, dopt_step, meb_coreset)
from fwkit.core import ContractViolation, finite_diff_check
from fwkit.regions import make_region


# -- Caratheodory -------------------------------------------------------------

@pytest.mark.parametrize("step", ["open_loop", "linesearch"])
def test_caratheodory_hypercube(step, rng):
    region = make_region("hypercube01", n=12)
    u = rng.random(12)
    res = approx_caratheodory(u, region, eps=0.1, step=step)
    assert res.converged and res.residual_norm <= 0.1
    assert all(k <= t + 1 for t, k in enumerate(res.sizes))
    res.active.check(tol_rec=1e-9)


def test_caratheodory_p_norm(rng):
    region = make_region("simplex", n=30)
    u = rng.dirichlet(np.ones(30))
    res = approx_caratheodory(u, region, p=4, eps=0.05)
    assert np.sum(np.abs(res.x - u) ** 4) ** 0.25 <= 0.05


def test_caratheodory_exact_point_on_an_edge():
    res = approx_caratheodory([0.5, 0.5, 0.0], make_region("simplex", n=3), eps=1e-12,
                              step="linesearch")
    np.testing.assert_allclose(res.x, [0.5, 0.5, 0.0], atol=1e-12)
    assert res.active.size == 2


def test_caratheodory_rejects_nonsmooth_norm():
    with pytest.raises(ContractViolation):
        approx_caratheodory([0.5, 0.5], make_region("simplex", n=2), p=1)


# -- minimum enclosing ball -----------------------------------------------------

def test_meb_collinear_points():
    res = meb_coreset(np.array([[-1.0], [0.0], [3.0]]), eps=1e-12)
    assert res.radius == pytest.approx(2.0)
    assert res.center[0] == pytest.approx(1.0)
    assert sorted(res.coreset_indices) == [0, 2]


def test_meb_equilateral_triangle():
    ang = 2 * np.pi * np.arange(3) / 3
    P = np.c_[np.cos(ang), np.sin(ang)] + np.array([5.0, -2.0])
    res = meb_coreset(P, eps=1e-13)
    assert res.radius_sq == pytest.approx(1.0, abs=1e-10)
    np.testing.assert_allclose(res.center, [5.0, -2.0], atol=1e-6)


# plain FW converges sublinearly here, so it gets a looser tolerance
@pytest.mark.parametrize("variant,eps", [("fw", 1e-2), ("afw", 1e-10)])
@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10 ** 6), m=st.integers(1, 25))
def test_meb_encloses_every_point(variant, eps, seed, m):
    P = np.random.default_rng(seed).standard_normal((m, 3))
    res = meb_coreset(P, eps=eps, variant=variant)
    assert res.fw_gap <= eps
    d2 = ((P - res.center) ** 2).sum(1)
    assert d2.max() <= res.radius_sq + eps + 1e-12
    # the dual value is within eps of the optimum, which is at least diam^2 / 4
    assert res.radius_sq >= ((P[:, None] - P[None]) ** 2).sum(-1).max() / 4 - eps - 1e-12


def test_meb_validation():
    with pytest.raises(ContractViolation):
        meb_coreset(np.zeros((3, 2)), variant="pfw")


# -- D-optimal design -----------------------------------------------------------

def test_dopt_step_formula_edge_cases():
    assert dopt_step(1.0, 3) == 0.0
    assert dopt_step(3.0, 3) == pytest.approx(0.0)
    assert dopt_step(6.0, 3) == pytest.approx((2 - 1) / 5)


def test_rank1_update_matches_dense(rng):
    A = rng.standard_normal((10, 3))
    st0 = design_state(A, rng.dirichlet(np.ones(10)))
    st1 = dopt_rank1_update(st0, 4, 0.2)
    ref = design_state(A, st1.x)
    np.testing.assert_allclose(st1.V_inv, ref.V_inv, rtol=1e-10)
    np.testing.assert_allclose(st1.w, ref.w, rtol=1e-10)
    assert st1.log_det == pytest.approx(ref.log_det, rel=1e-12)
    assert st0.since_refresh == 0 and st1.since_refresh == 1


def test_rank1_update_contracts(rng):
    A = rng.standard_normal((6, 2))
    s = design_state(A, np.full(6, 1 / 6))
    with pytest.raises(ContractViolation):
        dopt_rank1_update(s, 0, 1.0)
    with pytest.raises(ContractViolation):
        dopt_rank1_update(s, 0, -0.5)      # weight 1/6 cannot absorb this away step


def test_singular_design_is_rejected():
    with pytest.raises(ContractViolation):
        design_state(np.array([[1.0, 0.0], [2.0, 0.0]]), [0.5, 0.5])


@pytest.mark.parametrize("variant,tol", [("fw", 1e-5), ("afw", 1e-12)])
def test_dopt_two_points_in_1d(variant, tol):
    res = dopt_design(np.array([[2.0], [1.0]]), tol=tol, variant=variant)
    assert res.converged
    np.testing.assert_allclose(res.x, [1.0, 0.0], atol=10 * tol)


def test_dopt_optimality_conditions(rng):
    A = rng.standard_normal((40, 4))
    res = dopt_design(A, tol=1e-9, variant="afw")
    assert res.converged
    w = np.einsum("ij,jk,ik->i", A, np.linalg.inv((A * res.x[:, None]).T @ A), A)
    assert w.max() <= 4 + 1e-8              # equivalence theorem: max leverage = d
    np.testing.assert_allclose(w[res.x > 1e-6], 4.0, atol=1e-6)


def test_doptimal_objective_gradient(rng):
    obj = DOptimal(rng.standard_normal((12, 3)))
    x = rng.dirichlet(np.ones(12))
    assert finite_diff_check(obj, x) < 1e-6
    assert obj.value(np.eye(12)[0]) == math.inf
