import numpy as np
import pytest

from fwkit import RunConfig, StepRule
from fwkit.core import ActiveSet, CapabilityError, ContractViolation
from fwkit.deterministic import (ALGORITHMS, BoostConfig, CgsSchedule, boost_direction,
                                 cg_projection, run_afw, run_fw, run_hcgs, run_lazy,
                                 simplex_descent)
from fwkit.objectives import AbsShift, Quadratic
from fwkit.regions import make_region

from conftest import random_psd


def _cfg(**kw):
    base = dict(max_iters=20000, tol=1e-6, timing=False)
    base.update(kw)
    return RunConfig(**base)


@pytest.mark.parametrize("name", sorted(ALGORITHMS))
def test_every_algorithm_solves_a_hypercube_quadratic(name, rng):
    n = 8
    Q = random_psd(rng, n, 1.0, 4.0)
    p = rng.uniform(-0.5, 1.5, n)          # some coordinates clip at the faces
    obj = Quadratic.centered(Q, p, 0.0)
    region = make_region("hypercube01", n=n)
    ref = run_afw(obj, region, _cfg(tol=1e-12, step=StepRule("linesearch"))).last("f")
    tr = ALGORITHMS[name](obj, region, _cfg(step=StepRule("short")))
    assert tr.last("f") - ref <= 1e-4
    assert region.contains(tr.x)
    assert np.all(np.diff(tr.column("lmo_calls")) >= 0)


@pytest.mark.parametrize("step", ["open_loop", "short", "linesearch", "adaptive", "rsqrt"])
def test_fw_step_rules_decrease_the_gap(step, simplex_quadratic):
    obj, p = simplex_quadratic
    tr = run_fw(obj, make_region("simplex", n=10), _cfg(max_iters=3000, step=StepRule(step)))
    assert tr.column("primal_gap")[-1] < 1e-2 * tr.column("primal_gap")[0]


def test_fw_trace_shape_and_final_row(simplex_quadratic):
    obj, _ = simplex_quadratic
    tr = run_fw(obj, make_region("simplex", n=10), _cfg(max_iters=7, tol=1e-300, record_every=3))
    assert list(tr.column("t")) == [0, 3, 6, 7]
    assert tr.last("step_size") == 0.0
    # start vertex costs one gradient and one LMO call
    assert tr.column("foo_calls")[0] == 2 and tr.column("lmo_calls")[0] == 2


def test_inexact_lmo_hook(simplex_quadratic):
    obj, _ = simplex_quadratic
    region = make_region("simplex", n=10)
    seen = []

    def lmo(c, t):
        seen.append(t)
        return region.lmo(c)

    tr = run_fw(obj, region, _cfg(max_iters=5, tol=1e-300), lmo=lmo)
    assert seen == list(range(6))
    assert tr.last("lmo_calls") == 7


def test_afw_active_set_reconstructs_iterate(simplex_quadratic):
    obj, _ = simplex_quadratic
    tr = run_afw(obj, make_region("simplex", n=10), _cfg(step=StepRule("linesearch")))
    tr.active.check(tol_rec=1e-9)
    assert tr.last("active_set_size") == tr.active.size


@pytest.mark.parametrize("variant", ["fw", "afw"])
def test_lazy_certificates_are_sound(variant, simplex_quadratic):
    obj, _ = simplex_quadratic
    tr = run_lazy(variant, obj, make_region("simplex", n=10), _cfg())
    assert tr.last("fw_gap") <= 1e-6
    assert all(g <= phi for g, phi in tr.extra["certificates"])


def test_lazy_rejects_bad_variant(simplex_quadratic):
    with pytest.raises(ContractViolation):
        run_lazy("pfw", simplex_quadratic[0], make_region("simplex", n=10), _cfg())


def test_simplex_descent_drop_removes_an_atom(rng):
    obj = Quadratic.centered(np.eye(3), np.array([1.0, 0.0, 0.0]))
    act = ActiveSet.from_pairs(np.eye(3), [0.2, 0.4, 0.4])
    new, kind = simplex_descent(obj, act, L=2.0)
    assert kind == "drop" and new.size < act.size
    assert obj.value(new.iterate) <= obj.value(act.iterate)


def test_simplex_descent_requires_positive_L():
    with pytest.raises(ContractViolation):
        simplex_descent(Quadratic(np.eye(2)), ActiveSet.singleton([1.0, 0.0]), 0.0)


def test_cg_projection_solves_the_prox_subproblem(rng):
    region = make_region("simplex", n=5)
    g0, u0 = rng.standard_normal(5), region.center()
    u = cg_projection(g0, u0, eta=2.0, beta=1e-10, region=region)
    # exact minimizer of <g0, u> + eta/2 |u - u0|^2 over the simplex is a projection
    y = u0 - g0 / 2.0
    s = np.sort(y)[::-1]
    css = np.cumsum(s) - 1
    k = np.flatnonzero(s - css / np.arange(1, 6) > 0)[-1]
    np.testing.assert_allclose(u, np.maximum(y - css[k] / (k + 1), 0), atol=1e-4)


@pytest.mark.parametrize("mode,kw", [("default", {}), ("fixed_horizon", {"horizon": 200}),
                                     ("restart", {"mu": 1.0})])
def test_cgs_schedules_converge(mode, kw, simplex_quadratic):
    from fwkit.deterministic import run_cgs
    obj, _ = simplex_quadratic
    tr = run_cgs(obj, make_region("simplex", n=10), _cfg(max_iters=200, tol=1e-12),
                 CgsSchedule(mode, **kw))
    assert tr.column("primal_gap")[-1] < 1e-3


def test_cgs_schedule_validation():
    with pytest.raises(ContractViolation):
        CgsSchedule("restart")
    with pytest.raises(ContractViolation):
        CgsSchedule("custom", gamma=lambda t: 0.1)


def test_boost_direction_aligns_with_negative_gradient(simplex_quadratic):
    obj, _ = simplex_quadratic
    region = make_region("simplex", n=10)
    x = region.center()
    d = boost_direction(obj, x, region, BoostConfig(K=50))
    d = d[0] if isinstance(d, tuple) else d
    assert float(-obj.gradient(x) @ d) > 0


def test_hcgs_reduces_a_nonsmooth_objective(rng):
    n = 6
    region = make_region("simplex", n=n)
    A = rng.standard_normal((4, n))
    target = A @ rng.dirichlet(np.ones(n))
    tr = run_hcgs(None, AbsShift(target), A, region, _cfg(max_iters=2000, tol=1e-12), beta=1.0,
                  f_star=0.0)
    assert tr.last("f") < 0.1 * tr.column("f")[0]


def test_hcgs_requires_prox():
    with pytest.raises(CapabilityError):
        run_hcgs(None, object(), None, make_region("simplex", n=2), _cfg())


def test_dipfw_needs_zero_one_structure(simplex_quadratic):
    from fwkit.deterministic import run_dipfw
    with pytest.raises((CapabilityError, ContractViolation)):
        run_dipfw(Quadratic(np.eye(3)), make_region("l1_ball", n=3), _cfg())
