import itertools
import json
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fwkit import kernels


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10 ** 6), n=st.integers(1, 7), ties=st.booleans())
def test_assignment_paths_agree_and_are_optimal(seed, n, ties):
    rng = np.random.default_rng(seed)
    C = rng.integers(0, 3, (n, n)).astype(float) if ties else rng.standard_normal((n, n))
    a = kernels.assignment_numba(C)
    b = kernels.assignment_numpy(C)
    cost = lambda p: C[np.arange(n), p].sum()
    assert sorted(a) == list(range(n))
    assert cost(a) == cost(b)
    if n <= 6:
        best = min(C[np.arange(n), list(p)].sum() for p in itertools.permutations(range(n)))
        assert cost(a) == pytest.approx(best, abs=1e-12)


@pytest.mark.parametrize("shape", [(3, 3), (5, 2), (2, 6)])
def test_power_iteration_paths_agree(shape, rng):
    C = rng.standard_normal(shape)
    va, la, oka, _ = kernels.top_singular_pair_numba(C, 1e-12, 5000)
    vb, lb, okb, _ = kernels.top_singular_pair_numpy(C, 1e-12, 5000)
    s = np.linalg.svd(C, compute_uv=False)[0]
    assert oka and okb
    assert la == pytest.approx(s * s, rel=1e-9) and lb == pytest.approx(s * s, rel=1e-9)
    assert abs(va @ vb) == pytest.approx(1.0, abs=1e-6)


def test_dopt_update_paths_agree(rng):
    A = rng.standard_normal((9, 3))
    x = rng.dirichlet(np.ones(9))
    V = np.linalg.inv((A * x[:, None]).T @ A)
    w = np.einsum("ij,jk,ik->i", A, V, A)
    V1, w1, V2, w2 = V.copy(), w.copy(), V.copy(), w.copy()
    d1 = kernels.dopt_update_numba(A, V1, w1, 2, 0.3)
    d2 = kernels.dopt_update_numpy(A, V2, w2, 2, 0.3)
    assert d1 == pytest.approx(d2, rel=1e-14)
    np.testing.assert_allclose(V1, V2, rtol=1e-12)
    np.testing.assert_allclose(w1, w2, rtol=1e-12)


@pytest.mark.parametrize("away", [False, True])
def test_dopt_loop_paths_agree(away, rng):
    A = rng.standard_normal((30, 3))
    out = []
    for fn in (kernels.dopt_loop_numba, kernels.dopt_loop_numpy):
        x = np.full(30, 1 / 30)
        Vinv = np.linalg.inv((A * x[:, None]).T @ A)
        w = np.einsum("ij,jk,ik->i", A, Vinv, A)
        logdet = np.linalg.slogdet((A * x[:, None]).T @ A)[1]
        t, gap, ld, status = fn(A, x, Vinv, w, logdet, 1e-8, 100000, 50, away)
        out.append((t, ld, x))
    assert out[0][0] == out[1][0]
    assert out[0][1] == pytest.approx(out[1][1], rel=1e-12)
    np.testing.assert_allclose(out[0][2], out[1][2], atol=1e-10)


_PROBE = """
import json, numpy as np
from fwkit import _jit, kernels
from fwkit.regions import make_region
from fwkit.applications import dopt_design
rng = np.random.default_rng(0)
C = rng.standard_normal((6, 6))
res = {
    "use_numba": _jit.USE_NUMBA,
    "assignment_impl": kernels.assignment.__name__,
    "perm": make_region("birkhoff", n=6).lmo(C.ravel()).tolist(),
    "nuc": make_region("nuclear_ball", rows=4, cols=3).lmo(C[:4, :3].ravel()).tolist(),
    "logdet": dopt_design(rng.standard_normal((20, 3)), tol=1e-8, variant="afw").log_det,
}
print(json.dumps(res))
"""


def _probe(flag):
    env = dict(os.environ)
    env.pop("FWKIT_DISABLE_NUMBA", None)
    if flag is not None:
        env["FWKIT_DISABLE_NUMBA"] = flag
    out = subprocess.run([sys.executable, "-c", _PROBE], env=env, capture_output=True, text=True,
                         check=True)
    return json.loads(out.stdout)


def test_env_flag_selects_the_numpy_path():
    fast, slow = _probe(None), _probe("1")
    assert fast["use_numba"] and fast["assignment_impl"] == "assignment_numba"
    assert not slow["use_numba"] and slow["assignment_impl"] == "assignment_numpy"
    assert fast["perm"] == slow["perm"]
    np.testing.assert_allclose(fast["nuc"], slow["nuc"], atol=1e-8)
    assert fast["logdet"] == pytest.approx(slow["logdet"], rel=1e-10)


@pytest.mark.parametrize("flag,expected", [("0", True), ("false", True), ("yes", False)])
def test_env_flag_values(flag, expected):
    assert _probe(flag)["use_numba"] is expected
