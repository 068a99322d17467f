"""End-to-end solvers: approximate Caratheodory, minimum enclosing ball, D-optimal design."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .core import ActiveSet, AtomStore, ContractViolation, NumericFailure
from .objectives import LpDistance, Objective
from .steps import _line_search, open_loop_step

__all__ = [
    "CaratheodoryResult", "approx_caratheodory", "MebResult", "meb_coreset",
    "DOptimal", "DesignState", "design_state", "dopt_step", "dopt_rank1_update", "dopt_design",
]


# ---------------------------------------------------------------------------
# approximate Caratheodory

@dataclass
class CaratheodoryResult:
    active: ActiveSet
    residual_norm: float
    p: float
    iterations: int
    converged: bool
    sizes: list = field(default_factory=list)   # active-set size after each iteration

    @property
    def x(self):
        return self.active.iterate


def approx_caratheodory(u, region, p: float = 2.0, eps: float = 1e-2, max_iters: int = 100000,
                        step: str = "open_loop", x0=None) -> CaratheodoryResult:
    """Sparse convex combination of vertices within ``eps`` of ``u`` in the p-norm.

    Each iteration adds at most one vertex, so after t iterations at most t + 1
    atoms are active. ``step`` is 'open_loop' (2/(t+2)) or 'linesearch'.
    """
    if p < 2:
        raise ContractViolation("p < 2 gives a nonsmooth objective; use the smoothing solver")
    if step not in ("open_loop", "linesearch"):
        raise ContractViolation(f"unknown step {step!r}")
    obj = LpDistance(np.asarray(u, dtype=float).ravel(), p)
    if x0 is None:
        x0 = region.lmo(obj.gradient(region.center()))
    x = np.array(x0, dtype=float).ravel()
    store = AtomStore(x[None, :], [1.0])
    sizes = [len(store)]
    t = 0
    res = obj.norm(x)
    while res > eps and t < max_iters:
        g = obj.gradient(x)
        v = region.lmo(g)
        dirn = v - x
        if step == "open_loop":
            gamma = open_loop_step(t)
        else:
            gamma = _line_search(obj, x, dirn, 1.0, g)
        x = x + gamma * dirn
        store.fw_step(v, gamma, x)
        x = store.x
        t += 1
        sizes.append(len(store))
        res = obj.norm(x)
    return CaratheodoryResult(store.snapshot(), res, float(p), t, res <= eps, sizes)


# ---------------------------------------------------------------------------
# minimum enclosing ball

@dataclass
class MebResult:
    coreset_indices: np.ndarray
    center: np.ndarray
    radius_sq: float
    dual_weights: np.ndarray
    fw_gap: float
    iterations: int

    @property
    def radius(self):
        return math.sqrt(self.radius_sq)


def meb_dual_value(points, x):
    A = np.asarray(points, dtype=float)
    c = A.T @ x
    return float(x @ np.einsum("ij,ij->i", A, A) - c @ c)


def meb_coreset(points, eps: float = 1e-6, max_iters: int = 10 ** 6,
                variant: str = "afw") -> MebResult:
    """Maximizes sum_i x_i |a_i|^2 - |sum_i x_i a_i|^2 over the simplex with exact steps.

    The FW gap at x is max_i |a_i - c|^2 - f(x), so at termination every point
    lies within sqrt(radius_sq + eps) of the center. ``variant='fw'`` uses
    toward steps only; the default 'afw' also moves weight off the closest
    support point, which converges linearly.
    """
    if variant not in ("fw", "afw"):
        raise ContractViolation(f"unknown variant {variant!r}")
    A = np.asarray(points, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    m = A.shape[0]
    if m < 1:
        raise ContractViolation("need at least one point")
    sq = np.einsum("ij,ij->i", A, A)
    # f(e_i) = 0 for every i; lowest index wins
    x = np.zeros(m)
    x[0] = 1.0
    c = A[0].copy()
    f = 0.0
    gap = 0.0
    t = 0
    for t in range(max_iters + 1):
        diff = A - c
        dist = np.einsum("ij,ij->i", diff, diff)
        i = int(np.argmax(dist))
        gap = float(dist[i]) - f
        if gap <= eps or t == max_iters:
            break
        away_gap = -math.inf
        if variant == "afw":
            support = np.flatnonzero(x > 0.0)
            j = int(support[np.argmin(dist[support])])
            away_gap = f - float(dist[j])
        if away_gap > gap and x[j] < 1.0:
            gmax = x[j] / (1.0 - x[j])
            gamma = gmax if dist[j] == 0.0 else min(away_gap / (2.0 * dist[j]), gmax)
            x *= 1.0 + gamma
            x[j] = 0.0 if gamma >= gmax else x[j] - gamma
        else:
            gamma = min(gap / (2.0 * dist[i]), 1.0)
            x *= 1.0 - gamma
            x[i] += gamma
        x[x < 1e-12] = 0.0
        x /= x.sum()
        c = A.T @ x
        f = float(x @ sq - c @ c)
    idx = np.flatnonzero(x > 1e-12)
    return MebResult(idx, c, f, x, max(gap, 0.0), t)


# ---------------------------------------------------------------------------
# D-optimal design

class DOptimal(Objective):
    """f(x) = -ln det(sum_i x_i a_i a_i^T) on the simplex; rows of A are the a_i."""

    def __init__(self, A):
        self.A = np.asarray(A, dtype=float)
        self.L = None
        self.mu = None
        self.f_star = None
        self.is_quadratic = False

    def info(self, x):
        return (self.A * x[:, None]).T @ self.A

    def value(self, x):
        sign, logdet = np.linalg.slogdet(self.info(x))
        return -logdet if sign > 0 else math.inf

    def gradient(self, x):
        Vinv = np.linalg.inv(self.info(x))
        return -np.einsum("ij,jk,ik->i", self.A, Vinv, self.A)


@dataclass
class DesignState:
    """Design weights with cached V^-1, log det V and leverages w_i = a_i^T V^-1 a_i.

    The gradient of -ln det V is -w.
    """

    A: np.ndarray
    x: np.ndarray
    V_inv: np.ndarray
    log_det: float
    w: np.ndarray
    iterations: int = 0
    fw_gap: float = math.nan
    converged: bool = False
    since_refresh: int = 0

    @property
    def gradient(self):
        return -self.w

    @property
    def d(self):
        return self.A.shape[1]


def design_state(A, x) -> DesignState:
    """State computed directly (dense) from weights x."""
    A = np.asarray(A, dtype=float)
    x = np.array(x, dtype=float)
    V = (A * x[:, None]).T @ A
    sign, logdet = np.linalg.slogdet(V)
    if sign <= 0 or not np.isfinite(logdet):
        raise ContractViolation("the design vectors do not span the space (singular information matrix)")
    Vinv = np.linalg.inv(V)
    w = np.einsum("ij,jk,ik->i", A, Vinv, A)
    return DesignState(A, x, Vinv, float(logdet), w)


def dopt_step(w_i: float, d: int) -> float:
    """Exact minimizer of -ln det((1 - g) V + g a a^T) over g, with w_i = a^T V^-1 a.

    Negative values mean moving weight off the atom.
    """
    if w_i == 1.0:
        return 0.0
    return (w_i / d - 1.0) / (w_i - 1.0)


def dopt_rank1_update(state: DesignState, i: int, gamma: float) -> DesignState:
    """x <- (1 - gamma) x + gamma e_i with O(d^2 + nd) updates of V^-1, log det and w.

    ``gamma`` may be negative (away step) as long as the weights stay nonnegative.
    """
    if not gamma < 1.0:
        raise ContractViolation("rank-1 update needs gamma < 1")
    if gamma == 0.0:
        return state
    d = state.d
    Vinv = state.V_inv.copy()
    w = state.w.copy()
    denom = kernels.dopt_update(state.A, Vinv, w, int(i), float(gamma))
    if not denom > 0:
        raise NumericFailure(f"rank-1 update denominator {denom} is not positive")
    x = (1.0 - gamma) * state.x
    x[i] += gamma
    if x.min() < -1e-12:
        raise ContractViolation("update would make a design weight negative")
    np.maximum(x, 0.0, out=x)
    log_det = state.log_det + math.log(denom) + (d - 1) * math.log1p(-gamma)
    return replace(state, x=x, V_inv=Vinv, log_det=log_det, w=w,
                   since_refresh=state.since_refresh + 1)


def dopt_design(A, tol: float = 1e-6, variant: str = "fw", max_iters: int = 10 ** 6,
                refresh_every: int = 50) -> DesignState:
    """Minimizes -ln det V(x) over the simplex from x0 = 1/n.

    Steps are exact (closed form); the 'afw' variant also takes away steps.
    Stops when the FW gap max_i w_i - d drops to ``tol``.
    """
    if variant not in ("fw", "afw"):
        raise ContractViolation(f"unknown variant {variant!r}")
    A = np.ascontiguousarray(A, dtype=float)
    n, d = A.shape
    state = design_state(A, np.full(n, 1.0 / n))
    x, Vinv, w = state.x.copy(), state.V_inv.copy(), state.w.copy()
    t, gap, log_det, status = kernels.dopt_loop(A, x, Vinv, w, state.log_det, float(tol),
                                                int(max_iters), int(refresh_every), variant == "afw")
    if status < 0:
        raise NumericFailure("information matrix became singular")
    return replace(state, x=x, V_inv=Vinv, w=w, log_det=float(log_det), iterations=int(t),
                   fw_gap=max(float(gap), 0.0), converged=gap <= tol)
