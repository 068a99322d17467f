"""Stochastic first-order oracles, gradient estimators and stochastic runners.

Randomness: iteration ``t`` of a run with seed ``s`` draws from
``np.random.default_rng([s, t])``, so traces are reproducible and runs over
different seeds are independent.

SFO accounting: every evaluation of a stochastic gradient at one point with
one sample counts once, so a difference term over a batch of b samples costs
2b calls.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from ._plumbing import Oracles, Recorder, RunConfig, start_point
from .core import CapabilityError, ContractViolation
from .deterministic import CgsSchedule, _sliding
from .objectives import Quadratic

VARIANTS = ("batch_mean", "momentum", "spider", "svrf", "one_sample")
SPIDER_BATCH_CAP = 10 ** 6


# ---------------------------------------------------------------------------
# oracles

class StochasticOracle:
    """Unbiased gradient samples of ``objective``.

    Subclasses implement ``grads(x, Z)`` (one row per sample) and ``draw(rng, b)``,
    or override ``mean_grad`` / ``mean_diff`` directly.
    """

    objective = None
    variance_bound: float | None = None
    exact_cost = ("foo", 1)     # how an exact gradient is charged

    def draw(self, rng, b):
        raise NotImplementedError

    def grads(self, x, Z):
        raise NotImplementedError

    def sample(self, x, rng):
        return self.mean_grad(x, 1, rng)

    def mean_grad(self, x, b, rng):
        return self.grads(x, self.draw(rng, b)).sum(axis=0) / b

    def shared_pair(self, x, y, rng):
        """grad F(x, z) and grad F(y, z) for one shared sample z."""
        Z = self.draw(rng, 1)
        return self.grads(x, Z)[0], self.grads(y, Z)[0]

    def mean_diff(self, x, y, b, rng):
        """Mean over one shared batch of grad F(x, z) - grad F(y, z)."""
        Z = self.draw(rng, b)
        return (self.grads(x, Z) - self.grads(y, Z)).sum(axis=0) / b

    def exact_gradient(self, x):
        if self.objective is None:
            raise CapabilityError("oracle has no exact gradient")
        return self.objective.gradient(x)


class NoisyOracle(StochasticOracle):
    """grad F(x, z) = grad f(x) + z * (x + 1) with z ~ N(0, scale^2 I).

    The noise depends on x so that shared-sample differences are not trivially
    exact. A batch mean only depends on the mean of the z's, which is drawn
    directly from N(0, scale^2 / b) (same distribution, O(n) work per batch).
    """

    def __init__(self, objective, scale: float, radius_sq: float | None = None):
        self.objective = objective
        self.scale = float(scale)
        self.radius_sq = radius_sq
        self.variance_bound = None if radius_sq is None else self.scale ** 2 * radius_sq

    def _zbar(self, rng, n, b):
        return rng.standard_normal(n) * (self.scale / math.sqrt(b))

    def draw(self, rng, b, n=None):
        if n is None:
            raise CapabilityError("pass the dimension n to draw noise samples")
        return rng.standard_normal((b, n)) * self.scale

    def shared_pair(self, x, y, rng):
        z = rng.standard_normal(x.size) * self.scale
        return (self.objective.gradient(x) + z * (x + 1.0),
                self.objective.gradient(y) + z * (y + 1.0))

    def grads(self, x, Z):
        return self.objective.gradient(x)[None, :] + Z * (x + 1.0)

    def mean_grad(self, x, b, rng):
        return self.objective.gradient(x) + self._zbar(rng, x.size, b) * (x + 1.0)

    def mean_diff(self, x, y, b, rng):
        zbar = self._zbar(rng, x.size, b)
        return (self.objective.gradient(x) - self.objective.gradient(y)) + zbar * (x - y)


class FiniteSumOracle(StochasticOracle):
    """f(x) = (1/m) sum_i (a_i^T x - y_i)^2 / 2 with uniform component sampling."""

    def __init__(self, A, y):
        self.A = np.asarray(A, dtype=float)
        self.y = np.asarray(y, dtype=float)
        m = self.A.shape[0]
        self.objective = Quadratic(self.A.T @ self.A / m, -self.A.T @ self.y / m,
                                   float(self.y @ self.y) / (2 * m))
        self.exact_cost = ("sfo", m)
        self.variance_bound = None

    def draw(self, rng, b):
        return rng.integers(0, self.A.shape[0], size=b)

    def grads(self, x, Z):
        a = self.A[Z]
        return a * (a @ x - self.y[Z])[:, None]


# ---------------------------------------------------------------------------
# schedules and estimator state

def is_power_checkpoint(t: int) -> bool:
    """True for t = 2^k - 1."""
    return (t + 1) & t == 0


@dataclass(frozen=True)
class StochasticSchedule:
    gamma: Callable
    batch: Callable
    rho: Callable | None = None
    checkpoint: Callable | None = None        # t -> bool
    checkpoint_batch: Callable | None = None  # t -> int


def _spider_checkpoint_batch(sigma2, L, D):
    def b(t):
        raw = math.ceil(sigma2 * (t + 1) ** 2 / (L * L * D * D)) if sigma2 else 1
        if raw > SPIDER_BATCH_CAP:
            warnings.warn(f"checkpoint batch {raw} capped at {SPIDER_BATCH_CAP}")
            raw = SPIDER_BATCH_CAP
        return max(1, raw)
    return b


def default_schedule(variant, L=None, D=None, sigma2=None, alpha=1.0) -> StochasticSchedule:
    """Schedules with the constants of the matching convergence theorems."""
    if variant == "batch_mean":
        return StochasticSchedule(lambda t: 2.0 / (t + 2), lambda t: math.ceil((t + 2) ** 2 / alpha))
    if variant == "momentum":
        return StochasticSchedule(lambda t: 2.0 / (t + 7), lambda t: 1,
                                  rho=lambda t: 4.0 / (t + 8) ** (2.0 / 3.0))
    if variant == "spider":
        if L is None or D is None:
            raise ContractViolation("the spider schedule needs L and D")
        return StochasticSchedule(lambda t: 2.0 / (t + 2), lambda t: 6 * (t + 1),
                                  checkpoint=is_power_checkpoint,
                                  checkpoint_batch=_spider_checkpoint_batch(sigma2 or 0.0, L, D))
    if variant == "svrf":
        return StochasticSchedule(lambda t: 2.0 / (t + 2), lambda t: 48 * (t + 2),
                                  checkpoint=is_power_checkpoint)
    if variant == "one_sample":
        return StochasticSchedule(lambda t: 1.0 / (t + 1), lambda t: 1,
                                  rho=lambda t: 1.0 if t == 0 else 1.0 / t)
    raise ContractViolation(f"unknown estimator variant {variant!r}")


@dataclass
class EstimatorState:
    variant: str
    schedule: StochasticSchedule
    estimate: np.ndarray | None = None
    anchor: np.ndarray | None = None
    anchor_grad: np.ndarray | None = None
    exact_calls: int = 0
    samples: list = field(default_factory=list)   # per-call sample counts

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ContractViolation(f"unknown estimator variant {self.variant!r}")


def estimate_gradient(state: EstimatorState, oracle: StochasticOracle, x_t, x_prev, t: int, rng):
    """Returns (new_state, estimate, samples_used)."""
    sch = state.schedule
    v = state.variant
    if v == "batch_mean":
        b = int(sch.batch(t))
        est, used = oracle.mean_grad(x_t, b, rng), b
    elif v == "momentum":
        b = int(sch.batch(t))
        fresh = oracle.mean_grad(x_t, b, rng)
        rho = sch.rho(t)
        if state.estimate is None or rho >= 1.0:
            est = fresh
        else:
            est = (1.0 - rho) * state.estimate + rho * fresh
        used = b
    elif v == "spider":
        if state.estimate is None or sch.checkpoint(t):
            b = int(sch.checkpoint_batch(t))
            est, used = oracle.mean_grad(x_t, b, rng), b
        else:
            b = int(sch.batch(t))
            est = state.estimate + oracle.mean_diff(x_t, x_prev, b, rng)
            used = 2 * b
    elif v == "svrf":
        if state.anchor is None or sch.checkpoint(t):
            g = oracle.exact_gradient(x_t)
            state = replace(state, anchor=np.array(x_t), anchor_grad=g,
                            exact_calls=state.exact_calls + 1)
            est, used = g, 0
        else:
            b = int(sch.batch(t))
            est = state.anchor_grad + oracle.mean_diff(x_t, state.anchor, b, rng)
            used = 2 * b
    else:  # one_sample
        rho = sch.rho(t)
        if state.estimate is None:
            est, used = oracle.mean_grad(x_t, 1, rng), 1
        elif rho >= 1.0:
            est, used = oracle.mean_grad(x_t, 1, rng), 1
        else:
            g_new, g_old = oracle.shared_pair(x_t, x_prev, rng)
            est = (1.0 - rho) * (state.estimate - g_old) + g_new
            used = 2
    state = replace(state, estimate=est, samples=state.samples + [used])
    return state, est, used


# ---------------------------------------------------------------------------
# runners

_ALIASES = {"sfw": "batch_mean", "momentum": "momentum", "spider": "spider", "svrf": "svrf",
            "one_sample": "one_sample", "1sfw": "one_sample", "batch_mean": "batch_mean"}


def run_stochastic_fw(variant: str, oracle: StochasticOracle, region, config: RunConfig,
                      schedule: StochasticSchedule | None = None, L=None):
    """Stochastic FW with the chosen estimator (sfw, momentum, spider, svrf, one_sample)."""
    if variant not in _ALIASES:
        raise ContractViolation(f"unknown stochastic variant {variant!r}")
    est_kind = _ALIASES[variant]
    objective = oracle.objective
    if schedule is None:
        L = L or config.step.L or objective.L
        schedule = default_schedule(est_kind, L, region.diameter, oracle.variance_bound)
    orc = Oracles(objective, region)
    x = start_point(orc, config)
    rec = Recorder(orc, config)
    state = EstimatorState(est_kind, schedule)
    x_prev = x
    kind, cost = oracle.exact_cost
    for t in range(config.max_iters + 1):
        f = objective.value(x)
        gap = orc.diag_gap(x)
        if gap <= config.tol or t == config.max_iters:
            rec.row(t, x, f, gap, 0.0, 0, final=True)
            break
        rng = np.random.default_rng([config.seed, t])
        exact_before = state.exact_calls
        state, est, used = estimate_gradient(state, oracle, x, x_prev, t, rng)
        orc.sfo_calls += used
        if state.exact_calls > exact_before:
            if kind == "foo":
                orc.foo_calls += cost
            else:
                orc.sfo_calls += cost
        v = orc.lmo(est)
        gamma = min(schedule.gamma(t), 1.0)
        rec.row(t, x, f, gap, gamma, 0)
        x_prev = x
        x = x + gamma * (v - x)
    return rec.trace(x, samples=state.samples)


def scgs_schedule() -> CgsSchedule:
    """gamma = 3/(t+3), eta = 4L/(t+3), beta = L D^2 / ((t+1)(t+2))."""
    return CgsSchedule("custom", gamma=lambda t: 3.0 / (t + 3), eta=lambda t, L: 4.0 * L / (t + 3),
                       beta=lambda t, L, D: L * D * D / ((t + 1) * (t + 2)))


def scgs_batch(L, D, sigma2):
    return lambda t: max(1, math.ceil((sigma2 or 0.0) * (t + 3) ** 3 / (L * D) ** 2))


def run_scgs(oracle: StochasticOracle, region, config: RunConfig,
             schedule: CgsSchedule | None = None, batch: Callable | None = None):
    """Stochastic conditional gradient sliding with batch-mean gradients at w_t."""
    objective = oracle.objective
    L = config.step.L or objective.L
    if not L:
        raise ContractViolation("sliding needs the smoothness constant L")
    D = region.diameter
    schedule = schedule or scgs_schedule()
    batch = batch or scgs_batch(L, D, oracle.variance_bound)
    orc = Oracles(objective, region)
    rec = Recorder(orc, config)
    used = []

    def gradient_at(w, t):
        b = int(batch(t))
        orc.sfo_calls += b
        used.append(b)
        return oracle.mean_grad(w, b, np.random.default_rng([config.seed, t]))

    y = _sliding(orc, rec, config, schedule, L, D, gradient_at)
    return rec.trace(y, samples=used)
