"""Step-size policies: open loop, short step, line search, adaptive, 1/sqrt(t+1).

Runners move along a descent direction ``dirn`` (``x + gamma * dirn``).
The public ``line_search`` keeps the ``x - gamma * d`` convention.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import ContractViolation, NumericFailure
from .objectives import golden_section

STEP_KINDS = ("open_loop", "short", "linesearch", "adaptive", "rsqrt")


@dataclass(frozen=True)
class StepRule:
    kind: str = "short"
    shift: int = 2
    L: float | None = None       # overrides the objective's constant for short steps
    tau: float = 2.0
    eta: float = 0.9
    alpha: float = 0.5
    L0: float | None = None      # initial smoothness estimate for adaptive steps

    def __post_init__(self):
        if self.kind not in STEP_KINDS:
            raise ValueError(f"unknown step rule {self.kind!r}")


@dataclass(frozen=True)
class StepContext:
    t: int
    dir_derivative: float   # <grad, d> with d = x - v (nonnegative for descent)
    dir_norm_sq: float
    gamma_max: float
    L_estimate: float


@dataclass(frozen=True)
class AdaptiveState:
    L_tilde: float
    tau: float = 2.0
    eta: float = 0.9
    alpha: float = 0.5

    def __post_init__(self):
        if not (self.L_tilde > 0 and self.tau > 1 >= self.eta > 0 and 0 < self.alpha <= 1):
            raise ValueError("adaptive state needs L_tilde > 0, tau > 1 >= eta > 0, 0 < alpha <= 1")


def open_loop_step(t: int, shift: int = 2) -> float:
    if shift < 2:
        raise ContractViolation("shift must be >= 2")
    return 2.0 / (t + shift)


def short_step(ctx: StepContext) -> float:
    if ctx.L_estimate <= 0:
        raise ContractViolation("short step needs a positive smoothness estimate")
    if ctx.dir_derivative <= 0:
        return 0.0
    if ctx.dir_norm_sq == 0:
        raise ContractViolation("zero direction with positive directional derivative")
    return min(ctx.dir_derivative / (ctx.L_estimate * ctx.dir_norm_sq), ctx.gamma_max)


def _line_search(objective, x, dirn, gamma_max, grad=None):
    """argmin of f(x + gamma dirn) over [0, gamma_max]."""
    if objective.is_quadratic:
        slope = -float((objective.gradient(x) if grad is None else grad) @ dirn)
        if slope <= 0:
            return 0.0
        curv = objective.curvature(dirn)
        if curv <= 0:
            return gamma_max
        return min(slope / curv, gamma_max)
    if grad is not None and float(grad @ dirn) >= 0:
        return 0.0
    if math.isinf(gamma_max):
        raise ContractViolation("generic line search needs a finite gamma_max")
    phi = lambda g: objective.value(x + g * dirn)
    lo, hi = golden_section(phi, 0.0, gamma_max, 1e-10 * gamma_max)
    gamma = 0.5 * (lo + hi)
    f0 = objective.value(x)
    if phi(gamma_max) < min(phi(gamma), f0):
        gamma = gamma_max
    return gamma if phi(gamma) <= f0 else 0.0


def line_search(objective, x, d, gamma_max: float) -> float:
    """Step gamma in [0, gamma_max] minimizing f(x - gamma d); never increases f."""
    if gamma_max <= 0:
        raise ContractViolation("gamma_max must be positive")
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    return _line_search(objective, x, -d, gamma_max)


def adaptive_accepts(objective, x, dirn, gamma, M, alpha, grad=None, fx=None) -> bool:
    """The relaxed sufficient-decrease test of the adaptive rule.

    f(x + gamma dirn) - f(x) <= alpha gamma <grad, dirn> + alpha^2 gamma^2 M ||dirn||^2 / 2
    """
    grad = objective.gradient(x) if grad is None else grad
    fx = objective.value(x) if fx is None else fx
    lhs = objective.value(x + gamma * dirn) - fx
    rhs = alpha * gamma * float(grad @ dirn) + 0.5 * alpha ** 2 * gamma ** 2 * M * float(dirn @ dirn)
    return lhs <= rhs


def _adaptive(objective, x, dirn, state: AdaptiveState, gamma_max=1.0, grad=None):
    grad = objective.gradient(x) if grad is None else grad
    slope = -float(grad @ dirn)
    if slope < 0:
        raise ContractViolation("adaptive step needs a descent direction")
    nsq = float(dirn @ dirn)
    if slope == 0 or nsq == 0:
        return state, 0.0
    fx = objective.value(x)
    noise = 16.0 * np.finfo(float).eps * max(abs(fx), 1e-300)
    M = state.eta * state.L_tilde
    for _ in range(65):
        gamma = min(slope / (M * nsq), gamma_max)
        if state.alpha * gamma * slope <= noise:
            # predicted decrease is below rounding of f: the test cannot be decided, stay put
            return state, 0.0
        if adaptive_accepts(objective, x, dirn, gamma, M, state.alpha, grad, fx):
            return replace(state, L_tilde=M), gamma
        M *= state.tau
    raise NumericFailure("adaptive step: smoothness estimate kept growing (bad scaling?)")


def adaptive_step(objective, x, v, state: AdaptiveState):
    """Returns (new state, gamma) for the FW direction v - x."""
    x = np.asarray(x, dtype=float)
    return _adaptive(objective, x, np.asarray(v, dtype=float) - x, state, 1.0)


def initial_smoothness(objective, x0, v0, gamma=1e-3) -> float:
    """Secant estimate ||grad(x0) - grad(x0 + gamma (v0 - x0))|| / (gamma ||v0 - x0||)."""
    d = np.asarray(v0, dtype=float) - x0
    nd = float(np.linalg.norm(d))
    if nd == 0:
        return 1.0
    est = float(np.linalg.norm(objective.gradient(x0) - objective.gradient(x0 + gamma * d))) / (gamma * nd)
    return est if est > 0 else 1.0


class StepPolicy:
    """Stateful dispatcher used by the runners (owns the adaptive estimate)."""

    def __init__(self, rule: StepRule, objective):
        self.rule = rule
        self.objective = objective
        self.L = rule.L if rule.L is not None else objective.L
        if rule.kind == "short" and not self.L:
            raise ContractViolation("short steps need a smoothness constant")
        self.state: AdaptiveState | None = None
        if rule.kind == "adaptive" and rule.L0 is not None:
            self.state = AdaptiveState(rule.L0, rule.tau, rule.eta, rule.alpha)

    def __call__(self, t, x, dirn, grad, gamma_max=1.0) -> float:
        kind = self.rule.kind
        if kind == "open_loop":
            return min(open_loop_step(t, self.rule.shift), gamma_max)
        if kind == "rsqrt":
            return min(1.0 / math.sqrt(t + 1), gamma_max)
        if kind == "short":
            return short_step(StepContext(t, -float(grad @ dirn), float(dirn @ dirn), gamma_max, self.L))
        if kind == "linesearch":
            return _line_search(self.objective, x, dirn, gamma_max, grad)
        if self.state is None:
            L0 = initial_smoothness(self.objective, x, x + dirn)
            self.state = AdaptiveState(L0, self.rule.tau, self.rule.eta, self.rule.alpha)
        self.state, gamma = _adaptive(self.objective, x, dirn, self.state, gamma_max, grad)
        return gamma
