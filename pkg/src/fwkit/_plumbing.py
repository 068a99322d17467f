"""Run configuration, counted oracle access and trace recording shared by the runners."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .core import ContractViolation, RunTrace, check_finite, dual_gap
from .steps import StepRule


@dataclass
class RunConfig:
    max_iters: int = 1000
    tol: float = 1e-7
    step: StepRule = field(default_factory=StepRule)
    seed: int = 0
    record_every: int = 1
    x0: Any = None
    keep_iterates: bool = False
    timing: bool = True

    def __post_init__(self):
        if self.max_iters < 1 or not self.tol > 0 or self.record_every < 1:
            raise ContractViolation("need max_iters >= 1, tol > 0, record_every >= 1")


class Oracles:
    """Counted gradient / LMO access. Function values are never counted."""

    def __init__(self, objective, region, lmo=None):
        self.objective = objective
        self.region = region
        self._lmo = lmo or region.lmo
        self.lmo_calls = 0
        self.foo_calls = 0
        self.sfo_calls = 0
        self.counted = _CountedObjective(objective, self)

    def grad(self, x, check=True):
        """Counted gradient. Callers passing ``check=False`` must validate it themselves."""
        self.foo_calls += 1
        if check:
            return check_finite(self.objective.gradient(x), "gradient")
        return self.objective.gradient(x)

    def lmo(self, c):
        self.lmo_calls += 1
        return self._lmo(c)

    def value(self, x):
        return self.objective.value(x)

    def diag_gap(self, x):
        """Uncounted FW gap, used only to fill trace rows."""
        g = self.objective.gradient(x)
        return dual_gap(g, x, self.region.lmo(g))


class _CountedObjective:
    def __init__(self, objective, orc):
        self._obj, self._orc = objective, orc
        self.is_quadratic = objective.is_quadratic
        self.L, self.mu, self.f_star = objective.L, objective.mu, objective.f_star

    def value(self, x):
        return self._obj.value(x)

    def gradient(self, x):
        return self._orc.grad(x)

    def curvature(self, d):
        return self._obj.curvature(d)


def start_point(orc: Oracles, config: RunConfig):
    region = orc.region
    if config.x0 is not None:
        x = np.array(config.x0, dtype=float).ravel()
        if x.size != region.dim:
            raise ContractViolation(f"start point has size {x.size}, region needs {region.dim}")
        return x
    return np.asarray(orc.lmo(orc.grad(region.center())), dtype=float)


class Recorder:
    def __init__(self, orc: Oracles, config: RunConfig, f_star=None):
        self.orc = orc
        self.config = config
        self.f_star = orc.objective.f_star if f_star is None else f_star
        self.rows: list[tuple] = []
        self.iterates: list | None = [] if config.keep_iterates else None
        self.t0 = time.perf_counter_ns()

    def row(self, t, x, f, gap, step, active_size=0, final=False):
        if not final and t % self.config.record_every:
            return
        o = self.orc
        primal = f - self.f_star if self.f_star is not None else math.nan
        wall = time.perf_counter_ns() - self.t0 if self.config.timing else 0
        self.rows.append((t, f, gap, primal, step, o.lmo_calls, o.foo_calls, o.sfo_calls,
                          active_size, wall))
        if self.iterates is not None:
            self.iterates.append(np.array(x, dtype=float))

    def trace(self, x, active=None, **extra) -> RunTrace:
        return RunTrace(self.rows, np.array(x, dtype=float), active, self.iterates, dict(extra))
