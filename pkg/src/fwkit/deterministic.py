"""Deterministic conditional-gradient runners.

Every runner takes ``(objective, region, config)`` plus method-specific
options and returns a RunTrace. Row ``t`` holds the state at ``x_t`` and the
step size taken from it; the last row has step 0. Oracle counters are
cumulative and exclude the extra evaluations made only to fill trace rows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._plumbing import Oracles, Recorder, RunConfig, start_point
from .core import (ActiveSet, AtomStore, CapabilityError, ContractViolation, NumericFailure,
                   check_finite, dual_gap)
from .regions import WeakSeparationCache, weak_separation
from .steps import StepPolicy, StepRule, _line_search, open_loop_step

__all__ = [
    "RunConfig", "BoostConfig", "CgsSchedule", "run_fw", "run_afw", "run_pfw", "run_fcfw",
    "run_dipfw", "run_lazy", "simplex_descent", "run_bcg", "cg_projection", "run_cgs",
    "run_nepfw", "boost_direction", "run_boostfw", "run_hcgs",
]


# ---------------------------------------------------------------------------
# vanilla

def run_fw(objective, region, config: RunConfig, lmo: Callable | None = None,
           track_active: bool = False):
    """Vanilla Frank-Wolfe. ``lmo(c, t)`` may replace the exact oracle (inexact-oracle studies)."""
    orc = Oracles(objective, region)
    x = start_point(orc, config)
    rec = Recorder(orc, config)
    policy = StepPolicy(config.step, orc.counted)
    store = AtomStore(x[None, :], [1.0]) if track_active else None
    for t in range(config.max_iters + 1):
        g = orc.grad(x, check=False)
        if lmo is None:
            v = orc.lmo(g)
        else:
            orc.lmo_calls += 1
            v = np.asarray(lmo(g, t), dtype=float)
        dirn = v - x
        # equals dual_gap(g, x, v) bit for bit: negating a vector is exact
        gap = -float(g.dot(dirn))
        if not math.isfinite(gap):
            # any inf/nan entry of g makes this dot product non-finite
            check_finite(g, "gradient")
            raise NumericFailure("non-finite FW gap")
        if gap <= 0.0:
            gap = 0.0
        f = objective.value(x)
        size = len(store) if store is not None else 0
        if gap <= config.tol or t == config.max_iters:
            rec.row(t, x, f, gap, 0.0, size, final=True)
            break
        gamma = policy(t, x, dirn, g, 1.0)
        rec.row(t, x, f, gap, gamma, size)
        x = x + gamma * dirn
        if store is not None:
            store.fw_step(v, gamma, x)
    return rec.trace(x, store.snapshot() if store is not None else None)


# ---------------------------------------------------------------------------
# away-step and pairwise

def _active_runner(objective, region, config, pairwise: bool):
    orc = Oracles(objective, region)
    x = start_point(orc, config)
    rec = Recorder(orc, config)
    policy = StepPolicy(config.step, orc.counted)
    store = AtomStore(x[None, :], [1.0])
    kinds = []
    for t in range(config.max_iters + 1):
        g = orc.grad(x)
        v = orc.lmo(g)
        gap = dual_gap(g, x, v)
        prods = store.matrix() @ g
        a = int(np.argmax(prods))
        strong = max(float(prods[a] - g @ v), 0.0)
        f = objective.value(x)
        if strong <= config.tol or t == config.max_iters:
            rec.row(t, x, f, gap, 0.0, len(store), final=True)
            break
        lam = store.w[a]
        away_atom = store.atoms[a]
        if pairwise:
            dirn = v - away_atom
            gmax = lam
            kind = "pairwise"
        elif float(g @ (x - v)) >= float(g @ (away_atom - x)):
            dirn = v - x
            gmax = 1.0
            kind = "fw"
        else:
            dirn = x - away_atom
            gmax = lam / (1.0 - lam) if lam < 1.0 else math.inf
            kind = "away"
        gamma = policy(t, x, dirn, g, gmax)
        rec.row(t, x, f, gap, gamma, len(store))
        x_new = x + gamma * dirn
        if kind == "fw":
            store.fw_step(v, gamma, x_new)
        elif kind == "away":
            if store.away_step(a, gamma, x_new):
                kind = "drop"
        else:
            if store.pairwise_step(v, a, gamma, x_new):
                kind = "pairwise_drop"
        kinds.append(kind)
        x = store.x
    return rec.trace(x, store.snapshot(), step_kinds=kinds)


def run_afw(objective, region, config: RunConfig):
    """Away-step Frank-Wolfe; stops on the strong FW gap over the active set."""
    return _active_runner(objective, region, config, pairwise=False)


def run_pfw(objective, region, config: RunConfig):
    """Pairwise Frank-Wolfe: weight moves from the away atom to the FW vertex."""
    return _active_runner(objective, region, config, pairwise=True)


# ---------------------------------------------------------------------------
# fully corrective

def _correct_weights(orc: Oracles, V, lam, tol, L, max_stall=10 ** 4, max_total=10 ** 5):
    """Minimize f(lam @ V) over the simplex by away-step FW in barycentric coordinates."""
    obj = orc.objective
    lam = lam.copy()
    k = len(lam)
    L_s = None
    if not obj.is_quadratic:
        L_s = L * float(np.linalg.norm(V, 2)) ** 2
    best = math.inf
    stall = 0
    for _ in range(max_total):
        x = lam @ V
        g = orc.grad(x)
        gl = V @ g
        i = int(np.argmin(gl))
        supp = lam > 0
        a = int(np.flatnonzero(supp)[np.argmax(gl[supp])])
        if gl[a] - gl[i] <= tol:
            return lam
        mid = float(gl @ lam)
        dl = np.zeros(k)
        if mid - gl[i] >= gl[a] - mid:
            dl -= lam
            dl[i] += 1.0
            gmax = 1.0
        else:
            dl += lam
            dl[a] -= 1.0
            gmax = lam[a] / (1.0 - lam[a]) if lam[a] < 1 else math.inf
        dirn = dl @ V
        slope = -float(g @ dirn)
        if slope <= 0:
            return lam
        if obj.is_quadratic:
            curv = obj.curvature(dirn)
            gamma = gmax if curv <= 0 else min(slope / curv, gmax)
        else:
            gamma = min(slope / (L_s * float(dl @ dl)), gmax)
        lam = lam + gamma * dl
        lam[lam < 1e-14] = 0.0
        lam /= lam.sum()
        fv = obj.value(lam @ V)
        if fv < best - 1e-15 * max(1.0, abs(best)):
            best, stall = fv, 0
        else:
            stall += 1
            if stall >= max_stall:
                raise NumericFailure("fully corrective step stalled")
    return lam


def run_fcfw(objective, region, config: RunConfig):
    """Fully-corrective FW: after each LMO call, re-optimize over the hull of all kept atoms."""
    orc = Oracles(objective, region)
    x = start_point(orc, config)
    rec = Recorder(orc, config)
    V = x[None, :].copy()
    lam = np.ones(1)
    inner_tol = 1e-2 * config.tol
    L = config.step.L or objective.L
    if not objective.is_quadratic and not L:
        raise ContractViolation("non-quadratic objectives need L for the correction step")
    for t in range(config.max_iters + 1):
        g = orc.grad(x)
        v = orc.lmo(g)
        gap = dual_gap(g, x, v)
        prods = V @ g
        strong = max(float(prods.max() - g @ v), 0.0)
        f = objective.value(x)
        if strong <= config.tol or t == config.max_iters:
            rec.row(t, x, f, gap, 0.0, len(lam), final=True)
            break
        rec.row(t, x, f, gap, math.nan, len(lam))
        if not np.any(np.all(V == v, axis=1)):
            V = np.vstack([V, v])
            lam = np.append(lam, 0.0)
        lam = _correct_weights(orc, V, lam, inner_tol, L)
        keep = lam >= 1e-12
        V, lam = V[keep], lam[keep] / lam[keep].sum()
        x = lam @ V
    return rec.trace(x, ActiveSet(V.copy(), lam.copy(), x.copy()))


# ---------------------------------------------------------------------------
# decomposition-invariant pairwise

def _power_two_step(t, mu, L, D, support):
    c = mu / (16.0 * L * D * D * support)
    bound = math.sqrt(c) * (1.0 - c) ** ((max(t, 1) - 1) / 2.0)
    k = max(0, math.ceil(-math.log2(bound)))
    return 2.0 ** (-k)


def run_dipfw(objective, region, config: RunConfig, schedule: str = "linesearch",
              support: int | None = None):
    """Decomposition-invariant pairwise FW for 0/1 polytopes; keeps no active set.

    ``schedule='power2'`` uses the halving step sequence, which needs the number
    of nonzeros of the optimum (``support``) and the objective's mu and L.
    """
    if not region.zero_one:
        raise CapabilityError(f"decomposition-invariant pairwise FW needs a 0/1 polytope, got {region.kind}")
    if schedule not in ("linesearch", "power2"):
        raise ContractViolation("schedule must be 'linesearch' or 'power2'")
    if schedule == "power2" and (support is None or not objective.mu or not objective.L):
        raise ContractViolation("power-of-two steps need support, mu and L")
    orc = Oracles(objective, region)
    x = start_point(orc, config)
    rec = Recorder(orc, config)
    for t in range(config.max_iters + 1):
        g = orc.grad(x)
        v = orc.lmo(g)
        gap = dual_gap(g, x, v)
        f = objective.value(x)
        if gap <= config.tol or t == config.max_iters:
            rec.row(t, x, f, gap, 0.0, 0, final=True)
            break
        orc.lmo_calls += 1
        a = region.away_vertex(g, x)
        dirn = v - a
        gmax = region.max_step(x, dirn)
        if schedule == "linesearch":
            gamma = _line_search(orc.counted, x, dirn, gmax, g) if gmax > 0 else 0.0
        else:
            gamma = min(_power_two_step(t, objective.mu, objective.L, region.diameter, support), gmax)
        rec.row(t, x, f, gap, gamma, 0)
        x = x + gamma * dirn
        # coordinates driven to the bound by the step are snapped to keep the face exact
        np.clip(x, 0.0, 1.0, out=x)
        x[np.abs(x) < 1e-15] = 0.0
    return rec.trace(x, None, active_set_bytes=0)


# ---------------------------------------------------------------------------
# lazy variants

def run_lazy(variant: str, objective, region, config: RunConfig, K: float = 1.0,
             phi0: float | None = None, cache_capacity: int = 256):
    """Lazified FW (``variant='fw'``) or lazified away-step FW (``variant='afw'``).

    Negative separation answers shrink the threshold to min(phi/2, exact gap).
    ``extra['certificates']`` lists (gap, phi) for every negative answer.
    """
    if variant not in ("fw", "afw"):
        raise ContractViolation("variant must be 'fw' or 'afw'")
    if K < 1:
        raise ContractViolation("K must be >= 1")
    orc = Oracles(objective, region)
    x = start_point(orc, config)
    rec = Recorder(orc, config)
    policy = StepPolicy(config.step, orc.counted)
    cache = WeakSeparationCache(cache_capacity)
    store = AtomStore(x[None, :], [1.0])
    certs = []
    g = orc.grad(x)
    if phi0 is None:
        v0 = orc.lmo(g)
        gap0 = dual_gap(g, x, v0)
        if gap0 <= config.tol:
            rec.row(0, x, objective.value(x), gap0, 0.0, 1, final=True)
            return rec.trace(x, store.snapshot(), certificates=certs, cache_hits=0)
        phi = gap0 / 2.0
    else:
        phi = float(phi0)
    for t in range(config.max_iters + 1):
        if t > 0:
            g = orc.grad(x)
        f = objective.value(x)
        diag = orc.diag_gap(x)
        if t == config.max_iters:
            rec.row(t, x, f, diag, 0.0, len(store), final=True)
            break
        kind = None
        if variant == "afw":
            prods = store.matrix() @ g
            a = int(np.argmax(prods))
            s = int(np.argmin(prods))
            gx = float(g @ x)
            away_val = float(prods[a]) - gx
            fw_val = gx - float(prods[s])
            if max(away_val, fw_val) >= phi / K:
                if fw_val >= away_val:
                    kind, v = "fw", store.atoms[s]
                else:
                    kind = "away"
        if kind is None:
            sep = weak_separation(region, cache, g, x, phi, K, lmo=orc.lmo)
            if not sep.positive:
                certs.append((sep.gap, phi))
                stop_gap = sep.gap
                if variant == "afw":
                    prods = store.matrix() @ g
                    stop_gap = max(float(prods.max() - g @ sep.vertex), 0.0)
                if stop_gap <= config.tol:
                    rec.row(t, x, f, diag, 0.0, len(store), final=True)
                    break
                phi = min(phi / 2.0, sep.gap) if sep.gap > 0 else phi / 2.0
                rec.row(t, x, f, diag, 0.0, len(store))
                continue
            kind, v = "fw", sep.vertex
        if kind == "fw":
            dirn = v - x
            gamma = policy(t, x, dirn, g, 1.0)
            rec.row(t, x, f, diag, gamma, len(store))
            x_new = x + gamma * dirn
            store.fw_step(v, gamma, x_new)
        else:
            lam = store.w[a]
            dirn = x - store.atoms[a]
            gmax = lam / (1.0 - lam) if lam < 1.0 else math.inf
            gamma = policy(t, x, dirn, g, gmax)
            rec.row(t, x, f, diag, gamma, len(store))
            store.away_step(a, gamma, x + gamma * dirn)
        x = store.x
    return rec.trace(x, store.snapshot(), certificates=certs, cache_hits=cache.hits,
                     cache_misses=cache.misses)


# ---------------------------------------------------------------------------
# blended conditional gradients

def _sido(objective, store: AtomStore, grad):
    """Simplex descent on the active set held in ``store`` (mutated in place)."""
    k = len(store)
    if k == 1:
        return "stationary"
    V = store.matrix()
    lam = store.weights()
    gs = V @ grad
    d = gs - gs.mean()
    if np.linalg.norm(d) <= 1e-12:
        return "stationary"
    pos = d > 0
    ratios = lam[pos] / d[pos]
    j = int(np.flatnonzero(pos)[np.argmin(ratios)])
    gamma = float(ratios.min())
    y_lam = lam - gamma * d
    y_lam[j] = 0.0
    y_lam = np.maximum(y_lam, 0.0)
    y_lam /= y_lam.sum()
    x = store.x
    y = y_lam @ V
    if objective.value(y) <= objective.value(x):
        store.set_weights(y_lam)
        if len(store) == k:       # guard: the blocking atom must go
            store.drop(store.find(V[j]))
        return "drop"
    dirn = y - x
    s = _line_search(objective, x, dirn, 1.0, grad)
    store.set_weights(lam + s * (y_lam - lam))
    return "descent"


def simplex_descent(objective, active: ActiveSet, L: float):
    """One simplex-descent step over conv(active atoms).

    Returns ``(new_active, kind)`` with kind in {'drop', 'descent', 'stationary'}.
    A descent step decreases f by at least max_ij <grad, v_i - v_j>^2 / (4 L)
    when L bounds the smoothness of f restricted to barycentric coordinates.
    """
    if not L > 0:
        raise ContractViolation("L must be positive")
    store = AtomStore.from_active(active)
    grad = check_finite(objective.gradient(store.x), "gradient")
    kind = _sido(objective, store, grad)
    return store.snapshot(), kind


def run_bcg(objective, region, config: RunConfig, K: float = 1.0, cache_capacity: int = 256,
            prune_every: int = 100):
    """Blended conditional gradients: simplex descent while the active-set gap beats phi,
    otherwise a lazy FW step or a halving of phi."""
    if K < 1:
        raise ContractViolation("K must be >= 1")
    orc = Oracles(objective, region)
    x = start_point(orc, config)
    rec = Recorder(orc, config)
    policy = StepPolicy(config.step, orc.counted)
    cache = WeakSeparationCache(cache_capacity)
    store = AtomStore(x[None, :], [1.0])
    certs, kinds = [], []
    g = orc.grad(x)
    v0 = orc.lmo(g)
    phi = dual_gap(g, x, v0) / 2.0
    if phi * 2.0 <= config.tol:
        rec.row(0, x, objective.value(x), 2.0 * phi, 0.0, 1, final=True)
        return rec.trace(x, store.snapshot(), certificates=certs, step_kinds=kinds, cache_hits=0)
    for t in range(config.max_iters + 1):
        if t > 0:
            g = orc.grad(x)
        f = objective.value(x)
        diag = orc.diag_gap(x)
        if t == config.max_iters:
            rec.row(t, x, f, diag, 0.0, len(store), final=True)
            break
        prods = store.matrix() @ g
        if float(prods.max() - prods.min()) >= phi:
            x_before = x
            kind = _sido(orc.counted, store, g)
            if kind != "stationary":
                x = store.x
                step = float(np.linalg.norm(x - x_before))
                rec.row(t, x_before, f, diag, step, len(store))
                kinds.append(kind)
                if prune_every and (t + 1) % prune_every == 0:
                    store.cleanup()
                continue
        sep = weak_separation(region, cache, g, x, phi, K, lmo=orc.lmo)
        if not sep.positive:
            certs.append((sep.gap, phi))
            strong = max(float(prods.max() - g @ sep.vertex), 0.0)
            if strong <= config.tol:
                rec.row(t, x, f, diag, 0.0, len(store), final=True)
                break
            phi /= 2.0
            kinds.append("negative")
            rec.row(t, x, f, diag, 0.0, len(store))
            continue
        v = sep.vertex
        dirn = v - x
        gamma = policy(t, x, dirn, g, 1.0)
        rec.row(t, x, f, diag, gamma, len(store))
        store.fw_step(v, gamma, x + gamma * dirn)
        kinds.append("fw")
        x = store.x
    return rec.trace(x, store.snapshot(), certificates=certs, step_kinds=kinds,
                     cache_hits=cache.hits, cache_misses=cache.misses)


# ---------------------------------------------------------------------------
# conditional gradient sliding

def _cg_projection(g0, u0, eta, beta, lmo, max_inner=10 ** 6):
    u = np.array(u0, dtype=float)
    g = np.array(g0, dtype=float)
    calls = 0
    for _ in range(max_inner):
        v = lmo(g)
        calls += 1
        d = u - v
        gap = float(g @ d)
        if gap <= beta:
            return u, calls
        alpha = min(gap / (eta * float(d @ d)), 1.0)
        u = u + alpha * (v - u)
        g = g0 + eta * (u - u0)
    raise NumericFailure("inner conditional-gradient loop exceeded its iteration budget")


def cg_projection(g0, u0, eta: float, beta: float, region, max_inner: int = 10 ** 6):
    """Approximately minimize <g0, u> + eta ||u - u0||^2 / 2 over the region by FW with
    short steps, returning the first iterate whose inner FW gap is <= beta."""
    if not eta > 0 or beta < 0:
        raise ContractViolation("need eta > 0 and beta >= 0")
    u, _ = _cg_projection(np.asarray(g0, dtype=float), np.asarray(u0, dtype=float), eta, beta,
                          region.lmo, max_inner)
    return u


@dataclass(frozen=True)
class CgsSchedule:
    """Parameter schedules for sliding.

    mode 'default': gamma=3/(t+3), eta=3L/(t+2), beta=LD^2/((t+1)(t+2)).
    mode 'fixed_horizon': gamma=2/(t+2), eta=2L/(t+1), beta=2LD^2/(T(t+1)).
    mode 'restart': stages of T=ceil(2 sqrt(6L/mu)) iterations with gamma=2/(t+2),
    eta=2L/(t+1), beta=8 L phi0 2^-s / (mu T (t+1)); requires mu.
    mode 'custom': callables gamma(t), eta(t, L), beta(t, L, D).
    """

    mode: str = "default"
    horizon: int | None = None
    mu: float | None = None
    phi0: float | None = None
    gamma: Callable | None = None
    eta: Callable | None = None
    beta: Callable | None = None

    def __post_init__(self):
        if self.mode not in ("default", "fixed_horizon", "restart", "custom"):
            raise ContractViolation(f"unknown sliding schedule {self.mode!r}")
        if self.mode == "restart" and not (self.mu and self.mu > 0):
            raise ContractViolation("restart schedule needs mu > 0")
        if self.mode == "custom" and None in (self.gamma, self.eta, self.beta):
            raise ContractViolation("custom schedule needs gamma, eta and beta")

    def stage_length(self, L):
        return math.ceil(2.0 * math.sqrt(6.0 * L / self.mu))

    def params(self, t, L, D, T=None, stage=0, phi0=None):
        if self.mode == "default":
            return 3.0 / (t + 3), 3.0 * L / (t + 2), L * D * D / ((t + 1) * (t + 2))
        if self.mode == "fixed_horizon":
            return 2.0 / (t + 2), 2.0 * L / (t + 1), 2.0 * L * D * D / (T * (t + 1))
        if self.mode == "restart":
            return (2.0 / (t + 2), 2.0 * L / (t + 1),
                    8.0 * L * phi0 * 2.0 ** (-stage) / (self.mu * T * (t + 1)))
        return self.gamma(t), self.eta(t, L), self.beta(t, L, D)


def _sliding(orc: Oracles, rec: Recorder, config: RunConfig, schedule: CgsSchedule, L, D,
             gradient_at: Callable):
    """Shared sliding loop; ``gradient_at(w, t)`` supplies the (possibly stochastic) gradient."""
    objective, region = orc.objective, orc.region
    x = start_point(orc, config)
    y = x.copy()
    T = None
    phi0 = None
    if schedule.mode == "fixed_horizon":
        T = schedule.horizon or config.max_iters
    elif schedule.mode == "restart":
        T = schedule.stage_length(L)
        phi0 = schedule.phi0
        if phi0 is None:
            g0 = orc.grad(x)
            phi0 = max(dual_gap(g0, x, orc.lmo(g0)), 1e-300)
    stage, local = 0, 0
    for t in range(config.max_iters + 1):
        f = objective.value(y)
        diag = orc.diag_gap(y)
        if diag <= config.tol or t == config.max_iters:
            rec.row(t, y, f, diag, 0.0, 0, final=True)
            break
        gamma, eta, beta = schedule.params(local, L, D, T, stage, phi0)
        rec.row(t, y, f, diag, gamma, 0)
        w = (1.0 - gamma) * y + gamma * x
        gw = gradient_at(w, t)
        x, calls = _cg_projection(gw, x, eta, beta, region.lmo)
        orc.lmo_calls += calls
        y = y + gamma * (x - y)
        local += 1
        if schedule.mode == "restart" and local == T:
            stage, local = stage + 1, 0
            x = y.copy()
    return y


def run_cgs(objective, region, config: RunConfig, schedule: CgsSchedule = CgsSchedule()):
    """Conditional gradient sliding; trace rows report the output sequence y_t."""
    L = config.step.L or objective.L
    if not L:
        raise ContractViolation("sliding needs the smoothness constant L")
    orc = Oracles(objective, region)
    rec = Recorder(orc, config)
    y = _sliding(orc, rec, config, schedule, L, region.diameter, lambda w, t: orc.grad(w))
    return rec.trace(y)


# ---------------------------------------------------------------------------
# nearest extreme point

def run_nepfw(objective, region, config: RunConfig):
    """FW with the nearest-extreme-point oracle and gamma_t = 2/(t+2)."""
    L = config.step.L or objective.L
    if not L:
        raise ContractViolation("nearest-extreme-point FW needs L")
    orc = Oracles(objective, region)
    x = start_point(orc, config)
    rec = Recorder(orc, config)
    for t in range(config.max_iters + 1):
        g = orc.grad(x)
        f = objective.value(x)
        diag = orc.diag_gap(x)
        if diag <= config.tol or t == config.max_iters:
            rec.row(t, x, f, diag, 0.0, 0, final=True)
            break
        gamma = open_loop_step(t)
        orc.lmo_calls += 1
        v = region.nep(g, L * gamma / 2.0, x)
        rec.row(t, x, f, diag, gamma, 0)
        x = x + gamma * (v - x)
    return rec.trace(x)


# ---------------------------------------------------------------------------
# boosting

@dataclass(frozen=True)
class BoostConfig:
    K: int = 1000
    delta: float = 1e-3

    def __post_init__(self):
        if self.K < 1 or not 0 < self.delta < 1:
            raise ContractViolation("need K >= 1 and 0 < delta < 1")


def _cos(a, b):
    nb = float(np.linalg.norm(b))
    if nb == 0.0:
        return -1.0
    return float(a @ b) / (float(np.linalg.norm(a)) * nb)


def _boost(grad, x, lmo, boost: BoostConfig):
    neg = -grad
    d = np.zeros_like(x)
    Lam = 0.0
    rounds = 0
    first = None
    for k in range(boost.K):
        r = neg - d
        v = lmo(-r)
        u = v - x
        use_fw = True
        nd = float(np.linalg.norm(d))
        if nd > 0:
            u2 = -d / nd
            if float(r @ u2) > float(r @ u):
                u, use_fw = u2, False
        nu = float(u @ u)
        if nu == 0.0:
            break
        lam_k = float(r @ u) / nu
        d_new = d + lam_k * u
        if _cos(neg, d_new) - _cos(neg, d) < boost.delta:
            break
        Lam = Lam + lam_k if use_fw else Lam * (1.0 - lam_k / nd)
        if k == 0:
            first = u
        d = d_new
        rounds = k + 1
    if Lam <= 0.0:
        return None, rounds
    if rounds == 1:
        return first, 1       # d / Lam collapses to the plain FW direction
    return d / Lam, rounds


def boost_direction(objective, x, region, boost: BoostConfig = BoostConfig()):
    """Aligned direction g with x + g feasible; falls back to v - x when no round is accepted."""
    x = np.asarray(x, dtype=float)
    grad = check_finite(objective.gradient(x), "gradient")
    g, rounds = _boost(grad, x, region.lmo, boost)
    if g is None:
        return region.lmo(grad) - x, 0
    return g, rounds


def run_boostfw(objective, region, config: RunConfig, boost: BoostConfig = BoostConfig()):
    """Boosted FW: the FW direction is replaced by a gradient-pursuit direction."""
    orc = Oracles(objective, region)
    x = start_point(orc, config)
    rec = Recorder(orc, config)
    policy = StepPolicy(config.step, orc.counted)
    rounds_log = []
    for t in range(config.max_iters + 1):
        g = orc.grad(x)
        f = objective.value(x)
        gap = orc.diag_gap(x)
        if gap <= config.tol or t == config.max_iters:
            orc.lmo_calls += 1      # the oracle call that certifies the final gap
            rec.row(t, x, f, gap, 0.0, 0, final=True)
            break
        dirn, rounds = _boost(g, x, orc.lmo, boost)
        if dirn is None:
            dirn = orc.lmo(g) - x
        gamma = policy(t, x, dirn, g, 1.0)
        rec.row(t, x, f, gap, gamma, 0)
        rounds_log.append(rounds)
        x = x + gamma * dirn
    return rec.trace(x, rounds=rounds_log)


# ---------------------------------------------------------------------------
# smoothing for nonsmooth composite terms

def run_hcgs(h, g, A, region, config: RunConfig, beta: float = 1.0, f_star=None):
    """FW on h + g_beta_t(A .) with beta_t = beta / sqrt(t+1) and gamma_t = 2/(t+2).

    ``g`` must provide ``prox(z, beta)`` and ``value(z)``; trace values are the
    unsmoothed objective h(x) + g(Ax).
    """
    from .objectives import SmoothedComposite

    if not hasattr(g, "prox"):
        raise CapabilityError("the nonsmooth part must provide a prox operator")
    if not beta > 0:
        raise ContractViolation("beta must be positive")
    smooth0 = SmoothedComposite(h, g, A, beta)
    smooth0.f_star = f_star
    orc = Oracles(smooth0, region)
    x = start_point(orc, config)
    rec = Recorder(orc, config, f_star=f_star)
    shift = config.step.shift if config.step.kind == "open_loop" else 2
    for t in range(config.max_iters + 1):
        sm = SmoothedComposite(h, g, A, beta / math.sqrt(t + 1))
        z = check_finite(sm.gradient(x), "gradient")
        orc.foo_calls += 1
        v = orc.lmo(z)
        gap = dual_gap(z, x, v)
        f = sm.true_value(x)
        if gap <= config.tol or t == config.max_iters:
            rec.row(t, x, f, gap, 0.0, 0, final=True)
            break
        gamma = open_loop_step(t, shift)
        rec.row(t, x, f, gap, gamma, 0)
        x = x + gamma * (v - x)
    return rec.trace(x)


ALGORITHMS = {
    "fw": run_fw, "afw": run_afw, "pfw": run_pfw, "fcfw": run_fcfw, "dipfw": run_dipfw,
    "lazy_fw": lambda o, r, c, **kw: run_lazy("fw", o, r, c, **kw),
    "lazy_afw": lambda o, r, c, **kw: run_lazy("afw", o, r, c, **kw),
    "bcg": run_bcg, "cgs": run_cgs, "nepfw": run_nepfw, "boostfw": run_boostfw,
}
