"""Shared vocabulary: errors, gaps, active sets, run traces and gradient checks."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

WEIGHT_EPS = 1e-12


class FwkitError(Exception):
    """Base class for library errors."""


class NumericFailure(FwkitError):
    """A numerical routine failed (non-finite values, non-convergence)."""


class ContractViolation(FwkitError):
    """A documented precondition was not met."""


class CapabilityError(FwkitError):
    """The requested operation is not supported for this region or oracle."""


class ConfigError(FwkitError):
    """Invalid experiment configuration."""


def check_finite(arr, what="value"):
    if type(arr) is not np.ndarray:
        arr = np.asarray(arr)
    # the sum is finite whenever every entry is, barring overflow
    if not math.isfinite(arr.sum()) and not np.isfinite(arr).all():
        raise NumericFailure(f"non-finite {what}")
    return arr


# ---------------------------------------------------------------------------
# gaps

@dataclass(frozen=True)
class GapReport:
    fw_gap: float
    fw_vertex: np.ndarray
    strong_fw_gap: float | None = None


def dual_gap(grad, x, v) -> float:
    """<grad, x - v>, clipped at zero. Shared by every runner so that traces agree bitwise."""
    g = float(grad.dot(x - v))
    return g if g > 0.0 else 0.0


def fw_gap(objective, x, region) -> GapReport:
    x = np.asarray(x, dtype=float)
    grad = check_finite(objective.gradient(x), "gradient")
    v = region.lmo(grad)
    return GapReport(dual_gap(grad, x, v), v)


def strong_fw_gap(objective, active: "ActiveSet", region) -> float:
    if active.size == 0:
        raise ContractViolation("strong FW gap needs a non-empty active set")
    grad = check_finite(objective.gradient(active.iterate), "gradient")
    v = region.lmo(grad)
    prods = active.atoms @ grad
    a = int(np.argmax(prods))
    return max(float(prods[a] - grad @ v), 0.0)


# ---------------------------------------------------------------------------
# active sets

@dataclass(frozen=True)
class ActiveSet:
    """Convex decomposition ``iterate = weights @ atoms``. Treat as immutable."""

    atoms: np.ndarray      # (k, n)
    weights: np.ndarray    # (k,)
    iterate: np.ndarray    # (n,)

    @property
    def size(self) -> int:
        return len(self.weights)

    @classmethod
    def singleton(cls, atom) -> "ActiveSet":
        atom = np.array(atom, dtype=float).ravel()
        return cls(atom[None, :].copy(), np.ones(1), atom.copy())

    @classmethod
    def from_pairs(cls, atoms, weights) -> "ActiveSet":
        atoms = np.atleast_2d(np.asarray(atoms, dtype=float))
        weights = np.asarray(weights, dtype=float)
        return AtomStore(atoms, weights).snapshot()

    def check(self, tol_sum=1e-12, tol_rec=1e-10) -> None:
        if abs(self.weights.sum() - 1.0) > tol_sum:
            raise ContractViolation("active-set weights do not sum to 1")
        if np.any(self.weights <= 0):
            raise ContractViolation("non-positive active-set weight")
        if np.max(np.abs(self.weights @ self.atoms - self.iterate), initial=0.0) > tol_rec:
            raise ContractViolation("iterate does not match its decomposition")

    def nbytes(self) -> int:
        return int(self.atoms.nbytes + self.weights.nbytes)


class AtomStore:
    """Mutable working copy of an active set used inside runners.

    Atoms are looked up by their byte image, so adding or finding an atom is
    O(n) instead of a scan over the whole set.
    """

    def __init__(self, atoms, weights, iterate=None):
        self.atoms: list[np.ndarray] = []
        self.w: list[float] = []
        self.index: dict[bytes, int] = {}
        for a, wt in zip(np.atleast_2d(atoms), weights):
            a = np.array(a, dtype=float)
            key = a.tobytes()
            if key in self.index:
                self.w[self.index[key]] += float(wt)
            else:
                self.index[key] = len(self.atoms)
                self.atoms.append(a)
                self.w.append(float(wt))
        self.cleanup()
        self.x = self.reconstruct() if iterate is None else np.array(iterate, dtype=float)

    @classmethod
    def from_active(cls, active: ActiveSet) -> "AtomStore":
        return cls(active.atoms, active.weights, active.iterate)

    def __len__(self):
        return len(self.w)

    def find(self, atom) -> int:
        return self.index.get(np.asarray(atom, dtype=float).tobytes(), -1)

    def matrix(self) -> np.ndarray:
        return np.array(self.atoms)

    def weights(self) -> np.ndarray:
        return np.array(self.w)

    def reconstruct(self) -> np.ndarray:
        return np.asarray(self.w) @ np.array(self.atoms)

    def snapshot(self) -> ActiveSet:
        return ActiveSet(self.matrix(), self.weights(), self.x.copy())

    def _rebuild_index(self):
        self.index = {a.tobytes(): i for i, a in enumerate(self.atoms)}

    def cleanup(self) -> bool:
        """Drop weights below WEIGHT_EPS and renormalize. Returns True if anything was removed."""
        keep = [i for i, wt in enumerate(self.w) if wt >= WEIGHT_EPS]
        removed = len(keep) != len(self.w)
        if removed:
            self.atoms = [self.atoms[i] for i in keep]
            self.w = [self.w[i] for i in keep]
            self._rebuild_index()
        s = sum(self.w)
        if s <= 0:
            raise NumericFailure("active set lost all its weight")
        if s != 1.0:
            self.w = [wt / s for wt in self.w]
        return removed

    def reset(self, atom) -> None:
        a = np.array(atom, dtype=float)
        self.atoms, self.w = [a], [1.0]
        self._rebuild_index()
        self.x = a.copy()

    def fw_step(self, atom, gamma: float, x_new=None) -> None:
        if not 0.0 <= gamma <= 1.0 + 1e-15:
            raise ContractViolation(f"FW step size {gamma} outside [0, 1]")
        if gamma >= 1.0:
            self.reset(atom)
            return
        atom = np.asarray(atom, dtype=float)
        self.w = [(1.0 - gamma) * wt for wt in self.w]
        k = self.find(atom)
        if k < 0:
            self.index[atom.tobytes()] = len(self.atoms)
            self.atoms.append(atom.copy())
            self.w.append(gamma)
        else:
            self.w[k] += gamma
        self._finish(x_new)

    def away_step(self, k: int, gamma: float, x_new=None) -> bool:
        """Move away from atom k. Returns True when the atom was dropped."""
        lam = self.w[k]
        gmax = lam / (1.0 - lam) if lam < 1.0 else math.inf
        if gamma < 0.0 or gamma > gmax * (1.0 + 1e-12):
            raise ContractViolation(f"away step size {gamma} outside [0, {gmax}]")
        drop = gamma >= gmax
        self.w = [(1.0 + gamma) * wt for wt in self.w]
        self.w[k] = 0.0 if drop else self.w[k] - gamma
        self._finish(x_new)
        return drop

    def pairwise_step(self, atom, k_away: int, gamma: float, x_new=None) -> bool:
        """Shift weight gamma from atom k_away to ``atom``. Returns True on a drop."""
        lam = self.w[k_away]
        if gamma < 0.0 or gamma > lam * (1.0 + 1e-12):
            raise ContractViolation(f"pairwise step size {gamma} outside [0, {lam}]")
        drop = gamma >= lam
        self.w[k_away] = 0.0 if drop else lam - gamma
        atom = np.asarray(atom, dtype=float)
        k = self.find(atom)
        if k < 0:
            self.index[atom.tobytes()] = len(self.atoms)
            self.atoms.append(atom.copy())
            self.w.append(gamma)
        else:
            self.w[k] += gamma
        self._finish(x_new)
        return drop

    def drop(self, k: int) -> None:
        self.w[k] = 0.0
        self._finish(None)

    def set_weights(self, weights) -> None:
        self.w = [float(wt) for wt in weights]
        self._finish(None)

    def _finish(self, x_new):
        removed = self.cleanup()
        if x_new is None or removed:
            self.x = self.reconstruct()
        else:
            self.x = np.asarray(x_new, dtype=float)


def active_set_update(active: ActiveSet, kind: str, atom, gamma: float = 0.0) -> ActiveSet:
    """Pure update of an active set.

    kind: ``fw_step`` (move toward atom), ``away_step`` (move away from atom,
    which must be in the set), ``drop`` (remove atom, renormalize) or
    ``replace`` (the set becomes the single atom).
    """
    store = AtomStore.from_active(active)
    if kind == "fw_step":
        store.fw_step(atom, gamma)
    elif kind in ("away_step", "drop"):
        k = store.find(atom)
        if k < 0:
            raise ContractViolation("atom is not in the active set")
        if kind == "drop":
            store.drop(k)
        else:
            store.away_step(k, gamma)
    elif kind == "replace":
        store.reset(atom)
    else:
        raise ContractViolation(f"unknown update kind {kind!r}")
    return store.snapshot()


# ---------------------------------------------------------------------------
# traces

TRACE_COLUMNS = ("t", "f", "fw_gap", "primal_gap", "step_size", "lmo_calls",
                 "foo_calls", "sfo_calls", "active_set_size", "wall_time_ns")
_INT_COLUMNS = {"t", "lmo_calls", "foo_calls", "sfo_calls", "active_set_size", "wall_time_ns"}


def fmt_float(v: float) -> str:
    return "%.17g" % v


@dataclass
class RunTrace:
    rows: list = field(default_factory=list)
    x: np.ndarray | None = None
    active: ActiveSet | None = None
    iterates: list | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    def __len__(self):
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        j = TRACE_COLUMNS.index(name)
        return np.array([r[j] for r in self.rows])

    def last(self, name: str):
        return self.rows[-1][TRACE_COLUMNS.index(name)]

    def to_csv(self, timing: bool = True) -> str:
        buf = io.StringIO()
        buf.write(",".join(TRACE_COLUMNS) + "\n")
        for r in self.rows:
            cells = []
            for name, v in zip(TRACE_COLUMNS, r):
                if name == "wall_time_ns" and not timing:
                    v = 0
                cells.append(str(int(v)) if name in _INT_COLUMNS else fmt_float(v))
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "RunTrace":
        lines = text.strip().splitlines()
        if tuple(lines[0].split(",")) != TRACE_COLUMNS:
            raise ContractViolation("unexpected trace header")
        rows = []
        for line in lines[1:]:
            cells = line.split(",")
            rows.append(tuple(int(c) if n in _INT_COLUMNS else float(c)
                              for n, c in zip(TRACE_COLUMNS, cells)))
        return cls(rows)


# ---------------------------------------------------------------------------
# derivative checks

def finite_diff_check(objective, x, h: float = 1e-6) -> float:
    """Max over coordinates of |central difference - gradient| / max(1, |gradient|)."""
    x = np.array(x, dtype=float)
    g = check_finite(objective.gradient(x), "gradient")
    err = 0.0
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        fd = (objective.value(xp) - objective.value(xm)) / (2 * h)
        if not math.isfinite(fd):
            raise NumericFailure("non-finite finite difference")
        err = max(err, abs(fd - g[i]) / max(1.0, abs(g[i])))
    return err
