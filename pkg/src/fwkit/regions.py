"""Feasible regions with linear minimization oracles.

All points are flat float vectors; matrix regions (nuclear ball,
spectrahedron, Birkhoff) reshape internally to ``region.shape``.
Ties in every argmin are broken toward the lowest index.
"""
from __future__ import annotations

import itertools
import math
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import CapabilityError, NumericFailure, check_finite


class Region:
    kind = "region"
    zero_one = False      # vertices are 0/1 vectors with simplex-like face structure
    polyhedral = True

    def __init__(self, dim: int, shape=None):
        self.dim = int(dim)
        self.shape = (self.dim,) if shape is None else tuple(shape)

    # -- oracles ------------------------------------------------------------
    def lmo(self, c) -> np.ndarray:
        raise NotImplementedError

    def nep(self, c, lam: float, x) -> np.ndarray:
        """Extreme point minimizing <c, v> + lam ||v - x||^2."""
        if not self.zero_one:
            raise CapabilityError(f"nearest-extreme-point oracle not available for {self.kind}")
        c = np.asarray(c, dtype=float)
        if lam == 0:
            return self.lmo(c)
        return self.lmo(c + lam * (1.0 - 2.0 * np.asarray(x, dtype=float)))

    def away_vertex(self, c, x) -> np.ndarray:
        """Vertex of the minimal face containing x that maximizes <c, v>."""
        raise CapabilityError(f"face-restricted oracle not available for {self.kind}")

    def enumerate_vertices(self) -> np.ndarray:
        raise CapabilityError(f"vertex enumeration not supported for {self.kind}")

    # -- geometry -----------------------------------------------------------
    def contains(self, x, tol: float = 1e-9) -> bool:
        raise NotImplementedError

    def center(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def diameter(self) -> float:
        raise NotImplementedError

    def max_step(self, x, d) -> float:
        """Largest gamma with x + gamma d inside [0, 1]^n (for 0/1 polytopes)."""
        x = np.asarray(x, dtype=float)
        d = np.asarray(d, dtype=float)
        neg = d < 0
        pos = d > 0
        g = math.inf
        if neg.any():
            g = min(g, float(np.min(x[neg] / -d[neg])))
        if pos.any():
            g = min(g, float(np.min((1.0 - x[pos]) / d[pos])))
        return max(g, 0.0)

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


class Simplex(Region):
    """Probability simplex {x >= 0, sum x = 1}."""

    kind = "simplex"
    zero_one = True

    def __init__(self, n: int):
        super().__init__(n)

    def lmo(self, c):
        v = np.zeros(self.dim)
        v[int(np.argmin(c))] = 1.0
        return v

    def away_vertex(self, c, x):
        c = np.asarray(c, dtype=float)
        masked = np.where(np.asarray(x) > 0, c, -np.inf)
        v = np.zeros(self.dim)
        v[int(np.argmax(masked))] = 1.0
        return v

    def enumerate_vertices(self):
        if self.dim > 10 ** 5:
            raise CapabilityError("simplex too large to enumerate")
        return np.eye(self.dim)

    def contains(self, x, tol=1e-9):
        x = np.asarray(x)
        return bool(x.min() >= -tol and abs(x.sum() - 1.0) <= tol)

    def center(self):
        return np.full(self.dim, 1.0 / self.dim)

    @property
    def diameter(self):
        return math.sqrt(2.0) if self.dim > 1 else 0.0


class L1Ball(Region):
    kind = "l1_ball"

    def __init__(self, n: int, tau: float = 1.0):
        if tau <= 0:
            raise ValueError("tau must be positive")
        super().__init__(n)
        self.tau = float(tau)

    def lmo(self, c):
        c = np.asarray(c, dtype=float)
        k = int(np.argmax(np.abs(c)))
        v = np.zeros(self.dim)
        v[k] = -self.tau if c[k] > 0 else self.tau
        return v

    def enumerate_vertices(self):
        if self.dim > 5 * 10 ** 4:
            raise CapabilityError("l1 ball too large to enumerate")
        out = np.zeros((2 * self.dim, self.dim))
        for i in range(self.dim):
            out[2 * i, i] = self.tau
            out[2 * i + 1, i] = -self.tau
        return out

    def contains(self, x, tol=1e-9):
        return bool(np.abs(x).sum() <= self.tau + tol)

    def center(self):
        return np.zeros(self.dim)

    @property
    def diameter(self):
        return 2.0 * self.tau


class Box(Region):
    kind = "box"

    def __init__(self, lower, upper):
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        lower, upper = np.broadcast_arrays(lower, upper)
        if np.any(lower > upper):
            raise ValueError("lower must not exceed upper")
        super().__init__(lower.size)
        self.lower, self.upper = lower.copy(), upper.copy()
        self._zero = np.zeros(self.dim)

    def lmo(self, c):
        m = c < self._zero
        v = self.lower.copy()
        v[m] = self.upper[m]
        return v

    def enumerate_vertices(self):
        if self.dim > 16:
            raise CapabilityError("box too large to enumerate")
        bits = np.array(list(itertools.product((0, 1), repeat=self.dim)), dtype=bool)
        return np.where(bits, self.upper, self.lower).astype(float)

    def contains(self, x, tol=1e-9):
        x = np.asarray(x)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def center(self):
        return 0.5 * (self.lower + self.upper)

    @property
    def diameter(self):
        return float(np.linalg.norm(self.upper - self.lower))


class Hypercube01(Box):
    kind = "hypercube01"
    zero_one = True

    def __init__(self, n: int):
        super().__init__(np.zeros(n), np.ones(n))

    def away_vertex(self, c, x):
        # coordinates at 0 or 1 are fixed by the minimal face, fractional ones are free
        x = np.asarray(x, dtype=float)
        v = np.where(x >= 1.0, 1.0, 0.0)
        free = (x > 0) & (x < 1)
        v[free] = np.where(np.asarray(c)[free] > 0, 1.0, 0.0)
        return v


class LpBall(Region):
    """{||x||_p <= tau} for p >= 1; p = 1 and p = inf use the polyhedral closed forms."""

    kind = "lp_ball"

    def __init__(self, n: int, tau: float = 1.0, p: float = 2.0):
        if tau <= 0 or p < 1:
            raise ValueError("need tau > 0 and p >= 1")
        super().__init__(n)
        self.tau, self.p = float(tau), float(p)
        self.polyhedral = self.p == 1 or math.isinf(self.p)
        self._l1 = L1Ball(n, tau) if self.p == 1 else None

    def lmo(self, c):
        c = np.asarray(c, dtype=float)
        if self._l1 is not None:
            return self._l1.lmo(c)
        if math.isinf(self.p):
            return np.where(c < 0, self.tau, -self.tau)
        if self.p == 2:
            nrm = float(np.sqrt(c @ c))
            if nrm == 0.0:
                v = np.zeros(self.dim)
                v[0] = self.tau
                return v
            return -self.tau * c / nrm
        q = self.p / (self.p - 1.0)
        a = np.abs(c)
        nq = np.linalg.norm(a, ord=q)
        if nq == 0.0:
            v = np.zeros(self.dim)
            v[0] = self.tau
            return v
        return -self.tau * np.sign(c) * (a / nq) ** (q - 1.0)

    def nep(self, c, lam, x):
        if self.p != 2:
            raise CapabilityError("nearest-extreme-point oracle needs p = 2 or a 0/1 polytope")
        return self.lmo(np.asarray(c, dtype=float) - 2.0 * lam * np.asarray(x, dtype=float))

    def enumerate_vertices(self):
        if self._l1 is not None:
            return self._l1.enumerate_vertices()
        if math.isinf(self.p):
            return Box(-self.tau * np.ones(self.dim), self.tau * np.ones(self.dim)).enumerate_vertices()
        raise CapabilityError("a smooth lp ball has infinitely many extreme points")

    def contains(self, x, tol=1e-9):
        return bool(np.linalg.norm(np.asarray(x), ord=self.p) <= self.tau * (1 + tol) + tol)

    def center(self):
        return np.zeros(self.dim)

    @property
    def diameter(self):
        return 2.0 * self.tau * self.dim ** max(0.0, 0.5 - 1.0 / self.p)


class NuclearBall(Region):
    """{X : ||X||_nuc <= tau}; vertices are rank-one matrices -tau u v^T."""

    kind = "nuclear_ball"
    polyhedral = False

    def __init__(self, rows: int, cols: int, tau: float = 1.0, tol: float = 1e-10):
        if tau <= 0:
            raise ValueError("tau must be positive")
        super().__init__(rows * cols, (rows, cols))
        self.rows, self.cols, self.tau, self.tol = rows, cols, float(tau), tol
        self.max_iter = 10 * (rows + cols)

    def top_pair(self, C):
        """Leading singular triple (u, sigma, v) with the first nonzero entry of u positive."""
        C = check_finite(np.asarray(C, dtype=float).reshape(self.shape), "cost")
        v, lam, ok, _ = kernels.top_singular_pair(C, self.tol, self.max_iter)
        if not ok:
            v, lam = _ritz_top(C, self.tol)
        sigma = math.sqrt(max(lam, 0.0))
        if sigma == 0.0:
            u = np.zeros(self.rows)
            u[0] = 1.0
            v = np.zeros(self.cols)
            v[0] = 1.0
            return u, 0.0, v
        u = C @ v / sigma
        nz = np.flatnonzero(np.abs(u) > 1e-12 * np.abs(u).max())
        if u[nz[0]] < 0:
            u, v = -u, -v
        return u, sigma, v

    def lmo(self, c):
        u, _, v = self.top_pair(c)
        return (-self.tau * np.outer(u, v)).ravel()

    def contains(self, x, tol=1e-9):
        s = np.linalg.svd(np.asarray(x).reshape(self.shape), compute_uv=False)
        return bool(s.sum() <= self.tau * (1 + tol) + tol)

    def center(self):
        return np.zeros(self.dim)

    @property
    def diameter(self):
        return 2.0 * self.tau


def _ritz_top(C, tol):
    """Restart for slow power iteration: Rayleigh-Ritz on a Krylov basis of C^T C.

    The basis is orthonormalized in full (twice, for stability) and grown with
    coordinate vectors on breakdown, so it spans everything once it has
    ``cols`` vectors.
    """
    k = C.shape[1]
    G = C.T @ C
    m = min(k, 60)
    Q = np.zeros((k, m))
    q = np.arange(1.0, k + 1.0)
    q /= np.linalg.norm(q)
    filled = 0
    spare = 0
    while filled < m:
        for _ in range(2):
            q = q - Q[:, :filled] @ (Q[:, :filled].T @ q)
        nq = np.linalg.norm(q)
        if nq < 1e-10:
            if spare >= k:
                break
            q = np.zeros(k)
            q[spare] = 1.0
            spare += 1
            continue
        Q[:, filled] = q / nq
        filled += 1
        q = G @ Q[:, filled - 1]
    Q = Q[:, :filled]
    H = Q.T @ G @ Q
    evals, evecs = np.linalg.eigh((H + H.T) / 2)
    v = Q @ evecs[:, -1]
    v /= np.linalg.norm(v)
    lam = float(v @ G @ v)
    # a few power steps polish the Ritz vector when the basis was truncated
    for _ in range(50):
        z = G @ v
        if np.linalg.norm(z - lam * v) <= tol * max(lam, 1e-300):
            return v, lam
        v = z / np.linalg.norm(z)
        lam = float(v @ G @ v)
    if np.linalg.norm(G @ v - lam * v) <= tol * max(lam, 1e-300) or filled == k:
        return v, lam
    raise NumericFailure("top singular pair did not converge")


class Spectrahedron(Region):
    """{X symmetric PSD, trace X = 1}; vertices are u u^T with ||u|| = 1."""

    kind = "spectrahedron"
    polyhedral = False

    def __init__(self, n: int):
        super().__init__(n * n, (n, n))
        self.n = n

    def lmo(self, c):
        C = check_finite(np.asarray(c, dtype=float).reshape(self.shape), "cost")
        _, vecs = np.linalg.eigh((C + C.T) / 2)
        u = vecs[:, 0]
        nz = np.flatnonzero(np.abs(u) > 1e-12 * np.abs(u).max())
        if u[nz[0]] < 0:
            u = -u
        return np.outer(u, u).ravel()

    def contains(self, x, tol=1e-9):
        X = np.asarray(x).reshape(self.shape)
        if np.abs(X - X.T).max() > tol or abs(np.trace(X) - 1) > tol:
            return False
        return bool(np.linalg.eigvalsh((X + X.T) / 2).min() >= -tol)

    def center(self):
        return (np.eye(self.n) / self.n).ravel()

    @property
    def diameter(self):
        return math.sqrt(2.0)


class Birkhoff(Region):
    """Doubly stochastic n x n matrices; vertices are permutation matrices."""

    kind = "birkhoff"
    zero_one = True

    def __init__(self, n: int):
        super().__init__(n * n, (n, n))
        self.n = n

    def _perm_matrix(self, perm):
        P = np.zeros((self.n, self.n))
        P[np.arange(self.n), perm] = 1.0
        return P.ravel()

    def lmo(self, c):
        C = check_finite(np.asarray(c, dtype=float).reshape(self.shape), "cost")
        return self._perm_matrix(kernels.assignment(np.ascontiguousarray(C)))

    def away_vertex(self, c, x):
        c = np.asarray(c, dtype=float)
        big = 4.0 * self.n * (np.abs(c).max() + 1.0)
        masked = np.where(np.asarray(x) > 0, -c, big)
        return self.lmo(masked)

    def enumerate_vertices(self):
        if self.n > 5:
            raise CapabilityError("Birkhoff polytope too large to enumerate")
        return np.array([self._perm_matrix(np.array(p))
                         for p in itertools.permutations(range(self.n))])

    def contains(self, x, tol=1e-9):
        X = np.asarray(x).reshape(self.shape)
        return bool(X.min() >= -tol and np.abs(X.sum(0) - 1).max() <= tol
                    and np.abs(X.sum(1) - 1).max() <= tol)

    def center(self):
        return np.full(self.dim, 1.0 / self.n)

    @property
    def diameter(self):
        return math.sqrt(2.0 * self.n) if self.n > 1 else 0.0


class Polytope(Region):
    """Convex hull of an explicit vertex list (small instances and tests)."""

    kind = "polytope"

    def __init__(self, vertices):
        V = np.atleast_2d(np.asarray(vertices, dtype=float))
        super().__init__(V.shape[1])
        self.V = V

    def lmo(self, c):
        return self.V[int(np.argmin(self.V @ np.asarray(c, dtype=float)))].copy()

    def enumerate_vertices(self):
        return self.V.copy()

    def contains(self, x, tol=1e-9):
        raise CapabilityError("membership in a vertex hull needs an LP solver")

    def center(self):
        return self.V.mean(axis=0)

    @property
    def diameter(self):
        diff = self.V[:, None, :] - self.V[None, :, :]
        return float(np.sqrt((diff ** 2).sum(-1)).max())


def make_region(kind: str, **params) -> Region:
    kinds = {
        "simplex": Simplex, "l1_ball": L1Ball, "lp_ball": LpBall, "box": Box,
        "hypercube01": Hypercube01, "nuclear_ball": NuclearBall, "birkhoff": Birkhoff,
        "spectrahedron": Spectrahedron, "polytope": Polytope,
    }
    if kind not in kinds:
        raise ValueError(f"unknown region kind {kind!r}")
    return kinds[kind](**params)


# ---------------------------------------------------------------------------
# weak separation

class WeakSeparationCache:
    """LRU list of previously returned vertices."""

    def __init__(self, capacity: int = 256):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._atoms: OrderedDict[bytes, np.ndarray] = OrderedDict()
        self.hits = 0
        self.misses = 0

    def __len__(self):
        return len(self._atoms)

    def atoms(self):
        return list(self._atoms.values())

    def best(self, c, x):
        """Cached atom with the largest <c, x - v> (earliest on ties) and that value."""
        if not self._atoms:
            return None, -math.inf
        keys = list(self._atoms)
        A = np.array([self._atoms[k] for k in keys])
        vals = (x @ c) - A @ c
        j = int(np.argmax(vals))
        return keys[j], float(vals[j])

    def touch(self, key):
        self._atoms.move_to_end(key)
        return self._atoms[key]

    def add(self, v):
        key = np.asarray(v, dtype=float).tobytes()
        if key in self._atoms:
            self._atoms.move_to_end(key)
            return
        self._atoms[key] = np.array(v, dtype=float)
        if len(self._atoms) > self.capacity:
            self._atoms.popitem(last=False)


@dataclass(frozen=True)
class Separation:
    positive: bool
    vertex: np.ndarray
    gap: float          # <c, x - vertex>; on a negative answer this is the exact FW gap
    lmo_calls: int
    cache_hit: bool


def weak_separation(region: Region, cache: WeakSeparationCache, c, x, phi: float,
                    K: float = 1.0, lmo=None) -> Separation:
    """Return a vertex with <c, x - v> > phi / K, or certify that none beats phi.

    The cache is searched first. A miss costs one LMO call; if that vertex
    does not clear the threshold the answer is negative and carries the
    exact gap.
    """
    if phi <= 0 or K < 1:
        raise ValueError("need phi > 0 and K >= 1")
    c = np.asarray(c, dtype=float)
    x = np.asarray(x, dtype=float)
    key, val = cache.best(c, x)
    if key is not None and val > phi / K:
        cache.hits += 1
        return Separation(True, cache.touch(key).copy(), val, 0, True)
    cache.misses += 1
    v = (lmo or region.lmo)(c)
    g = float(c @ (x - v))
    if g > phi / K:
        cache.add(v)
        return Separation(True, v, g, 1, False)
    return Separation(False, v, max(g, 0.0), 1, False)
