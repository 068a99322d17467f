"""Smooth objectives with hand-coded gradients.

Every objective exposes ``value(x)``, ``gradient(x)`` and the optional
constants ``L`` (smoothness), ``mu`` (strong convexity) and ``f_star``
(known optimal value over the region it is paired with). Objectives with
``is_quadratic`` also provide ``curvature(d) = d^T H d`` so that line
searches can use the closed form.
"""
from __future__ import annotations

import numpy as np

from .core import ContractViolation


class Objective:
    L: float | None = None
    mu: float | None = None
    f_star: float | None = None
    is_quadratic = False

    def value(self, x) -> float:
        raise NotImplementedError

    def gradient(self, x) -> np.ndarray:
        raise NotImplementedError

    def curvature(self, d) -> float:
        raise NotImplementedError


class Quadratic(Objective):
    """f(x) = x^T Q x / 2 + b^T x + c, with Q dense (n, n) or diagonal (n,)."""

    is_quadratic = True

    def __init__(self, Q, b=None, c=0.0, L=None, mu=None, f_star=None):
        Q = np.asarray(Q, dtype=float)
        self.diagonal = Q.ndim == 1
        if not self.diagonal and Q.shape[0] != Q.shape[1]:
            raise ContractViolation("Q must be square")
        self.Q = Q
        self._half = 0.5 * Q
        n = Q.shape[0]
        self.b = np.zeros(n) if b is None else np.asarray(b, dtype=float)
        self._linear = bool(np.any(self.b))
        self.c = float(c)
        if L is None or mu is None:
            ev = Q if self.diagonal else np.linalg.eigvalsh((Q + Q.T) / 2)
            L = float(ev.max()) if L is None else L
            mu = float(ev.min()) if mu is None else mu
        self.L, self.mu, self.f_star = float(L), float(mu), f_star

    def _mv(self, x):
        return self.Q * x if self.diagonal else self.Q @ x

    def value(self, x):
        # ndarray.dot skips the matmul dispatch, which dominates for tiny n
        hx = self._half * x if self.diagonal else self._half.dot(x)
        if self._linear:
            hx = hx + self.b
        return float(x.dot(hx)) + self.c

    def gradient(self, x):
        g = self.Q * x if self.diagonal else self.Q.dot(x)
        return g + self.b if self._linear else g

    def curvature(self, d):
        return float(d @ self._mv(d))

    @classmethod
    def centered(cls, Q, center, f_star=0.0):
        """(x - center)^T Q (x - center) / 2 + f_star, minimized at ``center``."""
        Q = np.asarray(Q, dtype=float)
        center = np.asarray(center, dtype=float)
        Qc = Q * center if Q.ndim == 1 else Q @ center
        c = 0.5 * float(center @ Qc) + f_star
        return cls(Q, -Qc, c, f_star=f_star)


class LeastSquares(Objective):
    """f(x) = ||A x - y||^2 / 2."""

    is_quadratic = True

    def __init__(self, A, y, f_star=None):
        self.A = np.asarray(A, dtype=float)
        self.y = np.asarray(y, dtype=float)
        sv = np.linalg.svd(self.A, compute_uv=False)
        self.L = float(sv[0] ** 2)
        self.mu = float(sv[-1] ** 2) if self.A.shape[0] >= self.A.shape[1] else 0.0
        self.f_star = f_star

    def value(self, x):
        r = self.A @ x - self.y
        return float(0.5 * (r @ r))

    def gradient(self, x):
        return self.A.T @ (self.A @ x - self.y)

    def curvature(self, d):
        Ad = self.A @ d
        return float(Ad @ Ad)


class LpDistance(Objective):
    """f(x) = ||x - u||_p^2 for p >= 2 (smooth, L = 2(p - 1) in the Euclidean norm)."""

    def __init__(self, u, p=2.0):
        if p < 2:
            raise ContractViolation("p must be >= 2 for a smooth squared p-norm")
        self.u = np.asarray(u, dtype=float)
        self.p = float(p)
        self.L = 2.0 * (self.p - 1.0)
        self.mu = 2.0 if self.p == 2 else 0.0
        self.f_star = None
        self.is_quadratic = self.p == 2

    def norm(self, x) -> float:
        r = np.abs(x - self.u)
        if self.p == 2:
            return float(np.sqrt(r @ r))
        return float(np.linalg.norm(r, ord=self.p))

    def value(self, x):
        return self.norm(x) ** 2

    def gradient(self, x):
        r = x - self.u
        if self.p == 2:
            return 2.0 * r
        nrm = np.linalg.norm(r, ord=self.p)
        if nrm == 0.0:
            return np.zeros_like(r)
        return 2.0 * nrm ** (2.0 - self.p) * np.abs(r) ** (self.p - 1.0) * np.sign(r)

    def curvature(self, d):
        return 2.0 * float(d @ d)


class Logistic(Objective):
    """Mean logistic loss of labels y in {-1, +1} plus (lam/2)||x||^2."""

    def __init__(self, A, y, lam=0.0):
        self.A = np.asarray(A, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.lam = float(lam)
        m = self.A.shape[0]
        self.L = float(np.linalg.norm(self.A, 2) ** 2 / (4 * m) + self.lam)
        self.mu = self.lam
        self.f_star = None

    def value(self, x):
        z = -self.y * (self.A @ x)
        return float(np.mean(np.logaddexp(0.0, z)) + 0.5 * self.lam * (x @ x))

    def gradient(self, x):
        z = -self.y * (self.A @ x)
        s = 0.5 * (1.0 + np.tanh(0.5 * z))  # sigmoid(z), overflow-free
        return self.A.T @ (-self.y * s) / self.A.shape[0] + self.lam * x


class SeparableSine(Objective):
    """Nonconvex smooth f(x) = sum a_i sin(w_i x_i) + c_i x_i^2 / 2.

    ``L = max_i |a_i| w_i^2 + |c_i|`` bounds the second derivative. When box
    bounds are given, ``f_star`` is computed coordinate-wise by a dense grid
    followed by golden-section refinement.
    """

    def __init__(self, a, w, c, lower=None, upper=None):
        self.a = np.asarray(a, dtype=float)
        self.w = np.asarray(w, dtype=float)
        self.c = np.asarray(c, dtype=float)
        self.L = float(np.max(np.abs(self.a) * self.w ** 2 + np.abs(self.c)))
        self.mu = None
        self.f_star = None
        if lower is not None:
            self.f_star = self._box_minimum(np.broadcast_to(lower, self.a.shape),
                                            np.broadcast_to(upper, self.a.shape))

    def _coord(self, i, t):
        return self.a[i] * np.sin(self.w[i] * t) + 0.5 * self.c[i] * t * t

    def _box_minimum(self, lower, upper):
        total = 0.0
        for i in range(self.a.size):
            grid = np.linspace(lower[i], upper[i], 20001)
            vals = self._coord(i, grid)
            k = int(np.argmin(vals))
            lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
            lo, hi = golden_section(lambda t: self._coord(i, t), lo, hi, 1e-14)
            t = 0.5 * (lo + hi)
            total += min(float(self._coord(i, t)), float(vals[k]))
        return total

    def value(self, x):
        return float(np.sum(self.a * np.sin(self.w * x) + 0.5 * self.c * x * x))

    def gradient(self, x):
        return self.a * self.w * np.cos(self.w * x) + self.c * x


class SmoothedComposite(Objective):
    """h(x) + g_beta(A x) where g_beta is the Moreau envelope of a prox-friendly g."""

    def __init__(self, h, g, A, beta):
        self.h, self.g, self.beta = h, g, float(beta)
        self.A = None if A is None else np.asarray(A, dtype=float)
        hL = 0.0 if h is None or h.L is None else h.L
        nA = 1.0 if self.A is None else float(np.linalg.norm(self.A, 2)) ** 2
        self.L = hL + nA / self.beta
        self.mu = None
        self.f_star = None

    def _apply(self, x):
        return x if self.A is None else self.A @ x

    def _apply_t(self, z):
        return z if self.A is None else self.A.T @ z

    def value(self, x):
        z = self._apply(x)
        p = self.g.prox(z, self.beta)
        env = self.g.value(p) + float((z - p) @ (z - p)) / (2 * self.beta)
        return (0.0 if self.h is None else self.h.value(x)) + env

    def gradient(self, x):
        z = self._apply(x)
        gz = self._apply_t((z - self.g.prox(z, self.beta)) / self.beta)
        return gz if self.h is None else self.h.gradient(x) + gz

    def true_value(self, x):
        return (0.0 if self.h is None else self.h.value(x)) + self.g.value(self._apply(x))


class AbsShift:
    """g(z) = ||z - shift||_1 with prox by soft-thresholding; Lipschitz constant sqrt(dim)."""

    def __init__(self, shift=0.0):
        self.shift = shift

    def value(self, z):
        return float(np.sum(np.abs(z - self.shift)))

    def prox(self, z, beta):
        r = z - self.shift
        return self.shift + np.sign(r) * np.maximum(np.abs(r) - beta, 0.0)

    def lipschitz(self, dim):
        return float(np.sqrt(dim))


class Hinge:
    """g(z) = sum max(0, z_i) with prox by piecewise clipping."""

    def value(self, z):
        return float(np.sum(np.maximum(z, 0.0)))

    def prox(self, z, beta):
        return np.where(z > beta, z - beta, np.minimum(z, 0.0))

    def lipschitz(self, dim):
        return float(np.sqrt(dim))


def golden_section(fun, lo: float, hi: float, width: float):
    """Shrink [lo, hi] around a minimizer of a unimodal ``fun`` until hi - lo <= width."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = float(lo), float(hi)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(400):
        if b - a <= width:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return a, b
