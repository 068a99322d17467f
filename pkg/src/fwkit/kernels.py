"""Hot loops with a numba path and a vectorized numpy path.

The public names ``assignment``, ``top_singular_pair``, ``dopt_update`` and
``dopt_loop`` dispatch to the numba versions unless ``FWKIT_DISABLE_NUMBA`` is
set. Both variants are importable directly for benchmarking and cross-checking.
"""
import numpy as np

from ._jit import USE_NUMBA, njit


# ---------------------------------------------------------------------------
# min-cost perfect assignment (shortest augmenting path with potentials)

@njit
def assignment_numba(cost):
    n = cost.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, np.int64)
    way = np.zeros(n + 1, np.int64)
    minv = np.empty(n + 1)
    used = np.zeros(n + 1, np.bool_)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv[:] = np.inf
        used[:] = False
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = np.inf
            j1 = 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    perm = np.empty(n, np.int64)
    for j in range(1, n + 1):
        perm[p[j] - 1] = j - 1
    return perm


def assignment_numpy(cost):
    cost = np.asarray(cost, dtype=float)
    n = cost.shape[0]
    c = np.zeros((n + 1, n + 1))
    c[1:, 1:] = cost
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            cur = c[i0] - u[i0] - v
            upd = ~used & (cur < minv)
            minv[upd] = cur[upd]
            way[upd] = j0
            cand = np.where(used, np.inf, minv)
            j1 = int(np.argmin(cand))
            delta = cand[j1]
            u[p[used]] += delta
            v[used] -= delta
            minv[~used] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    perm = np.empty(n, dtype=np.int64)
    perm[p[1:] - 1] = np.arange(n)
    return perm


# ---------------------------------------------------------------------------
# power iteration on C^T C

@njit
def top_singular_pair_numba(C, tol, max_iter):
    k = C.shape[1]
    v = np.ones(k) / np.sqrt(k)
    lam = 0.0
    for it in range(max_iter):
        w = C @ v
        z = C.T @ w
        lam = v @ z
        res = np.sqrt(((z - lam * v) ** 2).sum())
        nz = np.sqrt((z ** 2).sum())
        if res <= tol * max(lam, 1e-300) or nz == 0.0:
            return v, lam, True, it + 1
        v = z / nz
    return v, lam, False, max_iter


def top_singular_pair_numpy(C, tol, max_iter):
    k = C.shape[1]
    v = np.ones(k) / np.sqrt(k)
    lam = 0.0
    for it in range(max_iter):
        z = C.T @ (C @ v)
        lam = float(v @ z)
        res = np.linalg.norm(z - lam * v)
        nz = np.linalg.norm(z)
        if res <= tol * max(lam, 1e-300) or nz == 0.0:
            return v, lam, True, it + 1
        v = z / nz
    return v, lam, False, max_iter


# ---------------------------------------------------------------------------
# D-optimal design: in-place rank-one refresh of V^{-1} and the leverage scores

@njit
def dopt_update_numba(A, Vinv, w, i, gamma):
    n, d = A.shape
    y = np.zeros(d)
    for r in range(d):
        s = 0.0
        for c in range(d):
            s += Vinv[r, c] * A[i, c]
        y[r] = s
    wi = 0.0
    for r in range(d):
        wi += A[i, r] * y[r]
    denom = 1.0 - gamma + gamma * wi
    scale = 1.0 / (1.0 - gamma)
    coef = gamma / denom
    for r in range(d):
        for c in range(d):
            Vinv[r, c] = (Vinv[r, c] - coef * y[r] * y[c]) * scale
    for k in range(n):
        q = 0.0
        for r in range(d):
            q += A[k, r] * y[r]
        w[k] = (w[k] - coef * q * q) * scale
    return denom


def dopt_update_numpy(A, Vinv, w, i, gamma):
    y = Vinv @ A[i]
    denom = 1.0 - gamma + gamma * float(A[i] @ y)
    scale = 1.0 / (1.0 - gamma)
    coef = gamma / denom
    Vinv[...] = (Vinv - coef * np.outer(y, y)) * scale
    q = A @ y
    w[...] = (w - coef * q * q) * scale
    return denom


# ---------------------------------------------------------------------------
# D-optimal design: the whole exact-step FW / away-step loop
#
# Arrays x, Vinv, w are updated in place. Returns (iterations, gap, log_det, status)
# where status is 0 on success and -1 if a refresh met a singular matrix.

@njit
def _dopt_refresh_numba(A, x, Vinv, w):
    n, d = A.shape
    V = np.zeros((d, d))
    for k in range(n):
        if x[k] > 0.0:
            for r in range(d):
                for c in range(d):
                    V[r, c] += x[k] * A[k, r] * A[k, c]
    sign, logdet = np.linalg.slogdet(V)
    if sign <= 0.0 or not np.isfinite(logdet):
        return -np.inf
    Vinv[:, :] = np.linalg.inv(V)
    for k in range(n):
        s = 0.0
        for r in range(d):
            t = 0.0
            for c in range(d):
                t += Vinv[r, c] * A[k, c]
            s += A[k, r] * t
        w[k] = s
    return logdet


@njit
def dopt_loop_numba(A, x, Vinv, w, logdet, tol, max_iters, refresh_every, away):
    n, d = A.shape
    t = 0
    since = 0
    gap = 0.0
    while True:
        i = 0
        for k in range(1, n):
            if w[k] > w[i]:
                i = k
        gap = w[i] - d
        if gap <= tol or t >= max_iters:
            return t, gap, logdet, 0
        use_away = False
        j = -1
        if away:
            cnt = 0
            for k in range(n):
                if x[k] > 0.0:
                    cnt += 1
                    if j < 0 or w[k] < w[j]:
                        j = k
            use_away = cnt > 1 and d - w[j] > gap
        refresh = False
        if use_away:
            xj = x[j]
            gmax = xj / (1.0 - xj)
            wj = w[j]
            s = gmax
            if wj > 1.0:
                s = min(-((wj / d - 1.0) / (wj - 1.0)), gmax)
            if s >= gmax:
                tot = 0.0
                for k in range(n):
                    x[k] = 0.0 if k == j else (1.0 + gmax) * x[k]
                    tot += x[k]
                for k in range(n):
                    x[k] /= tot
                refresh = True
            else:
                denom = dopt_update_numba(A, Vinv, w, j, -s)
                for k in range(n):
                    x[k] = max((1.0 + s) * x[k], 0.0)
                x[j] = max(x[j] - s, 0.0)
                logdet += np.log(denom) + (d - 1) * np.log1p(s)
        else:
            gamma = (w[i] / d - 1.0) / (w[i] - 1.0)
            if gamma >= 1.0 - 1e-12:
                for k in range(n):
                    x[k] = 0.0
                x[i] = 1.0
                refresh = True
            else:
                denom = dopt_update_numba(A, Vinv, w, i, gamma)
                for k in range(n):
                    x[k] = (1.0 - gamma) * x[k]
                x[i] += gamma
                logdet += np.log(denom) + (d - 1) * np.log1p(-gamma)
        t += 1
        since += 1
        if refresh or since >= refresh_every:
            logdet = _dopt_refresh_numba(A, x, Vinv, w)
            since = 0
            if logdet == -np.inf:
                return t, gap, logdet, -1


def _dopt_refresh_numpy(A, x, Vinv, w):
    V = (A * x[:, None]).T @ A
    sign, logdet = np.linalg.slogdet(V)
    if sign <= 0 or not np.isfinite(logdet):
        return -np.inf
    Vinv[...] = np.linalg.inv(V)
    w[...] = np.einsum("ij,jk,ik->i", A, Vinv, A)
    return float(logdet)


def dopt_loop_numpy(A, x, Vinv, w, logdet, tol, max_iters, refresh_every, away):
    n, d = A.shape
    t = since = 0
    while True:
        i = int(np.argmax(w))
        gap = float(w[i]) - d
        if gap <= tol or t >= max_iters:
            return t, gap, logdet, 0
        use_away = False
        if away:
            support = np.flatnonzero(x > 0.0)
            j = int(support[np.argmin(w[support])])
            use_away = support.size > 1 and d - float(w[j]) > gap
        refresh = False
        if use_away:
            xj = float(x[j])
            gmax = xj / (1.0 - xj)
            wj = float(w[j])
            s = gmax if wj <= 1.0 else min(-((wj / d - 1.0) / (wj - 1.0)), gmax)
            if s >= gmax:
                x *= 1.0 + gmax
                x[j] = 0.0
                x /= x.sum()
                refresh = True
            else:
                denom = dopt_update_numpy(A, Vinv, w, j, -s)
                np.maximum((1.0 + s) * x, 0.0, out=x)
                x[j] = max(x[j] - s, 0.0)
                logdet += np.log(denom) + (d - 1) * np.log1p(s)
        else:
            gamma = (w[i] / d - 1.0) / (w[i] - 1.0)
            if gamma >= 1.0 - 1e-12:
                x[:] = 0.0
                x[i] = 1.0
                refresh = True
            else:
                denom = dopt_update_numpy(A, Vinv, w, i, gamma)
                x *= 1.0 - gamma
                x[i] += gamma
                logdet += np.log(denom) + (d - 1) * np.log1p(-gamma)
        t += 1
        since += 1
        if refresh or since >= refresh_every:
            logdet = _dopt_refresh_numpy(A, x, Vinv, w)
            since = 0
            if logdet == -np.inf:
                return t, gap, logdet, -1


if USE_NUMBA:
    assignment = assignment_numba
    top_singular_pair = top_singular_pair_numba
    dopt_update = dopt_update_numba
    dopt_loop = dopt_loop_numba
else:
    assignment = assignment_numpy
    top_singular_pair = top_singular_pair_numpy
    dopt_update = dopt_update_numpy
    dopt_loop = dopt_loop_numpy
