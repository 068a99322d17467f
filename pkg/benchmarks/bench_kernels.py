"""Numba kernels vs their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeats 5]

Each kernel is warmed up once (JIT compile or cache load), then timed as the
best of ``--repeats`` runs. The same inputs go to both paths and the outputs
are compared, so a speedup never hides a wrong answer.
"""
import argparse
import time

import numpy as np

from fwkit import kernels


def best_time(fn, repeats):
    fn()
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def assignment_case(rng, n):
    C = rng.standard_normal((n, n))
    a, b = kernels.assignment_numba(C), kernels.assignment_numpy(C)
    ok = C[np.arange(n), a].sum() == C[np.arange(n), b].sum()
    return (lambda: kernels.assignment_numba(C)), (lambda: kernels.assignment_numpy(C)), ok


def power_case(rng, n):
    C = rng.standard_normal((n, n))
    la = kernels.top_singular_pair_numba(C, 1e-10, 10 * n)[1]
    lb = kernels.top_singular_pair_numpy(C, 1e-10, 10 * n)[1]
    return (lambda: kernels.top_singular_pair_numba(C, 1e-10, 10 * n),
            lambda: kernels.top_singular_pair_numpy(C, 1e-10, 10 * n),
            abs(la - lb) <= 1e-8 * abs(lb))


def _design(rng, n, d):
    A = rng.standard_normal((n, d))
    x = np.full(n, 1.0 / n)
    V = (A * x[:, None]).T @ A
    Vinv = np.linalg.inv(V)
    w = np.einsum("ij,jk,ik->i", A, Vinv, A)
    return A, x, Vinv, w, np.linalg.slogdet(V)[1]


def update_case(rng, n, d=10):
    A, _, Vinv, w, _ = _design(rng, n, d)

    def run(fn):
        V2, w2 = Vinv.copy(), w.copy()
        for i in range(50):
            fn(A, V2, w2, i % n, 0.01)
        return w2

    ok = np.allclose(run(kernels.dopt_update_numba), run(kernels.dopt_update_numpy), rtol=1e-10)
    return (lambda: run(kernels.dopt_update_numba)), (lambda: run(kernels.dopt_update_numpy)), ok


def loop_case(rng, n, d=5):
    A, x0, Vinv0, w0, ld0 = _design(rng, n, d)

    def run(fn):
        x, Vinv, w = x0.copy(), Vinv0.copy(), w0.copy()
        return fn(A, x, Vinv, w, ld0, 1e-6, 20000, 50, True)[2]

    ok = abs(run(kernels.dopt_loop_numba) - run(kernels.dopt_loop_numpy)) <= 1e-9
    return (lambda: run(kernels.dopt_loop_numba)), (lambda: run(kernels.dopt_loop_numpy)), ok


CASES = [("assignment", assignment_case, [10, 50, 200]),
         ("top_singular_pair", power_case, [10, 50, 200]),
         ("dopt_update x50", update_case, [100, 1000, 10000]),
         ("dopt_loop afw", loop_case, [50, 200, 1000])]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':20s} {'n':>6s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}  agree")
    for name, make, sizes in CASES:
        for n in sizes:
            fast, slow, ok = make(rng, n)
            tf, ts = best_time(fast, args.repeats), best_time(slow, args.repeats)
            print(f"{name:20s} {n:6d} {tf * 1e3:10.3f} {ts * 1e3:10.3f} {ts / tf:7.1f}x  {ok}")


if __name__ == "__main__":
    main()
