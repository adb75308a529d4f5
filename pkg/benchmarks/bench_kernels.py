"""Compare the numba kernels against their pure-numpy twins.

Run:  python benchmarks/bench_kernels.py

The active backend for the package itself is chosen by F2C_BACKEND
(auto | numba | numpy); this script always times both variants directly.
"""

import time

import numpy as np

from f2c import _kernels


def random_so(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q


def time_call(fn, *args, repeat=5):
    best = np.inf
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_apply(rng, d, rotations):
    planes = np.empty((rotations, 2), dtype=np.int64)
    planes[:, 0] = rng.integers(0, d - 1, size=rotations)
    planes[:, 1] = planes[:, 0] + 1
    angles = rng.uniform(-np.pi, np.pi, size=rotations)
    base = random_so(rng, d)
    rows = [("apply_givens_seq", f"d={d}, m={rotations}")]
    variants = [("numpy", _kernels._apply_givens_seq_np)]
    if _kernels._HAVE_NUMBA:
        _kernels._apply_givens_seq_nb(base.copy(), planes[:1], angles[:1])  # warm JIT
        variants.append(("numba", _kernels._apply_givens_seq_nb))
    outs = {}
    for name, fn in variants:
        work = base.copy()
        t = time_call(lambda: fn(work.copy(), planes, angles))
        outs[name] = t
    return rows[0], outs


def bench_factor(rng, d):
    base = random_so(rng, d)
    variants = [("numpy", _kernels._adjacent_factor_np)]
    if _kernels._HAVE_NUMBA:
        _kernels._adjacent_factor_nb(random_so(rng, 4))  # warm JIT
        variants.append(("numba", lambda m: _kernels._adjacent_factor_nb(m)))
    outs = {}
    for name, fn in variants:
        outs[name] = time_call(lambda: fn(base.copy()))
    return ("adjacent_factor", f"d={d}"), outs


def main():
    rng = np.random.default_rng(0)
    print(f"package backend: {_kernels.get_backend()}")
    print(f"{'kernel':<18} {'size':<16} {'numpy':>10} {'numba':>10} {'speedup':>9}")
    cases = [
        bench_apply(rng, 48, 20_000),
        bench_apply(rng, 444, 100_000),
        bench_factor(rng, 200),
        bench_factor(rng, 444),
    ]
    for (kernel, size), outs in cases:
        np_t = outs["numpy"]
        nb_t = outs.get("numba")
        if nb_t is None:
            print(f"{kernel:<18} {size:<16} {np_t * 1e3:>8.1f}ms {'n/a':>10} {'':>9}")
        else:
            print(
                f"{kernel:<18} {size:<16} {np_t * 1e3:>8.1f}ms {nb_t * 1e3:>8.1f}ms "
                f"{np_t / nb_t:>8.1f}x"
            )


if __name__ == "__main__":
    main()
