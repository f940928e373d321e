"""Benchmark the numba and numpy kernel backends against each other.

Times the two solver hot spots (affine assembly and barrier
gradient/Hessian) over a sweep of coordinate counts k and block sizes m.

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --sizes 10x4 45x12 120x24 --repeats 500
"""

import argparse
import time

import numpy as np

from logdet_lmi import kernels

DEFAULT_SIZES = ["6x3", "10x4", "21x8", "45x12", "120x24"]


def make_inputs(rng, k, m):
    coeffs = rng.standard_normal((k, m, m))
    coeffs = np.ascontiguousarray(0.5 * (coeffs + coeffs.transpose(0, 2, 1)))
    base = rng.standard_normal((m, m))
    base = np.ascontiguousarray(0.5 * (base + base.T))
    x = rng.standard_normal(k)
    a = rng.standard_normal((m, m))
    sinv = np.ascontiguousarray(a @ a.T + m * np.eye(m))
    return base, coeffs, x, sinv


def time_call(fn, repeats):
    fn()  # warm-up (JIT compile, cache touch)
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats * 1e6  # microseconds


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", nargs="+", default=DEFAULT_SIZES,
                        help="list of KxM sizes (coordinates x block dim)")
    parser.add_argument("--repeats", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    backends = kernels.available_backends()
    if "numba" not in backends:
        print("note: numba unavailable, timing numpy only")

    rng = np.random.default_rng(args.seed)
    header = f"{'size k x m':>12} | {'op':>9}"
    for b in backends:
        header += f" | {b + ' us':>12}"
    if len(backends) == 2:
        header += " | speedup"
    print(header)
    print("-" * len(header))

    for size in args.sizes:
        k, m = (int(v) for v in size.lower().split("x"))
        base, coeffs, x, sinv = make_inputs(rng, k, m)
        for op, call in (
            ("assemble", lambda: kernels.affine_assemble(base, coeffs, x)),
            ("grad_hess", lambda: kernels.barrier_grad_hess(sinv, coeffs)),
        ):
            times = {}
            for b in backends:
                kernels.select_backend(b)
                times[b] = time_call(call, args.repeats)
            row = f"{f'{k} x {m}':>12} | {op:>9}"
            for b in backends:
                row += f" | {times[b]:>12.2f}"
            if len(backends) == 2:
                row += f" | {times['numpy'] / times['numba']:>6.2f}x"
            print(row)

    kernels.select_backend(None)


if __name__ == "__main__":
    main()
