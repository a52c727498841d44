"""Compare the compiled and pure-Python kernel backends.

Run with ``python benchmarks/bench_kernels.py [--n 128] [--repeat 20]``.
Prints the median wall time per call and the speed-up of the compiled core.
"""
import argparse
import statistics
import time

import numpy as np

from mixsim.kernels import backend_module


def _cases(n, rng):
    h = 1.0 / n
    u = rng.standard_normal((n + 1, n))
    v = rng.standard_normal((n, n + 1))
    u[0], u[-1], v[:, 0], v[:, -1] = 0.0, 0.0, 0.0, 0.0
    s = rng.random((3, n, n))
    fx, fy = rng.standard_normal((3, n + 1, n)), rng.standard_normal((3, n, n + 1))
    sxx, syy, sxy = rng.standard_normal((n, n)), rng.standard_normal((n, n)), rng.standard_normal((n + 1, n + 1))
    return {
        "upwind_fluxes": lambda m: m.upwind_fluxes(s, u, v),
        "divergence": lambda m: m.divergence(fx, fy, h, h),
        "convection": lambda m: m.convection(u, v, h, h, 10.0),
        "strain_rates": lambda m: m.strain_rates(u, v, h, h),
        "stress_divergence": lambda m: m.stress_divergence(sxx, syy, sxy, h, h),
    }


def _time(fn, repeat):
    fn()
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=128, help="cells per direction")
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)
    py = backend_module("python")
    try:
        cy = backend_module("compiled")
    except ImportError:
        cy = None
        print("compiled backend not built; timing the Python kernels only")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<20}{'python [ms]':>14}{'compiled [ms]':>16}{'speed-up':>10}")
    for name, call in _cases(args.n, rng).items():
        tp = _time(lambda: call(py), args.repeat)
        if cy is None:
            print(f"{name:<20}{1e3 * tp:>14.4f}")
            continue
        tc = _time(lambda: call(cy), args.repeat)
        print(f"{name:<20}{1e3 * tp:>14.4f}{1e3 * tc:>16.4f}{tp / tc:>10.1f}")


if __name__ == "__main__":
    main()
