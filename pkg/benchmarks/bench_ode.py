"""Compare the compiled and pure-Python ODE kernels on the two production workloads.

    python3 benchmarks/bench_ode.py [--repeat N]
"""

import argparse
import time

import numpy as np

from qqbethe.operkit import _ode_py

try:
    from qqbethe.operkit import _ode_kernels
except ImportError:
    _ode_kernels = None


def radial(mod):
    # one Q(E) shot at alpha = 2.4, ell = 0.3 from x = 6 down to 1e-3
    return mod.integrate_radial(14.6 + 0j, 0.39, 2.4, 6.0, 1e-3, 1.0 + 0j, -220.0 + 0j)


def circle(mod):
    # one monodromy loop for k = 1, r = 3/10 around w = 0.54
    w = np.array([0.54 + 0j])
    return mod.integrate_circle(0.54 + 0j, 0.18, 1.0, 0.39, 1 - 1 / 0.54, 2.0, w, 1 / w)


def best_of(fn, mod, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(mod)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'workload':10s} {'python [ms]':>12s} {'compiled [ms]':>14s} {'speedup':>8s}")
    for name, fn in (("radial", radial), ("circle", circle)):
        tp = best_of(fn, _ode_py, args.repeat)
        if _ode_kernels is None:
            print(f"{name:10s} {tp * 1e3:12.2f} {'n/a':>14s} {'n/a':>8s}")
            continue
        tc = best_of(fn, _ode_kernels, args.repeat)
        a, b = fn(_ode_py), fn(_ode_kernels)
        diff = np.max(np.abs(np.asarray(a[0]) - np.asarray(b[0])))
        print(f"{name:10s} {tp * 1e3:12.2f} {tc * 1e3:14.3f} {tp / tc:7.0f}x  (max diff {diff:.1e})")


if __name__ == "__main__":
    main()
