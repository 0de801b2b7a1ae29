"""Compiled vs NumPy kernels for e^z K_{ir}(z) and e^z K_nu(z).

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Prints one line per workload with the best wall time of each backend, the
speedup and the largest difference between their outputs, measured
against the sum of absolute quadrature terms (the scale on which both
backends promise accuracy; tiny values at large order sit at that floor).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from orthospec._kernels import compiled, python

WORKLOADS = [
    ("kir small z", "kir", np.linspace(0.0, 30.0, 2000), 0.1),
    ("kir z=2", "kir", np.linspace(0.0, 30.0, 2000), 2.0),
    ("kir z=100", "kir", np.linspace(0.0, 60.0, 2000), 100.0),
    ("kir z=1e4", "kir", np.linspace(0.0, 400.0, 400), 1e4),
    ("knu z=1", "knu", np.linspace(0.0, 0.5, 2000), 1.0),
]


def best_time(fn, *args, repeat: int) -> tuple[float, tuple]:
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if compiled is None:
        print("compiled extension not built; only the NumPy backend is available")
    print(f"{'workload':<14}{'numpy [s]':>12}{'cython [s]':>12}{'speedup':>10}{'max diff':>15}")
    for name, kind, orders, z in WORKLOADS:
        fn_py = python.kir_scaled_many if kind == "kir" else python.knu_scaled_many
        t_py, out_py = best_time(fn_py, orders, z, repeat=args.repeat)
        if compiled is None:
            print(f"{name:<14}{t_py:>12.4f}{'-':>12}{'-':>10}{'-':>15}")
            continue
        fn_c = compiled.kir_scaled_many if kind == "kir" else compiled.knu_scaled_many
        t_c, out_c = best_time(fn_c, orders, z, repeat=args.repeat)
        v_py, v_c = np.asarray(out_py[0]), np.asarray(out_c[0])
        scale = np.maximum(np.abs(v_py), np.asarray(out_py[1]))
        diff = float(np.max(np.abs(v_py - v_c) / scale))
        print(f"{name:<14}{t_py:>12.4f}{t_c:>12.4f}{t_py / t_c:>10.1f}{diff:>15.2e}")


if __name__ == "__main__":
    main()
