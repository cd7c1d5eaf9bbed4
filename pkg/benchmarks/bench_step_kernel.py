"""Benchmark the compiled Monte Carlo step kernel against the NumPy fallback.

The two backends consume identical uniform streams and must produce identical
trajectories; this script verifies that on a live workload and reports the
node-update throughput of each, plus an end-to-end estimate_marginals timing.

Run: python3 benchmarks/bench_step_kernel.py [--replications 20000] [--steps 500]
"""

import argparse
import time

import numpy as np

from sirbass import InitialDistribution, LatticeSpec, ParamField, make_scenario
from sirbass._kernels import BACKEND, step_kernel, step_kernel_py
from sirbass.mc import estimate_marginals


def bench_kernel(kernel, state, u_all, rates, repeat):
    state = state.copy()
    t0 = time.perf_counter()
    for i in range(repeat):
        kernel(state, u_all[i], *rates)
    return time.perf_counter() - t0, state


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--replications", type=int, default=20000)
    ap.add_argument("--nodes", type=int, default=32)
    ap.add_argument("--steps", type=int, default=400)
    args = ap.parse_args()

    m, n, steps = args.replications, args.nodes, args.steps
    rng = np.random.default_rng(0)
    state0 = rng.integers(0, 3, size=(m, n)).astype(np.uint8)
    u_all = rng.random((steps, m, n))
    rates = [np.full(n, 2e-3), np.full(n, 4e-3), np.full(n, 1e-3), np.full(n, 1e-3)]

    backends = [("numpy fallback", step_kernel_py)]
    if BACKEND == "cython":
        backends.insert(0, ("cython", step_kernel))

    results = {}
    print(f"workload: {m} replications x {n} nodes x {steps} steps "
          f"({m * n * steps / 1e6:.0f}M node-updates)\n")
    print(f"{'backend':<16}{'time [s]':>10}{'updates/s':>14}")
    for name, kernel in backends:
        elapsed, final = bench_kernel(kernel, state0, u_all, rates, steps)
        results[name] = final
        print(f"{name:<16}{elapsed:>10.3f}{m * n * steps / elapsed:>14.3e}")

    if len(results) == 2:
        a, b = results.values()
        print("\nbackends bit-identical:", np.array_equal(a, b))

    # end-to-end: the criterion-2 style workload at reduced scale
    sc = make_scenario(
        LatticeSpec(topology="infinite", sidedness="one-sided", window=(0, 10)),
        ParamField.one_sided(p=0.3, q=2.0),
        InitialDistribution.uniform(11, 1.0, 0.0, 0.0), 1.0, 0.5)
    t0 = time.perf_counter()
    estimate_marginals(sc, args.replications, dt=1e-3, seed=0)
    print(f"\nestimate_marginals (M={args.replications}, dt=1e-3, t<=1, "
          f"active backend = {BACKEND}): {time.perf_counter() - t0:.2f}s")


if __name__ == "__main__":
    main()
