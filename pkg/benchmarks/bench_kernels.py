"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py            # kernel timings
    python3 benchmarks/bench_kernels.py --end-to-end

The kernel timings call both implementations in one process. ``--end-to-end``
also runs a full un-quantized rate bound in two subprocesses, one with
LDPC_BOUNDS_NO_JIT=1, and checks that they print the same value.
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from ldpc_bounds import kernels
from ldpc_bounds._jit import USE_NUMBA


def best_of(fn, repeat=5):
    fn()  # warm-up, includes compilation for the jit version
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def composition_case(k, parts, seed=0):
    rng = np.random.default_rng(seed)
    q = rng.random(parts)
    q /= q.sum()
    t = rng.random(parts)
    comps = kernels.compositions(k, parts)
    log_coef = kernels.multinomial_log_coefficients(k, parts)
    return comps, log_coef, q, t


def power_sum_case(n_nodes, n_exp, seed=0):
    rng = np.random.default_rng(seed)
    log_base = np.log(rng.uniform(0.2, 1.0, n_nodes))
    weights = rng.random(n_nodes)
    weights /= weights.sum()
    exponents = np.arange(1, n_exp + 1, dtype=float) * 2
    return log_base, weights, exponents


def kernel_table():
    rows = []
    for k, parts in ((6, 2), (20, 4), (30, 4), (12, 8)):
        args = composition_case(k, parts)
        a = kernels._composition_expectation_numpy(*args)
        b = kernels._composition_expectation_loop(*args)
        rows.append((f"compositions k={k} parts={parts} ({args[0].shape[0]} terms)",
                     best_of(lambda: kernels._composition_expectation_numpy(*args)),
                     best_of(lambda: kernels._composition_expectation_loop(*args)),
                     abs(a - b)))
    for n_nodes, n_exp in ((128, 2000), (256, 4000)):
        args = power_sum_case(n_nodes, n_exp)
        a = kernels._log_power_sums_numpy(*args)[1]
        b = kernels._log_power_sums_loop(*args)[1]
        rows.append((f"power sums nodes={n_nodes} exponents={n_exp}",
                     best_of(lambda: kernels._log_power_sums_numpy(*args)),
                     best_of(lambda: kernels._log_power_sums_loop(*args)),
                     float(np.max(np.abs(a - b)))))
    return rows


END_TO_END = ("from ldpc_bounds import ChannelModel, CheckProfile, rate_ub_unquantized;"
              "import time; t=time.perf_counter();"
              "r=rate_ub_unquantized(ChannelModel.biawgn(0.3), CheckProfile.regular(6, 0.5));"
              "print(repr(r.value), time.perf_counter()-t)")


def end_to_end():
    out = {}
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, LDPC_BOUNDS_NO_JIT=flag)
        # first call compiles / fills the numba cache, second one is timed
        subprocess.run([sys.executable, "-c", END_TO_END], env=env, check=True, capture_output=True)
        res = subprocess.run([sys.executable, "-c", END_TO_END], env=env, check=True,
                             capture_output=True, text=True)
        value, seconds = res.stdout.split()
        out[label] = (value, float(seconds))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args()

    if not USE_NUMBA:
        print("numba is disabled or missing; the 'numba' column times plain python loops")
    print(f"{'case':48s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s} {'max diff':>10s}")
    for name, t_np, t_nb, diff in kernel_table():
        print(f"{name:48s} {1e3 * t_np:11.3f} {1e3 * t_nb:11.3f} {t_np / t_nb:8.1f} {diff:10.2e}")

    if args.end_to_end:
        res = end_to_end()
        print()
        for label, (value, seconds) in res.items():
            print(f"rate_ub_unquantized sigma=0.3 [{label}]: {value} in {seconds:.2f} s")
        same = res["numba"][0] == res["numpy"][0]
        print("identical output" if same else "outputs differ in the last digits")


if __name__ == "__main__":
    main()
