"""Timing comparison of the eigensolver backends.

Runs the cyclic Jacobi kernel on random symmetric matrices of growing
size under every available backend, checks the backends agree, then
times a full pipeline fit both ways.

Usage: python3 benchmarks/bench_backends.py [--repeats N]
"""
import argparse
import os
import time

import numpy as np

from upcr import ResponseMoments, SignalSpec, SyntheticEnsembleSpec, generate
from upcr._kernels import available_backends, backend_name


def time_call(fn, *args, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_kernel(repeats):
    backends = available_backends()
    sizes = (4, 8, 16, 32, 50)
    rng = np.random.default_rng(7)
    print(f"active backend: {backend_name()}")
    print(f"available: {', '.join(backends)}")
    print()
    header = ["m"] + [f"{name} (ms)" for name in backends]
    if len(backends) == 2:
        header.append("speedup")
    print("  ".join(f"{h:>14}" for h in header))
    for m in sizes:
        w = rng.standard_normal((m, 2 * m))
        a = (w @ w.T / (2 * m)).tolist()
        times = {}
        for name, solver in backends.items():
            times[name] = time_call(solver, [row[:] for row in a], repeats=repeats)
        vals = {name: solver([row[:] for row in a])[0] for name, solver in backends.items()}
        if len(vals) == 2:
            py, cy = (np.sort(v) for v in vals.values())
            assert np.max(np.abs(py - cy)) < 1e-12 * max(1.0, float(np.max(np.abs(py))))
        row = [f"{m:>14}"] + [f"{times[name] * 1e3:>14.3f}" for name in backends]
        if len(backends) == 2:
            t = list(times.values())
            row.append(f"{t[0] / t[1]:>14.1f}x")
        print("  ".join(row))


def bench_pipeline(repeats):
    # end to end: most time goes to covariance and the residual grid,
    # so the kernel choice moves the total much less than the raw solve
    import upcr

    spec = SyntheticEnsembleSpec(
        m=20, n=20_000, signal=SignalSpec("normal", g2=0.5), epsilon=0.2,
        h_variances=(1.0,), noise_on_y=0.5, seed=3)
    preds, _, truth = generate(spec)
    moments = ResponseMoments(truth.mean_y, truth.var_y)
    best = time_call(upcr.upcr_fit, preds, moments, repeats=repeats)
    print()
    print(f"full fit, m=20 n=20000, backend={backend_name()}: {best * 1e3:.1f} ms")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repetitions per measurement (best is kept)")
    args = parser.parse_args()
    bench_kernel(args.repeats)
    bench_pipeline(args.repeats)
    if "UPCR_BACKEND" not in os.environ and len(available_backends()) == 2:
        print("rerun with UPCR_BACKEND=python to time the full fit on the fallback")


if __name__ == "__main__":
    main()
