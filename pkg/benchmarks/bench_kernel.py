"""Trials per second of the compiled and numpy kernels on a fig4 scenario.

    python3 benchmarks/bench_kernel.py --trials 200000
"""
import argparse
import dataclasses
import time

import numpy as np

from poisson_outage.config import build, preset
from poisson_outage.kernel import available_backends
from poisson_outage.simulator import exceedance_counts


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=200_000)
    ap.add_argument("--scenario", default="k2", choices=["k1", "k2", "alpha0.1"])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    ns = {s.name: s for s in build(preset("fig4")).scenarios}[args.scenario]
    sc = dataclasses.replace(ns.scenario, trials=args.trials)
    grid = 10.0 ** (ns.grid_db / 10.0)

    results = {}
    for name in available_backends():
        best = np.inf
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            counts = exceedance_counts(sc, grid, backend=name)
            best = min(best, time.perf_counter() - t0)
        results[name] = (best, counts)
        print(f"{name:>8}: {args.trials / best:12.0f} trials/s ({best:.3f} s)")

    if len(results) == 2:
        (tc, cc), (tp, cp) = results["compiled"], results["python"]
        same = all(np.array_equal(a, b) for a, b in zip(cc, cp))
        print(f" speedup: {tp / tc:.1f}x, counts identical: {same}")


if __name__ == "__main__":
    main()
