"""Time the numba and numpy backends of the hot kernels.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from pnoma import _accel, _kernels
from pnoma.analytic import NetworkParams
from pnoma.simulate import block_rng, sample_realization


def cases(p):
    m = np.logspace(-3, 6, 2000)
    c = np.linspace(0.05, 1.0, 2000)
    z = np.logspace(-3, 8, 200_000)
    return {
        "coverage_kernel (2000 thresholds)": lambda: _kernels.coverage_kernel(1, m, c, p.lam, p.eta, p.sigma2),
        "hyp2f1_neg (2e5 points)": lambda: _kernels.hyp2f1_neg(1.0 - p.delta, z),
        "sample_realization (8192 trials)": lambda: sample_realization(block_rng(1, 0), p, n=8192),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = ["numba", "numpy"] if _accel.NUMBA_AVAILABLE else ["numpy"]
    p = NetworkParams()
    results = {}
    for name in backends:
        _accel.set_backend(name)
        for label, fn in cases(p).items():
            fn()  # compile / warm up
            results[(label, name)] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
    print(f"{'kernel':<36}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) == 2 else ""))
    for label in cases(p):
        row = [results[(label, b)] for b in backends]
        line = f"{label:<36}" + "".join(f"{t * 1e3:>10.1f}ms" for t in row)
        if len(row) == 2:
            line += f"{row[1] / row[0]:>11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
