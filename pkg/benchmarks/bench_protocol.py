"""Throughput comparison of the protocol sampling backends.

The compiled kernel and the pure-Python fallback implement the same
sequential Born-rule sampler and consume identical uniform streams, so they
produce identical traces; this script measures how much faster the kernel is
and double-checks the bit-equality on a small batch.

Run:  python benchmarks/bench_protocol.py [runs]
"""

import math
import sys
import time

import numpy as np

from sptmqc import ToyModelParams, aklt_factorized, toy_tensor
from sptmqc import _protocol_py, mqc

try:
    from sptmqc import _protocol_kernel
except ImportError:
    _protocol_kernel = None


def bench(backend, mats, succ, lam, bidx, m, runs, seed):
    start = time.perf_counter()
    attempts, succeeded, _, _ = backend.sample_runs(
        mats, succ, lam, bidx, m, runs, 100000, seed, record=False
    )
    elapsed = time.perf_counter() - start
    sites = int(attempts.sum()) * (2 * m + 1)
    return elapsed, sites, attempts


def main():
    runs = int(sys.argv[1]) if len(sys.argv) > 1 else 20000
    cases = [
        ("pauli-matrix state, m=1", aklt_factorized(), 1),
        ("family (pi/2, pi/4), m=2", toy_tensor(ToyModelParams(math.pi / 2, math.pi / 4)), 2),
    ]
    for name, state, m in cases:
        canon, mats, succ, bidx, _ = mqc._protocol_inputs(state, "z", math.pi / 2)
        print(f"== {name}, {runs} runs ==")
        t_py, sites, att_py = bench(_protocol_py, mats, succ, canon.lam, bidx, m, runs, 1)
        print(f"  python fallback: {t_py:8.3f} s  ({sites / t_py / 1e6:6.2f} Msites/s)")
        if _protocol_kernel is None:
            print("  compiled kernel: not built")
            continue
        t_c, sites_c, att_c = bench(_protocol_kernel, mats, succ, canon.lam, bidx, m, runs, 1)
        print(f"  compiled kernel: {t_c:8.3f} s  ({sites_c / t_c / 1e6:6.2f} Msites/s)")
        print(f"  speedup: {t_py / t_c:.1f}x, traces identical: {np.array_equal(att_py, att_c)}")


if __name__ == "__main__":
    main()
