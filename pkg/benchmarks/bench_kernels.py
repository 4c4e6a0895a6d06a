"""Compare the compiled kernels against the numpy fallback.

Run with ``python benchmarks/bench_kernels.py [--repeat N]``.  Prints the best
wall time per kernel and backend and the speed-up of the compiled version.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from onsl.kernels import available_backends
from onsl.oracle import GaussianMixture


def _cases():
    mix = GaussianMixture([0.3, 0.7], [[-2.0, 0.0, 1.0], [2.0, 1.0, 0.0]],
                          [np.eye(3) * 0.5, np.diag([1.0, 2.0, 0.3])])
    x = np.random.default_rng(0).normal(size=(200_000, 3))
    P, ln = mix.precisions, mix._log_norm
    return {
        "counter_normals 1e6x4": lambda k: k.counter_normals(1, 2, 0, 1_000_000, 4),
        "counter_uniforms 1e6x4": lambda k: k.counter_uniforms(1, 2, 0, 1_000_000, 4),
        "mixture_score 2e5x3 (2 comp)": lambda k: k.mixture_score(x, mix.means, P, ln),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    for name, fn in _cases().items():
        best = {b: min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)) for b, mod in backends.items()}
        line = "  ".join(f"{b}={t * 1e3:8.2f} ms" for b, t in best.items())
        if "cython" in best:
            line += f"  speed-up x{best['python'] / best['cython']:.1f}"
        print(f"{name:30s} {line}")


if __name__ == "__main__":
    main()
