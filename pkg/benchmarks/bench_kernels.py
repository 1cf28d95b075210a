"""Compare the compiled and pure-numpy kernel backends.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``. Every kernel
is timed on both backends and the outputs are checked for agreement.
"""

import argparse
import timeit

import numpy as np

from nonstat_causal import _kernels_py

try:
    from nonstat_causal import _kernels
except ImportError:  # extension not built
    _kernels = None


def cases(rng):
    T = 4096
    op3 = np.column_stack([np.ones(T), 0.4 * rng.uniform(-1, 1, (T, 3))])
    op1 = np.column_stack([np.ones(T), 0.5 * np.cos(np.arange(T) / 200.0)])
    x = rng.standard_normal(T)
    return {
        "tv_apply   T=4096 p=3": ("tv_apply", (op3, x)),
        "tv_compose T=4096 p=3*3": ("tv_compose", (op3, op3)),
        "tv_invert  T=4096 r=128": ("tv_invert", (op1, 128)),
        "tv_backward T=4096 q=64": ("tv_backward", (op1, 0.0625, 64)),
        "companion  T=512 N=16": ("companion_norms", (op3[:512], 16)),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<26}{'python ms':>12}{'cython ms':>12}{'speedup':>10}  max|diff|")
    for label, (name, argv) in cases(rng).items():
        py = getattr(_kernels_py, name)
        t_py = min(timeit.repeat(lambda: py(*argv), number=1, repeat=args.repeat)) * 1e3
        if _kernels is None:
            print(f"{label:<26}{t_py:>12.2f}{'n/a':>12}")
            continue
        cy = getattr(_kernels, name)
        t_cy = min(timeit.repeat(lambda: cy(*argv), number=1, repeat=args.repeat)) * 1e3
        diff = float(np.max(np.abs(np.asarray(py(*argv)) - np.asarray(cy(*argv)))))
        print(f"{label:<26}{t_py:>12.2f}{t_cy:>12.2f}{t_py / t_cy:>9.1f}x  {diff:.1e}")


if __name__ == "__main__":
    main()
