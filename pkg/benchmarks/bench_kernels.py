"""Compiled vs pure-Python lattice-sum kernels.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from bicshg import _kernels_py

try:
    from bicshg import _kernels
except ImportError:
    _kernels = None

CASES = [
    # (q, qx, h, tol) typical of fundamental and second-harmonic evaluations
    (6.0, 0.0, 0.26, 1e-12),
    (12.1, 0.0, 0.26, 1e-12),
    (5.5, 0.7, 1.0, 1e-12),
    (6.283, 0.0, 0.05, 1e-12),
]


def run(module, repeat):
    out = {}
    for q, qx, h, tol in CASES:
        ta = min(timeit.repeat(lambda: module.alpha_closed_sum(q, qx, tol), number=repeat, repeat=3))
        tb = min(timeit.repeat(lambda: module.beta_closed_sum(q, qx, h, tol), number=repeat, repeat=3))
        out[(q, qx, h)] = (ta / repeat, tb / repeat)
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()
    py = run(_kernels_py, args.repeat)
    cy = run(_kernels, args.repeat) if _kernels is not None else None
    print(f"{'q':>7} {'qx':>5} {'h':>5} | {'alpha py':>10} {'alpha cy':>10} {'x':>6} |"
          f" {'beta py':>10} {'beta cy':>10} {'x':>6}")
    for key, (pa, pb) in py.items():
        if cy is None:
            print(f"{key[0]:7.3f} {key[1]:5.2f} {key[2]:5.2f} | {pa*1e6:9.1f}u {'-':>10} {'-':>6} |"
                  f" {pb*1e6:9.1f}u")
            continue
        ca, cb = cy[key]
        print(f"{key[0]:7.3f} {key[1]:5.2f} {key[2]:5.2f} | {pa*1e6:9.1f}u {ca*1e6:9.1f}u {pa/ca:6.1f} |"
              f" {pb*1e6:9.1f}u {cb*1e6:9.1f}u {pb/cb:6.1f}")
    if cy is None:
        print("compiled extension not built; only the fallback was timed")
    # both implementations must agree
    for q, qx, h, tol in CASES:
        if _kernels is not None:
            a1, a2 = _kernels_py.alpha_closed_sum(q, qx, tol)[0], _kernels.alpha_closed_sum(q, qx, tol)[0]
            assert np.isclose(a1, a2, rtol=0, atol=1e-12), (a1, a2)


if __name__ == "__main__":
    main()
