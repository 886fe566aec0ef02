"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_backends.py [--n 2000] [--steps 1000000]
"""

import argparse
import timeit

import numpy as np

from gim1n import _backend, _fallback
from gim1n.dist import completion_probs, Deterministic


def best_of(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=2000, help="recurrence length")
    parser.add_argument("--steps", type=int, default=10**6, help="chain steps")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    if _backend.NAME != "cython":
        print("compiled extension not available; only the fallback is timed")
    r = completion_probs(Deterministic(1.0), 1.0, args.n)
    out = np.zeros(args.n + 1)
    counts = np.random.default_rng(0).poisson(1.0, args.steps).astype(np.int64)

    def march(kernels):
        out[:] = 0.0
        out[0] = 1.0
        kernels.march(r, out, args.n, np.inf)

    cases = [
        (f"march n={args.n}", lambda k: (lambda: march(k))),
        (f"chain steps={args.steps}", lambda k: (lambda: k.chain(counts, 20, 0, True))),
    ]
    print(f"{'kernel':<24}{'compiled [s]':>14}{'python [s]':>14}{'speedup':>10}")
    for label, make in cases:
        slow = best_of(make(_fallback), args.repeat, 1)
        if _backend.NAME == "cython":
            fast = best_of(make(_backend.kernels), args.repeat, 5)
            print(f"{label:<24}{fast:>14.5f}{slow:>14.5f}{slow / fast:>10.1f}")
        else:
            print(f"{label:<24}{'-':>14}{slow:>14.5f}{'-':>10}")


if __name__ == "__main__":
    main()
