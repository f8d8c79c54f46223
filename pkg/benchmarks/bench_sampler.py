"""Compare the numba and numpy sampling backends.

    python3 benchmarks/bench_sampler.py [--runs 100000] [--trials 101] [--repeat 3]

Both backends see the same random words, so their counts must agree; the
script exits non-zero if they do not.  CFOLOG_NO_NUMBA=1 hides numba
entirely, in which case only the numpy column is timed.
"""

import argparse
import time

import numpy as np

from cfolog.dyadic import Dyadic
from cfolog.ptm import kernels
from cfolog.ptm.bpp import table_machine_for


def best_of(fn, repeat):
    out, best = None, float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return out, best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--runs", type=int, default=100_000)
    ap.add_argument("--trials", type=int, default=101)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()

    # accept 3/2^4 + 1/2^7: a few strings of mixed length, like a refined table
    machine = table_machine_for({"x": Dyadic(25, 7)})
    packed = machine.packed("x")
    words = kernels.random_words(np.random.default_rng(args.seed), args.runs * args.trials)
    print(f"{args.runs} runs x {args.trials} trials, {packed[0].size} table strings")

    results = {}
    backends = ["numpy"] + (["numba"] if kernels.HAVE_NUMBA else [])
    for name in backends:
        use = name == "numba"
        if use:
            kernels.majority_errors(words[: args.trials], packed, args.trials, 0, use_numba=True)  # compile
        errs, t_major = best_of(
            lambda: kernels.majority_errors(words, packed, args.trials, 0, use_numba=use), args.repeat
        )
        outc, t_class = best_of(lambda: kernels.classify(words, packed, use_numba=use), args.repeat)
        results[name] = (errs, int(np.count_nonzero(outc == 0)))
        print(f"{name:>6}: majority {t_major * 1e3:9.1f} ms   classify {t_class * 1e3:9.1f} ms   "
              f"errors {errs}   accepts {results[name][1]}")
    if len(set(results.values())) != 1:
        raise SystemExit(f"backends disagree: {results}")


if __name__ == "__main__":
    main()
