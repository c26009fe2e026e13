"""Time the compiled kernels against the numpy fallback.

Run with ``python benchmarks/bench_kernels.py``. Prints one row per kernel
and input size with the best-of-``repeat`` time per call for each backend.
"""

import argparse
import timeit

import numpy as np

from credit_divergence.kernels import backends


def cases(rng):
    for n in (100, 10_000, 1_000_000):
        x = rng.normal(0, 3, n)
        yield "norm_cdf", n, lambda k, x=x: k.norm_cdf(x)
        p, q = rng.uniform(0, 1, n), rng.uniform(0, 1, n)
        yield "jeffreys_bernoulli", n, lambda k, p=p, q=q: k.jeffreys_bernoulli(p, q, 1e-15)
    for n in (10, 100, 1000):
        base = np.full((n, n), 0.5)
        np.fill_diagonal(base, 1.0)
        u = rng.normal(size=(3, n))
        u /= np.linalg.norm(u, axis=0)
        s = rng.choice([-1.0, 1.0], n)
        yield "gram_noise", n, lambda k, b=base, u=u, s=s: k.gram_noise(b, u, 0.1, s)
        m = rng.normal(size=(n, n))
        yield "row_sumsq", n, lambda k, m=m: k.row_sumsq(m)
        yield "offdiag_abs_range", n, lambda k, m=m: k.offdiag_abs_range(m)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    found = backends()
    names = sorted(found)
    print(f"{'kernel':<20}{'size':>9}" + "".join(f"{n + ' (ms)':>16}" for n in names)
          + ("{:>10}".format("speedup") if len(names) == 2 else ""))
    for kernel, size, fn in cases(np.random.default_rng(0)):
        times = {}
        for name in names:
            mod = found[name]
            number = max(1, int(0.05 / max(min(timeit.repeat(lambda: fn(mod), number=1, repeat=2)), 1e-7)))
            best = min(timeit.repeat(lambda: fn(mod), number=number, repeat=args.repeat)) / number
            times[name] = best * 1e3
        row = f"{kernel:<20}{size:>9}" + "".join(f"{times[n]:>16.4f}" for n in names)
        if len(names) == 2:
            row += f"{times['python'] / times['cython']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
