"""Time the compiled quadrature kernels against the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--sizes 64 128 256 512] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from wavecrest.kernels import implementations


def fields(n, seed=0):
    rng = np.random.default_rng(seed)
    alpha = 2 * np.pi * np.arange(n) / n
    z = alpha + 0.1j * np.cos(alpha) + 0.05 * np.sin(2 * alpha)
    f = rng.normal(size=n) + 1j * rng.normal(size=n)
    g = rng.normal(size=n) + 1j * rng.normal(size=n)
    return z, f, g


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256, 512])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    impls = implementations()
    if impls["compiled"] is None:
        print("compiled extension not built; timing the numpy backend only")
    cases = {
        "cauchy": lambda m, z, f, g: m.cauchy(z, g),
        "cauchy_diff": lambda m, z, f, g: m.cauchy_diff(z, f, g),
        "square_diff": lambda m, z, f, g: m.square_diff(z, f, g),
        "cot_matrix": lambda m, z, f, g: m.cot_matrix(z),
    }
    print(f"{'kernel':<12s} {'n':>5s} {'python ms':>11s} {'compiled ms':>12s} {'speedup':>8s} {'max diff':>10s}")
    for n in args.sizes:
        z, f, g = fields(n)
        for name, call in cases.items():
            t = {}
            out = {}
            for label, mod in impls.items():
                if mod is None:
                    continue
                out[label] = call(mod, z, f, g)
                t[label] = min(timeit.repeat(lambda: call(mod, z, f, g), number=3, repeat=args.repeat)) / 3
            tp = t["python"] * 1e3
            if "compiled" in t:
                tc = t["compiled"] * 1e3
                diff = float(np.max(np.abs(out["python"] - out["compiled"])))
                print(f"{name:<12s} {n:5d} {tp:11.3f} {tc:12.3f} {tp / tc:8.2f} {diff:10.2e}")
            else:
                print(f"{name:<12s} {n:5d} {tp:11.3f} {'-':>12s} {'-':>8s} {'-':>10s}")


if __name__ == "__main__":
    main()
