"""Compare the compiled kernels with the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from hdbf import _fallback

try:
    from hdbf import _kernels
except ImportError:
    _kernels = None


def cases(rng):
    # Gram of 40 differenced rows at p=2000, then a block of 64 sign vectors of length 40
    a = rng.normal(size=(40, 2000))
    w = rng.normal(size=(40, 40))
    w = w + w.T
    v = rng.choice([-1.0, 1.0], size=(64, 40))
    d = rng.normal(size=40)
    return {
        "gram 40x40 p=2000": lambda mod: mod.gram(a, a),
        "quadratic_forms 64x40": lambda mod: mod.quadratic_forms(w, v),
        "quadratic_forms 64x40 +diag": lambda mod: mod.quadratic_forms(w, v, d),
    }


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    rng = np.random.default_rng(0)
    backends = [("python", _fallback)] + ([("compiled", _kernels)] if _kernels else [])
    print(f"{'kernel':<30}" + "".join(f"{name:>14}" for name, _ in backends) + f"{'speedup':>10}")
    for label, fn in cases(rng).items():
        times = []
        for _, mod in backends:
            number = 20
            best = min(timeit.repeat(lambda: fn(mod), number=number, repeat=args.repeat)) / number
            times.append(best)
        speed = f"{times[0] / times[1]:>9.1f}x" if len(times) == 2 else ""
        print(f"{label:<30}" + "".join(f"{t * 1e3:>12.3f}ms" for t in times) + speed)
    if len(backends) == 2:
        for label, fn in cases(rng).items():
            assert np.array_equal(fn(_fallback), fn(_kernels)), label
        print("outputs bit-identical across backends")


if __name__ == "__main__":
    main()
