"""Compiled vs pure-Python canonical labeling kernel on fuzzed monomials.

    python3 benchmarks/bench_canon.py [--n 3000] [--seed 0] [--repeat 5]
"""
import argparse
import random
import timeit

from shrinkcheck.props import random_expression
from shrinkcheck.tensor import _canon_py, canonicalize, core

try:
    from shrinkcheck.tensor import _canon
except ImportError:
    _canon = None


def capture_inputs(n: int, seed: int) -> list:
    """Encoded factor lists exactly as canonicalize hands them to the kernel."""
    seen = []
    real = core.canon_factors

    def spy(enc, nfree):
        seen.append((list(enc), nfree))
        return real(enc, nfree)

    core.canon_factors = spy
    try:
        rng = random.Random(seed)
        for _ in range(n):
            free = rng.choice(((), ("i",), ("i", "j")))
            canonicalize(random_expression(rng, 3, 5, 4, free))
    finally:
        core.canon_factors = real
    return seen


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=3000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    inputs = capture_inputs(args.n, args.seed)
    kernels = {"python": _canon_py.canon_factors}
    if _canon is None:
        print("compiled kernel not built; run `pip install -e . --no-build-isolation` with cython present")
    else:
        kernels["cython"] = _canon.canon_factors
        bad = sum(_canon.canon_factors(e, k) != _canon_py.canon_factors(e, k) for e, k in inputs)
        print(f"{len(inputs)} monomials, kernel disagreements: {bad}")

    best = {}
    for name, fn in kernels.items():
        t = timeit.repeat(lambda: [fn(e, k) for e, k in inputs], number=1, repeat=args.repeat)
        best[name] = min(t)
        print(f"{name:7s} best {best[name] * 1e3:9.2f} ms  ({best[name] / len(inputs) * 1e6:.2f} us/monomial)")
    if "cython" in best:
        print(f"speedup {best['python'] / best['cython']:.2f}x")


if __name__ == "__main__":
    main()
