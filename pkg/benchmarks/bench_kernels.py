"""Compare the compiled and pure-Python kernels.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Times the exact simplex on feasibility LPs built from representative
systems, and the V-linked closure on a few vicinity spaces.  Both kernels
must agree on every result; the script exits nonzero if they do not.
"""
import argparse
import random
import sys
import time
from fractions import Fraction

from cbd import _kernels
from cbd.decide import build_feasibility_lp
from cbd.lp import lp_feasible
from cbd.model import CATEGORICAL, ORDERED, single_connection
from cbd.vspace import VSpace, cross_space


def _pmf(rng, k, denom):
    cuts = sorted(rng.randint(0, denom) for _ in range(k - 1))
    return tuple(Fraction(b - a, denom) for a, b in zip([0, *cuts], [*cuts, denom]))


def lp_cases():
    rng = random.Random(7)
    T = Fraction(1, 10)
    example = single_connection(
        [(7 * T, T, T, T), (T, 5 * T, 2 * T, 2 * T), (2 * T, 2 * T, 3 * T, 3 * T)], "abcd")
    ordered = single_connection([_pmf(rng, 5, 60) for _ in range(4)], range(5), ORDERED)
    wide = single_connection([_pmf(rng, 6, 12) for _ in range(3)], range(6), CATEGORICAL)
    return [
        ("four values, 3 contexts, full plan", build_feasibility_lp(example, "full").lp),
        ("five ordered values, 4 contexts, cuts", build_feasibility_lp(ordered, "cuts").lp),
        ("six values, 3 contexts, full plan", build_feasibility_lp(wide, "full").lp),
    ]


def closure_cases():
    rng = random.Random(8)
    out = [("cross (5 points)", cross_space()), ("ordered chain (14 points)", VSpace.ordered(range(14)))]
    g = list(range(12))
    vics = [frozenset(rng.sample(g, 2)) for _ in range(14)] + [frozenset([x, (x + 1) % 12]) for x in g]
    out.append(("random pairs (12 points)", VSpace(g, vics)))
    return out


def timed(fn, repeat):
    best = float("inf")
    result = None
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    compiled = _kernels.compiled_kernel
    if compiled is None:
        print("compiled kernel unavailable; build it with: python3 setup.py build_ext --inplace")
        return 1
    kernels = [("python", _kernels.python_kernel), ("cython", compiled)]
    print(f"{'case':46} {'columns':>8} {'python s':>10} {'cython s':>10} {'speedup':>8}")
    ok = True
    saved = _kernels.active
    try:
        for name, lp in lp_cases():
            times, results = [], []
            for _, kernel in kernels:
                _kernels.active = kernel
                t, res = timed(lambda: lp_feasible(lp), args.repeat)
                times.append(t)
                results.append((res.status, res.solution))
            ok &= results[0] == results[1]
            print(f"{'simplex: ' + name:46} {lp.num_vars:>8} {times[0]:>10.4f} {times[1]:>10.4f} {times[0] / times[1]:>7.1f}x")
    finally:
        _kernels.active = saved
    for name, space in closure_cases():
        n, masks = len(space.ground), space.vicinity_masks
        times, results = [], []
        for _, kernel in kernels:
            t, res = timed(lambda: list(kernel.linked_closure(n, masks)), args.repeat)
            times.append(t)
            results.append(res)
        ok &= results[0] == results[1]
        print(f"{'closure: ' + name:46} {len(results[0]):>8} {times[0]:>10.4f} {times[1]:>10.4f} {times[0] / times[1]:>7.1f}x")
    if not ok:
        print("kernels disagree", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
