"""Time the numba kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--sizes 20 40 80]

Transport runs on dense N = M instances.  Enumeration runs unpruned on
both backends so they do the same amount of work.
"""

import argparse
import timeit

import numpy as np

from ponsleep import kernels
from ponsleep.model import AssignmentProblem
from ponsleep.oracle import exact_solve
from ponsleep.transport import TransportInstance, solve_strict


def dense_problem(n, m, rng):
    arcs = []
    for _ in range(n):
        lb = int(rng.integers(0, m // 4 + 1))
        ub = int(rng.integers(max(lb, 3 * m // 4 - 1), m))
        arcs.append(tuple(range(lb, ub + 1)))
    return AssignmentProblem.from_arcs(arcs, m)


def best_time(fn, repeat):
    fn()  # warm-up, includes JIT compilation
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sizes", type=int, nargs="+", default=[20, 40, 80])
    ap.add_argument("--enum", type=int, nargs="+", default=[6, 7, 8], help="ONU counts for enumeration, M = 5")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not kernels.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")
    rng = np.random.default_rng(args.seed)

    print(f"{'kernel':<12}{'size':>8}{'numpy s':>12}{'numba s':>12}{'speedup':>10}")
    for n in args.sizes:
        inst = TransportInstance.uniform(dense_problem(n, n, rng), 1)
        t = {b: best_time(lambda b=b: solve_strict(inst, backend=b), args.repeat) for b in ("numpy", "numba")}
        print(f"{'transport':<12}{n:>8}{t['numpy']:>12.5f}{t['numba']:>12.5f}{t['numpy'] / t['numba']:>10.1f}")
    for n in args.enum:
        p = dense_problem(n, 5, rng)
        t = {b: best_time(lambda b=b: exact_solve(p, prune=False, backend=b), args.repeat)
             for b in ("numpy", "numba")}
        print(f"{'enumerate':<12}{n:>8}{t['numpy']:>12.5f}{t['numba']:>12.5f}{t['numpy'] / t['numba']:>10.1f}")


if __name__ == "__main__":
    main()
