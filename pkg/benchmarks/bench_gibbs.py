"""Toggle throughput of the compiled and pure-Python Gibbs kernels.

Usage: python benchmarks/bench_gibbs.py [--n 16] [--toggles 200000]
"""

import argparse
import time

import numpy as np

from sergm import kernels
from sergm.sampler import GibbsModel, stream
from sergm.statistics import ModelSpec, PeriodContext, Term, TermKind


def model(n: int):
    spec = ModelSpec([
        TermKind.EdgesPos, TermKind.EdgesNeg,
        Term(TermKind.GWESFPos, alpha=1.5), Term(TermKind.GWESFNeg, alpha=1.5),
        Term(TermKind.GWESEPos, alpha=1.5), Term(TermKind.GWESENeg, alpha=1.5),
        Term(TermKind.GWDPos, alpha=1.5), TermKind.IsolatesNeg,
    ])
    theta = np.array([-1.0, -1.2, 0.3, -0.2, 0.2, 0.1, -0.3, 0.2])
    return GibbsModel(spec, theta, PeriodContext(spec, n))


def time_backend(name: str, n: int, toggles: int, repeats: int) -> tuple[float, np.ndarray]:
    gm = model(n)
    best = np.inf
    final = None
    for _ in range(repeats):
        Y = np.zeros((n, n), dtype=np.int8)
        rng = stream(0, "simulate")
        t0 = time.perf_counter()
        states, _ = gm.run(Y, rng, toggles, 1, 1, backend=name)
        best = min(best, time.perf_counter() - t0)
        final = states[0]
    return best, final


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=16)
    ap.add_argument("--toggles", type=int, default=200_000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    results = {}
    for name in sorted(kernels.BACKENDS):
        # the pure-Python loop is slow; give it fewer toggles and scale
        toggles = args.toggles if name != "python" else max(args.toggles // 20, 1000)
        secs, final = time_backend(name, args.n, toggles, args.repeats)
        results[name] = (secs / toggles, toggles, final)
        print(f"{name:>7}: {toggles / secs:14,.0f} toggles/s  ({1e9 * secs / toggles:8.1f} ns/toggle)")

    if "cython" in results and "python" in results:
        print(f"speedup: {results['python'][0] / results['cython'][0]:.1f}x")
        t = results["python"][1]
        _, a = time_backend("cython", args.n, t, 1)
        _, b = time_backend("python", args.n, t, 1)
        print("identical chains at equal toggles:", bool(np.array_equal(a, b)))


if __name__ == "__main__":
    main()
