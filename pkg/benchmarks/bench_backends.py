"""Time the compiled and pure-Python kernels on the same workloads.

    python benchmarks/bench_backends.py [--repeat 5] [--runs 2000]
"""

from __future__ import annotations

import argparse
import random
import time

from confvote import _backend
from confvote.montecarlo import _agent_arrays
from confvote.population import build_scenario

TOL, MAXIT = 1e-15, 10_000


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def workloads(runs: int):
    rng = random.Random(0)
    triples = [(rng.random(), rng.uniform(0.5, 80), rng.uniform(0.5, 80)) for _ in range(20_000)]
    pop = build_scenario("heterogeneous", 50, 20, 0.5, 0.5)
    arrays = _agent_arrays(pop)

    def inc_beta(k):
        return lambda: [k.reg_inc_beta(x, a, b, TOL, MAXIT) for x, a, b in triples]

    def philox(k):
        return lambda: k.philox_uniforms(7, 0, runs, 1000)

    def sim(k):
        return lambda: k.simulate_block(7, 0, runs, *arrays, 20, 1, TOL, MAXIT)

    return [
        ("reg_inc_beta x 20000", inc_beta),
        (f"philox {runs} x 1000 uniforms", philox),
        (f"simulate N=50 T=20, {runs} runs", sim),
    ]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--runs", type=int, default=2000)
    args = ap.parse_args()

    names = _backend.available()
    kernels = {n: _backend.load(n) for n in names}
    print(f"{'workload':34s}" + "".join(f"{n:>12s}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for label, make in workloads(args.runs):
        secs = {n: best_of(make(k), args.repeat) for n, k in kernels.items()}
        line = f"{label:34s}" + "".join(f"{secs[n] * 1e3:10.1f}ms" for n in names)
        if len(names) > 1:
            line += f"{secs['python'] / secs['cython']:11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
