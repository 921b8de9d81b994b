"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]``/``[FAIL] criterion N`` line; the lines are
repeated in the pytest terminal summary. Run directly for the lines alone::

    python tests/test_acceptance.py
"""

from __future__ import annotations

import math
import os
import random
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

from oracles import binomial_sum_cdf, exact_success_dp, exact_success_enumeration

from confvote import _backend
from confvote.analytics import (
    GroundTruth,
    bound_report,
    convergence_bound,
    min_publish_over_competent,
    publish_probability,
    variance_budget,
)
from confvote.belief import BetaBelief, GateParams, confidence, gate
from confvote.montecarlo import SimConfig, simulate
from confvote.population import AgentSpec, Population, build_scenario, contrary_prior
from confvote.specialfn import reg_inc_beta

RESULTS: list[str] = []
ALL_KINDS = ("heterogeneous", "never_abstain", "contrary", "homogeneous")
N_GRID = tuple(range(10, 101, 10))
SEEDS3 = (101, 202, 303)


def record(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title} -- {detail}"
    print(line)
    RESULTS.append(line)
    assert ok, line


def sigma(p: float, n: int) -> float:
    return math.sqrt(p * (1.0 - p) / n)


def test_criterion_01_special_functions():
    start = time.perf_counter()
    worst = 0.0
    for a in range(1, 13):
        for b in range(1, 13):
            for i in range(1, 100):
                exact = binomial_sum_cdf(Fraction(i, 100), a, b)
                worst = max(worst, abs(reg_inc_beta(i / 100, a, b) - float(exact)))
    rng = random.Random(20240601)
    worst_sym = 0.0
    for _ in range(10_000):
        a = math.exp(rng.uniform(math.log(0.05), math.log(500.0)))
        b = math.exp(rng.uniform(math.log(0.05), math.log(500.0)))
        x = rng.randrange(1, 1 << 40) / (1 << 40)  # dyadic: 1 - x is exact
        worst_sym = max(worst_sym, abs(reg_inc_beta(x, a, b) + reg_inc_beta(1 - x, b, a) - 1))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and worst_sym <= 1e-11 and elapsed < 5.0
    record(1, "incomplete beta vs exact binomial sums and symmetry", ok,
           f"max oracle err {worst:.2e} (<=1e-12), max symmetry err {worst_sym:.2e} (<=1e-11), "
           f"{elapsed:.2f}s (<5s)")


def test_criterion_02_worked_example():
    c = confidence(BetaBelief(4, 3), 0.5)
    exact = 1 - binomial_sum_cdf(Fraction(1, 2), 4, 3)
    publishes = gate(BetaBelief(4, 3), GateParams(0.5, 0.5))
    abstains = not gate(BetaBelief(4, 3), GateParams(0.5, 0.75))
    ok = exact == Fraction(21, 32) and c == 0.65625 and abs(c - 0.65) < 0.01 and publishes and abstains
    record(2, "Beta(4,3) confidence and gate decisions", ok,
           f"C = {c!r} (exact {exact}), publish at tau=0.5: {publishes}, abstain at tau=0.75: {abstains}")


def test_criterion_03_publish_rates_match_analytic():
    start = time.perf_counter()
    pop = build_scenario("heterogeneous", 50, 20, 0.5, 0.5)
    runs = 2000
    classes = {p: publish_probability(next(a for a in pop.agents if a.p == p), 20).q for p in (0.35, 0.75)}
    passing = {p: 0 for p in classes}
    seeds = range(1000, 1020)
    for seed in seeds:
        rates = simulate(pop, SimConfig(runs, seed)).publish_rate_per_agent
        for p, q in classes.items():
            tol = 4 * sigma(q, runs)
            if all(abs(r - q) <= tol for a, r in zip(pop.agents, rates) if a.p == p):
                passing[p] += 1
    elapsed = time.perf_counter() - start
    ok = all(n >= 0.95 * len(seeds) for n in passing.values()) and elapsed < 30.0
    record(3, "empirical publish rates vs analytic q, heterogeneous pool", ok,
           ", ".join(f"p={p}: q={q:.6f}, {passing[p]}/20 seeds within 4 sigma for every agent"
                     for p, q in classes.items()) + f", {elapsed:.1f}s (<30s)")


def _dominance(ground_truth: GroundTruth):
    runs = 2000
    violations, worst, points = [], math.inf, 0
    for kind in ALL_KINDS:
        for n in N_GRID:
            pop = build_scenario(kind, n, 20, 0.5, 0.5)
            rep = bound_report(pop, ground_truth)
            for seed in SEEDS3:
                rate = simulate(pop, SimConfig(runs, seed, ground_truth)).empirical_success
                points += 1
                if ground_truth is GroundTruth.OMEGA_STAR:
                    lb = rep.success_lower_bound
                    gap = rate - (lb - 4 * sigma(lb, runs))
                else:
                    ub = rep.hallucination_upper_bound
                    gap = ub + 4 * sigma(ub, runs) - rate
                worst = min(worst, gap)
                if gap < 0:
                    violations.append((kind, n, seed))
    return violations, worst, points


def test_criterion_04_success_above_bound():
    violations, worst, points = _dominance(GroundTruth.OMEGA_STAR)
    record(4, "empirical success >= lower bound over N-sweep, 4 pools x 3 seeds", not violations,
           f"{len(violations)} violations in {points} points, smallest margin {worst:.4f}")


def test_criterion_05_hallucination_below_bound():
    violations, worst, points = _dominance(GroundTruth.OMEGA_DAGGER)
    record(5, "hallucination rate <= upper bound over N-sweep, 4 pools x 3 seeds", not violations,
           f"{len(violations)} violations in {points} points, smallest margin {worst:.4f}")


def test_criterion_06_gating_beats_baseline():
    cfg = SimConfig(2000, 0)
    pools = {k: build_scenario(k, 50, 20, 0.5, 0.5) for k in ("heterogeneous", "never_abstain", "contrary")}
    emp = {k: simulate(p, cfg).empirical_success for k, p in pools.items()}
    lb = {k: bound_report(p).success_lower_bound for k, p in pools.items()}
    ok = (emp["heterogeneous"] > emp["never_abstain"] and lb["heterogeneous"] > lb["never_abstain"]
          and emp["contrary"] > emp["never_abstain"])
    record(6, "gated pools beat never-abstain at N=50, T=20, tau=0.5", ok,
           "empirical " + ", ".join(f"{k}={v}" for k, v in emp.items())
           + "; bounds " + ", ".join(f"{k}={v:.4f}" for k, v in lb.items()))


def test_criterion_07_high_threshold_degrades():
    from confvote.cli import DEFAULT_GRIDS

    cfg = SimConfig(2000, 0)
    grid = DEFAULT_GRIDS["tau"]
    het, base = [], []
    for tau in grid:
        het.append(simulate(build_scenario("heterogeneous", 50, 20, tau, 0.5), cfg).empirical_success)
        base.append(simulate(build_scenario("never_abstain", 50, 20, tau, 0.5), cfg).empirical_success)
    # smallest grid tau from which the gated pool stays below the baseline
    crossover = None
    for i in range(len(grid) - 1, -1, -1):
        if het[i] < base[i]:
            crossover = grid[i]
        else:
            break
    flat = max(base) - min(base)
    ok = crossover is not None and flat <= 4 * sigma(0.5, 2000)
    tail = ", ".join(f"tau={t}: {h} vs {b}" for t, h, b in zip(grid, het, base) if t >= 0.95)
    record(7, "gated heterogeneous success falls below never-abstain at high tau", ok,
           f"below baseline for all tau >= {crossover}; baseline spread {flat:.4f}; {tail}")


def _small_pools():
    forced = GateParams(0.5, 0.5, force_publish=True)
    uniform = BetaBelief(1, 1)
    for T in (2, 3, 4):
        for n in (1, 3):
            yield f"homogeneous N={n} T={T}", build_scenario("homogeneous", n, T, 0.5, 0.5).agents, T
            yield f"forced N={n} T={T}", (AgentSpec(0.55, uniform, forced),) * n, T
        mixed = (AgentSpec(0.35, uniform, GateParams(0.5, 0.5)),
                 AgentSpec(0.75, contrary_prior(0.75, 8, 1e-6), GateParams(0.5, 0.3)),
                 AgentSpec(0.9, uniform, GateParams(0.6, 0.4)))
        yield f"mixed N=3 T={T}", mixed, T
        yield f"mixed N=1 T={T}", mixed[1:2], T


def test_criterion_08_exact_enumeration():
    start = time.perf_counter()
    runs = 20_000
    failures, worst_z, cases = [], 0.0, 0
    for label, agents, T in _small_pools():
        exact = exact_success_enumeration(agents, T)
        assert abs(exact - exact_success_dp(agents, T)) < 1e-12
        emp = simulate(Population(tuple(agents), T), SimConfig(runs, 4242)).empirical_success
        s = sigma(exact, runs)
        z = abs(emp - exact) / s if s > 0 else (0.0 if emp == exact else math.inf)
        worst_z = max(worst_z, z)
        cases += 1
        if z > 4:
            failures.append(label)
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 60.0
    record(8, "simulation vs exhaustive enumeration, N in {1,3}, T in {2,3,4}", ok,
           f"{cases} pools, largest |z| {worst_z:.2f} (<=4), {elapsed:.1f}s (<60s)")


def _het(n):
    return build_scenario("heterogeneous", n, 20, 0.5, 0.5)


def test_criterion_09_convergence():
    delta_p = 0.05
    q_min = min_publish_over_competent(_het(10))
    checks = []
    for n in (10, 50, 100, 500):
        pop = _het(n)
        checks.append((n, convergence_bound(pop, q_min, delta_p), bound_report(pop).success_lower_bound))
    ordered = all(cb <= lb for _, cb, lb in checks)
    # closed-form N at which the convergence bound passes 0.99, rounded up to an even pool
    n99 = math.ceil(23 * math.log(100) / (2 * delta_p**2 * q_min**2)) + 1
    n99 += n99 % 2
    cb99 = convergence_bound(_het(n99), q_min, delta_p)
    below = convergence_bound(_het(n99 - 4), q_min, delta_p)
    # smallest even N whose success lower bound exceeds 0.999
    hi = 2
    while bound_report(_het(hi)).success_lower_bound <= 0.999:
        hi *= 2
    lo = hi // 2
    while hi - lo > 2:
        mid = (lo + hi) // 2
        mid -= mid % 2
        if bound_report(_het(mid)).success_lower_bound > 0.999:
            hi = mid
        else:
            lo = mid
    lb_hi = bound_report(_het(hi)).success_lower_bound
    ok = ordered and cb99 > 0.99 and below <= 0.99 and lb_hi > 0.999
    record(9, "large-N convergence bound", ok,
           "conv <= lb at " + ", ".join(f"N={n}: {cb:.4f}<={lb:.4f}" for n, cb, lb in checks)
           + f"; q_min={q_min:.6f}; conv={cb99:.5f} > 0.99 from N={n99}; lb={lb_hi:.5f} > 0.999 from N={hi}")


def test_criterion_10_variance_budget():
    cases = [(build_scenario(k, n, t, 0.5, 0.5), t) for k in ALL_KINDS for n in (2, 50, 100) for t in (2, 20, 77)]
    rng = random.Random(9)
    for _ in range(50):
        ps = [rng.random() for _ in range(rng.randrange(1, 40))]
        t = rng.randrange(2, 100)
        agents = tuple(AgentSpec(p, BetaBelief(1, 1), GateParams(0.5, 0.5)) for p in ps)
        cases.append((Population(agents, t), t))
    mismatches = 0
    for pop, t in cases:
        # second path: exact rational sum of the per-agent terms, rounded once
        terms = [Fraction((t - 1) * (2 * a.p - 1) ** 2 + 4) for a in pop.agents]
        if variance_budget(pop) != float(sum(terms)) or bound_report(pop).variance_budget != float(sum(terms)):
            mismatches += 1
    record(10, "variance budget vs independent recomputation", mismatches == 0,
           f"{mismatches} mismatches over {len(cases)} pools (exact equality)")


def _cli(args, env_extra=None):
    env = dict(os.environ)
    env.update(env_extra or {})
    src = str(Path(__file__).resolve().parents[1] / "src")
    env["PYTHONPATH"] = src + os.pathsep + env.get("PYTHONPATH", "")
    subprocess.run([sys.executable, "-m", "confvote", *args], check=True, env=env)


def test_criterion_11_determinism(tmp_path):
    config = tmp_path / "exp.toml"
    config.write_text(
        'schema_version = 1\nsweep = { axis = "N", values = [10, 30, 50] }\n'
        "horizon_T = 20\ntau = 0.5\nruns = 500\nseed = 31337\n")
    variants = [("first", "1", {}), ("second", "1", {}), ("threaded", "4", {})]
    if len(_backend.available()) > 1:
        variants.append(("pure-python", "2", {"CONFVOTE_PURE_PYTHON": "1"}))
    blobs = {}
    for name, workers, env in variants:
        out = tmp_path / f"{name}.csv"
        _cli(["sweep", "--config", str(config), "--workers", workers, "--out", str(out)], env)
        blobs[name] = out.read_bytes()
    ok = len(set(blobs.values())) == 1
    record(11, "byte-identical CSV across executions and parallelism", ok,
           f"{len(blobs)} outputs ({', '.join(blobs)}), {len(blobs['first'])} bytes each, "
           f"{'identical' if ok else 'DIFFERENT'}")


if __name__ == "__main__":
    import tempfile

    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                if "tmp_path" in fn.__code__.co_varnames[: fn.__code__.co_argcount]:
                    with tempfile.TemporaryDirectory() as d:
                        fn(Path(d))
                else:
                    fn()
            except AssertionError:
                pass
    sys.exit(0 if all(line.startswith("[PASS]") for line in RESULTS) else 1)
